"""Scoring estimated change-point sets against the truth."""

from __future__ import annotations

import csv
from dataclasses import astuple, dataclass, fields
from typing import IO, Iterable, Sequence

import numpy as np


def hausdorff(est: Sequence[int], truth: Sequence[int], T: int) -> float:
    """Two-sided Hausdorff distance; ``T`` when exactly one of the sets is empty."""
    a = np.asarray(sorted(est), dtype=np.float64)
    b = np.asarray(sorted(truth), dtype=np.float64)
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return float(T)
    dist = np.abs(a[:, None] - b[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def k_diff(est: Sequence[int], truth: Sequence[int]) -> int:
    return abs(len(est) - len(truth))


@dataclass(frozen=True)
class EvalRecord:
    K_true: int
    K_hat: int
    hausdorff: float

    @property
    def under(self) -> bool:
        return self.K_hat < self.K_true

    @property
    def exact(self) -> bool:
        return self.K_hat == self.K_true

    @property
    def over(self) -> bool:
        return self.K_hat > self.K_true

    @property
    def abs_kdiff(self) -> int:
        return abs(self.K_hat - self.K_true)


def evaluate(est: Sequence[int], truth: Sequence[int], T: int) -> EvalRecord:
    return EvalRecord(len(truth), len(est), hausdorff(est, truth, T))


@dataclass(frozen=True)
class SummaryRow:
    """One row of the per-method results table.

    ``p_under`` is the share of runs with fewer estimated than true
    change-points, ``p_over`` the share with more.
    """

    model: str
    p_under: float
    p_exact: float
    p_over: float
    mean_abs_kdiff: float
    mean_hausdorff: float
    sd_abs_kdiff: float
    sd_hausdorff: float


SUMMARY_COLUMNS = tuple(f.name for f in fields(SummaryRow))


def summarize(records: Iterable[EvalRecord], model: str = "FSBS") -> SummaryRow:
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    kd = np.array([r.abs_kdiff for r in records], dtype=np.float64)
    hd = np.array([r.hausdorff for r in records], dtype=np.float64)
    return SummaryRow(
        model=model,
        p_under=float(np.mean([r.under for r in records])),
        p_exact=float(np.mean([r.exact for r in records])),
        p_over=float(np.mean([r.over for r in records])),
        mean_abs_kdiff=float(kd.mean()),
        mean_hausdorff=float(hd.mean()),
        sd_abs_kdiff=float(kd.std()),
        sd_hausdorff=float(hd.std()),
    )


def write_summary_csv(rows: Iterable[SummaryRow], stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow([row.model, *(repr(v) for v in astuple(row)[1:])])
