"""Bandwidth and threshold selection.

Theory-rate defaults scale as ``(T n)^(-1/(2r+d))`` for the bandwidths; the
data-driven choice is an even/odd split: change-points are estimated on the
even-indexed snapshots for every candidate ``(h, tau)`` and scored by the
squared prediction error of segment-wise mean estimates on the odd-indexed
snapshots.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .detector import Detector, FsbsParams, default_eval_point_count, sample_eval_points
from .estimator import DEFAULT_DENSITY_FLOOR, mean_matrix, prefix_sum
from .kernels import KernelSpec
from .panel import FunctionalPanel, split_even_odd
from .seeded import DEFAULT_CK, generate

LOSS_SOURCES = ("train", "validation")


def default_bandwidths(
    T: int, n: int, d: int, r: float = 2.0, c_h: float = 1.0, c_hbar: float = 1.0
) -> tuple[float, float]:
    base = (T * n) ** (-1.0 / (2.0 * r + d))
    return c_h * base, c_hbar * base


def tau_rate(T: int, n: int, d: int, r: float = 2.0, c_tau: float = 1.0) -> float:
    """Threshold rate with sub-Gaussian log exponent 1/2."""
    a = 2.0 * r + d
    return c_tau * math.sqrt(math.log(T)) * math.sqrt(1.0 + T ** (d / a) * n ** (-2.0 * r / a))


def plugin_bandwidth(panel: FunctionalPanel) -> float:
    """Normal-reference density bandwidth, made isotropic by a geometric mean.

    ``sigma_j (4 / ((d + 2) N))^(1/(d+4))`` per coordinate, ``N = T n``.
    """
    locs = panel.locations()
    N, d = locs.shape
    sd = locs.std(axis=0, ddof=1) if N > 1 else np.ones(d)
    sd = np.where(sd > 0, sd, 1.0)
    per_coord = sd * (4.0 / ((d + 2.0) * N)) ** (1.0 / (d + 4.0))
    return float(np.exp(np.mean(np.log(per_coord))))


@dataclass(frozen=True)
class TuningGrid:
    h_candidates: tuple[float, ...]
    tau_candidates: tuple[float, ...]
    r: float = 2.0

    def __post_init__(self):
        for name in ("h_candidates", "tau_candidates"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must be non-empty")
            if list(vals) != sorted(vals):
                raise ValueError(f"{name} must be sorted ascending")
            object.__setattr__(self, name, vals)
        if self.h_candidates[0] <= 0:
            raise ValueError("bandwidth candidates must be positive")
        if self.tau_candidates[0] < 0:
            raise ValueError("threshold candidates must be non-negative")

    def pairs(self):
        for h in self.h_candidates:
            for tau in self.tau_candidates:
                yield h, tau


def _geometric(center: float, size: int, log2_span: float) -> tuple[float, ...]:
    if size < 1:
        raise ValueError("grid size must be >= 1")
    if size == 1:
        return (center,)
    return tuple(center * 2.0 ** np.linspace(-log2_span, log2_span, size))


def candidate_grid(
    T: int,
    n: int,
    d: int,
    r: float = 2.0,
    sizes: tuple[int, int] = (7, 10),
    h_log2_span: float = 2.0,
    tau_log2_span: float = 4.0,
) -> TuningGrid:
    h0, _ = default_bandwidths(T, n, d, r)
    return TuningGrid(
        _geometric(h0, sizes[0], h_log2_span),
        _geometric(tau_rate(T, n, d, r), sizes[1], tau_log2_span),
        r,
    )


def _segment_bounds(cps: Sequence[int], T: int) -> np.ndarray:
    """Segment edges 0 < cps... < T, with cps clipped into the panel."""
    inner = sorted({min(max(int(c), 0), T) for c in cps} - {0, T})
    return np.array([0, *inner, T], dtype=np.int64)


class ValidationScorer:
    """Squared-error loss of segment-mean predictions on a validation panel.

    The segment means are averages of the kernel mean estimates ``F_t``
    computed on ``source`` (the training panel by default, or the validation
    panel itself) and evaluated at each validation location.  Change-points
    are given on the training clock; index ``j`` there maps to index ``j`` on
    the validation clock.
    """

    def __init__(
        self,
        train: FunctionalPanel,
        validation: FunctionalPanel,
        h: float,
        hbar: float,
        kernel: str = "gaussian",
        source: str = "train",
        density_floor: float = DEFAULT_DENSITY_FLOOR,
    ):
        if source not in LOSS_SOURCES:
            raise ValueError(f"unknown loss source {source!r}; choose from {LOSS_SOURCES}")
        self.validation = validation
        self.src = train if source == "train" else validation
        spec = KernelSpec(kernel, validation.d)
        locs = validation.locations()
        uniq, inverse = np.unique(locs, axis=0, return_inverse=True)
        F, _ = mean_matrix(self.src, spec, h, uniq, hbar=hbar, floor=density_floor)
        # prefix over source time for each validation observation, (T_v, n, T_s + 1)
        pref = prefix_sum(F)[inverse.reshape(-1)]
        self._prefix = pref.reshape(validation.T, validation.n, self.src.T + 1)

    def loss(self, cps: Sequence[int]) -> float:
        V, S = self.validation, self.src
        edges_v = _segment_bounds(cps, V.T)
        edges_s = _segment_bounds(cps, S.T)
        if len(edges_s) != len(edges_v):
            raise ValueError("change points must lie strictly inside both panels")
        total = 0.0
        for k in range(len(edges_v) - 1):
            a, b = edges_v[k], edges_v[k + 1]
            lo, hi = edges_s[k], edges_s[k + 1]
            if b <= a or hi <= lo:
                continue
            p = self._prefix[a:b]
            avg = (p[:, :, hi] - p[:, :, lo]) / (hi - lo)
            total += float(np.sum((avg - V.y[a:b]) ** 2))
        return total


def validation_loss(
    cps: Sequence[int],
    train: FunctionalPanel,
    validation: FunctionalPanel,
    h: float,
    hbar: float,
    kernel: str = "gaussian",
    source: str = "train",
) -> float:
    if any(not 0 < c < train.T for c in cps):
        raise ValueError("change points must lie strictly inside (0, train.T)")
    return ValidationScorer(train, validation, h, hbar, kernel, source).loss(cps)


@dataclass(frozen=True)
class LossRow:
    h: float
    tau: float
    loss: float
    K_hat: int


@dataclass(frozen=True)
class CVResult:
    h: float
    hbar: float
    tau: float
    table: list[LossRow] = field(repr=False)

    def write_table(self, stream: IO[str]) -> None:
        write_loss_table(self.table, stream)


def write_loss_table(rows: Sequence[LossRow], stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["h", "tau", "loss", "K_hat"])
    for row in rows:
        w.writerow([repr(row.h), repr(row.tau), repr(row.loss), row.K_hat])


def cross_validate(
    panel: FunctionalPanel,
    grid: TuningGrid,
    depth_mode: str = "full",
    seed: int = 0,
    kernel: str = "gaussian",
    hbar: float | None = None,
    ck: float = DEFAULT_CK,
    source: str = "train",
    density_floor: float = DEFAULT_DENSITY_FLOOR,
) -> CVResult:
    """Pick ``(h, tau)`` minimising the even/odd validation loss.

    ``hbar=None`` ties the density bandwidth to each candidate ``h``.  Ties
    in the loss go to the smaller ``tau``, then the smaller ``h``.
    """
    if panel.T < 4:
        raise ValueError(f"cross-validation needs T >= 4, got T={panel.T}")
    train, val = split_even_odd(panel)
    intervals = generate(train.T, depth_mode, ck)
    count = min(default_eval_point_count(train.T), train.T * train.n)
    points = sample_eval_points(train, count, np.random.default_rng(seed))

    rows: list[LossRow] = []
    for h in grid.h_candidates:
        hb = h if hbar is None else hbar
        params = FsbsParams(h, hb, 0.0, kernel, depth_mode, ck, seed=seed, density_floor=density_floor)
        det = Detector(train, params, intervals, points)
        scorer = ValidationScorer(train, val, h, hb, kernel, source, density_floor)
        for tau in grid.tau_candidates:
            cps = det.run(tau).change_points
            rows.append(LossRow(h, tau, scorer.loss(cps), len(cps)))
    best = min(rows, key=lambda r: (r.loss, r.tau, r.h))
    return CVResult(best.h, best.h if hbar is None else hbar, best.tau, rows)
