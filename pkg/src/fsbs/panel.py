"""Discretely observed functional time series and CSV ingestion."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterator, NamedTuple

import numpy as np


class PanelError(ValueError):
    """Raised when panel data is malformed or violates an invariant."""


class Snapshot(NamedTuple):
    t: int
    x: np.ndarray  # (n, d)
    y: np.ndarray  # (n,)


@dataclass(frozen=True)
class FunctionalPanel:
    """T snapshots of n noisy evaluations y at locations x in [0, 1]^d.

    ``times`` holds the 1-based index of each snapshot in the panel it was
    derived from (identity for freshly loaded data).
    """

    x: np.ndarray
    y: np.ndarray
    times: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if x.ndim == 2:
            x = x[:, :, None]
        if x.ndim != 3 or y.ndim != 2 or x.shape[:2] != y.shape:
            raise PanelError(
                f"shape mismatch: x {x.shape} is not (T, n, d) matching y {y.shape}"
            )
        T, n, d = x.shape
        if T < 1 or n < 1 or d < 1:
            raise PanelError("panel needs T >= 1, n >= 1, d >= 1")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise PanelError("non-finite values in panel")
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise PanelError("grid coordinates must lie in [0, 1]")
        times = self.times
        if times is None:
            times = np.arange(1, T + 1)
        times = np.asarray(times, dtype=np.int64)
        if times.shape != (T,):
            raise PanelError("times must have one entry per snapshot")
        x.setflags(write=False)
        y.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "times", times)

    @property
    def T(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def d(self) -> int:
        return self.x.shape[2]

    def snapshot(self, t: int) -> Snapshot:
        """Snapshot at 1-based time ``t``."""
        if not 1 <= t <= self.T:
            raise IndexError(f"t={t} outside 1..{self.T}")
        return Snapshot(t, self.x[t - 1], self.y[t - 1])

    def snapshots(self) -> Iterator[Snapshot]:
        for t in range(1, self.T + 1):
            yield self.snapshot(t)

    def locations(self) -> np.ndarray:
        """All T*n grid points as a (T*n, d) array, time-major."""
        return self.x.reshape(-1, self.d)


def _header(d: int) -> list[str]:
    return ["t", "i", *(f"x{j}" for j in range(1, d + 1)), "y"]


def load_panel(stream: IO[str] | IO[bytes] | str, d: int, rescale: bool = False) -> FunctionalPanel:
    """Read a panel from CSV with header ``t,i,x1,...,xd,y``.

    Rows may appear in any order; within a time index they are ordered by
    ``i``.  Coordinates outside [0, 1] are min-max rescaled per coordinate
    when ``rescale`` is set and rejected otherwise.
    """
    if d < 1:
        raise PanelError("d must be >= 1")
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    text = stream.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise PanelError("empty input") from None
    expected = _header(d)
    if [h.strip() for h in header] != expected:
        raise PanelError(f"row 1: header {header!r} does not match {','.join(expected)}")

    groups: dict[int, list[tuple[int, list[float], float, int]]] = {}
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d + 3:
            raise PanelError(f"row {rowno}: expected {d + 3} fields, got {len(row)}")
        try:
            t = int(row[0])
            i = int(row[1])
            vals = [float(c) for c in row[2:]]
        except ValueError as exc:
            raise PanelError(f"row {rowno}: malformed value ({exc})") from None
        if not all(math.isfinite(v) for v in vals):
            raise PanelError(f"row {rowno}: non-finite value")
        groups.setdefault(t, []).append((i, vals[:d], vals[d], rowno))

    if not groups:
        raise PanelError("no data rows")
    ts = sorted(groups)
    if ts != list(range(1, len(ts) + 1)):
        missing = sorted(set(range(1, ts[-1] + 1)) - set(ts))
        raise PanelError(f"non-contiguous t: expected 1..{ts[-1]}, missing {missing[:5]}")
    n = len(groups[1])
    for t in ts:
        rows = groups[t]
        if len(rows) != n:
            raise PanelError(
                f"row {rows[0][3]}: inconsistent n: t=1 has {n} points, t={t} has {len(rows)}"
            )
        rows.sort(key=lambda r: r[0])
        idx = [r[0] for r in rows]
        if len(set(idx)) != len(idx):
            raise PanelError(f"row {rows[0][3]}: duplicate i within t={t}")

    x = np.array([[r[1] for r in groups[t]] for t in ts], dtype=np.float64)
    y = np.array([[r[2] for r in groups[t]] for t in ts], dtype=np.float64)
    if np.any(x < 0.0) or np.any(x > 1.0):
        if not rescale:
            raise PanelError("coordinates outside [0, 1]; pass rescale=True to min-max rescale")
        lo = x.min(axis=(0, 1))
        span = x.max(axis=(0, 1)) - lo
        span[span == 0] = 1.0
        x = np.clip((x - lo) / span, 0.0, 1.0)
    return FunctionalPanel(x, y)


def write_panel(panel: FunctionalPanel, stream: IO[str]) -> None:
    """Write ``panel`` in the CSV format read by :func:`load_panel`.

    Floats are written with ``repr`` so a round trip is exact.
    """
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(_header(panel.d))
    for t in range(panel.T):
        for i in range(panel.n):
            w.writerow([t + 1, i + 1, *map(repr, panel.x[t, i].tolist()), repr(float(panel.y[t, i]))])


def panel_to_csv(panel: FunctionalPanel) -> str:
    buf = io.StringIO()
    write_panel(panel, buf)
    return buf.getvalue()


def split_even_odd(panel: FunctionalPanel) -> tuple[FunctionalPanel, FunctionalPanel]:
    """Split into (train, validation) = (even-indexed, odd-indexed) snapshots.

    Both halves are re-indexed from 1; ``times`` keeps the original indices.
    """
    if panel.T < 2:
        raise PanelError(f"need T >= 2 to split, got T={panel.T}")
    even = slice(1, None, 2)
    odd = slice(0, None, 2)
    train = FunctionalPanel(panel.x[even], panel.y[even], panel.times[even])
    validation = FunctionalPanel(panel.x[odd], panel.y[odd], panel.times[odd])
    return train, validation
