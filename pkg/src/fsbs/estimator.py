"""Kernel density and mean estimators, and the prefix-sum CUSUM engine."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import numpy as np

from .kernels import KernelSpec
from .panel import FunctionalPanel

DEFAULT_DENSITY_FLOOR = 1e-3

# Upper bound on kernel-matrix entries materialised at once.
_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class DensityField:
    """Kernel estimate of the sampling density, clamped below at ``floor``."""

    spec: KernelSpec
    hbar: float
    source: FunctionalPanel
    floor: float = DEFAULT_DENSITY_FLOOR

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("density bandwidth hbar must be positive")
        if not self.floor > 0:
            raise ValueError("density floor must be positive")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Density estimates at ``points`` of shape (P, d)."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.spec.d)
        locs = self.source.locations()
        out = np.empty(len(points))
        step = max(1, _CHUNK_ENTRIES // len(locs))
        for lo in range(0, len(points), step):
            k = self.spec.pairwise(self.hbar, points[lo : lo + step], locs)
            out[lo : lo + step] = k.mean(axis=1)
        return np.maximum(out, self.floor)


def density_estimate(field: DensityField, x) -> float:
    return float(field(np.atleast_1d(np.asarray(x, dtype=np.float64)))[0])


def _kernel_sums(
    panel: FunctionalPanel, spec: KernelSpec, h: float, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Row means of ``K_h(u_p - x_ti)`` over all (t, i), and per-time sums of
    ``y_ti K_h(u_p - x_ti)`` with shape (P, T)."""
    T, n = panel.T, panel.n
    locs = panel.locations()
    yflat = panel.y.reshape(-1)
    means = np.empty(len(points))
    sums = np.empty((len(points), T))
    step = max(1, _CHUNK_ENTRIES // len(locs))
    for lo in range(0, len(points), step):
        k = spec.pairwise(h, points[lo : lo + step], locs)
        means[lo : lo + step] = k.mean(axis=1)
        k *= yflat
        sums[lo : lo + step] = k.reshape(len(k), T, n).sum(axis=2)
    return means, sums


def mean_matrix(
    panel: FunctionalPanel,
    spec: KernelSpec,
    h: float,
    points: np.ndarray,
    density: np.ndarray | None = None,
    hbar: float | None = None,
    floor: float = DEFAULT_DENSITY_FLOOR,
) -> tuple[np.ndarray, np.ndarray]:
    """``F[p, t] = sum_i y_ti K_h(u_p - x_ti) / (n * density[p])`` for t = 1..T.

    Returns ``(F, density)`` with F of shape (P, T); column ``t - 1`` holds
    time ``t``.  Without an explicit ``density`` it is estimated from
    ``panel`` with bandwidth ``hbar`` (default ``h``); when the two
    bandwidths coincide one kernel pass serves both estimates.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, spec.d)
    hbar = h if hbar is None else hbar
    means, sums = _kernel_sums(panel, spec, h, points)
    if density is None:
        if hbar == h:
            density = np.maximum(means, floor)
        else:
            density = DensityField(spec, hbar, panel, floor)(points)
    density = np.asarray(density, dtype=np.float64)
    return sums / (panel.n * density[:, None]), density


def mean_estimate(panel: FunctionalPanel, field: DensityField, h: float, t: int, x) -> float:
    """Kernel estimate of the mean function at time ``t`` (1-based), location ``x``."""
    if not 1 <= t <= panel.T:
        raise IndexError(f"t={t} outside 1..{panel.T}")
    if not h > 0:
        raise ValueError("bandwidth h must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64)).reshape(1, -1)
    snap = panel.snapshot(t)
    k = field.spec.pairwise(h, x, snap.x)[0]
    return float(k @ snap.y / (panel.n * field(x)[0]))


def prefix_sum(values: np.ndarray, block: int = 1024) -> np.ndarray:
    """Cumulative sums along the last axis with a leading zero column.

    Sums are accumulated in blocks and the block totals cumulated
    separately, so rounding error grows like ``block + T / block`` rather
    than ``T``.
    """
    values = np.asarray(values, dtype=np.float64)
    T = values.shape[-1]
    out = np.zeros(values.shape[:-1] + (T + 1,))
    if T <= block:
        np.cumsum(values, axis=-1, out=out[..., 1:])
        return out
    nb = -(-T // block)
    padded = np.zeros(values.shape[:-1] + (nb * block,))
    padded[..., :T] = values
    blocks = padded.reshape(values.shape[:-1] + (nb, block))
    within = np.cumsum(blocks, axis=-1)
    offsets = np.concatenate(
        [np.zeros(values.shape[:-1] + (1,)), np.cumsum(within[..., -1], axis=-1)[..., :-1]],
        axis=-1,
    )
    out[..., 1:] = (within + offsets[..., None]).reshape(values.shape[:-1] + (nb * block,))[..., :T]
    return out


@dataclass(frozen=True)
class EvalCache:
    """Prefix sums of the mean estimates at a fixed set of evaluation points.

    ``prefix[m, t] = F_1(u_m) + ... + F_t(u_m)`` with ``prefix[m, 0] = 0``.
    """

    points: np.ndarray
    h: float
    prefix: np.ndarray
    density_at_points: np.ndarray

    @property
    def M(self) -> int:
        return self.prefix.shape[0]

    @property
    def T(self) -> int:
        return self.prefix.shape[1] - 1

    def values(self) -> np.ndarray:
        """Recover the per-time estimates F as an (M, T) array."""
        return np.diff(self.prefix, axis=1)

    def dump_csv(self, stream: IO[str]) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["m", "t", "F"])
        F = self.values()
        for m in range(self.M):
            for t in range(self.T):
                w.writerow([m + 1, t + 1, repr(float(F[m, t]))])


def build_eval_cache(
    panel: FunctionalPanel, field: DensityField, h: float, points: np.ndarray
) -> EvalCache:
    points = np.asarray(points, dtype=np.float64).reshape(-1, panel.d)
    if len(points) == 0:
        raise ValueError("no evaluation points")
    if not h > 0:
        raise ValueError("bandwidth h must be positive")
    if field.source is panel:
        F, density = mean_matrix(panel, field.spec, h, points, hbar=field.hbar, floor=field.floor)
    else:
        F, density = mean_matrix(panel, field.spec, h, points, field(points))
    return EvalCache(points, float(h), prefix_sum(F), density)


def _check_order(s: int, t: int, e: int, T: int) -> None:
    if not 0 <= s < t < e <= T:
        raise ValueError(f"need 0 <= s < t < e <= T, got s={s}, t={t}, e={e}, T={T}")


def cusum(cache: EvalCache, m: int, s: int, e: int, t: int) -> float:
    """CUSUM of the mean estimates at point ``m`` over (s, e], split after ``t``."""
    _check_order(s, t, e, cache.T)
    p = cache.prefix[m]
    return float(
        np.sqrt((e - t) / ((e - s) * (t - s))) * (p[t] - p[s])
        - np.sqrt((t - s) / ((e - s) * (e - t))) * (p[e] - p[t])
    )


def cusum_curve(prefix: np.ndarray, s: int, e: int, ts: np.ndarray) -> np.ndarray:
    """Vectorised CUSUM over split points ``ts`` for every row of ``prefix``."""
    ts = np.asarray(ts)
    left = ts - s
    right = e - ts
    length = e - s
    before = prefix[..., ts] - prefix[..., s, None]
    after = prefix[..., e, None] - prefix[..., ts]
    return np.sqrt(right / (length * left)) * before - np.sqrt(left / (length * right)) * after
