"""Functional seeded binary segmentation.

Evaluation points are sampled once from the observed grid; every seeded
interval is scanned once for its trimmed CUSUM maximum at every evaluation
point, and the recursion then only has to pick, among intervals inside the
current segment, the largest maximum.  Because the per-interval maxima do
not depend on the threshold, one :class:`Detector` can be queried for many
thresholds at the cost of the recursion alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .estimator import DEFAULT_DENSITY_FLOOR, DensityField, EvalCache, build_eval_cache, cusum_curve
from .kernels import KernelSpec
from .panel import FunctionalPanel
from .seeded import DEFAULT_CK, SeededInterval, SeededIntervalSet, generate


@dataclass(frozen=True)
class FsbsParams:
    h: float
    hbar: float
    tau: float
    kernel: str = "gaussian"
    depth_mode: str = "full"
    ck: float = DEFAULT_CK
    n_eval_points: int | None = None  # default ceil(ln T)
    seed: int = 0
    density_floor: float = DEFAULT_DENSITY_FLOOR

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not self.tau >= 0:
            raise ValueError("tau must be non-negative")

    def with_tau(self, tau: float) -> "FsbsParams":
        return replace(self, tau=tau)


@dataclass(frozen=True)
class Detection:
    location: int
    score: float
    interval: SeededInterval
    eval_point_index: int
    recursion_depth: int

    def to_dict(self) -> dict:
        return {
            "t": self.location,
            "score": self.score,
            "interval": [self.interval.s, self.interval.e],
            "m": self.eval_point_index,
            "depth": self.recursion_depth,
        }


@dataclass(frozen=True)
class DetectionResult:
    change_points: list[int]
    detections: list[Detection]
    params_used: FsbsParams
    rho: int
    eval_points: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def to_dict(self) -> dict:
        p = self.params_used
        return {
            "change_points": list(self.change_points),
            "rho": self.rho,
            "tau": p.tau,
            "h": p.h,
            "hbar": p.hbar,
            "params": asdict(p),
            "detections": [det.to_dict() for det in self.detections],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def compute_rho(T: int, n: int, h: float, d: int) -> int:
    """Trimming width ``ceil(ln T / (n h^d))``, at least 1."""
    if not h > 0:
        raise ValueError("h must be positive")
    return max(1, math.ceil(math.log(T) / (n * h**d)))


def default_eval_point_count(T: int) -> int:
    return max(1, math.ceil(math.log(T)))


def sample_eval_points(panel: FunctionalPanel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` observed grid points uniformly without replacement."""
    total = panel.T * panel.n
    if count < 1:
        raise ValueError("count must be >= 1")
    if count > total:
        raise ValueError(f"cannot sample {count} of {total} grid points without replacement")
    idx = rng.choice(total, size=count, replace=False)
    return panel.locations()[idx].copy()


def scan_interval(cache: EvalCache, interval: tuple[int, int], rho: int) -> tuple[np.ndarray, np.ndarray]:
    """Per evaluation point, the max |CUSUM| over the trimmed range and its first argmax.

    Intervals too short to scan give ``(-1, 0)`` for every point.
    """
    a, b = int(interval[0]), int(interval[1])
    lo = max(a + rho, a + 1)
    hi = min(b - rho, b - 1)
    if b - a <= 2 * rho or lo > hi:
        return np.full(cache.M, -1.0), np.zeros(cache.M, dtype=np.int64)
    ts = np.arange(lo, hi + 1)
    vals = np.abs(cusum_curve(cache.prefix, a, b, ts))
    j = np.argmax(vals, axis=1)
    return vals[np.arange(cache.M), j], ts[j]


class Detector:
    """Precomputed scan of one panel, reusable across thresholds."""

    def __init__(
        self,
        panel: FunctionalPanel,
        params: FsbsParams,
        intervals: SeededIntervalSet | None = None,
        eval_points: np.ndarray | None = None,
        density: DensityField | None = None,
    ):
        if panel.T < 2:
            raise ValueError("need T >= 2")
        self.panel = panel
        self.params = params
        self.intervals = intervals if intervals is not None else generate(
            panel.T, params.depth_mode, params.ck
        )
        if self.intervals.T != panel.T:
            raise ValueError(f"interval set built for T={self.intervals.T}, panel has T={panel.T}")
        spec = KernelSpec(params.kernel, panel.d)
        self.rho = compute_rho(panel.T, panel.n, params.h, panel.d)
        if eval_points is None:
            count = params.n_eval_points or default_eval_point_count(panel.T)
            count = min(count, panel.T * panel.n)
            eval_points = sample_eval_points(panel, count, np.random.default_rng(params.seed))
        self.eval_points = eval_points
        if density is None:
            density = DensityField(spec, params.hbar, panel, params.density_floor)
        self.cache = build_eval_cache(panel, density, params.h, eval_points)
        self._scan()

    def _scan(self) -> None:
        s, e = self.intervals.bounds()
        J, M = len(s), self.cache.M
        A = np.full((J, M), -1.0)
        D = np.zeros((J, M), dtype=np.int64)
        for j in range(J):
            A[j], D[j] = scan_interval(self.cache, (s[j], e[j]), self.rho)
        self._s, self._e = s, e
        # m-major layout so argmax prefers smaller m, then canonical interval order
        self._A = np.ascontiguousarray(A.T)
        self._D = np.ascontiguousarray(D.T)
        self._scannable = (e - s) > 2 * self.rho

    def best(self, s: int, e: int) -> tuple[float, int, int, int] | None:
        """Largest scan statistic among intervals inside (s, e]: (A, D, m, j)."""
        mask = (self._s >= s) & (self._e <= e) & self._scannable
        if not mask.any():
            return None
        A = np.where(mask[None, :], self._A, -np.inf)
        flat = int(np.argmax(A))
        m, j = divmod(flat, A.shape[1])
        return float(A[m, j]), int(self._D[m, j]), m, j

    def run(self, tau: float | None = None) -> DetectionResult:
        tau = self.params.tau if tau is None else tau
        detections: list[Detection] = []
        stack = [(0, self.panel.T, 0)]
        while stack:
            s, e, depth = stack.pop()
            found = self.best(s, e)
            if found is None:
                continue
            score, loc, m, j = found
            if not score > tau:
                continue
            detections.append(Detection(loc, score, self.intervals.intervals[j], m, depth))
            # right pushed first so the left branch is explored first
            stack.append((loc, e, depth + 1))
            stack.append((s, loc, depth + 1))
        return DetectionResult(
            change_points=sorted(det.location for det in detections),
            detections=detections,
            params_used=self.params.with_tau(tau),
            rho=self.rho,
            eval_points=self.eval_points,
        )


def detect(
    panel: FunctionalPanel, params: FsbsParams, intervals: SeededIntervalSet | None = None
) -> DetectionResult:
    """Estimate change-points of the mean function sequence of ``panel``."""
    return Detector(panel, params, intervals).run()
