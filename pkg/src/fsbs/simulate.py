"""Synthetic functional time series: scenarios S1-S5 and order-1 noise processes.

Each noise process is stationarity-initialised: the state at time 0 is drawn
from the process's stationary law, so no burn-in is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from .panel import FunctionalPanel

MeanFunction = Callable[[np.ndarray], np.ndarray]

N_BASIS = 50
FAR_COEF = 0.5
AR_COEF = 0.3
AR_INNOV_VAR = 0.5
BROWNIAN_GRID_SIZE = 50
# per-coordinate factor of the sine basis, (1/sqrt 2) * pi
BASIS_AMPLITUDE = np.pi / np.sqrt(2.0)


def basis_functions(
    x: np.ndarray, n_basis: int = N_BASIS, amplitude: float = BASIS_AMPLITUDE
) -> np.ndarray:
    """``h_i(x) = prod_j amplitude * sin(i x_j)`` for i = 1..n_basis.

    ``x`` has shape (P, d); returns (P, n_basis).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    i = np.arange(1, n_basis + 1)
    factors = amplitude * np.sin(x[:, :, None] * i[None, None, :])
    return np.prod(factors, axis=1)


@dataclass
class BasisFarState:
    """Basis coefficients of the functional AR(1) noise xi_t."""

    coef: np.ndarray
    phi: float = FAR_COEF
    amplitude: float = BASIS_AMPLITUDE

    @classmethod
    def stationary(
        cls,
        rng: np.random.Generator,
        n_basis: int = N_BASIS,
        phi: float = FAR_COEF,
        amplitude: float = BASIS_AMPLITUDE,
    ):
        scale = 1.0 / np.arange(1, n_basis + 1)
        return cls(scale * rng.standard_normal(n_basis) / np.sqrt(1.0 - phi**2), phi, amplitude)

    @classmethod
    def zero(cls, n_basis: int = N_BASIS, phi: float = FAR_COEF, amplitude: float = BASIS_AMPLITUDE):
        return cls(np.zeros(n_basis), phi, amplitude)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return basis_functions(x, len(self.coef), self.amplitude) @ self.coef


def far_coefficient_step(state: BasisFarState, b: np.ndarray) -> BasisFarState:
    """``c_t,i = phi c_t-1,i + b_t,i / i`` for given innovations ``b``."""
    scale = 1.0 / np.arange(1, len(state.coef) + 1)
    return BasisFarState(state.phi * state.coef + scale * b, state.phi, state.amplitude)


def basis_noise_far(
    state: BasisFarState, x: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, BasisFarState]:
    """Advance the functional AR(1) noise one step and evaluate it at ``x``."""
    new = far_coefficient_step(state, rng.standard_normal(len(state.coef)))
    return new.evaluate(x), new


@dataclass
class AR1State:
    delta: np.ndarray
    psi: float = AR_COEF
    innov_var: float = AR_INNOV_VAR

    @classmethod
    def stationary(cls, rng: np.random.Generator, n: int, psi: float = AR_COEF, innov_var: float = AR_INNOV_VAR):
        sd = np.sqrt(innov_var / (1.0 - psi**2))
        return cls(sd * rng.standard_normal(n), psi, innov_var)


def ar1_measurement_error(
    state: AR1State, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, AR1State]:
    """``delta_t = psi delta_t-1 + eps_t`` with ``eps_t ~ N(0, innov_var I_n)``."""
    if state.delta.shape != (n,):
        raise ValueError(f"state holds {state.delta.shape[0]} errors, asked for {n}")
    eps = np.sqrt(state.innov_var) * rng.standard_normal(n)
    delta = state.psi * state.delta + eps
    return delta, AR1State(delta, state.psi, state.innov_var)


def brownian_grid(size: int = BROWNIAN_GRID_SIZE) -> np.ndarray:
    """Evenly spaced grid ``j / size``, j = 1..size."""
    return np.arange(1, size + 1) / size


def psi_kernel_matrix(grid: np.ndarray) -> np.ndarray:
    """Rectangle-rule discretisation of ``v -> int psi(v, u) xi(u) du``."""
    a = np.exp(grid**2 / 2.0)
    return np.outer(a, a) / 3.0 / len(grid)


def brownian_covariance(grid: np.ndarray) -> np.ndarray:
    return np.minimum.outer(grid, grid)


@dataclass
class BrownianFarState:
    values: np.ndarray
    grid: np.ndarray
    operator: np.ndarray

    @classmethod
    def stationary(cls, rng: np.random.Generator, size: int = BROWNIAN_GRID_SIZE):
        grid = brownian_grid(size)
        op = psi_kernel_matrix(grid)
        cov = solve_discrete_lyapunov(op, brownian_covariance(grid))
        chol = np.linalg.cholesky(cov + 1e-12 * np.eye(size))
        return cls(chol @ rng.standard_normal(size), grid, op)

    @classmethod
    def zero(cls, size: int = BROWNIAN_GRID_SIZE):
        grid = brownian_grid(size)
        return cls(np.zeros(size), grid, psi_kernel_matrix(grid))


def brownian_path(rng: np.random.Generator, size: int = BROWNIAN_GRID_SIZE) -> np.ndarray:
    """Standard Brownian motion at ``j / size``: partial sums of N(0, 1/size) steps."""
    return np.cumsum(rng.standard_normal(size) / np.sqrt(size))


def brownian_far_noise(
    state: BrownianFarState, rng: np.random.Generator
) -> tuple[np.ndarray, BrownianFarState]:
    """``xi_t = Psi xi_t-1 + eps_t`` with Brownian ``eps_t`` on the fixed grid."""
    values = state.operator @ state.values + brownian_path(rng, len(state.grid))
    return values, BrownianFarState(values, state.grid, state.operator)


def operator_norm(matrix: np.ndarray, iters: int = 200) -> float:
    """Largest singular value by power iteration on ``A^T A``."""
    v = np.ones(matrix.shape[1]) / np.sqrt(matrix.shape[1])
    for _ in range(iters):
        w = matrix.T @ (matrix @ v)
        v = w / np.linalg.norm(w)
    return float(np.linalg.norm(matrix @ v))


# Order-1 moving-average and autoregressive primitives. ``eps`` holds the
# innovations for t = 0..T along axis 0; rows may be scalars or grid
# vectors, and ``op`` a scalar or a matrix acting on them.


def _apply(op, v: np.ndarray) -> np.ndarray:
    return op @ v if np.ndim(op) == 2 else op * v


def ma1_path(theta, eps: np.ndarray) -> np.ndarray:
    """``delta_t = theta(eps_t-1) + eps_t`` for t = 1..T."""
    eps = np.asarray(eps, dtype=np.float64)
    return np.stack([_apply(theta, eps[t - 1]) + eps[t] for t in range(1, len(eps))])


def ar1_path(psi, eps: np.ndarray, start=None) -> np.ndarray:
    """``delta_t = psi(delta_t-1) + eps_t`` for t = 1..T with ``delta_0 = eps_0``
    unless ``start`` is given."""
    eps = np.asarray(eps, dtype=np.float64)
    cur = eps[0] if start is None else np.asarray(start, dtype=np.float64)
    out = []
    for t in range(1, len(eps)):
        cur = _apply(psi, cur) + eps[t]
        out.append(cur)
    return np.stack(out)


def coupled_innovations(eps: np.ndarray, replacement) -> np.ndarray:
    """Copy of ``eps`` with the time-0 innovation swapped for ``replacement``."""
    out = np.array(eps, dtype=np.float64, copy=True)
    out[0] = replacement
    return out


fma1_path = ma1_path
far1_path = ar1_path


@dataclass
class ScenarioSpec:
    """Piecewise-constant mean functions plus a noise model.

    ``noise`` is ``"basis"`` (functional AR(1) on the sine basis),
    ``"brownian"`` (Brownian-innovation FAR(1) on a fixed 50-point grid) or
    ``"none"``; ``error`` is ``"ar1"`` or ``"none"``.  ``grid`` is
    ``"uniform"`` for iid Unif([0,1]^d) locations or ``"fixed"`` for the
    Brownian grid.
    """

    id: str
    T: int
    n: int
    d: int
    change_points: list[int]
    mean_functions: list[MeanFunction]
    noise: str = "basis"
    error: str = "ar1"
    grid: str = "uniform"
    basis_amplitude: float = BASIS_AMPLITUDE

    def __post_init__(self):
        cps = list(self.change_points)
        if any(b <= a for a, b in zip(cps, cps[1:])) or any(not 0 < c < self.T for c in cps):
            raise ValueError("change points must be strictly increasing within (0, T)")
        if len(self.mean_functions) != len(cps) + 1:
            raise ValueError("need one mean function per segment")
        if self.noise not in ("basis", "brownian", "none"):
            raise ValueError(f"unknown noise model {self.noise!r}")
        if self.error not in ("ar1", "none"):
            raise ValueError(f"unknown error model {self.error!r}")
        if self.grid not in ("uniform", "fixed"):
            raise ValueError(f"unknown grid {self.grid!r}")
        if self.grid == "fixed" and (self.d != 1 or self.n != BROWNIAN_GRID_SIZE):
            raise ValueError("fixed grid requires d=1 and n=50")
        if self.noise == "brownian" and self.grid != "fixed":
            raise ValueError("brownian noise lives on the fixed grid")

    def mean_at(self, t: int, x: np.ndarray) -> np.ndarray:
        """True mean f*_t evaluated at locations ``x`` of shape (P, d)."""
        seg = int(np.searchsorted(self.change_points, t, side="left"))
        return self.mean_functions[seg](np.asarray(x, dtype=np.float64).reshape(-1, self.d))


def _coord(fn, scale: float, amp: float = 1.0) -> MeanFunction:
    return lambda x: amp * fn(scale * x[:, 0])


def _zero(x: np.ndarray) -> np.ndarray:
    return np.zeros(len(x))


SCENARIO_IDS = ("S1", "S2", "S3", "S4", "S5")


def scenario(
    sid: str, arg_scale: float = 1.0, T: int = 200, basis_amplitude: float = BASIS_AMPLITUDE
) -> ScenarioSpec:
    """Scenario S1..S5.  Means are functions of ``arg_scale * x``."""
    c = arg_scale
    a = basis_amplitude
    if sid in ("S1", "S2", "S3"):
        n, amp = {"S1": (1, 6.0), "S2": (10, 2.0), "S3": (50, 1.0)}[sid]
        cps = [round(30 * T / 200), round(130 * T / 200)]
        means = [_coord(np.cos, c, amp), _coord(np.sin, c, amp), _coord(np.cos, c, amp)]
        return ScenarioSpec(sid, T, n, 1, cps, means, basis_amplitude=a)
    if sid == "S4":
        cps = [round(100 * T / 200), round(150 * T / 200)]
        bump = lambda x: 3.0 * (c * x[:, 0]) * (c * x[:, 1])  # noqa: E731
        return ScenarioSpec(sid, T, 10, 2, cps, [_zero, bump, _zero], basis_amplitude=a)
    if sid == "S5":
        cps = [round(68 * T / 200), round(134 * T / 200)]
        means = [_zero, _coord(np.sin, c), _coord(np.sin, c, 2.0)]
        return ScenarioSpec(sid, T, BROWNIAN_GRID_SIZE, 1, cps, means, "brownian", "none", "fixed")
    raise ValueError(f"unknown scenario {sid!r}; choose from {SCENARIO_IDS}")


def null_scenario(T: int = 200, n: int = 10, basis_amplitude: float = BASIS_AMPLITUDE) -> ScenarioSpec:
    """No change: S2-style noise around the constant mean ``2 cos``."""
    return ScenarioSpec("null", T, n, 1, [], [_coord(np.cos, 1.0, 2.0)], basis_amplitude=basis_amplitude)


def single_jump_scenario(
    T: int,
    n: int,
    jump: float = 1.0,
    noise: str = "basis",
    basis_amplitude: float = BASIS_AMPLITUDE,
) -> ScenarioSpec:
    """Mean 0 then ``jump`` (a constant function) with one change at T/2.

    AR(1) measurement error is always added; ``noise`` selects the
    functional noise (``"basis"`` or ``"none"``).
    """
    high = lambda x: np.full(len(x), jump)  # noqa: E731
    return ScenarioSpec(
        "jump", T, n, 1, [T // 2], [_zero, high], noise=noise, basis_amplitude=basis_amplitude
    )


def generate_scenario(
    spec: ScenarioSpec | str, seed: int | Sequence[int] | np.random.SeedSequence
) -> tuple[FunctionalPanel, list[int]]:
    """Simulate a panel; returns (panel, true change points)."""
    if isinstance(spec, str):
        spec = scenario(spec)
    rng = np.random.default_rng(seed)
    T, n, d = spec.T, spec.n, spec.d

    if spec.noise == "basis":
        xi_state = BasisFarState.stationary(rng, amplitude=spec.basis_amplitude)
    elif spec.noise == "brownian":
        xi_state = BrownianFarState.stationary(rng)
    if spec.error == "ar1":
        err_state = AR1State.stationary(rng, n)

    fixed = brownian_grid(n)[:, None] if spec.grid == "fixed" else None
    x = np.empty((T, n, d))
    y = np.empty((T, n))
    for t in range(1, T + 1):
        xt = fixed if fixed is not None else rng.random((n, d))
        yt = spec.mean_at(t, xt)
        if spec.noise == "basis":
            xi, xi_state = basis_noise_far(xi_state, xt, rng)
            yt = yt + xi
        elif spec.noise == "brownian":
            xi, xi_state = brownian_far_noise(xi_state, rng)
            yt = yt + xi
        if spec.error == "ar1":
            delta, err_state = ar1_measurement_error(err_state, n, rng)
            yt = yt + delta
        x[t - 1] = xt
        y[t - 1] = yt
    return FunctionalPanel(x, y), list(spec.change_points)
