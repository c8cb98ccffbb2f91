"""Smoothing kernels on R^d and their bandwidth-scaled forms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FAMILIES = ("gaussian", "epanechnikov", "uniform")

# Gaussian mass beyond 8 standard deviations is below 1e-14.
GAUSS_CUTOFF = 8.0


@dataclass(frozen=True)
class KernelSpec:
    """A non-negative kernel ``K: R^d -> R+`` with ``K(0) > 0``.

    The Gaussian is isotropic; the compact families are tensor products of
    their univariate versions.
    """

    family: str = "gaussian"
    d: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if self.d < 1:
            raise ValueError("kernel dimension must be >= 1")

    def __call__(self, v: np.ndarray) -> np.ndarray:
        """Evaluate on the last axis of ``v`` (shape ``(..., d)``)."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1:] != (self.d,):
            raise ValueError(f"expected trailing dimension {self.d}, got shape {v.shape}")
        if self.family == "gaussian":
            return _gaussian_from_sq(np.einsum("...j,...j->...", v, v), self.d)
        if self.family == "epanechnikov":
            inside = np.abs(v) <= 1.0
            return np.prod(np.where(inside, 0.75 * (1.0 - v * v), 0.0), axis=-1)
        inside = np.all(np.abs(v) <= 1.0, axis=-1)
        return np.where(inside, 0.5**self.d, 0.0)

    def pairwise(self, h: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Matrix of ``K_h(a_p - b_q)`` for ``a`` (P, d) and ``b`` (Q, d)."""
        if h <= 0:
            raise ValueError("bandwidth must be positive")
        a = np.asarray(a, dtype=np.float64).reshape(-1, self.d) / h
        b = np.asarray(b, dtype=np.float64).reshape(-1, self.d) / h
        if self.family == "gaussian":
            sq = (
                np.einsum("ij,ij->i", a, a)[:, None]
                + np.einsum("ij,ij->i", b, b)[None, :]
                - 2.0 * (a @ b.T)
            )
            np.maximum(sq, 0.0, out=sq)
            far = sq > GAUSS_CUTOFF**2
            sq *= -0.5
            out = np.exp(sq, out=sq)
            out *= (2.0 * np.pi) ** (-self.d / 2.0)
            out[far] = 0.0
        else:
            out = self(a[:, None, :] - b[None, :, :])
        out *= h ** (-self.d)
        return out


def _gaussian_from_sq(sq: np.ndarray, d: int) -> np.ndarray:
    sq = np.asarray(sq)
    out = np.exp(-0.5 * sq) * (2.0 * np.pi) ** (-d / 2.0)
    return np.where(sq > GAUSS_CUTOFF**2, 0.0, out)


def kernel_value(spec: KernelSpec, v) -> float:
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if v.shape != (spec.d,):
        raise ValueError(f"expected a vector of length {spec.d}, got shape {v.shape}")
    return float(spec(v))


def scaled_kernel(spec: KernelSpec, h: float, x) -> float:
    """``K_h(x) = h^-d K(x / h)``."""
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return h ** (-spec.d) * kernel_value(spec, x / h)
