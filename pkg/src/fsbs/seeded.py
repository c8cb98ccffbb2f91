"""Deterministic multiscale seeded intervals."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, NamedTuple

import numpy as np

DEPTH_MODES = ("full", "paper")
DEFAULT_CK = 4.0


class SeededInterval(NamedTuple):
    """Half-open interval (s, e] at scale k with shift index i (both 1-based)."""

    s: int
    e: int
    k: int
    i: int

    @property
    def length(self) -> int:
        return self.e - self.s


@dataclass(frozen=True)
class SeededIntervalSet:
    T: int
    depth: int
    intervals: tuple[SeededInterval, ...]
    raw_count: int  # before removing rounding duplicates

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end arrays in canonical order."""
        s = np.array([iv.s for iv in self.intervals], dtype=np.int64)
        e = np.array([iv.e for iv in self.intervals], dtype=np.int64)
        return s, e

    def dump_csv(self, stream: IO[str]) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["k", "i", "s", "e"])
        for iv in self.intervals:
            w.writerow([iv.k, iv.i, iv.s, iv.e])


def depth_for(T: int, depth_mode: str = "full", ck: float = DEFAULT_CK) -> int:
    if depth_mode == "full":
        return max(1, math.ceil(math.log2(T)))
    if depth_mode == "paper":
        if not ck > 0:
            raise ValueError("ck must be positive")
        return max(1, math.ceil(ck * math.log(math.log(T))))
    raise ValueError(f"unknown depth mode {depth_mode!r}; choose from {DEPTH_MODES}")


def scale_intervals(T: int, k: int) -> list[SeededInterval]:
    """The 2^k - 1 intervals of length T 2^(1-k) shifted by T 2^-k."""
    # Integer arithmetic: floor((i-1) T / 2^k), ceil(((i-1) T + 2T) / 2^k).
    q = 1 << k
    out = []
    for i in range(1, q):
        s = ((i - 1) * T) // q
        e = -((-((i + 1) * T)) // q)
        out.append(SeededInterval(s, e, k, i))
    return out


def generate(T: int, depth_mode: str = "full", ck: float = DEFAULT_CK) -> SeededIntervalSet:
    if T < 2:
        raise ValueError(f"need T >= 2, got {T}")
    depth = depth_for(T, depth_mode, ck)
    seen: set[tuple[int, int]] = set()
    kept = []
    raw = 0
    for k in range(1, depth + 1):
        for iv in scale_intervals(T, k):
            raw += 1
            if (iv.s, iv.e) in seen:
                continue
            seen.add((iv.s, iv.e))
            kept.append(iv)
    return SeededIntervalSet(T, depth, tuple(kept), raw)


def intervals_within(
    interval_set: SeededIntervalSet, s: int, e: int, min_len: int = 0
) -> list[SeededInterval]:
    """Intervals (a, b] with s <= a, b <= e and b - a > min_len."""
    return [iv for iv in interval_set if iv.s >= s and iv.e <= e and iv.e - iv.s > min_len]
