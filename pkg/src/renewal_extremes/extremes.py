"""Marked point sets of normalised observations, order statistics and
running-maximum paths."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .norming import NormingConstants
from .variates import MDAFamily


def mark_floor(family: MDAFamily) -> float:
    """Lower boundary of the mark space, used as the value of an empty maximum."""
    return -math.inf if MDAFamily(family) is MDAFamily.GUMBEL else 0.0


@dataclass(frozen=True)
class MarkedPointSet:
    times: np.ndarray
    marks: np.ndarray
    floor: float = -math.inf

    def __post_init__(self) -> None:
        if self.times.shape != self.marks.shape:
            raise ValueError("times and marks must have the same length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("point times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.size

    def count_above(self, x: float) -> int:
        return int(np.count_nonzero(self.marks > x))


def build_point_set(
    observations,
    norming: NormingConstants,
    g_of_t: float,
    n_points: int | None = None,
    floor: float = -math.inf,
) -> MarkedPointSet:
    """Points ``(i / g, (X_i - b(g)) / a(g))`` for ``i = 1..n_points``."""
    if not g_of_t > 0:
        raise ValueError("g_of_t must be positive")
    obs = np.asarray(observations, dtype=float)
    if n_points is None:
        n_points = obs.size
    if n_points > obs.size:
        raise ValueError(f"need {n_points} observations, got {obs.size}")
    marks = norming.normalize(obs[:n_points], g_of_t)
    times = np.arange(1, n_points + 1, dtype=float) / g_of_t
    return MarkedPointSet(times=times, marks=marks, floor=floor)


def restrict(points: MarkedPointSet, z: float) -> MarkedPointSet:
    """Keep the points with time in the closed window ``[0, z]``."""
    if z < 0:
        raise ValueError("window endpoint must be nonnegative")
    stop = int(np.searchsorted(points.times, z, side="right"))
    return MarkedPointSet(points.times[:stop], points.marks[:stop], points.floor)


@dataclass(frozen=True)
class OrderStats:
    values: np.ndarray
    K: int
    floor: float = -math.inf

    @property
    def k_available(self) -> int:
        return self.values.size

    def kth(self, k: int) -> float:
        """k-th largest mark, or the floor if fewer than ``k`` points exist."""
        if not 1 <= k <= self.K:
            raise ValueError(f"rank {k} outside 1..{self.K}")
        return float(self.values[k - 1]) if k <= self.values.size else self.floor

    def padded(self) -> np.ndarray:
        out = np.full(self.K, self.floor)
        out[: self.values.size] = self.values
        return out


def top_k(points: MarkedPointSet, K: int) -> OrderStats:
    if K < 1:
        raise ValueError("K must be at least 1")
    marks = points.marks
    if marks.size > K:
        marks = np.partition(marks, marks.size - K)[marks.size - K :]
    return OrderStats(values=np.sort(marks)[::-1], K=K, floor=points.floor)


@dataclass(frozen=True)
class ExtremalPath:
    """Right-continuous step function ``s -> max{mark : time <= s}``."""

    times: np.ndarray
    values: np.ndarray
    floor: float = -math.inf

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.values.size == 0:
            vals = np.full(s.shape, self.floor)
        else:
            idx = np.searchsorted(self.times, s, side="right") - 1
            vals = np.where(idx >= 0, self.values[np.maximum(idx, 0)], self.floor)
        return float(vals) if vals.ndim == 0 else vals


def t1_path(points: MarkedPointSet) -> ExtremalPath:
    running = np.maximum.accumulate(points.marks) if len(points) else points.marks
    # keep only jump points
    if running.size:
        keep = np.concatenate(([True], running[1:] > running[:-1]))
        return ExtremalPath(points.times[keep], running[keep], points.floor)
    return ExtremalPath(points.times, running, points.floor)
