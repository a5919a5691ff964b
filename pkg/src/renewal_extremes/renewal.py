"""Renewal step-sum paths, passage times and stable hitting times."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .norming import step_norming_for
from .variates import SeedSpec, StepModel, draw_kanter, draw_positive_stable, draw_steps


class PathExhausted(RuntimeError):
    """The simulated step sums never exceed the requested time."""


class GridTooCoarse(RuntimeError):
    """The subordinator grid does not resolve the requested levels."""


@dataclass(frozen=True)
class RenewalPath:
    steps: np.ndarray
    cumsum: np.ndarray

    @classmethod
    def from_steps(cls, steps) -> RenewalPath:
        steps = np.asarray(steps, dtype=float)
        if np.any(steps < 0):
            raise ValueError("renewal steps must be nonnegative")
        return cls(steps=steps, cumsum=np.cumsum(steps))

    def __len__(self) -> int:
        return self.steps.size


def passage_time(path: RenewalPath, t: float) -> int:
    """Smallest ``k >= 1`` with ``Y_1 + ... + Y_k > t``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    idx = int(np.searchsorted(path.cumsum, t, side="right"))
    if idx == path.cumsum.size:
        raise PathExhausted(f"path of length {path.cumsum.size} does not pass t={t}")
    return idx + 1


def passage_times(path: RenewalPath, times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    idx = np.searchsorted(path.cumsum, times, side="right")
    if np.any(idx == path.cumsum.size):
        raise PathExhausted(f"path of length {path.cumsum.size} does not pass t={times.max()}")
    return idx + 1


def block_size(model: StepModel, horizon: float) -> int:
    """Number of steps drawn per block when growing a path to ``horizon``."""
    if model.finite_mean:
        expected = horizon / model.mean
        return int(math.ceil(1.1 * expected + 4.0 * math.sqrt(expected + 1.0))) + 16
    expected = float(step_norming_for(model).d_tilde(max(horizon, model.scale)))
    return int(math.ceil(2.0 * expected)) + 16


def grow_path(model: StepModel, rng: np.random.Generator, horizon: float) -> RenewalPath:
    """Draw steps in fixed-size blocks until the partial sums exceed ``horizon``."""
    size = block_size(model, horizon)
    blocks = [draw_steps(model, size, rng)]
    total = blocks[0].sum()
    while not total > horizon:
        blocks.append(draw_steps(model, size, rng))
        total += blocks[-1].sum()
    path = RenewalPath.from_steps(np.concatenate(blocks))
    if not path.cumsum[-1] > horizon:
        # float summation order can disagree with the running total at the margin
        more = draw_steps(model, size, rng)
        path = RenewalPath.from_steps(np.concatenate([path.steps, more]))
    return path


@dataclass(frozen=True)
class FiniteMeanScaler:
    mu: float

    def __call__(self, tau: int, t: float) -> float:
        return self.mu * tau / t


@dataclass(frozen=True)
class InfiniteMeanScaler:
    model: StepModel

    def __call__(self, tau: int, t: float) -> float:
        return tau / float(step_norming_for(self.model).d_tilde(t))


def scaled_passage(path: RenewalPath, t: float, c: float, scaler) -> float:
    """``mu tau(tc) / t`` or ``tau(tc) / d_tilde(t)`` depending on ``scaler``."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    return scaler(passage_time(path, t * c), t)


def sample_passage_ratio(model: StepModel, t: float, c: float, seed: SeedSpec) -> float:
    """One draw of the normalised passage time for a freshly grown path."""
    path = grow_path(model, seed.generator(), t * c)
    scaler = FiniteMeanScaler(model.mean) if model.finite_mean else InfiniteMeanScaler(model)
    return scaled_passage(path, t, c, scaler)


def draw_hitting_time_at_one(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    log_a, e = draw_kanter(alpha, n, rng)
    # W(1) = S**-alpha / gamma(1 - alpha) with S = (a/E)**((1-alpha)/alpha)
    return np.exp((1.0 - alpha) * (np.log(e) - log_a)) / math.gamma(1.0 - alpha)


def sample_hitting_time_at_one(alpha: float, n: int, seed: SeedSpec) -> np.ndarray:
    """Exact draws of the hitting time of level one by the limiting subordinator.

    The subordinator has Laplace exponent ``gamma(1 - alpha) lam**alpha``,
    which makes ``W(1)`` Mittag-Leffler with
    ``E W(1)**n = n! / (gamma(1 + n alpha) gamma(1 - alpha)**n)``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return draw_hitting_time_at_one(alpha, n, seed.generator())


@dataclass(frozen=True)
class HittingTimePath:
    levels: np.ndarray
    values: np.ndarray
    resolution: float

    def __post_init__(self) -> None:
        if np.any(np.diff(self.values) < 0) or np.any(self.values < 0):
            raise ValueError("hitting times must be nonnegative and nondecreasing")


def default_horizon(alpha: float, top_level: float) -> float:
    # E W(c) = c**alpha / (gamma(1+alpha) gamma(1-alpha)); W(1) has a light upper tail
    mean = max(top_level, 1e-12) ** alpha / (math.gamma(1 + alpha) * math.gamma(1 - alpha))
    return 12.0 * mean


def sample_hitting_time_paths(
    alpha: float,
    c_grid,
    n_paths: int,
    n_increments: int,
    seed: SeedSpec,
    horizon: float | None = None,
    chunk: int = 2048,
) -> tuple[np.ndarray, float]:
    """Grid approximation of ``(W(c))_{c in c_grid}`` for ``n_paths`` paths.

    The subordinator is sampled on ``n_increments`` equal time cells of
    ``[0, horizon]``; ``W(c)`` is the first cell end where it exceeds ``c``,
    so each value overestimates the true hitting time by less than one cell.
    Returns the ``(n_paths, len(c_grid))`` array and the cell width.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    levels = np.asarray(c_grid, dtype=float)
    if levels.ndim != 1 or np.any(levels < 0) or np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be nonnegative and strictly increasing")
    if n_increments < 1:
        raise ValueError("n_increments must be positive")
    if horizon is None:
        horizon = default_horizon(alpha, float(levels[-1]))
    dx = horizon / n_increments
    jump_scale = (dx * math.gamma(1.0 - alpha)) ** (1.0 / alpha)
    rng = seed.generator()
    out = np.empty((n_paths, levels.size))
    for start in range(0, n_paths, chunk):
        rows = min(chunk, n_paths - start)
        incr = draw_positive_stable(alpha, rows * n_increments, rng).reshape(rows, n_increments)
        path = np.cumsum(jump_scale * incr, axis=1)
        if np.any(path[:, -1] <= levels[-1]):
            raise GridTooCoarse(
                f"subordinator stayed below level {levels[-1]} up to horizon {horizon}"
            )
        for j, c in enumerate(levels):
            first = np.argmax(path > c, axis=1)
            out[start : start + rows, j] = (first + 1) * dx
    return out, dx


def simulate_hitting_time(
    alpha: float,
    c_grid,
    n_increments: int,
    seed: SeedSpec,
    horizon: float | None = None,
) -> HittingTimePath:
    values, dx = sample_hitting_time_paths(alpha, c_grid, 1, n_increments, seed, horizon)
    return HittingTimePath(levels=np.asarray(c_grid, dtype=float), values=values[0], resolution=dx)
