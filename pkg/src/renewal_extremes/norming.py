"""Centering and scaling functions for maxima and for heavy-tailed step sums."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .variates import ObservationLaw, ObservationModel, StepKind, StepModel


@dataclass(frozen=True)
class NormingConstants:
    """Scale ``a(t) > 0`` and location ``b(t)`` such that
    ``t P(X > a(t) x + b(t)) -> -log G(x)``."""

    a: Callable[[float], float]
    b: Callable[[float], float]

    def normalize(self, x, t: float):
        scale = self.a(t)
        if not scale > 0:
            raise ValueError(f"norming scale a({t}) = {scale} is not positive")
        return (np.asarray(x, dtype=float) - self.b(t)) / scale


def _normal_a(t: float) -> float:
    return 1.0 / math.sqrt(2.0 * math.log(t))


def _normal_b(t: float) -> float:
    r = math.sqrt(2.0 * math.log(t))
    return r - (math.log(math.log(t)) + math.log(4.0 * math.pi)) / (2.0 * r)


def norming_for(model: ObservationModel) -> NormingConstants:
    if model.law is ObservationLaw.EXPONENTIAL:
        return NormingConstants(a=lambda t: 1.0, b=lambda t: math.log(t))
    if model.law is ObservationLaw.NORMAL:
        # classical constants; only meaningful for t > e
        return NormingConstants(a=_normal_a, b=_normal_b)
    if model.law is ObservationLaw.PARETO:
        inv = 1.0 / model.alpha
        return NormingConstants(a=lambda t: t**inv, b=lambda t: 0.0)
    raise ValueError(f"unsupported observation law {model.law!r}")


@dataclass(frozen=True)
class StepNorming:
    """Exact norming pair for Pareto steps.

    ``d(n)`` solves ``n P(Y > d(n)) = 1`` and ``d_tilde(t) = 1 / P(Y > t)``,
    so the two are exact inverses of each other.
    """

    alpha: float
    scale: float

    def d(self, t):
        return self.scale * np.asarray(t, dtype=float) ** (1.0 / self.alpha)

    def d_tilde(self, t):
        return (np.asarray(t, dtype=float) / self.scale) ** self.alpha


def step_norming_for(model: StepModel) -> StepNorming:
    if model.kind is not StepKind.PARETO:
        raise ValueError("step norming d, d_tilde is defined only for heavy Pareto steps")
    return StepNorming(alpha=float(model.alpha), scale=float(model.scale))


def generalized_inverse(z, u: float, s=None) -> float:
    """``inf{s : z(s) > u}`` for a nondecreasing path sampled on grid ``s``.

    ``s`` defaults to ``0, 1, 2, ...``.  Returns ``inf`` when the path never
    strictly exceeds ``u`` on the grid.
    """
    z = np.asarray(z, dtype=float)
    if s is None:
        s = np.arange(z.size, dtype=float)
    else:
        s = np.asarray(s, dtype=float)
        if s.shape != z.shape:
            raise ValueError("grid and path lengths differ")
    if np.any(np.diff(z) < 0):
        raise ValueError("path must be nondecreasing")
    idx = int(np.searchsorted(z, u, side="right"))
    if idx == z.size:
        return math.inf
    return float(s[idx])
