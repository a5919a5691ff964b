"""Seeded samplers for observations, renewal steps and positive stable laws."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special


class MDAFamily(str, enum.Enum):
    GUMBEL = "gumbel"
    FRECHET = "frechet"


class ObservationLaw(str, enum.Enum):
    EXPONENTIAL = "exponential"
    NORMAL = "normal"
    PARETO = "pareto"


_LAW_FAMILY = {
    ObservationLaw.EXPONENTIAL: MDAFamily.GUMBEL,
    ObservationLaw.NORMAL: MDAFamily.GUMBEL,
    ObservationLaw.PARETO: MDAFamily.FRECHET,
}


@dataclass(frozen=True)
class ObservationModel:
    """Law of the observations together with its max-domain of attraction.

    ``alpha`` is the Pareto tail index and is ignored for the Gumbel laws.
    The Pareto law has unit lower endpoint, ``P(X > x) = x**-alpha``.
    """

    law: ObservationLaw
    alpha: float | None = None
    family: MDAFamily | None = None

    def __post_init__(self) -> None:
        law = ObservationLaw(self.law)
        object.__setattr__(self, "law", law)
        expected = _LAW_FAMILY[law]
        if self.family is None:
            object.__setattr__(self, "family", expected)
        elif MDAFamily(self.family) is not expected:
            raise ValueError(f"law {law.value} belongs to the {expected.value} family")
        else:
            object.__setattr__(self, "family", expected)
        if law is ObservationLaw.PARETO:
            if self.alpha is None or not self.alpha > 0:
                raise ValueError("Pareto observations need alpha > 0")
            object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def exponential(cls) -> ObservationModel:
        return cls(ObservationLaw.EXPONENTIAL)

    @classmethod
    def normal(cls) -> ObservationModel:
        return cls(ObservationLaw.NORMAL)

    @classmethod
    def pareto(cls, alpha: float) -> ObservationModel:
        return cls(ObservationLaw.PARETO, alpha=alpha)

    def survival(self, x):
        """Exact tail ``P(X > x)``, vectorised."""
        x = np.asarray(x, dtype=float)
        if self.law is ObservationLaw.EXPONENTIAL:
            return np.where(x < 0, 1.0, np.exp(-np.maximum(x, 0.0)))
        if self.law is ObservationLaw.NORMAL:
            return special.ndtr(-x)
        return np.where(x < 1, 1.0, np.maximum(x, 1.0) ** -self.alpha)


class StepKind(str, enum.Enum):
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"
    UNIFORM = "uniform"
    PARETO = "pareto"


@dataclass(frozen=True)
class StepModel:
    """Law of the renewal steps.

    Finite-mean kinds are parameterised by their mean ``mu``; the heavy
    Pareto kind by ``alpha`` in (0, 1) and lower endpoint ``scale`` with
    ``P(Y > y) = (y / scale)**-alpha``.
    """

    kind: StepKind
    mu: float | None = None
    alpha: float | None = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        kind = StepKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is StepKind.PARETO:
            if self.alpha is None or not 0 < self.alpha < 1:
                raise ValueError("heavy Pareto steps need 0 < alpha < 1")
            if not self.scale > 0:
                raise ValueError("Pareto step scale must be positive")
        elif self.mu is None or not 0 < self.mu < math.inf:
            raise ValueError(f"{kind.value} steps need a finite mean mu > 0")

    @classmethod
    def constant(cls, mu: float) -> StepModel:
        return cls(StepKind.CONSTANT, mu=mu)

    @classmethod
    def exponential(cls, mu: float) -> StepModel:
        return cls(StepKind.EXPONENTIAL, mu=mu)

    @classmethod
    def uniform(cls, mu: float) -> StepModel:
        return cls(StepKind.UNIFORM, mu=mu)

    @classmethod
    def heavy_pareto(cls, alpha: float, scale: float = 1.0) -> StepModel:
        return cls(StepKind.PARETO, alpha=alpha, scale=scale)

    @property
    def finite_mean(self) -> bool:
        return self.kind is not StepKind.PARETO

    @property
    def mean(self) -> float:
        if not self.finite_mean:
            return math.inf
        return float(self.mu)

    def survival(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind is StepKind.CONSTANT:
            return np.where(y < self.mu, 1.0, 0.0)
        if self.kind is StepKind.EXPONENTIAL:
            return np.exp(-np.maximum(y, 0.0) / self.mu)
        if self.kind is StepKind.UNIFORM:
            return np.clip(1.0 - y / (2.0 * self.mu), 0.0, 1.0)
        return np.where(y < self.scale, 1.0, (np.maximum(y, self.scale) / self.scale) ** -self.alpha)


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one reproducible variate stream.

    ``stream`` separates independent purposes (steps, observations, ...)
    inside a single replication.
    """

    master_seed: int
    replication_index: int = 0
    stream: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.replication_index < 0 or self.stream < 0:
            raise ValueError("replication_index and stream must be nonnegative")

    def substream(self, stream: int) -> SeedSpec:
        return SeedSpec(self.master_seed, self.replication_index, stream)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.replication_index, self.stream)
        )
        return np.random.Generator(np.random.PCG64(seq))


def draw_observations(model: ObservationModel, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if model.law is ObservationLaw.EXPONENTIAL:
        return rng.standard_exponential(n)
    if model.law is ObservationLaw.NORMAL:
        return rng.standard_normal(n)
    return np.exp(rng.standard_exponential(n) / model.alpha)


def draw_steps(model: StepModel, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if model.kind is StepKind.CONSTANT:
        return np.full(n, float(model.mu))
    if model.kind is StepKind.EXPONENTIAL:
        return model.mu * rng.standard_exponential(n)
    if model.kind is StepKind.UNIFORM:
        return 2.0 * model.mu * rng.random(n)
    return model.scale * np.exp(rng.standard_exponential(n) / model.alpha)


def _check_stable_index(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError("stable index must lie in (0, 1)")


def _kanter_log_a(alpha: float, u: np.ndarray) -> np.ndarray:
    # log of sin((1-a)u) sin(au)^(a/(1-a)) / sin(u)^(1/(1-a))
    return (
        np.log(np.sin((1.0 - alpha) * u))
        + alpha / (1.0 - alpha) * np.log(np.sin(alpha * u))
        - np.log(np.sin(u)) / (1.0 - alpha)
    )


def draw_kanter(alpha: float, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(log a(U), E)`` for Kanter's representation."""
    u = math.pi * (1.0 - rng.random(n))
    e = rng.standard_exponential(n)
    return _kanter_log_a(alpha, u), e


def draw_positive_stable(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Positive stable draws with Laplace transform ``exp(-lam**alpha)``."""
    _check_stable_index(alpha)
    log_a, e = draw_kanter(alpha, n, rng)
    with np.errstate(divide="ignore", over="ignore"):
        return np.exp((1.0 - alpha) / alpha * (log_a - np.log(e)))


def sample_observations(model: ObservationModel, n: int, seed: SeedSpec) -> np.ndarray:
    return draw_observations(model, n, seed.generator())


def sample_steps(model: StepModel, n: int, seed: SeedSpec) -> np.ndarray:
    return draw_steps(model, n, seed.generator())


def sample_one_sided_stable(alpha: float, n: int, seed: SeedSpec) -> np.ndarray:
    """``n`` iid positive stable variates S with ``E exp(-lam S) = exp(-lam**alpha)``.

    Uses Kanter's exact representation ``S = (a(U) / E)**((1 - alpha) / alpha)``.
    The subordinator driving heavy Pareto renewals has Laplace exponent
    ``gamma(1 - alpha) * lam**alpha``; multiply by
    ``subordinator_scale(alpha)`` to get its value at time one.
    """
    _check_stable_index(alpha)
    if n < 0:
        raise ValueError("n must be nonnegative")
    return draw_positive_stable(alpha, n, seed.generator())


def subordinator_scale(alpha: float) -> float:
    """Scale turning ``exp(-lam**alpha)`` into ``exp(-gamma(1-alpha) lam**alpha)``."""
    _check_stable_index(alpha)
    return math.gamma(1.0 - alpha) ** (1.0 / alpha)
