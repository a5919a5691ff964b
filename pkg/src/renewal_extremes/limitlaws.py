"""Closed-form and mixed limiting laws for order statistics at renewal times.

Every limit here is a statement about a Poisson random measure with
intensity ``Lebesgue x mu`` on ``[0, inf) x E``, where ``mu(x, inf]`` is
``exp(-x)`` (Gumbel, ``E = (-inf, inf]``) or ``x**-alpha`` (Frechet,
``E = (0, inf]``).  In the infinite-mean regime the time window is the
random hitting time ``W(c)`` of an independent stable subordinator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .extremes import MarkedPointSet, mark_floor
from .renewal import draw_hitting_time_at_one, sample_hitting_time_paths
from .variates import MDAFamily, ObservationModel, SeedSpec


class SeriesDidNotConverge(ArithmeticError):
    pass


@dataclass(frozen=True)
class TailMeasure:
    family: MDAFamily
    alpha: float | None = None

    def __post_init__(self) -> None:
        family = MDAFamily(self.family)
        object.__setattr__(self, "family", family)
        if family is MDAFamily.FRECHET:
            if self.alpha is None or not self.alpha > 0:
                raise ValueError("Frechet tail measure needs alpha > 0")
            object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def gumbel(cls) -> TailMeasure:
        return cls(MDAFamily.GUMBEL)

    @classmethod
    def frechet(cls, alpha: float) -> TailMeasure:
        return cls(MDAFamily.FRECHET, alpha)

    @classmethod
    def for_observations(cls, model: ObservationModel) -> TailMeasure:
        if model.family is MDAFamily.GUMBEL:
            return cls.gumbel()
        return cls.frechet(model.alpha)

    @property
    def floor(self) -> float:
        return mark_floor(self.family)

    def mass(self, x):
        """``mu(x, inf]``, with ``inf`` at or below the floor of the mark space."""
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", divide="ignore"):
            if self.family is MDAFamily.GUMBEL:
                out = np.exp(-x)
            else:
                out = np.where(x > 0, np.abs(x) ** -self.alpha, math.inf)
        return out

    def cdf(self, x):
        """The extreme value law ``G(x) = exp(-mu(x, inf])``."""
        return np.exp(-self.mass(x))

    def sample_above(self, floor: float, n: int, rng: np.random.Generator) -> np.ndarray:
        """Marks drawn from ``mu`` conditioned on ``(floor, inf]``."""
        e = rng.standard_exponential(n)
        if self.family is MDAFamily.GUMBEL:
            return floor + e
        return floor * np.exp(e / self.alpha)


def mu_mass(tail: TailMeasure, x):
    x_arr = np.asarray(x, dtype=float)
    if tail.family is MDAFamily.FRECHET and np.any(x_arr <= 0):
        raise ValueError("Frechet marks must be positive")
    if tail.family is MDAFamily.GUMBEL and np.any(x_arr == -math.inf):
        raise ValueError("Gumbel marks must exceed -inf")
    out = tail.mass(x_arr)
    return float(out) if out.ndim == 0 else out


def reg_inc_gamma_Q(k: int, x):
    """``gamma(k, x) / gamma(k)`` for integer ``k``, i.e. ``P(Poisson(x) <= k - 1)``."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or np.any(np.isnan(x_arr)):
        raise ValueError("x must be nonnegative")
    finite = np.isfinite(x_arr)
    xf = np.where(finite, x_arr, 0.0)
    with np.errstate(divide="ignore"):
        log_x = np.log(xf)
    total = np.exp(-xf)
    for j in range(1, int(k)):
        with np.errstate(invalid="ignore"):
            total = total + np.exp(j * log_x - xf - math.lgamma(j + 1))
    total = np.where(finite, total, 0.0)
    return float(total) if total.ndim == 0 else total


def poisson_pmf(j: int, x):
    x = np.asarray(x, dtype=float)
    if j == 0:
        return np.exp(-x)
    with np.errstate(divide="ignore"):
        return np.exp(j * np.log(x) - x - math.lgamma(j + 1))


def mittag_leffler_fn(alpha: float, z: float, max_terms: int = 200, rel_tol: float = 1e-16) -> float:
    """``sum_n z**n / gamma(1 + n alpha)`` for real ``-10 <= z <= 0``.

    Terms alternate and can grow large before they decay, so the sum is
    carried in extended precision.  Raises ``SeriesDidNotConverge`` when
    ``max_terms`` terms do not reach relative size ``rel_tol``.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if not -10.0 <= z <= 0.0:
        raise ValueError("z must lie in [-10, 0]")
    if z == 0:
        return 1.0
    y = -float(z)
    # peak term magnitude sets the working precision
    peak = max(n * math.log10(y) - math.lgamma(1 + n * alpha) / math.log(10) for n in range(max_terms))
    with mpmath.workdps(int(25 + max(peak, 0.0))):
        zz = mpmath.mpf(z)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for n in range(max_terms):
            term = power / mpmath.gamma(1 + n * mpmath.mpf(alpha))
            total += term
            ratio_next = y * math.exp(math.lgamma(1 + n * alpha) - math.lgamma(1 + (n + 1) * alpha))
            if ratio_next < 1 and abs(term) <= rel_tol * abs(total):
                return float(total)
            power *= zz
    raise SeriesDidNotConverge(
        f"Mittag-Leffler series for alpha={alpha}, z={z} needs more than {max_terms} terms"
    )


def hitting_time_moment(alpha: float, n: int) -> float:
    """``E W(1)**n = n! / (gamma(1 + n alpha) gamma(1 - alpha)**n)``."""
    return math.factorial(n) / (math.gamma(1 + n * alpha) * math.gamma(1 - alpha) ** n)


@dataclass(frozen=True)
class LimitSpec:
    """Which limit to evaluate.

    ``regime`` is ``"finite"`` (window ``[0, c]``) or ``"infinite"``
    (window ``[0, W(c)]`` for the stable index ``alpha``).
    """

    regime: str
    k: int
    tail: TailMeasure
    c: float = 1.0
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.regime not in ("finite", "infinite"):
            raise ValueError("regime must be 'finite' or 'infinite'")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        if self.regime == "infinite" and (self.alpha is None or not 0 < self.alpha < 1):
            raise ValueError("infinite-mean limits need 0 < alpha < 1")


def finite_mean_kth_cdf(spec: LimitSpec, x):
    """Limit of ``P(k-th largest <= x)``: at most ``k - 1`` points of the PRM
    in ``[0, c] x (x, inf]``."""
    if spec.regime != "finite":
        raise ValueError("finite_mean_kth_cdf needs a finite-mean spec")
    if spec.c == 0:
        out = np.ones_like(np.asarray(x, dtype=float))
        return float(out) if out.ndim == 0 else out
    return reg_inc_gamma_Q(spec.k, spec.c * np.asarray(mu_mass(spec.tail, x)))


def finite_mean_top2_joint(c: float, tail: TailMeasure, x1: float, x2: float) -> float:
    """Limit of ``P(M_1 <= x1, M_2 <= x2)`` for ``x1 > x2``."""
    if not x1 > x2:
        raise ValueError("need x1 > x2")
    if c < 0:
        raise ValueError("c must be nonnegative")
    m1 = mu_mass(tail, x1)
    m2 = mu_mass(tail, x2)
    return math.exp(-c * m2) * (1.0 + c * (m2 - m1))


@dataclass(frozen=True)
class MixtureEstimate:
    value: float
    stderr: float
    series: float | None = None


def infinite_mean_kth_cdf(spec: LimitSpec, x: float, n_mc: int, seed: SeedSpec) -> MixtureEstimate:
    """``E Q(k, W(c) mu(x, inf])`` by Monte Carlo over exact ``W(1)`` draws.

    Uses ``W(c) = c**alpha W(1)``.  For ``k = 1`` the Mittag-Leffler value
    ``E_alpha(-c**alpha mu(x, inf] / gamma(1 - alpha))`` is attached when
    its series converges.
    """
    if spec.regime != "infinite":
        raise ValueError("infinite_mean_kth_cdf needs an infinite-mean spec")
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    m = float(mu_mass(spec.tail, x)) * spec.c**spec.alpha
    w = draw_hitting_time_at_one(spec.alpha, n_mc, seed.generator())
    q = reg_inc_gamma_Q(spec.k, w * m)
    value = float(q.mean())
    stderr = float(q.std(ddof=1) / math.sqrt(n_mc)) if n_mc > 1 else math.inf
    series = None
    if spec.k == 1:
        z = -m / math.gamma(1.0 - spec.alpha)
        if z >= -10.0:
            try:
                series = mittag_leffler_fn(spec.alpha, z)
            except SeriesDidNotConverge:
                series = None
    return MixtureEstimate(value=value, stderr=stderr, series=series)


class MixedKthCdf:
    """``x -> E Q(k, W mu(x, inf])`` tabulated on a log-mass grid from a
    fixed sample of ``W``; vectorised, for distance statistics."""

    def __init__(self, k: int, tail: TailMeasure, w_sample: np.ndarray, n_nodes: int = 400):
        self.k = k
        self.tail = tail
        self._log_m = np.linspace(math.log(1e-9), math.log(1e4), n_nodes)
        m = np.exp(self._log_m)
        table = np.empty(n_nodes)
        for j, mj in enumerate(m):
            table[j] = reg_inc_gamma_Q(k, w_sample * mj).mean()
        self._table = table

    def __call__(self, x):
        m = np.asarray(self.tail.mass(x), dtype=float)
        with np.errstate(divide="ignore"):
            log_m = np.log(m)
        out = np.interp(log_m, self._log_m, self._table, left=1.0, right=0.0)
        out = np.where(m == 0, 1.0, np.where(np.isinf(m), 0.0, out))
        return out


def _fdd_log_prob(tail: TailMeasure, times: np.ndarray, x_grid: np.ndarray) -> np.ndarray:
    """Row-wise log of ``prod_j G^{t_j - t_{j-1}}(min_{i >= j} x_i)``."""
    suffix_min = np.minimum.accumulate(x_grid[::-1])[::-1]
    masses = tail.mass(suffix_min)
    incr = np.diff(times, axis=-1, prepend=0.0)
    with np.errstate(invalid="ignore"):
        terms = np.where(incr == 0, 0.0, incr * masses)
    return -terms.sum(axis=-1)


def g_extremal_fdd(tail: TailMeasure, s_grid, x_grid) -> float:
    """``P(xi(s_1) <= x_1, ..., xi(s_k) <= x_k)`` for the G-extremal process."""
    s = np.asarray(s_grid, dtype=float)
    x = np.asarray(x_grid, dtype=float)
    if s.ndim != 1 or s.shape != x.shape or s.size == 0:
        raise ValueError("s_grid and x_grid must be nonempty and of equal length")
    if s[0] <= 0 or np.any(np.diff(s) <= 0):
        raise ValueError("s_grid must be positive and strictly increasing")
    return float(np.exp(_fdd_log_prob(tail, s, x)))


def subordinated_fdd(
    tail: TailMeasure,
    alpha: float,
    s_grid,
    x_grid,
    n_mc: int,
    seed: SeedSpec,
    n_increments: int = 4096,
) -> MixtureEstimate:
    """fdd of ``xi(W(s))`` with ``W`` the independent stable hitting-time process.

    A single time uses the exact ``W(s) = s**alpha W(1)``; several times use
    grid-simulated hitting-time paths.
    """
    s = np.asarray(s_grid, dtype=float)
    x = np.asarray(x_grid, dtype=float)
    if s.ndim != 1 or s.shape != x.shape or s.size == 0:
        raise ValueError("s_grid and x_grid must be nonempty and of equal length")
    if s[0] <= 0 or np.any(np.diff(s) <= 0):
        raise ValueError("s_grid must be positive and strictly increasing")
    if s.size == 1:
        w = s[0] ** alpha * draw_hitting_time_at_one(alpha, n_mc, seed.generator())
        times = w[:, None]
    else:
        times, _ = sample_hitting_time_paths(alpha, s, n_mc, n_increments, seed)
    vals = np.exp(_fdd_log_prob(tail, times, x))
    stderr = float(vals.std(ddof=1) / math.sqrt(n_mc)) if n_mc > 1 else math.inf
    return MixtureEstimate(value=float(vals.mean()), stderr=stderr)


def sample_prm_restriction(tail: TailMeasure, c: float, x_floor: float, seed: SeedSpec) -> MarkedPointSet:
    """Points of ``PRM(Lebesgue x mu)`` in ``[0, c] x (x_floor, inf]``."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    mass = mu_mass(tail, x_floor)
    if not math.isfinite(mass):
        raise ValueError("mu(x_floor, inf] must be finite")
    rng = seed.generator()
    n = int(rng.poisson(c * mass)) if c > 0 else 0
    times = np.sort(rng.uniform(0.0, c, n)) if n else np.empty(0)
    marks = tail.sample_above(x_floor, n, rng)
    return MarkedPointSet(times=times, marks=marks, floor=tail.floor)
