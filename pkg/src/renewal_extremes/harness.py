"""Monte Carlo experiments comparing simulated order statistics at renewal
times against their limiting laws."""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import limitlaws as ll
from .extremes import MarkedPointSet, build_point_set, restrict, t1_path, top_k
from .norming import norming_for, step_norming_for
from .renewal import RenewalPath, block_size, draw_hitting_time_at_one, grow_path, passage_times
from .variates import (
    MDAFamily,
    ObservationLaw,
    ObservationModel,
    SeedSpec,
    StepKind,
    StepModel,
    draw_observations,
)

log = logging.getLogger(__name__)

STEP_STREAM = 0
OBS_STREAM = 1
ANALYTIC_STREAM = 1000


@dataclass(frozen=True)
class CappedCoupling:
    """Dependent steps ``Y_i = shift + min(X_i, cap)`` built from the observations."""

    shift: float = 1.0
    cap: float = 10.0

    def steps(self, observations: np.ndarray) -> np.ndarray:
        return self.shift + np.minimum(observations, self.cap)

    def mean(self, obs: ObservationModel) -> float:
        # E min(X, cap) = integral of P(X > x) over [0, cap]
        if obs.law is ObservationLaw.EXPONENTIAL:
            return self.shift + 1.0 - math.exp(-self.cap)
        if obs.law is ObservationLaw.PARETO:
            a = obs.alpha
            if self.cap <= 1:
                return self.shift + self.cap
            upper = math.log(self.cap) if a == 1 else (self.cap ** (1 - a) - 1) / (1 - a)
            return self.shift + 1.0 + upper
        raise ValueError("coupled steps need nonnegative observations (exponential or Pareto)")


@dataclass(frozen=True)
class ExperimentConfig:
    regime: str
    obs_model: ObservationModel
    step_model: StepModel | None
    t: float
    c: float = 1.0
    k_max: int = 1
    n_reps: int = 1000
    master_seed: int = 0
    eval_grid: tuple[float, ...] = ()
    s_grid: tuple[float, ...] = ()
    fdd_x: tuple[float, ...] = ()
    joint_pairs: tuple[tuple[float, float], ...] | None = None
    dependent: bool = False
    coupling: CappedCoupling = CappedCoupling()
    z_crit: float = 4.0
    ks_coef: float = 1.95
    n_mc: int = 1_000_000
    n_mc_curve: int = 200_000
    threads: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "eval_grid", tuple(float(x) for x in self.eval_grid))
        object.__setattr__(self, "s_grid", tuple(float(s) for s in self.s_grid))
        object.__setattr__(self, "fdd_x", tuple(float(x) for x in self.fdd_x))
        if self.joint_pairs is not None:
            object.__setattr__(
                self, "joint_pairs", tuple((float(a), float(b)) for a, b in self.joint_pairs)
            )
        self.validate()

    def validate(self) -> None:
        if self.regime not in ("finite", "infinite"):
            raise ValueError("regime must be 'finite' or 'infinite'")
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError("t must be positive and finite")
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        if self.n_reps < 1 or self.k_max < 1:
            raise ValueError("n_reps and k_max must be at least 1")
        if self.dependent:
            if self.regime != "finite":
                raise ValueError("dependent sampling is only available in the finite regime")
            if self.step_model is None:
                self.coupling.mean(self.obs_model)
            elif self.step_model.kind is not StepKind.CONSTANT:
                raise ValueError(
                    "dependent runs use the coupled steps 1 + min(X, 10); "
                    "give no step law or constant steps"
                )
        elif self.step_model is None:
            raise ValueError("a step law is required")
        if self.regime == "finite" and self.step_model is not None and not self.step_model.finite_mean:
            raise ValueError("finite regime needs finite-mean steps")
        if self.regime == "infinite" and self.step_model.kind is not StepKind.PARETO:
            raise ValueError("infinite regime needs heavy Pareto steps")
        if self.obs_model.family is MDAFamily.FRECHET and any(
            x <= 0 for x in self.eval_grid + self.fdd_x
        ):
            raise ValueError("Frechet evaluation points must be positive")
        if self.fdd_x and len(self.fdd_x) != len(self.s_grid):
            raise ValueError("fdd_x must have one mark per s_grid time")
        if self.s_grid and (self.s_grid[0] <= 0 or any(np.diff(self.s_grid) <= 0)):
            raise ValueError("s_grid must be positive and strictly increasing")
        for x1, x2 in self.joint_pairs or ():
            if not x1 > x2:
                raise ValueError("joint pairs need x1 > x2")

    @property
    def coupled(self) -> bool:
        return self.dependent and self.step_model is None

    @property
    def mu(self) -> float:
        if self.coupled:
            return self.coupling.mean(self.obs_model)
        return self.step_model.mean

    @property
    def g(self) -> float:
        """Time scale of the point process: ``t / mu`` or ``d_tilde(t)``."""
        if self.regime == "finite":
            return self.t / self.mu
        return float(step_norming_for(self.step_model).d_tilde(self.t))

    @property
    def tail(self) -> ll.TailMeasure:
        return ll.TailMeasure.for_observations(self.obs_model)

    @property
    def ks_crit(self) -> float:
        return self.ks_coef / math.sqrt(self.n_reps)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        return _plain(out)


def _plain(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


@dataclass(frozen=True)
class EcdfTable:
    values: np.ndarray

    @classmethod
    def from_sample(cls, sample) -> EcdfTable:
        values = np.sort(np.asarray(sample, dtype=float))
        if values.size == 0:
            raise ValueError("empty sample")
        return cls(values)

    @property
    def n(self) -> int:
        return self.values.size

    def __call__(self, x):
        """``(count <= x) / n``."""
        out = np.searchsorted(self.values, x, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    def left(self, x):
        """``(count < x) / n``, the left limit at ``x``."""
        out = np.searchsorted(self.values, x, side="left") / self.n
        return float(out) if np.ndim(out) == 0 else out


def ks_distance(ecdf: EcdfTable, cdf: Callable, grid=None) -> float:
    """Two-sided sup distance between an ECDF and a CDF.

    Both one-sided limits are compared at every distinct sample value and at
    every point of ``grid``; the left limit of ``cdf`` is read one ulp below.
    With a continuous ``cdf`` this is the exact Kolmogorov-Smirnov statistic.
    """
    if ecdf.n == 0:
        raise ValueError("empty sample")
    pts = np.unique(ecdf.values)
    if grid is not None:
        pts = np.union1d(pts, np.asarray(grid, dtype=float))
    with np.errstate(over="ignore", invalid="ignore"):
        f = np.asarray(cdf(pts), dtype=float)
        f_left = np.asarray(cdf(np.nextafter(pts, -np.inf)), dtype=float)
    right = np.abs(ecdf(pts) - f)
    left = np.abs(ecdf.left(pts) - f_left)
    return float(max(np.max(right), np.max(left)))


def ks_two_sample(a: EcdfTable, b: EcdfTable) -> float:
    """Sup distance between two ECDFs, evaluated on the union of their jumps."""
    pts = np.union1d(a.values, b.values)
    return float(np.max(np.abs(a(pts) - b(pts))))


def cvm_statistic(ecdf: EcdfTable, cdf: Callable) -> float:
    """Cramer-von Mises ``n * omega^2``."""
    n = ecdf.n
    with np.errstate(over="ignore", invalid="ignore"):
        f = np.asarray(cdf(ecdf.values), dtype=float)
    i = np.arange(1, n + 1)
    return float(1.0 / (12 * n) + np.sum((f - (2 * i - 1) / (2 * n)) ** 2))


def binomial_stderr(p_hat: float, n: int) -> float:
    return math.sqrt(p_hat * (1.0 - p_hat) / n)


def z_score(empirical: float, analytic: float, se: float, analytic_se: float = 0.0) -> float:
    denom = math.hypot(se, analytic_se)
    diff = empirical - analytic
    if denom == 0:
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return diff / denom


@dataclass
class GridComparison:
    x: float
    empirical: float
    analytic: float
    stderr: float
    analytic_stderr: float
    z: float


@dataclass
class RankReport:
    k: int
    points: list[GridComparison]
    ks: float
    cvm: float
    ks_crit: float
    passed: bool


@dataclass
class JointComparison:
    kind: str
    s: list[float]
    x: list[float]
    empirical: float
    analytic: float
    stderr: float
    analytic_stderr: float
    z: float
    passed: bool


@dataclass
class ComparisonReport:
    experiment: str
    regime: str
    n_reps: int
    z_crit: float
    ks_crit: float
    config: dict
    ranks: list[RankReport] = field(default_factory=list)
    joint: list[JointComparison] = field(default_factory=list)
    passed: bool = True
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "samples"}
        out["ranks"] = [dataclasses.asdict(r) for r in self.ranks]
        out["joint"] = [dataclasses.asdict(j) for j in self.joint]
        return _plain(out)

    def max_abs_z(self) -> float:
        zs = [abs(p.z) for r in self.ranks for p in r.points] + [abs(j.z) for j in self.joint]
        return max(zs) if zs else 0.0


# -- per-replication simulation ------------------------------------------------


def _coupled_path(config: ExperimentConfig, rng: np.random.Generator, horizon: float):
    size = block_size(StepModel.constant(config.mu), horizon)
    xs = [draw_observations(config.obs_model, size, rng)]
    total = config.coupling.steps(xs[0]).sum()
    while not total > horizon:
        xs.append(draw_observations(config.obs_model, size, rng))
        total += config.coupling.steps(xs[-1]).sum()
    obs = np.concatenate(xs)
    path = RenewalPath.from_steps(config.coupling.steps(obs))
    while not path.cumsum[-1] > horizon:
        obs = np.concatenate([obs, draw_observations(config.obs_model, size, rng)])
        path = RenewalPath.from_steps(config.coupling.steps(obs))
    return path, obs


def simulate_replication(
    config: ExperimentConfig, rep: int, multipliers: Sequence[float]
) -> tuple[MarkedPointSet, np.ndarray]:
    """Point set ``N_t`` up to the last needed passage time, and the window
    endpoints ``tau(t m) / g`` for each multiplier ``m``."""
    seed = SeedSpec(config.master_seed, rep)
    mult = np.asarray(multipliers, dtype=float)
    horizon = config.t * float(mult.max())
    if config.coupled:
        path, obs = _coupled_path(config, seed.substream(OBS_STREAM).generator(), horizon)
    else:
        path = grow_path(config.step_model, seed.substream(STEP_STREAM).generator(), horizon)
        obs = None
    taus = passage_times(path, config.t * mult)
    n = int(taus.max())
    if obs is None:
        obs = draw_observations(config.obs_model, n, seed.substream(OBS_STREAM).generator())
    g = config.g
    points = build_point_set(obs, norming_for(config.obs_model), g, n, floor=config.tail.floor)
    # same expression as the point times, so the tau-th point sits exactly on the boundary
    windows = taus.astype(float) / g
    return points, windows


def _top_record(config: ExperimentConfig, rep: int) -> np.ndarray:
    points, windows = simulate_replication(config, rep, [config.c])
    return top_k(restrict(points, windows[0]), config.k_max).padded()


def _path_record(config: ExperimentConfig, rep: int) -> np.ndarray:
    points, windows = simulate_replication(config, rep, config.s_grid)
    return np.asarray(t1_path(points)(windows), dtype=float).reshape(-1)


def collect(
    config: ExperimentConfig,
    record: Callable[[ExperimentConfig, int], np.ndarray],
    width: int,
    order: Sequence[int] | None = None,
) -> np.ndarray:
    """Run every replication (in ``order`` if given) and stack the records by index."""
    order = list(range(config.n_reps)) if order is None else list(order)
    if sorted(order) != list(range(config.n_reps)):
        raise ValueError("order must be a permutation of the replication indices")
    out = np.empty((config.n_reps, width))

    def work(chunk):
        for rep in chunk:
            out[rep] = record(config, rep)

    if config.threads <= 1:
        work(order)
    else:
        chunks = [order[i :: config.threads] for i in range(config.threads)]
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(work, chunks))
    return out


# -- comparison ----------------------------------------------------------------


def _analytic_seed(config: ExperimentConfig, offset: int) -> SeedSpec:
    return SeedSpec(config.master_seed, 0, ANALYTIC_STREAM + offset)


def _rank_report(
    config: ExperimentConfig, k: int, sample: np.ndarray, curve: Callable, point_values
) -> RankReport:
    ecdf = EcdfTable.from_sample(sample)
    points = []
    for x, (an, an_se) in zip(config.eval_grid, point_values):
        p_hat = ecdf(x)
        se = binomial_stderr(p_hat, ecdf.n)
        points.append(GridComparison(x, p_hat, an, se, an_se, z_score(p_hat, an, se, an_se)))
    ks = ks_distance(ecdf, curve)
    cvm = cvm_statistic(ecdf, curve)
    passed = all(abs(p.z) <= config.z_crit for p in points) and ks <= config.ks_crit
    return RankReport(k, points, ks, cvm, config.ks_crit, passed)


def _default_pairs(grid: Sequence[float]) -> tuple[tuple[float, float], ...]:
    g = sorted(set(grid))
    return tuple((g[i + 1], g[i]) for i in range(len(g) - 1))


def _finalize(report: ComparisonReport) -> ComparisonReport:
    report.passed = all(r.passed for r in report.ranks) and all(j.passed for j in report.joint)
    return report


def _finite_report(config: ExperimentConfig, samples: np.ndarray, experiment: str) -> ComparisonReport:
    tail = config.tail
    report = ComparisonReport(
        experiment, config.regime, config.n_reps, config.z_crit, config.ks_crit, config.to_dict(),
        samples=samples,
    )
    for k in range(1, config.k_max + 1):
        spec = ll.LimitSpec("finite", k, tail, c=config.c)
        curve = lambda x, spec=spec: ll.finite_mean_kth_cdf(spec, x)
        values = [(float(ll.finite_mean_kth_cdf(spec, x)), 0.0) for x in config.eval_grid]
        report.ranks.append(_rank_report(config, k, samples[:, k - 1], curve, values))
    if config.k_max >= 2:
        pairs = config.joint_pairs if config.joint_pairs is not None else _default_pairs(config.eval_grid)
        for x1, x2 in pairs:
            hits = (samples[:, 0] <= x1) & (samples[:, 1] <= x2)
            p_hat = float(hits.mean())
            an = ll.finite_mean_top2_joint(config.c, tail, x1, x2)
            se = binomial_stderr(p_hat, config.n_reps)
            z = z_score(p_hat, an, se)
            report.joint.append(
                JointComparison("top2", [config.c], [x1, x2], p_hat, an, se, 0.0, z, abs(z) <= config.z_crit)
            )
    return _finalize(report)


def run_finite_mean(config: ExperimentConfig, order: Sequence[int] | None = None) -> ComparisonReport:
    """Finite-mean renewal: k-th largest normalised mark in the window
    ``[0, mu tau(tc) / t]`` against ``Q(k, c mu(x, inf])``."""
    if config.regime != "finite":
        raise ValueError("run_finite_mean needs the finite regime")
    samples = collect(config, _top_record, config.k_max, order)
    name = "finite_mean_dependent" if config.dependent else "finite_mean"
    return _finite_report(config, samples, name)


def run_finite_mean_dependent(config: ExperimentConfig, order: Sequence[int] | None = None) -> ComparisonReport:
    """As ``run_finite_mean`` with steps ``Y_i = 1 + min(X_i, 10)`` coupled to the
    observations.  Constant steps are kept as they are: any coupling is vacuous."""
    step = config.step_model
    if step is not None and step.kind is not StepKind.CONSTANT:
        step = None
    return run_finite_mean(dataclasses.replace(config, dependent=True, step_model=step), order)


def run_infinite_mean(config: ExperimentConfig, order: Sequence[int] | None = None) -> ComparisonReport:
    """Heavy Pareto renewal: k-th largest mark in ``[0, tau(tc) / d_tilde(t)]``
    against ``E Q(k, W(c) mu(x, inf])``."""
    if config.regime != "infinite":
        raise ValueError("run_infinite_mean needs the infinite regime")
    samples = collect(config, _top_record, config.k_max, order)
    tail = config.tail
    alpha = float(config.step_model.alpha)
    report = ComparisonReport(
        "infinite_mean", "infinite", config.n_reps, config.z_crit, config.ks_crit, config.to_dict(),
        samples=samples,
    )
    w_curve = config.c**alpha * draw_hitting_time_at_one(
        alpha, config.n_mc_curve, _analytic_seed(config, 0).generator()
    )
    for k in range(1, config.k_max + 1):
        spec = ll.LimitSpec("infinite", k, tail, c=config.c, alpha=alpha)
        values = []
        for j, x in enumerate(config.eval_grid):
            est = ll.infinite_mean_kth_cdf(spec, x, config.n_mc, _analytic_seed(config, 1 + 100 * k + j))
            if est.series is not None:
                values.append((est.series, 0.0))
            else:
                values.append((est.value, est.stderr))
        curve = ll.MixedKthCdf(k, tail, w_curve)
        report.ranks.append(_rank_report(config, k, samples[:, k - 1], curve, values))
    return _finalize(report)


def run_extremal_path_fdd(config: ExperimentConfig, order: Sequence[int] | None = None) -> ComparisonReport:
    """Joint law of the running-maximum process at the times in ``s_grid``.

    Finite mean: the G-extremal fdd.  Infinite mean: the same fdd with
    times replaced by the stable hitting-time process.
    """
    if not config.s_grid:
        raise ValueError("s_grid is required for fdd experiments")
    samples = collect(config, _path_record, len(config.s_grid), order)
    tail = config.tail
    if config.fdd_x:
        targets = [config.fdd_x]
    elif len(config.s_grid) == 1:
        targets = [(x,) for x in config.eval_grid]
    else:
        raise ValueError("fdd_x is required when s_grid has several times")
    report = ComparisonReport(
        "extremal_path_fdd", config.regime, config.n_reps, config.z_crit, config.ks_crit,
        config.to_dict(), samples=samples,
    )
    for j, x in enumerate(targets):
        hits = np.all(samples <= np.asarray(x), axis=1)
        p_hat = float(hits.mean())
        se = binomial_stderr(p_hat, config.n_reps)
        if config.regime == "finite":
            an, an_se = ll.g_extremal_fdd(tail, config.s_grid, x), 0.0
        else:
            est = ll.subordinated_fdd(
                tail, float(config.step_model.alpha), config.s_grid, x, config.n_mc,
                _analytic_seed(config, 10_000 + j),
            )
            an, an_se = est.value, est.stderr
        z = z_score(p_hat, an, se, an_se)
        report.joint.append(
            JointComparison("fdd", list(config.s_grid), list(x), p_hat, an, se, an_se, z, abs(z) <= config.z_crit)
        )
    return _finalize(report)


def run(config: ExperimentConfig, order: Sequence[int] | None = None) -> ComparisonReport:
    """Dispatch on the configuration: fdd when ``s_grid`` is set, otherwise
    the order-statistic comparison of the configured regime."""
    if config.s_grid:
        return run_extremal_path_fdd(config, order)
    if config.regime == "finite":
        return run_finite_mean(config, order)
    return run_infinite_mean(config, order)


def convergence_check(config: ExperimentConfig, t_small: float, t_large: float) -> tuple[float, float]:
    """KS distance of the top-1 law at two horizons with shared seeds.

    Only monotone in expectation, so a violation is logged, not raised.
    """
    small = run_finite_mean(dataclasses.replace(config, t=t_small, k_max=1)).ranks[0].ks
    large = run_finite_mean(dataclasses.replace(config, t=t_large, k_max=1)).ranks[0].ks
    if large > small:
        log.warning("KS distance grew from %.5f (t=%g) to %.5f (t=%g)", small, t_small, large, t_large)
    return small, large
