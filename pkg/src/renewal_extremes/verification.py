"""Fixed-seed acceptance suite shared by ``renewal-extremes verify`` and the tests."""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import limitlaws as ll
from .harness import (
    EcdfTable,
    ExperimentConfig,
    ks_two_sample,
    run_extremal_path_fdd,
    run_finite_mean,
    run_finite_mean_dependent,
    run_infinite_mean,
)
from .renewal import sample_hitting_time_at_one, sample_passage_ratio
from .variates import ObservationModel, SeedSpec, StepModel


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.cid:>2} {self.name}  ({self.seconds:.1f}s)"


@dataclass(frozen=True)
class SuiteSettings:
    seed: int = 7
    quick: bool = False
    threads: int = 1

    def reps(self, full: int, quick: int) -> int:
        return quick if self.quick else full


def _finite_base(s: SuiteSettings, obs: ObservationModel, grid, k_max: int) -> ExperimentConfig:
    return ExperimentConfig(
        regime="finite",
        obs_model=obs,
        step_model=StepModel.exponential(2.0),
        t=1e4,
        c=1.0,
        k_max=k_max,
        n_reps=s.reps(100_000, 10_000),
        master_seed=s.seed,
        eval_grid=tuple(grid),
        threads=s.threads,
    )


def _points(report, k: int = 1) -> list[dict]:
    return [dataclasses.asdict(p) for p in report.ranks[k - 1].points]


def criterion_1(s: SuiteSettings) -> CriterionResult:
    cfg = _finite_base(s, ObservationModel.exponential(), (-1, 0, 1, 2), 1)
    t0 = time.perf_counter()
    rep = run_finite_mean(cfg)
    secs = time.perf_counter() - t0
    rank = rep.ranks[0]
    ok = all(abs(p.z) <= 4 for p in rank.points) and rank.ks <= 1.95 / math.sqrt(cfg.n_reps) and secs <= 60
    return CriterionResult(
        1, "finite mean, k=1, exponential obs vs Gumbel", ok,
        {"points": _points(rep), "ks": rank.ks, "ks_crit": 1.95 / math.sqrt(cfg.n_reps), "runtime_limit_s": 60},
        secs,
    )


def criterion_2(s: SuiteSettings) -> CriterionResult:
    cfg = dataclasses.replace(
        _finite_base(s, ObservationModel.pareto(1.0), (0.5, 1, 2, 4), 2), joint_pairs=((2.0, 1.0),)
    )
    rep = run_finite_mean(cfg)
    pair = rep.joint[0]
    target = math.exp(-1) * 1.5
    ok = abs(pair.empirical - target) <= 3 * pair.stderr and all(abs(p.z) <= 4 for p in rep.ranks[1].points)
    return CriterionResult(
        2, "finite mean, top-2 joint at (2,1), Pareto obs", ok,
        {"empirical": pair.empirical, "analytic": pair.analytic, "target": target,
         "stderr": pair.stderr, "z": pair.z, "k2_points": _points(rep, 2)},
    )


def criterion_3(s: SuiteSettings) -> CriterionResult:
    cfg = _finite_base(s, ObservationModel.exponential(), (-1, 0, 1, 2), 1)
    rep = run_finite_mean_dependent(cfg)
    rank = rep.ranks[0]
    ok = all(abs(p.z) <= 4 for p in rank.points) and rank.ks <= 1.95 / math.sqrt(cfg.n_reps)
    return CriterionResult(
        3, "finite mean with steps 1+min(X,10)", ok,
        {"points": _points(rep), "ks": rank.ks, "mu": cfg.coupling.mean(cfg.obs_model)},
    )


def criterion_4(s: SuiteSettings) -> CriterionResult:
    n = s.reps(1_000_000, 200_000)
    rows = []
    for j, alpha in enumerate((0.3, 0.5, 0.7)):
        w = sample_hitting_time_at_one(alpha, n, SeedSpec(s.seed, j, 4))
        for m in (1, 2):
            vals = w**m
            est = float(vals.mean())
            se = float(vals.std(ddof=1) / math.sqrt(n))
            target = ll.hitting_time_moment(alpha, m)
            rows.append({"alpha": alpha, "moment": m, "sample": est, "target": target, "stderr": se,
                         "ok": abs(est - target) <= 3 * se})
    return CriterionResult(4, "hitting-time moments (Mittag-Leffler)", all(r["ok"] for r in rows), {"rows": rows})


def criterion_5(s: SuiteSettings) -> CriterionResult:
    step = StepModel.heavy_pareto(0.5, 1.0)
    n = 10_000
    t = 1e6
    ratios = np.array([sample_passage_ratio(step, t, 1.0, SeedSpec(s.seed, r, 5)) for r in range(n)])
    mean = float(ratios.mean())
    se = float(ratios.std(ddof=1) / math.sqrt(n))
    w = sample_hitting_time_at_one(0.5, 1_000_000, SeedSpec(s.seed, 0, 6))
    ks = ks_two_sample(EcdfTable.from_sample(ratios), EcdfTable.from_sample(w))
    ok = abs(mean - 2 / math.pi) <= 3 * se and ks <= 0.02
    return CriterionResult(
        5, "passage-time norming tau(t)/sqrt(t) -> W(1)", ok,
        {"mean": mean, "target": 2 / math.pi, "stderr": se, "ks": ks, "ks_limit": 0.02},
    )


def _infinite_config(s: SuiteSettings) -> ExperimentConfig:
    return ExperimentConfig(
        regime="infinite",
        obs_model=ObservationModel.pareto(1.0),
        step_model=StepModel.heavy_pareto(0.5, 1.0),
        t=1e6,
        c=1.0,
        k_max=2,
        n_reps=s.reps(100_000, 20_000),
        master_seed=s.seed,
        eval_grid=(0.5, 1.0, 2.0, 4.0),
        threads=s.threads,
    )


def criteria_6_7(s: SuiteSettings) -> list[CriterionResult]:
    cfg = _infinite_config(s)
    t0 = time.perf_counter()
    rep = run_infinite_mean(cfg)
    secs = time.perf_counter() - t0
    k1 = rep.ranks[0]
    series = {p.x: ll.mittag_leffler_fn(0.5, -1.0 / (p.x * math.sqrt(math.pi))) for p in k1.points}
    ok6 = all(abs(p.z) <= 4 and p.analytic == series[p.x] for p in k1.points) and secs <= 300
    at_one = next(p for p in rep.ranks[1].points if p.x == 1.0)
    ok7 = abs(at_one.z) <= 4
    return [
        CriterionResult(6, "infinite mean, k=1 vs Mittag-Leffler series", ok6,
                        {"points": _points(rep), "ks": k1.ks, "runtime_limit_s": 300}, secs),
        CriterionResult(7, "infinite mean, k=2 at x=1 vs E Q(2, W)", ok7,
                        {"point": dataclasses.asdict(at_one)}),
    ]


def criterion_8(s: SuiteSettings) -> CriterionResult:
    base = _finite_base(s, ObservationModel.pareto(1.0), (1.0,), 1)
    cfg = dataclasses.replace(base, s_grid=(1.0, 2.0), fdd_x=(1.0, 1.0))
    rep = run_extremal_path_fdd(cfg)
    fdd = rep.joint[0]
    ok_fdd = abs(fdd.empirical - math.exp(-2)) <= 3 * fdd.stderr
    # k=1 must reproduce the order-statistic code path on shared seeds
    small = dataclasses.replace(
        _finite_base(s, ObservationModel.exponential(), (-1, 0, 1, 2), 1), n_reps=2000
    )
    top = run_finite_mean(small)
    path = run_extremal_path_fdd(dataclasses.replace(small, s_grid=(1.0,)))
    same = bool(np.array_equal(top.samples[:, 0], path.samples[:, 0])) and [
        p.empirical for p in top.ranks[0].points
    ] == [j.empirical for j in path.joint]
    return CriterionResult(
        8, "extremal-process fdd at s=(1,2), x=(1,1)", ok_fdd and same,
        {"empirical": fdd.empirical, "target": math.exp(-2), "stderr": fdd.stderr, "k1_coincides": same},
    )


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def criterion_9(s: SuiteSettings) -> CriterionResult:
    checks = {}
    for x in (0.0, 0.5, 1.0, 3.0, 10.0):
        checks[f"Q(1,{x})"] = _rel(ll.reg_inc_gamma_Q(1, x), math.exp(-x))
    checks["Q(2,1)"] = _rel(ll.reg_inc_gamma_Q(2, 1.0), 2 * math.exp(-1))
    checks["E_1(-1)"] = _rel(ll.mittag_leffler_fn(1.0, -1.0), math.exp(-1))
    checks["E_1/2(-1)"] = _rel(ll.mittag_leffler_fn(0.5, -1.0), math.e * special.erfc(1.0))
    ok_id = all(v <= 1e-10 for v in checks.values())
    tail = ll.TailMeasure.gumbel()
    n = s.reps(100_000, 10_000)
    counts = np.array([len(ll.sample_prm_restriction(tail, 2.0, 0.0, SeedSpec(s.seed, r, 9))) for r in range(n)])
    mean = float(counts.mean())
    se = math.sqrt(2.0 / n)
    ok_prm = abs(mean - 2.0) <= 3 * se
    return CriterionResult(
        9, "analytic identities and PRM oracle", ok_id and ok_prm,
        {"relative_errors": checks, "prm_mean_count": mean, "prm_target": 2.0, "prm_stderr": se},
    )


def criterion_10(s: SuiteSettings) -> CriterionResult:
    cfg = dataclasses.replace(
        _finite_base(s, ObservationModel.pareto(1.0), (0.5, 1, 2, 4), 2), n_reps=500, threads=1
    )
    a = json.dumps(run_finite_mean(cfg).to_dict(), sort_keys=True)
    b = json.dumps(run_finite_mean(cfg).to_dict(), sort_keys=True)
    perm = np.random.default_rng(s.seed).permutation(cfg.n_reps)
    c = json.dumps(run_finite_mean(cfg, order=perm).to_dict(), sort_keys=True)
    icfg = dataclasses.replace(_infinite_config(s), n_reps=300, n_mc=20_000, n_mc_curve=20_000)
    d = json.dumps(run_infinite_mean(icfg).to_dict(), sort_keys=True)
    e = json.dumps(run_infinite_mean(icfg, order=perm[perm < 300]).to_dict(), sort_keys=True)
    ok = a == b == c and d == e
    return CriterionResult(10, "determinism and replication-order independence", ok,
                           {"repeat_identical": a == b, "permuted_identical": a == c and d == e})


CRITERIA: list[Callable[[SuiteSettings], CriterionResult | list[CriterionResult]]] = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criteria_6_7, criterion_8, criterion_9, criterion_10,
]


def run_suite(settings: SuiteSettings, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results: list[CriterionResult] = []
    for fn in CRITERIA:
        t0 = time.perf_counter()
        out = fn(settings)
        elapsed = time.perf_counter() - t0
        for res in out if isinstance(out, list) else [out]:
            if not res.seconds:
                res.seconds = elapsed
            results.append(res)
            if echo:
                echo(res.line())
    return results
