"""Command-line front end: ``simulate``, ``limit`` and ``verify``.

Exit codes: 0 when every statistical gate passes, 2 when a gate fails,
1 on usage or runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from . import limitlaws as ll
from .harness import ComparisonReport, ExperimentConfig, run_extremal_path_fdd, run_finite_mean, run_infinite_mean
from .variates import ObservationModel, SeedSpec, StepModel

SEED_ENV = "RENEWAL_EXTREMES_SEED"
EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2

# options whose values may start with "-" (negative marks)
_VALUE_OPTS = {"--grid", "--fdd-x", "--pair", "--x", "--c", "--t"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def parse_obs(text: str) -> ObservationModel:
    name, _, arg = text.partition(":")
    if name == "exp" and not arg:
        return ObservationModel.exponential()
    if name == "normal" and not arg:
        return ObservationModel.normal()
    if name == "pareto" and arg:
        return ObservationModel.pareto(float(arg))
    raise UsageError(f"unknown observation law {text!r} (exp | normal | pareto:ALPHA)")


def parse_steps(text: str) -> StepModel:
    parts = text.split(":")
    name, args = parts[0], [float(p) for p in parts[1:]]
    makers = {"const": StepModel.constant, "exp": StepModel.exponential, "uniform": StepModel.uniform}
    if name in makers and len(args) == 1:
        return makers[name](args[0])
    if name == "pareto" and len(args) in (1, 2):
        return StepModel.heavy_pareto(*args)
    raise UsageError(f"unknown step law {text!r} (const:MU | exp:MU | uniform:MU | pareto:ALPHA[:Y0])")


def parse_tail(text: str) -> ll.TailMeasure:
    name, _, arg = text.partition(":")
    if name == "gumbel" and not arg:
        return ll.TailMeasure.gumbel()
    if name == "frechet" and arg:
        return ll.TailMeasure.frechet(float(arg))
    raise UsageError(f"unknown tail {text!r} (gumbel | frechet:ALPHA)")


def fmt(value: float) -> str:
    """Plain decimal with 12 digits; exponent form outside a readable range."""
    if value == 0 or 1e-4 <= abs(value) < 1e6:
        return f"{value:.12f}"
    return f"{value:.11e}"


def _resolve_seed(seed: int | None, default: int = 0) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")
    return default


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_ecdf_csv(path: Path, report: ComparisonReport, k: int) -> None:
    rank = report.ranks[k - 1]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "ecdf", "analytic", "stderr", "z"])
        for p in rank.points:
            writer.writerow([repr(p.x), repr(p.empirical), repr(p.analytic), repr(p.stderr), repr(p.z)])


def build_config(args) -> ExperimentConfig:
    if args.grid is None:
        raise UsageError("--grid is required")
    obs = parse_obs(args.obs)
    if args.steps is None and not args.dependent:
        raise UsageError("--steps is required")
    steps = parse_steps(args.steps) if args.steps is not None else None
    if args.regime == "infinite" and steps is not None and steps.finite_mean:
        raise UsageError("regime mismatch: --regime infinite needs pareto steps with alpha in (0, 1)")
    if args.regime == "finite" and steps is not None and not steps.finite_mean:
        raise UsageError("regime mismatch: --regime finite needs finite-mean steps")
    if args.fdd_x and not args.fdd:
        raise UsageError("--fdd-x needs --fdd")
    if args.fdd and len(args.fdd) > 1 and not args.fdd_x:
        raise UsageError("--fdd with several times needs --fdd-x")
    pairs = tuple(tuple(p) for p in args.pair) if args.pair else None
    if pairs and any(len(p) != 2 for p in pairs):
        raise UsageError("--pair takes X1,X2")
    return ExperimentConfig(
        regime=args.regime,
        obs_model=obs,
        step_model=steps,
        t=args.t,
        c=args.c,
        k_max=args.k_max,
        n_reps=args.reps,
        master_seed=_resolve_seed(args.seed),
        eval_grid=tuple(args.grid),
        joint_pairs=pairs,
        dependent=args.dependent,
        z_crit=args.z_crit,
        n_mc=args.n_mc,
        threads=args.threads,
    )


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    config = build_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_finite_mean(config) if config.regime == "finite" else run_infinite_mean(config)
    experiments = [{"name": report.experiment, "passed": report.passed}]
    if args.fdd:
        fdd_cfg = dataclasses.replace(config, s_grid=tuple(args.fdd), fdd_x=tuple(args.fdd_x or ()))
        fdd = run_extremal_path_fdd(fdd_cfg)
        report.joint.extend(fdd.joint)
        report.passed = report.passed and fdd.passed
        experiments.append({"name": fdd.experiment, "passed": fdd.passed})
    files = [out / "report.json"]
    _atomic_write(files[0], _dump(report.to_dict()))
    for k in range(1, config.k_max + 1):
        path = out / f"ecdf_k{k}.csv"
        write_ecdf_csv(path, report, k)
        files.append(path)
    manifest = {
        "config": config.to_dict(),
        "version": __version__,
        "duration_s": time.perf_counter() - started,
        "experiments": experiments,
        "passed": report.passed,
        "outputs": [str(p) for p in files],
    }
    _atomic_write(out / "manifest.json", _dump(manifest))
    print(f"{report.experiment}: {'PASS' if report.passed else 'FAIL'} "
          f"(max |z| = {report.max_abs_z():.2f}, KS = {', '.join(f'{r.ks:.4f}' for r in report.ranks)})")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_limit(args) -> int:
    values: list[float]
    if args.law == "q-gamma":
        if args.x < 0 or args.k < 1:
            raise UsageError("q-gamma needs k >= 1 and x >= 0")
        values = [ll.reg_inc_gamma_Q(args.k, args.x)]
    elif args.law == "ml":
        values = [ll.mittag_leffler_fn(args.alpha, args.z)]
    elif args.law == "mu":
        tail = parse_tail(args.tail)
        values = [ll.mu_mass(tail, x) for x in args.x]
    elif args.law == "kth-cdf":
        tail = parse_tail(args.tail)
        if args.alpha is None:
            spec = ll.LimitSpec("finite", args.k, tail, c=args.c)
            values = [float(ll.finite_mean_kth_cdf(spec, x)) for x in args.x]
        else:
            spec = ll.LimitSpec("infinite", args.k, tail, c=args.c, alpha=args.alpha)
            seed = _resolve_seed(args.seed)
            values = []
            for j, x in enumerate(args.x):
                est = ll.infinite_mean_kth_cdf(spec, x, args.n_mc, SeedSpec(seed, j))
                values.append(est.series if est.series is not None else est.value)
    elif args.law == "top2":
        values = [ll.finite_mean_top2_joint(args.c, parse_tail(args.tail), args.x1, args.x2)]
    elif args.law == "fdd":
        values = [ll.g_extremal_fdd(parse_tail(args.tail), args.s, args.x)]
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown law {args.law}")
    for v in values:
        print(fmt(v))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import SuiteSettings, run_suite

    started = time.perf_counter()
    settings = SuiteSettings(seed=_resolve_seed(args.seed, default=7), quick=args.quick, threads=args.threads)
    print(f"renewal-extremes {__version__} verify (seed={settings.seed}, quick={settings.quick})")
    results = run_suite(settings, echo=print)
    passed = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = {
            "seed": settings.seed,
            "quick": settings.quick,
            "passed": passed,
            "criteria": [
                {"id": r.cid, "name": r.name, "passed": r.passed, "detail": _finite(r.detail)}
                for r in results
            ],
        }
        _atomic_write(out / "verify_report.json", _dump(report))
        manifest = {
            "version": __version__,
            "duration_s": time.perf_counter() - started,
            "seconds": {str(r.cid): r.seconds for r in results},
            "passed": passed,
            "outputs": [str(out / "verify_report.json")],
        }
        _atomic_write(out / "manifest.json", _dump(manifest))
    return EXIT_OK if passed else EXIT_FAILED


def _finite(obj):
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "item"):
        return _finite(obj.item())
    return obj


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="renewal-extremes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a Monte Carlo comparison")
    sim.add_argument("--regime", choices=["finite", "infinite"], required=True)
    sim.add_argument("--obs", required=True, help="exp | normal | pareto:ALPHA")
    sim.add_argument("--steps", help="const:MU | exp:MU | uniform:MU | pareto:ALPHA[:Y0]")
    sim.add_argument("--t", type=float, required=True)
    sim.add_argument("--c", type=float, default=1.0)
    sim.add_argument("--k-max", type=int, default=1)
    sim.add_argument("--reps", type=int, default=10_000)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--grid", type=_floats)
    sim.add_argument("--pair", type=_floats, action="append", help="X1,X2 for the top-2 joint law")
    sim.add_argument("--dependent", action="store_true", help="couple steps to observations: Y = 1 + min(X, 10)")
    sim.add_argument("--fdd", type=_floats, help="path times s1,s2,...")
    sim.add_argument("--fdd-x", type=_floats, help="marks x1,x2,... for --fdd")
    sim.add_argument("--z-crit", type=float, default=4.0)
    sim.add_argument("--n-mc", type=int, default=1_000_000)
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    lim = sub.add_parser("limit", help="evaluate a limiting law")
    laws = lim.add_subparsers(dest="law", required=True, parser_class=_Parser)
    q = laws.add_parser("q-gamma", help="regularised upper incomplete gamma Q(k, x)")
    q.add_argument("k", type=int)
    q.add_argument("x", type=float)
    ml = laws.add_parser("ml", help="Mittag-Leffler function E_alpha(z), -10 <= z <= 0")
    ml.add_argument("alpha", type=float)
    ml.add_argument("z", type=float)
    mu = laws.add_parser("mu", help="tail measure mass mu(x, inf]")
    mu.add_argument("--tail", required=True)
    mu.add_argument("x", type=float, nargs="+")
    kth = laws.add_parser("kth-cdf", help="limit CDF of the k-th largest normalised mark")
    kth.add_argument("--tail", required=True)
    kth.add_argument("--k", type=int, default=1)
    kth.add_argument("--c", type=float, default=1.0)
    kth.add_argument("--alpha", type=float, help="stable index; selects the infinite-mean limit")
    kth.add_argument("--n-mc", type=int, default=1_000_000)
    kth.add_argument("--seed", type=int)
    kth.add_argument("x", type=float, nargs="+")
    top2 = laws.add_parser("top2", help="joint limit P(M1 <= x1, M2 <= x2), x1 > x2")
    top2.add_argument("--tail", required=True)
    top2.add_argument("--c", type=float, default=1.0)
    top2.add_argument("x1", type=float)
    top2.add_argument("x2", type=float)
    fdd = laws.add_parser("fdd", help="G-extremal finite-dimensional distribution")
    fdd.add_argument("--tail", required=True)
    fdd.add_argument("--s", type=_floats, required=True)
    fdd.add_argument("--x", type=_floats, required=True)
    lim.set_defaults(func=cmd_limit)

    ver = sub.add_parser("verify", help="run the fixed-seed acceptance suite")
    ver.add_argument("--quick", action="store_true")
    ver.add_argument("--seed", type=int)
    ver.add_argument("--threads", type=int, default=1)
    ver.add_argument("--out")
    ver.set_defaults(func=cmd_verify)
    return parser


def _join_values(argv: list[str]) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = make_parser()
    args = parser.parse_args(_join_values(argv))
    try:
        return args.func(args)
    except (UsageError, ValueError, ArithmeticError) as exc:
        print(f"renewal-extremes: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RuntimeError as exc:
        print(f"renewal-extremes: runtime error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
