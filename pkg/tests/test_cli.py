import csv
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from renewal_extremes import cli
from renewal_extremes.schema import REPORT_SCHEMA

SIM = [
    "simulate", "--regime", "finite", "--obs", "exp", "--steps", "exp:2",
    "--t", "1e3", "--c", "1", "--k-max", "2", "--reps", "3000", "--seed", "7",
    "--grid", "-1,0,1,2",
]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_writes_files(tmp_path, capsys):
    code, out, _ = run(SIM + ["--out", str(tmp_path)], capsys)
    assert code == 0
    assert "PASS" in out
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "ecdf_k1.csv", "ecdf_k2.csv", "manifest.json", "report.json",
    ]
    report = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["passed"] is True
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["passed"] is True
    assert manifest["config"]["master_seed"] == 7
    for path in manifest["outputs"]:
        assert (tmp_path / path.rsplit("/", 1)[-1]).exists()


def test_csv_round_trip(tmp_path, capsys):
    run(SIM + ["--out", str(tmp_path)], capsys)
    report = json.loads((tmp_path / "report.json").read_text())
    for k in (1, 2):
        with (tmp_path / f"ecdf_k{k}.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == ["x", "ecdf", "analytic", "stderr", "z"]
        assert [float(r["x"]) for r in rows] == [-1.0, 0.0, 1.0, 2.0]
        for row, point in zip(rows, report["ranks"][k - 1]["points"]):
            assert float(row["ecdf"]) == point["empirical"]
            assert float(row["analytic"]) == point["analytic"]
            assert float(row["z"]) == point["z"]


def test_simulate_infinite_with_fdd(tmp_path, capsys):
    argv = [
        "simulate", "--regime", "infinite", "--obs", "pareto:1", "--steps", "pareto:0.5",
        "--t", "1e6", "--reps", "2000", "--grid", "0.5,1,2", "--n-mc", "50000",
        "--fdd", "0.5,1.5", "--fdd-x", "1,2", "--out", str(tmp_path),
    ]
    code, _, _ = run(argv, capsys)
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert [j["kind"] for j in report["joint"]] == ["fdd"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [e["name"] for e in manifest["experiments"]] == ["infinite_mean", "extremal_path_fdd"]


def test_simulate_dependent(tmp_path, capsys):
    argv = SIM[:5] + ["--dependent"] + SIM[7:] + ["--out", str(tmp_path)]
    code, _, _ = run(argv, capsys)
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["experiment"] == "finite_mean_dependent"


def test_statistical_failure_exits_2(tmp_path, capsys):
    # normal maxima at t=10 sit far from the Gumbel law
    argv = [
        "simulate", "--regime", "finite", "--obs", "normal", "--steps", "const:1",
        "--t", "10", "--reps", "20000", "--grid", "-1,0,1", "--out", str(tmp_path),
    ]
    code, out, _ = run(argv, capsys)
    assert code == 2
    assert "FAIL" in out
    assert json.loads((tmp_path / "manifest.json").read_text())["passed"] is False


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--regime", "finite", "--obs", "exp", "--steps", "exp:2", "--t", "1e3", "--out", "x"],
        ["simulate", "--regime", "infinite", "--obs", "exp", "--steps", "const:1", "--t", "1e3",
         "--grid", "0", "--out", "x"],
        ["simulate", "--regime", "finite", "--obs", "exp", "--steps", "pareto:0.5", "--t", "1e3",
         "--grid", "0", "--out", "x"],
        ["simulate", "--regime", "finite", "--obs", "cauchy", "--steps", "exp:2", "--t", "1e3",
         "--grid", "0", "--out", "x"],
        ["simulate", "--regime", "finite", "--obs", "pareto:1", "--steps", "exp:2", "--t", "1e3",
         "--grid", "-1", "--out", "x"],
        ["simulate", "--regime", "finite", "--obs", "exp", "--steps", "exp:2", "--t", "1e3",
         "--grid", "0", "--fdd", "1,2", "--out", "x"],
        ["limit", "q-gamma", "0", "1"],
        ["limit", "q-gamma", "1", "-1"],
        ["limit", "ml", "0.5", "1"],
        ["limit", "ml", "0.5", "-10"],
        ["limit", "mu", "--tail", "frechet:1", "0"],
        ["limit", "top2", "--tail", "gumbel", "0", "1"],
        ["limit", "fdd", "--tail", "gumbel", "--s", "2,1", "--x", "0,0"],
        ["bogus"],
        [],
    ],
)
def test_usage_errors_exit_1(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(cli.main(argv))
    assert exc.value.code == 1
    assert not (tmp_path / "x" / "manifest.json").exists()


@pytest.mark.parametrize(
    "argv,expected",
    [
        (["limit", "q-gamma", "1", "1.0"], ["0.367879441171"]),
        (["limit", "ml", "1.0", "-1.0"], ["0.367879441171"]),
        (["limit", "q-gamma", "1", "0"], ["1.000000000000"]),
        (["limit", "q-gamma", "2", "1"], [f"{2 * math.exp(-1):.12f}"]),
        (["limit", "mu", "--tail", "gumbel", "0", "-1"], ["1.000000000000", f"{math.e:.12f}"]),
        (["limit", "kth-cdf", "--tail", "frechet:1", "--k", "2", "1"], [f"{2 * math.exp(-1):.12f}"]),
        (["limit", "top2", "--tail", "frechet:1", "2", "1"], [f"{1.5 * math.exp(-1):.12f}"]),
        (["limit", "fdd", "--tail", "gumbel", "--s", "1,2", "--x", "0.5,0"], [f"{math.exp(-2):.12f}"]),
    ],
)
def test_limit_outputs(argv, expected, capsys):
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.split() == expected


def test_limit_infinite_kth_cdf_uses_series(capsys):
    from renewal_extremes.limitlaws import mittag_leffler_fn

    code, out, _ = run(["limit", "kth-cdf", "--tail", "frechet:1", "--alpha", "0.5", "--n-mc", "100", "1"], capsys)
    assert code == 0
    assert float(out) == pytest.approx(mittag_leffler_fn(0.5, -1 / math.sqrt(math.pi)), abs=1e-12)


def test_number_format():
    assert cli.fmt(1.0) == "1.000000000000"
    assert cli.fmt(1e-7) == "1.00000000000e-07"
    assert float(cli.fmt(123456.789)) == 123456.789


def test_seed_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RENEWAL_EXTREMES_SEED", "11")
    base = [a for a in SIM if a not in ("--seed", "7")]
    run(base + ["--out", str(tmp_path / "env")], capsys)
    run(SIM[:-2] + ["--grid", "-1,0,1,2", "--seed", "11", "--out", str(tmp_path / "flag")], capsys)
    a = json.loads((tmp_path / "env" / "report.json").read_text())
    b = json.loads((tmp_path / "flag" / "report.json").read_text())
    assert a["config"]["master_seed"] == 11
    assert a == b


def test_bad_environment_seed(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RENEWAL_EXTREMES_SEED", "not-a-number")
    base = [a for a in SIM if a not in ("--seed", "7")]
    code, _, err = run(base + ["--out", str(tmp_path)], capsys)
    assert code == 1
    assert "RENEWAL_EXTREMES_SEED" in err


@pytest.fixture(scope="module")
def quick_verify(tmp_path_factory):
    root = tmp_path_factory.mktemp("verify")
    codes = {}
    for name, seed in (("a", "7"), ("b", "7"), ("c", "9")):
        codes[name] = cli.main(["verify", "--quick", "--seed", seed, "--out", str(root / name)])
    return root, codes


def test_verify_quick_passes(quick_verify):
    root, codes = quick_verify
    assert codes["a"] == 0
    report = json.loads((root / "a" / "verify_report.json").read_text())
    assert len(report["criteria"]) >= 6
    assert all(c["passed"] for c in report["criteria"])


def test_verify_reports_byte_identical(quick_verify):
    root, _ = quick_verify
    assert (root / "a" / "verify_report.json").read_bytes() == (root / "b" / "verify_report.json").read_bytes()


def test_verify_seed_robust(quick_verify):
    root, codes = quick_verify
    a = json.loads((root / "a" / "verify_report.json").read_text())
    c = json.loads((root / "c" / "verify_report.json").read_text())
    assert codes["c"] == codes["a"]
    assert [x["passed"] for x in c["criteria"]] == [x["passed"] for x in a["criteria"]]
    assert c["seed"] == 9


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "renewal_extremes", "limit", "q-gamma", "1", "1.0"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0.367879441171"
