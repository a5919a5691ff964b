import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from renewal_extremes.limitlaws import hitting_time_moment
from renewal_extremes.norming import generalized_inverse
from renewal_extremes.renewal import (
    FiniteMeanScaler,
    GridTooCoarse,
    InfiniteMeanScaler,
    PathExhausted,
    RenewalPath,
    grow_path,
    passage_time,
    sample_hitting_time_at_one,
    sample_hitting_time_paths,
    sample_passage_ratio,
    scaled_passage,
    simulate_hitting_time,
)
from renewal_extremes.variates import SeedSpec, StepModel


def test_passage_time_examples():
    assert passage_time(RenewalPath.from_steps([0.5, 0.7, 0.3]), 1.0) == 2
    ones = RenewalPath.from_steps(np.ones(10))
    assert passage_time(ones, 0.0) == 1
    assert passage_time(ones, 3.0) == 4


def test_passage_time_exhausted():
    with pytest.raises(PathExhausted):
        passage_time(RenewalPath.from_steps([1.0, 1.0]), 2.0)


def test_negative_steps_rejected():
    with pytest.raises(ValueError):
        RenewalPath.from_steps([1.0, -0.5])


def test_cumsum_invariant():
    path = RenewalPath.from_steps([0.2, 0.0, 1.5, 0.3])
    assert np.all(np.diff(path.cumsum) >= 0)
    np.testing.assert_allclose(np.diff(path.cumsum), path.steps[1:], atol=1e-15)


step_lists = st.lists(
    st.one_of(st.just(0.0), st.floats(0.01, 3.0, allow_nan=False)), min_size=2, max_size=40
)


@given(step_lists)
def test_passage_at_partial_sums(steps):
    path = RenewalPath.from_steps(steps)
    for k in range(1, len(steps)):
        if steps[k] > 0 and path.cumsum[-1] > path.cumsum[k - 1]:
            assert passage_time(path, path.cumsum[k - 1]) >= k + 1
            # the next positive step is exactly step k+1
            assert passage_time(path, path.cumsum[k - 1]) == k + 1


@given(step_lists, st.lists(st.floats(0, 50), min_size=2, max_size=10))
def test_passage_monotone_and_inverse(steps, times):
    path = RenewalPath.from_steps(steps)
    valid = sorted(t for t in times if t < path.cumsum[-1])
    taus = [passage_time(path, t) for t in valid]
    assert taus == sorted(taus)
    k_grid = np.arange(1, len(steps) + 1, dtype=float)
    for t, tau in zip(valid, taus):
        assert tau == generalized_inverse(path.cumsum, t, k_grid)


def test_slln_single_path():
    model = StepModel.exponential(2.0)
    t = 1e6
    path = grow_path(model, SeedSpec(5).generator(), t)
    assert abs(2.0 * passage_time(path, t) / t - 1) < 0.01


def test_scaled_passage_constant_steps():
    path = RenewalPath.from_steps(np.ones(2000))
    assert scaled_passage(path, 1000.0, 1.0, FiniteMeanScaler(1.0)) == pytest.approx(1.001)
    assert scaled_passage(path, 1000.0, 0.0, FiniteMeanScaler(1.0)) == pytest.approx(0.001)


def test_scaled_passage_heavy_mean():
    model = StepModel.heavy_pareto(0.5, 1.0)
    n = 10_000
    r = np.array([sample_passage_ratio(model, 1e6, 1.0, SeedSpec(21, i)) for i in range(n)])
    se = r.std(ddof=1) / math.sqrt(n)
    assert abs(r.mean() - 2 / math.pi) < 3 * se


def test_infinite_scaler():
    model = StepModel.heavy_pareto(0.5, 1.0)
    path = RenewalPath.from_steps(np.full(5000, 1.0))
    assert scaled_passage(path, 100.0, 1.0, InfiniteMeanScaler(model)) == pytest.approx(101 / 10)


def test_grow_path_passes_horizon():
    for model in (StepModel.uniform(0.3), StepModel.heavy_pareto(0.2, 1.0), StepModel.constant(0.5)):
        for i in range(20):
            path = grow_path(model, SeedSpec(8, i).generator(), 1e4)
            assert path.cumsum[-1] > 1e4


def test_exact_hitting_time_moments():
    n = 10**6
    w = sample_hitting_time_at_one(0.5, n, SeedSpec(33))
    for m in (1, 2):
        v = w**m
        assert abs(v.mean() - 2 / math.pi) < 3 * v.std(ddof=1) / math.sqrt(n)
        assert hitting_time_moment(0.5, m) == pytest.approx(2 / math.pi)


def test_hitting_time_path_monotone():
    for alpha in (0.3, 0.6, 0.9):
        for i in range(10):
            p = simulate_hitting_time(alpha, [0.0, 0.5, 1.0, 2.0, 4.0], 2000, SeedSpec(4, i))
            assert np.all(np.diff(p.values) >= 0)
            assert np.all(p.values >= 0)


def test_hitting_time_grid_vs_exact():
    alpha = 0.5
    n = 4000
    grid, dx = sample_hitting_time_paths(alpha, [1.0], n, 4000, SeedSpec(6))
    exact = sample_hitting_time_at_one(alpha, 200_000, SeedSpec(7))
    se = grid[:, 0].std(ddof=1) / math.sqrt(n)
    # grid values overshoot by less than one cell
    assert abs(grid[:, 0].mean() - exact.mean()) < 3 * se + dx


def test_hitting_time_self_similarity():
    alpha = 0.4
    paths, dx = sample_hitting_time_paths(alpha, [1.0, 3.0], 4000, 4000, SeedSpec(9))
    ratio = paths[:, 1].mean() / paths[:, 0].mean()
    assert ratio == pytest.approx(3.0**alpha, rel=0.05)


def test_hitting_time_short_horizon_flagged():
    with pytest.raises(GridTooCoarse):
        simulate_hitting_time(0.5, [1.0, 1e6], 100, SeedSpec(1), horizon=1.0)


def test_hitting_time_bad_levels():
    with pytest.raises(ValueError):
        simulate_hitting_time(0.5, [1.0, 0.5], 100, SeedSpec(1))
    with pytest.raises(ValueError):
        sample_hitting_time_at_one(1.2, 5, SeedSpec(1))
