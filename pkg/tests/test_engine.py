import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from plaus import streams
from plaus.engine import (Box, FiniteSet, McConfig, bind, marginal_plaus_mc, pivotality_check, plaus_exact_discrete,
                          plaus_mc, plaus_region, plaus_set, plaus_test, plausibility)
from plaus.engine.region import intervals_from_curve
from plaus.errors import ArgumentError, CapabilityError, DomainError, NumericError
from plaus.models import (Binomial, Correlation, Dataset, GammaMean, Lindley, NormalLocationScale, NormalMean,
                          NormalMeanT, Poisson)

BIN = Binomial.dataset(15, 25)


def test_config_rejects_small_m():
    with pytest.raises(ArgumentError):
        McConfig(M=99)


@pytest.mark.property
def test_pl_at_mle_is_one():
    res = plaus_mc(Binomial(), BIN, [0.6], McConfig(M=1000))
    assert res.estimate == 1.0
    assert plaus_mc(Lindley(), Dataset([0.5, 1.5]), [np.sqrt(2)], McConfig(M=1000)).estimate == 1.0


def test_gaussian_pivot_example():
    res = plaus_mc(NormalMean(), Dataset([0.0]), [1.96], McConfig(M=50_000, seed=1))
    exact = 2 * stats.norm.sf(1.96)
    assert abs(res.estimate - exact) <= 3 * res.mc_stderr
    assert res.mc_stderr <= 0.5 / np.sqrt(res.M_used)


def test_closed_form_pivot():
    res = plausibility(bind(NormalMean(), Dataset([0.0])), [1.96], method="closed")
    assert res.estimate == pytest.approx(2 * stats.norm.sf(1.96), rel=1e-12)
    assert res.mc_stderr == 0.0


def test_binomial_exact_values():
    assert plaus_exact_discrete(Binomial(), BIN, [0.6]).estimate == pytest.approx(1.0, abs=1e-12)
    assert plaus_exact_discrete(Binomial(), Binomial.dataset(1, 2), [0.5]).estimate == pytest.approx(1.0, abs=1e-12)


def _brute_binomial(y, n, theta):
    """Sum the pmf over outcomes whose relative likelihood is at most the observed one."""
    def t(k):
        th = k / n
        with np.errstate(divide="ignore", invalid="ignore"):
            ll = stats.binom.logpmf(k, n, theta) - stats.binom.logpmf(k, n, th)
        return ll
    obs = t(y)
    ks = np.arange(n + 1)
    return float(np.sum(stats.binom.pmf(ks, n, theta)[t(ks) <= obs + 1e-12]))


def test_exact_matches_brute_force():
    for y, n, theta in [(15, 25, 0.4), (0, 10, 0.2), (7, 7, 0.5), (3, 30, 0.05)]:
        got = plaus_exact_discrete(Binomial(), Binomial.dataset(y, n), [theta]).estimate
        assert got == pytest.approx(_brute_binomial(y, n, theta), abs=1e-12)


def test_binomial_mc_agrees_with_exact_example():
    mc = plaus_mc(Binomial(), BIN, [0.4], McConfig(M=20_000, seed=3))
    ex = plaus_exact_discrete(Binomial(), BIN, [0.4])
    assert abs(mc.estimate - ex.estimate) <= 3 * mc.mc_stderr


@pytest.mark.property
def test_exact_mc_agreement_on_random_probes():
    rng = np.random.default_rng(31)
    M = 4000
    for k in range(50):
        if k % 2:
            n = int(rng.integers(1, 60))
            model, data, theta = Binomial(), Binomial.dataset(int(rng.integers(0, n + 1)), n), rng.uniform(0.02, 0.98)
        else:
            model, data, theta = Poisson(), Dataset(rng.poisson(3, 3).astype(float)), rng.uniform(0.3, 6)
        p = plaus_exact_discrete(model, data, [theta]).estimate
        mc = plaus_mc(model, data, [theta], McConfig(M=M, seed=k)).estimate
        assert abs(mc - p) <= 4 * np.sqrt(p * (1 - p) / M) + 1e-12


def test_exact_needs_finite_support():
    with pytest.raises(CapabilityError):
        plaus_exact_discrete(NormalMean(), Dataset([0.0]), [1.0])


def test_lindley_closed_law_matches_monte_carlo():
    data = Lindley().sample([1.0], 25, streams.substream(1))
    problem = bind(Lindley(), data)
    for theta in (0.7, 1.3):
        exact = plausibility(problem, [theta], method="closed").estimate
        mc = plausibility(problem, [theta], McConfig(M=50_000, seed=2))
        assert abs(mc.estimate - exact) <= 4 * max(mc.mc_stderr, 1e-4)


def test_poisson_curve_is_stepped_with_local_bump():
    problem = bind(Poisson(), Dataset([2.0]))
    grid = np.linspace(0.05, 8, 400)
    pl = np.array([plausibility(problem, [t], method="exact").estimate for t in grid])
    steps = np.diff(pl)
    below = grid[1:] < 2
    # rises with jumps below the estimate, yet dips along the way
    assert np.any(steps[below] > 0.3)
    assert np.any(steps[below & (grid[1:] > 0.5) & (grid[1:] < 1.5)] < -1e-4)
    assert pl.max() == pytest.approx(1.0)


def test_poisson_region_can_be_disconnected():
    region = plaus_region(Poisson(), Dataset([2.0]), alpha=0.635, method="exact", points=256)
    assert len(region.intervals) >= 2
    assert region.contains(2.0) and region.contains_mle
    los = [lo for lo, _ in region.intervals]
    assert los == sorted(los)
    assert all(a[1] < b[0] for a, b in zip(region.intervals, region.intervals[1:]))


def test_set_plausibility():
    cfg = McConfig(M=2000)
    assert plaus_set(Binomial(), BIN, FiniteSet([[0.6]]), cfg).estimate == 1.0
    assert plaus_set(Binomial(), BIN, Box([0.0], [1.0]), cfg).estimate == 1.0
    pair = FiniteSet([[0.3], [0.45]])
    expected = max(plaus_mc(Binomial(), BIN, [0.3], cfg).estimate, plaus_mc(Binomial(), BIN, [0.45], cfg).estimate)
    assert plaus_set(Binomial(), BIN, pair, cfg).estimate == expected


def test_set_sup_is_at_least_every_probe():
    box = Box([0.1], [0.45])
    got = plaus_set(Binomial(), BIN, box, method="exact").estimate
    grid = np.linspace(0.1, 0.45, 50)
    best = max(plaus_exact_discrete(Binomial(), BIN, [t]).estimate for t in grid)
    assert got >= best - 1e-12


def test_set_outside_space():
    with pytest.raises(DomainError):
        plaus_set(Binomial(), BIN, FiniteSet([[1.5]]))


def test_tests_and_decisions():
    cfg = McConfig(M=5000)
    assert not plaus_test(Binomial(), BIN, FiniteSet([[0.6]]), 0.05, cfg).reject
    dec = plaus_test(Binomial(), BIN, Box([0.0], [0.2]), 0.05, method="exact")
    assert dec.reject and dec.plausibility.estimate < 0.05
    border = plaus_test(NormalMean(), Dataset([0.0]), FiniteSet([[1.96]]), 0.05, McConfig(M=20_000, seed=4))
    assert abs(border.plausibility.estimate - 0.05) <= 3 * border.plausibility.mc_stderr
    assert border.reject == (border.plausibility.estimate <= 0.05)


def test_gaussian_region():
    region = plaus_region(NormalMean(), Dataset([0.0]), alpha=0.05, method="closed")
    assert len(region.intervals) == 1
    lo, hi = region.intervals[0]
    z = stats.norm.ppf(0.975)
    assert lo == pytest.approx(-z, abs=region.endpoint_tol * 1.01)
    assert hi == pytest.approx(z, abs=region.endpoint_tol * 1.01)
    mc = plaus_region(NormalMean(), Dataset([0.0]), alpha=0.05, cfg=McConfig(M=20_000), points=64)
    assert mc.lower == pytest.approx(-z, abs=0.05) and mc.upper == pytest.approx(z, abs=0.05)


def test_t_interval_recovery():
    y = np.random.default_rng(3).normal(1.0, 2.0, 10)
    region = plaus_region(NormalMeanT(), Dataset(y), alpha=0.05, method="closed")
    half = stats.t.ppf(0.975, 9) * y.std(ddof=1) / np.sqrt(10)
    assert region.lower == pytest.approx(y.mean() - half, abs=1.01 * region.endpoint_tol)
    assert region.upper == pytest.approx(y.mean() + half, abs=1.01 * region.endpoint_tol)


@pytest.mark.property
def test_region_nesting():
    data = Lindley().sample([1.0], 30, streams.substream(6))
    cfg = McConfig(M=4000, seed=9)
    wide = plaus_region(Lindley(), data, 0.05, cfg, points=64)
    narrow = plaus_region(Lindley(), data, 0.10, cfg, points=64)
    assert wide.lower <= narrow.lower and narrow.upper <= wide.upper


@pytest.mark.property
def test_region_invariants():
    region = plaus_region(Binomial(), BIN, 0.05, method="exact", points=128)
    assert region.contains_mle and region.contains(0.6)
    for lo, hi in region.intervals:
        assert 0.0 <= lo <= hi <= 1.0


def test_region_rejects_vector_target():
    with pytest.raises(ArgumentError):
        plaus_region(NormalLocationScale(), Dataset([0.0, 1.0, 2.0]), 0.05)


def test_intervals_from_curve():
    grid = np.linspace(0, 1, 11)
    pl = np.array([0, 0.2, 0.6, 0.6, 0.1, 0, 0.3, 0.9, 0.2, 0, 0])
    # runs {0.2, 0.3} and {0.6, 0.7}, widened halfway to their outside neighbours
    got = intervals_from_curve(grid, pl, 0.25)
    assert np.allclose(got, [(0.15, 0.35), (0.55, 0.75)])


def test_marginal_pl_at_estimate_is_one():
    y = np.random.default_rng(1).normal(size=8)
    assert marginal_plaus_mc(NormalMeanT(), Dataset(y), y.mean(), McConfig(M=1000)).estimate == 1.0


def test_marginal_needs_nuisance():
    with pytest.raises(ArgumentError):
        marginal_plaus_mc(NormalMean(), Dataset([0.0]), 0.0)


def test_correlation_pl_free_of_nuisance():
    xy = np.random.default_rng(12).multivariate_normal([0, 0], [[1, 0.3], [0.3, 1]], 10)
    data = Dataset(xy)
    cfg = McConfig(M=20_000, seed=5)
    ests = [marginal_plaus_mc(Correlation(lambda0=lam), data, 0.6, cfg) for lam in
            [(0, 0, 1, 1), (5, -3, 0.1, 10), (1, 2, 1, 3)]]
    ref = ests[0]
    for e in ests[1:]:
        assert abs(e.estimate - ref.estimate) <= 3 * np.hypot(e.mc_stderr, ref.mc_stderr)


def _gaussian_like(n):
    return Dataset(np.zeros(n))


def test_pivotality_location_scale():
    rep = pivotality_check(NormalLocationScale(), _gaussian_like(10), [[0, 1], [3, 0.2], [-2, 9]], McConfig(M=5000))
    assert rep.max_discrepancy <= rep.mc_bound and rep.pivotal


def test_pivotality_binomial_exact():
    rep = pivotality_check(Binomial(), Binomial.dataset(0, 20), [[0.2], [0.5], [0.8]], McConfig(M=5000),
                           method="exact")
    assert rep.max_discrepancy > rep.mc_bound and not rep.pivotal


def test_pivotality_correlation_across_nuisance():
    like = _gaussian_like(10)
    like = Dataset(np.zeros((10, 2)))
    grid = [[0.5, 0, 0, 1, 1], [0.5, 3, -1, 0.2, 5], [0.5, 1, 2, 1, 3]]
    rep = pivotality_check(Correlation(), like, grid, McConfig(M=5000))
    assert rep.pivotal


def test_gamma_mean_statistic_insensitive_to_shape():
    rep = pivotality_check(GammaMean(), Dataset(np.ones(10)), [[1.0, lam] for lam in (0.5, 1, 2, 5)],
                           McConfig(M=5000))
    assert rep.max_discrepancy < 0.1


@pytest.mark.property
def test_validity_binomial():
    R, n, theta = 2000, 50, 0.3
    ys = streams.substream(7).binomial(n, theta, R)
    cache = {y: plaus_exact_discrete(Binomial(), Binomial.dataset(int(y), n), [theta]).estimate for y in set(ys)}
    pl = np.array([cache[y] for y in ys])
    for alpha in (0.01, 0.05, 0.10, 0.25, 0.5):
        assert np.mean(pl <= alpha) <= alpha + 3 * np.sqrt(alpha * (1 - alpha) / R)


@pytest.mark.property
def test_validity_binomial_monte_carlo():
    R, n, theta = 300, 50, 0.5
    ys = streams.substream(8).binomial(n, theta, R)
    cfg = McConfig(M=2000, seed=1)
    cache = {y: plaus_mc(Binomial(), Binomial.dataset(int(y), n), [theta], cfg).estimate for y in set(ys)}
    pl = np.array([cache[y] for y in ys])
    for alpha in (0.05, 0.10, 0.25, 0.5):
        assert np.mean(pl <= alpha) <= alpha + 3 * np.sqrt(alpha * (1 - alpha) / R)


@pytest.mark.property
def test_uniformity_gaussian_monte_carlo():
    R = 300
    y = streams.substream(10).normal(size=R)
    pl = [plaus_mc(NormalMean(), Dataset([v]), [0.0], McConfig(M=2000, seed=i)).estimate for i, v in enumerate(y)]
    assert stats.kstest(pl, "uniform").pvalue > 0.01


def _lindley_median_pl(n, R=200, theta=1.5, truth=1.0, seed=0):
    model = Lindley()
    pls = []
    for r in range(R):
        data = model.sample([truth], n, streams.substream(seed, streams.DATA, r))
        pls.append(plausibility(bind(model, data), [theta], method="closed").estimate)
    return float(np.median(pls))


@pytest.mark.property
def test_lindley_consistency_trend():
    medians = [_lindley_median_pl(n) for n in (25, 50, 100, 200)]
    assert all(a > b for a, b in zip(medians, medians[1:]))
    assert medians[-1] < 1e-6


@pytest.mark.property
def test_seed_determinism():
    cfg = McConfig(M=5000, seed=42)
    a = plaus_mc(Lindley(), Dataset([0.5, 1.5, 2.0]), [1.2], cfg)
    b = plaus_mc(Lindley(), Dataset([0.5, 1.5, 2.0]), [1.2], cfg)
    assert a == b
    r1 = plaus_region(Lindley(), Dataset([0.5, 1.5, 2.0]), 0.1, cfg, points=32)
    r2 = plaus_region(Lindley(), Dataset([0.5, 1.5, 2.0]), 0.1, cfg, points=32)
    assert r1.intervals == r2.intervals and np.array_equal(r1.pl, r2.pl)


@pytest.mark.property
def test_worker_count_does_not_change_results():
    data = Dataset([0.5, 1.5, 2.0])
    one = plaus_mc(Lindley(), data, [1.2], McConfig(M=10_000, seed=3, workers=1))
    four = plaus_mc(Lindley(), data, [1.2], McConfig(M=10_000, seed=3, workers=4))
    assert one == four


def test_crn_off_uses_grid_index():
    problem = bind(Lindley(), Dataset([0.5, 1.5, 2.0]))
    cfg = McConfig(M=2000, seed=3, crn=False)
    a = plausibility(problem, [1.2], cfg, index=1).estimate
    b = plausibility(problem, [1.2], cfg, index=2).estimate
    c = plausibility(problem, [1.2], cfg.replace(crn=True), index=5).estimate
    d = plausibility(problem, [1.2], cfg.replace(crn=True), index=0).estimate
    assert a != b and c == d


def _flaky(problem, fraction):
    original = problem.simulated

    def simulated(value, size, rng):
        out = original(value, size, rng)
        out[rng.random(size) < fraction] = np.nan
        return out

    problem.simulated = simulated
    return problem


def test_failed_replicates_count_as_hits():
    problem = _flaky(bind(Lindley(), Dataset([0.5, 1.5, 2.0])), 0.02)
    res = plausibility(problem, [5.0], McConfig(M=20_000, seed=1))
    # retried replicates fail again with probability 0.02
    assert 0 < res.failed <= 20
    clean = plausibility(bind(Lindley(), Dataset([0.5, 1.5, 2.0])), [5.0], McConfig(M=20_000, seed=1))
    assert res.estimate >= clean.estimate - 0.01


def test_too_many_failures_raise():
    problem = _flaky(bind(Lindley(), Dataset([0.5, 1.5, 2.0])), 0.5)
    with pytest.raises(NumericError):
        plausibility(problem, [5.0], McConfig(M=5000))


@pytest.mark.property
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.data())
def test_plausibility_in_unit_interval(n, data):
    y = data.draw(st.integers(0, n))
    theta = data.draw(st.floats(-0.5, 1.5))
    res = plaus_mc(Binomial(), Binomial.dataset(y, n), [theta], McConfig(M=200))
    assert 0.0 <= res.estimate <= 1.0
    if not 0 <= theta <= 1:
        assert res.estimate == 0.0
