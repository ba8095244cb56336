import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special, stats

from plaus import streams
from plaus.errors import ArgumentError, DomainError
from plaus.models import (Binomial, BivariateNormal, Correlation, Dataset, Gamma, GammaMean, Lindley,
                          NonparametricQuantile, NormalLocationScale, NormalMean, ParamSpace, Poisson, Probit,
                          RandomEffects, RandomEffectsModel, builtin_catalog, gamma_shape, get_model, load_data,
                          parse_inline, probit_fit, ranef_fit, read_csv, write_csv)
from plaus.models.marginal import _ranef_profile


def test_binomial_loglik_matches_pmf():
    d = Binomial.dataset(15, 25)
    assert Binomial().loglik(d, [0.6]) == pytest.approx(stats.binom.logpmf(15, 25, 0.6), rel=1e-12)


def test_binomial_outside_space_is_minus_inf():
    assert Binomial().loglik(Binomial.dataset(15, 25), [1.5]) == -np.inf


def test_normal_density_at_zero():
    assert NormalMean().loglik(Dataset([0.0]), [0.0]) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-15)


def test_dimension_mismatch_is_argument_error():
    with pytest.raises(ArgumentError):
        NormalLocationScale().loglik(Dataset([0.0, 1.0]), [0.0])


def test_binomial_simulation_support_and_reproducibility():
    a = Binomial().sample([0.6], 25, streams.substream(7, 1))
    b = Binomial().sample([0.6], 25, streams.substream(7, 1))
    assert a.same(b)
    assert 0 <= a.obs[0, 0] <= 25 and a.obs[0, 0] == int(a.obs[0, 0])


def test_simulate_outside_space_is_domain_error():
    with pytest.raises(DomainError):
        Binomial().sample([1.2], 10, streams.substream(0))


def test_gaussian_law_of_large_numbers():
    y = NormalMean().sample([0.0], 10 ** 6, streams.substream(3)).y
    assert abs(y.mean()) < 4e-3


def test_random_effects_without_between_variance():
    model = RandomEffectsModel()
    like = model.template(4000, streams.substream(1, streams.DESIGN))
    data = model.sample([0.0, 1.5], 4000, streams.substream(1, streams.DATA), like)
    z = (data.y - 1.5) / data.known
    assert stats.kstest(z, "norm").pvalue > 0.001


def test_catalog_size_and_ids():
    cat = builtin_catalog()
    assert len(cat) >= 10
    names = {m.name for m in cat}
    for name in ("binomial", "lindley", "gamma2", "probit", "corr", "gamma-mean", "ranef", "np-quantile",
                 "poisson", "norm-mean"):
        assert name in names


def test_unknown_model():
    with pytest.raises(ArgumentError):
        get_model("nope")


def test_lindley_density_at_zero():
    assert np.exp(Lindley().pointwise(Dataset([0.0]), np.array([1.0]))[0]) == pytest.approx(0.5, rel=1e-14)


def test_correlation_sampler_variances():
    model = BivariateNormal()
    data = model.sample([0.5, 1, 2, 1, 3], 200_000, streams.substream(11))
    var = data.obs.var(axis=0)
    assert var == pytest.approx([1.0, 9.0], rel=0.02)
    assert np.corrcoef(data.obs.T)[0, 1] == pytest.approx(0.5, abs=0.01)


def _singletons(model, theta, size, seed):
    """Pointwise log densities of ``size`` iid draws, each one a singleton dataset."""
    rng = streams.substream(seed)
    if isinstance(model, Binomial):
        y = rng.binomial(10, theta[0], size).astype(float)
        return model.pointwise(Dataset(y, known=np.full(size, 10.0)), theta)
    if isinstance(model, Probit):
        like = model.template(size, rng)
        return model.pointwise(model.sample(theta, size, rng, like), theta)
    if isinstance(model, RandomEffectsModel):
        like = model.template(size, rng)
        return model.pointwise(model.sample(theta, size, rng, like), theta)
    return model.pointwise(model.sample(theta, size, rng), theta)


CONSISTENCY_CASES = [
    (Binomial(), [0.3]), (Poisson(), [2.5]), (Lindley(), [1.0]), (Gamma(), [2.0, 1.5]), (Probit(), [0.2, 0.8]),
    (NormalMean(), [0.3]), (NormalLocationScale(), [1.0, 2.0]), (BivariateNormal(), [0.4, 1, 2, 1, 3]),
    (GammaMean().base, [2.0, 0.5]), (RandomEffectsModel(), [0.5, 1.0]),
]


@pytest.mark.property
@pytest.mark.parametrize("model,theta", CONSISTENCY_CASES, ids=lambda v: getattr(v, "name", None))
def test_sampler_loglik_consistency(model, theta):
    theta = np.asarray(theta, float)
    a = _singletons(model, theta, 100_000, 1)
    b = _singletons(model, theta, 100_000, 2)
    assert np.all(np.isfinite(a)) and np.all(np.isfinite(b))
    se = np.hypot(a.std() / np.sqrt(a.size), b.std() / np.sqrt(b.size))
    assert abs(a.mean() - b.mean()) <= 5 * se


@pytest.mark.property
@pytest.mark.parametrize("model,theta", CONSISTENCY_CASES, ids=lambda v: getattr(v, "name", None))
def test_simulated_data_has_positive_density(model, theta):
    theta = np.asarray(theta, float)
    rng = streams.substream(5)
    n = 30
    like = model.template(n, rng)
    data = model.sample(theta, n, rng, like)
    assert np.isfinite(model.loglik(data, theta))


@pytest.mark.property
@pytest.mark.parametrize("model,theta", CONSISTENCY_CASES, ids=lambda v: getattr(v, "name", None))
def test_simulation_is_byte_identical(model, theta):
    outs = []
    for _ in range(2):
        rng = streams.substream(9, 4)
        like = model.template(12, rng)
        outs.append(model.sample(np.asarray(theta, float), 12, rng, like).obs.tobytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("y", [0, 25])
def test_binomial_edge_convention(y):
    model, d = Binomial(), Binomial.dataset(y, 25)
    grid = np.linspace(0.01, 0.99, 99)
    vals = np.array([model.loglik(d, [t]) for t in grid])
    assert np.all(np.isfinite(vals))
    top = model.loglik(d, [y / 25])
    assert top == 0.0 and np.all(vals < top)


def test_param_space_requires_ordered_bounds():
    with pytest.raises(ArgumentError):
        ParamSpace((1.0,), (0.0,))


def test_dataset_known_length_checked():
    with pytest.raises(ArgumentError):
        Dataset([1.0, 2.0], known=[1.0])


def test_dataset_is_read_only():
    d = Dataset([1.0, 2.0])
    with pytest.raises(ValueError):
        d.obs[0, 0] = 3.0


@pytest.mark.property
@given(st.floats(-0.99, 0.99), st.lists(st.floats(-5, 5), min_size=2, max_size=2),
       st.lists(st.floats(0.1, 5), min_size=2, max_size=2))
def test_marginal_split_join_identity(rho, mus, sds):
    model = Correlation()
    theta = np.array([rho, *mus, *sds])
    psi, lam = model.split(theta)
    assert np.array_equal(model.join(psi, lam), theta)


@given(st.floats(1e-6, 50))
def test_gamma_shape_solves_equation(c):
    k = gamma_shape(c)
    assert np.log(k) - special.digamma(k) == pytest.approx(c, rel=1e-9, abs=1e-12)


def test_quantile_count_case_split():
    model = NonparametricQuantile(0.5)
    y = np.array([[1.0, 2.0, 3.0, 4.0]])
    # sample median is Y_(2) = 2
    assert model._counts(y, 1.5)[0] == 1  # below: #{Y <= psi}
    assert model._counts(y, 1.0)[0] == 1  # tie below the quantile counts the tied point
    assert model._counts(y, 2.0)[0] == 2  # at the quantile: n p
    assert model._counts(y, 3.0)[0] == 2  # tie above the quantile: #{Y < psi}
    assert model._counts(y, 3.5)[0] == 3


def test_quantile_statistic_is_one_at_the_sample_quantile():
    model = NonparametricQuantile(0.3)
    d = Dataset(np.arange(1.0, 11.0))
    assert model.loglik(d, model.fast_mle(d)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.property
def test_ranef_fit_matches_dense_oracle():
    rng = np.random.default_rng(4)
    n = 15
    s2 = rng.exponential(2, n) ** 2
    y = rng.normal(0.3, np.sqrt(s2 + 0.5), (40, n))
    tau, lam, ll = ranef_fit(y, s2)
    grid = np.concatenate([[0.0], np.geomspace(1e-10, 1e3, 4000)])
    for k in range(len(y)):
        prof = _ranef_profile(np.repeat(y[k:k + 1], grid.size, 0), s2, grid)[0]
        j = int(prof.argmax())
        f = lambda t: -_ranef_profile(y[k:k + 1], s2, np.array([t]))[0][0]
        res = optimize.minimize_scalar(f, bounds=(grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]),
                                       method="bounded", options={"xatol": 1e-14})
        assert ll[k] >= max(prof[j], -res.fun) - 1e-9


def test_ranef_weighted_mean():
    rng = np.random.default_rng(2)
    s2 = rng.exponential(2, 8) ** 2
    y = rng.normal(size=8)
    tau, lam, _ = ranef_fit(y[None, :], s2)
    w = 1 / (s2 + tau[0])
    assert lam[0] == pytest.approx(np.sum(w * y) / np.sum(w), rel=1e-12)


def test_probit_fit_matches_generic_optimizer():
    model = Probit()
    rng = streams.substream(3)
    like = model.template(60, rng)
    data = model.sample(np.array([0.2, 0.9]), 60, rng, like)
    X = model.design_matrix(data)
    beta, ll, ok = probit_fit(X, data.y[None, :], np.zeros(2))
    res = optimize.minimize(lambda b: -model.loglik(data, b), np.zeros(2), method="BFGS")
    assert ok[0]
    assert ll[0] == pytest.approx(-res.fun, abs=1e-8)
    assert beta[0] == pytest.approx(res.x, abs=1e-4)


def test_inline_data_parsing():
    d = parse_inline("y=1;2;3,sigma=1 1 2")
    assert d.obs[:, 0].tolist() == [1, 2, 3] and d.known.tolist() == [1, 1, 2]
    b = parse_inline("n=25,y=15", Binomial())
    assert b.obs[0, 0] == 15 and b.known[0] == 25


def test_inline_data_errors():
    with pytest.raises(ArgumentError):
        parse_inline("y=1;2,z=3")
    with pytest.raises(ArgumentError):
        parse_inline("y")


def test_csv_round_trip(tmp_path):
    d = Dataset([[1.0], [0.0], [1.0]], design=[[0.5], [1.5], [-1.0]])
    path = tmp_path / "d.csv"
    write_csv(d, path)
    back = read_csv(path)
    assert back.same(d)
    assert load_data(str(path)).same(d)


def test_csv_sigma_column(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("y,sigma\n0.5,1\n-0.2,2\n")
    d = read_csv(path)
    assert d.known.tolist() == [1.0, 2.0]


def test_probit_requires_binary_responses():
    with pytest.raises(DomainError):
        Probit().check_data(Dataset([[0.5]], design=[[1.0]]))


def test_random_effects_need_sigma():
    with pytest.raises(ArgumentError):
        RandomEffects().check_data(Dataset([1.0, 2.0]))
