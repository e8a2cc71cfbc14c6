import numpy as np
import pytest

from fixtures import random_expression
from oracles import anchored_removed, mask, subsets
from rbamkit.coalition import Coalition
from rbamkit.distributions import Dataset, Empirical, GaussianSpec, PointMass, UniformBox
from rbamkit.exprfn import FunctionModel
from rbamkit.removal import (
    Anchored,
    ConditionalGaussian,
    DatasetLoss,
    Identity,
    LocalLoss,
    Marginal,
    OLSLearner,
    ProductMarginals,
    Retraining,
    TrivialFamily,
    Uniform,
    Variance,
    apply_behaviour,
    behaviour_values,
    is_independent_of,
    remove,
)

DS2 = Dataset([[1.0, 1.0], [-1.0, -1.0]])


def fm(source, d):
    return FunctionModel.from_expression(source, d)


def families(d, seed=0):
    rng = np.random.default_rng(100 + d)
    data = Dataset(rng.normal(size=(6, d)), rng.normal(size=6))
    return {
        "anchored": Anchored(rng.normal(size=d)),
        "marginal": Marginal(Empirical(data), mc_samples=64, seed=seed),
        "marginal_exact": Marginal(Empirical(data), exact=True),
        "product": ProductMarginals(data, mc_samples=64, seed=seed),
        "uniform": Uniform(tuple((-1.0, 1.0) for _ in range(d)), mc_samples=64, seed=seed),
        "gaussian": ConditionalGaussian(GaussianSpec(np.zeros(d), np.eye(d) + 0.3), mc_samples=64, seed=seed),
        "retraining": Retraining(data, OLSLearner(), target="model"),
        "trivial": TrivialFamily(),
    }


def coal(d, players):
    return Coalition.of(d, players)


def test_anchored_example_game_entry():
    g = remove(Anchored([0, 0, 0]), fm("x1+x2+x2*x3", 3), coal(3, [1]))
    assert g([3, 4, 5]) == 24


def test_anchored_on_max_example():
    g = remove(Anchored([0, 0]), fm("max(x1,x2)", 2), coal(2, [2]))
    assert g([0, 2]) == 0


@pytest.mark.parametrize("x", [(0.0, 0.0), (3.0, -2.0), (10.0, 7.0)])
def test_marginal_full_enumeration_example(x):
    g = remove(Marginal(Empirical(DS2), exact=True), fm("x1+x2+x1*x2", 2), coal(2, [1, 2]))
    assert g(x) == pytest.approx(1.0, abs=1e-12)


def test_anchored_removed_values_match_brute_force():
    f = fm("x1*x2 - x3 + max(x1, x3)", 3)
    base, x = [0.5, -1.0, 2.0], [3.0, 4.0, -5.0]
    fam = Anchored(base)
    table = fam.removed_values(f, x)
    for T in subsets([1, 2, 3]):
        assert table[mask(T)] == anchored_removed(lambda z: f(z), base, x, T)


@pytest.mark.parametrize("name", list(families(3)))
def test_removing_nothing_is_identity(name):
    fam = families(3)[name]
    f = fm("x1*x2 + exp(x3)", 3)
    assert remove(fam, f, Coalition.empty(3)) is f


@pytest.mark.parametrize("name", [n for n in families(3)])
def test_removed_function_is_independent_of_removed_set(name):
    rng = np.random.default_rng(5)
    for trial in range(50):
        d = int(rng.integers(2, 5))
        fam = families(d, seed=trial)[name]
        f = fm(random_expression(rng, d), d)
        T = Coalition(int(rng.integers(1, 1 << d)), d)
        assert is_independent_of(remove(fam, f, T), T, probes=8, seed=trial, eps=1e-9)


@pytest.mark.parametrize("name", ["anchored", "marginal", "marginal_exact", "product", "uniform", "gaussian", "retraining"])
def test_removal_is_linear_under_shared_seed(name):
    d = 3
    f, g = fm("x1*x2 + x3", d), fm("max(x1, x3) - x2^2", d)
    a, b = 1.7, -0.4
    combo = FunctionModel(d, lambda X: a * f(X) + b * g(X))
    X = np.random.default_rng(9).normal(size=(5, d))
    for T in [coal(d, [1]), coal(d, [2, 3]), Coalition.full(d)]:
        lhs = remove(families(d)[name], combo, T)(X)
        rhs = a * remove(families(d)[name], f, T)(X) + b * remove(families(d)[name], g, T)(X)
        assert np.allclose(lhs, rhs, atol=1e-10, rtol=0)


def test_anchored_is_separable_exactly():
    d = 3
    fam = Anchored([0.3, -0.7, 1.1])
    f = fm("x1*x2*x3 + abs(x2 - x3)", d)
    X = np.random.default_rng(2).normal(size=(10, d))
    for a in range(1, 8):
        for b in range(1, 8):
            T, T2 = Coalition(a, d), Coalition(b, d)
            nested = remove(fam, remove(fam, f, T), T2)(X)
            assert np.array_equal(nested, remove(fam, f, T | T2)(X))


def test_point_mass_marginal_equals_anchored():
    d = 3
    f = fm("x1*x2 + x3^2", d)
    z = [0.1, 0.2, 0.3]
    X = np.random.default_rng(4).normal(size=(4, d))
    T = coal(d, [1, 3])
    assert np.allclose(remove(Marginal(PointMass(z), exact=True), f, T)(X), remove(Anchored(z), f, T)(X))


def test_conditional_gaussian_mean_of_identity_feature():
    spec = GaussianSpec.bivariate(0.5)
    fam = ConditionalGaussian(spec, mc_samples=200_000, seed=1)
    # E[X1 | X2 = 1] = 0.5
    val = remove(fam, fm("x1", 2), coal(2, [1]))([7.0, 1.0])
    assert abs(val - 0.5) < 0.01


def test_retraining_all_features_gives_mean_label():
    data = Dataset([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 5.0]], [1.0, 2.0, 4.0, 9.0])
    fam = Retraining(data, OLSLearner())
    g = remove(fam, fm("x1", 2), Coalition.full(2))
    assert g([100.0, -3.0]) == pytest.approx(4.0)


def test_retraining_requires_labels():
    with pytest.raises(ValueError):
        Retraining(Dataset([[0.0, 1.0]]), OLSLearner())


def test_uniform_requires_finite_bounds():
    with pytest.raises(ValueError):
        Uniform(((0.0, np.inf), (0.0, 1.0)))


def test_trivial_family_zeroes_every_nonempty_removal():
    f = fm("x1 + 5", 2)
    assert remove(TrivialFamily(), f, coal(2, [1]))([1.0, 1.0]) == 0.0


def test_identity_behaviour_returns_model():
    f = fm("x1 - x2", 2)
    assert apply_behaviour(Identity(), f) is f


def test_dataset_loss_of_exact_labeler_is_zero():
    data = Dataset([[1.0, 2.0], [3.0, -1.0], [0.0, 0.0]], [3.0, 2.0, 0.0])
    g = apply_behaviour(DatasetLoss("squared", data), fm("x1+x2", 2))
    assert g([5.0, 5.0]) == 0.0 and g([-1.0, 2.0]) == 0.0


def test_variance_of_first_column_of_ds2():
    g = apply_behaviour(Variance(Empirical(DS2), exact=True), fm("x1", 2))
    assert g([0.0, 0.0]) == pytest.approx(1.0) and g([9.0, 9.0]) == pytest.approx(1.0)


def test_local_loss_is_negative_squared_error():
    g = apply_behaviour(LocalLoss("squared", fm("x1", 2)), fm("x1+x2", 2))
    assert g([1.0, 3.0]) == pytest.approx(-9.0)


def test_cross_entropy_rejects_out_of_range_predictions():
    g = apply_behaviour(LocalLoss("cross_entropy", fm("1", 1)), fm("x1", 1))
    with pytest.raises(ValueError):
        g([2.0])


def test_behaviour_values_for_global_mapping_are_point_independent():
    fam = Anchored([0.0, 0.0])
    phi = Variance(UniformBox(((-1, 1), (-1, 1))), mc_samples=500, seed=3)
    f = fm("x1 + 2*x2", 2)
    a = behaviour_values(phi, fam, f, [0.3, 0.4])
    b = behaviour_values(phi, fam, f, [-5.0, 8.0])
    assert np.array_equal(a, b)
    assert a[3] == 0.0


def test_independence_probe_examples():
    assert is_independent_of(fm("x1", 2), coal(2, [2]))
    report = is_independent_of(fm("x1*x2", 2), coal(2, [2]))
    assert not report and report.witness is not None and report.perturbed is not None


def test_independence_probe_rejects_zero_probes():
    with pytest.raises(ValueError):
        is_independent_of(fm("x1", 1), coal(1, [1]), probes=0)
