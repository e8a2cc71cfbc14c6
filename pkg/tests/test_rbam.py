import json

import numpy as np
import pytest

from fixtures import GAME_A_TABLE, random_expression
from oracles import banzhaf_by_definition, shapley_by_permutations, table_to_fn
from rbamkit.coalition import Coalition, Permutation, all_coalitions
from rbamkit.distributions import Dataset, Empirical, GaussianSpec
from rbamkit.exprfn import FunctionModel
from rbamkit.game import CooperativeGame, unanimity_game
from rbamkit.rbam import (
    Cardinal,
    DerivativeForm,
    Explicit,
    Method,
    aggregation_preset,
    attribute_point,
    attributions,
    check_functional_axiom,
    check_internal_consistency,
    derivative_sum,
    evaluate,
    mc_attribution_via_components,
    pointwise_game,
    preset,
    representation_sum,
)
from rbamkit.cad import cad_component
from rbamkit.removal import (
    Anchored,
    ConditionalGaussian,
    DatasetLoss,
    Identity,
    LocalLoss,
    Marginal,
    ProductMarginals,
    Retraining,
    Variance,
)

F3 = "x1+x2+x2*x3"
X3 = [3.0, 4.0, 5.0]


def fm(source, d):
    return FunctionModel.from_expression(source, d)


def coal(d, players):
    return Coalition.of(d, players)


def anchored_method(agg, d=3, order=None, baseline=None):
    return Method(Identity(), Anchored(np.zeros(d) if baseline is None else baseline),
                  aggregation_preset(agg, d, order=order))


def test_pointwise_game_reproduces_fixture():
    game = pointwise_game(Identity(), Anchored([0, 0, 0]), fm(F3, 3), X3)
    assert game.to_dict() == {k: float(v) for k, v in GAME_A_TABLE.items()}


def test_constant_model_gives_zero_game():
    game = pointwise_game(Identity(), Anchored([1, 2]), FunctionModel.constant(2, 3.0), [5.0, 6.0])
    assert np.all(game.values == 0)


def test_global_behaviour_gives_point_independent_game():
    data = Dataset([[0.0, 1.0], [1.0, -1.0], [2.0, 0.5]], [1.0, 0.0, 2.5])
    fam = Marginal(Empirical(data), exact=True)
    f = fm("x1 + x2", 2)
    a = pointwise_game(DatasetLoss("squared", data), fam, f, [0.0, 0.0])
    b = pointwise_game(DatasetLoss("squared", data), fam, f, [9.0, -4.0])
    assert a.allclose(b, tol=0.0)


@pytest.mark.parametrize("players", [[2, 3], [1], [1, 2, 3]])
def test_component_game_is_scaled_unanimity_game(players):
    fam = Anchored([0.5, -1.0, 0.25])
    S = coal(3, players)
    g = cad_component(fam, fm("x1*x2*x3 + x2^2 - x3", 3), S)
    x = [1.5, 2.0, -0.5]
    game = pointwise_game(Identity(), fam, g, x)
    # Φ(0)(x) = 0 for the identity mapping
    assert game.allclose(unanimity_game(S) * g(x), tol=1e-12)


@pytest.mark.parametrize("players, expected", [([1], 3.0), ([2], 14.0), ([3], 10.0)])
def test_shapley_on_fixture(players, expected):
    assert evaluate(anchored_method("shapley"), fm(F3, 3), coal(3, players), X3) == pytest.approx(expected, abs=1e-12)


def test_shapley_matches_permutation_oracle():
    values = shapley_by_permutations(table_to_fn([0, 3, 4, 7, 0, 3, 24, 27]), 3)
    got = [evaluate(anchored_method("shapley"), fm(F3, 3), coal(3, [i]), X3) for i in (1, 2, 3)]
    assert np.allclose(got, values, atol=1e-12)


def test_pfi_style_on_max_is_zero_at_locally_independent_point():
    m = Method(Identity(), Anchored([0, 0]), aggregation_preset("pfi", 2))
    assert evaluate(m, fm("max(x1,x2)", 2), coal(2, [1]), [0.0, 2.0]) == 0.0


def test_stii_interaction_example():
    m = anchored_method("stii", order=2)
    assert evaluate(m, fm(F3, 3), coal(3, [2, 3]), X3) == pytest.approx(20.0, abs=1e-12)


def test_coalitions_above_order_get_zero():
    assert evaluate(anchored_method("shapley"), fm(F3, 3), coal(3, [2, 3]), X3) == 0.0


def test_occlusion_on_fixture():
    vals = attribute_point(anchored_method("occlusion"), fm(F3, 3), X3)
    assert {S.key(): v for S, v in vals.items()} == {"1": 3.0, "2": 24.0, "3": 20.0}


@pytest.mark.parametrize("name", ["occlusion", "isolated", "constant"])
def test_representation_identity_for_explicit_presets(name):
    rng = np.random.default_rng(len(name))
    for _ in range(10):
        d = int(rng.integers(2, 5))
        f = fm(random_expression(rng, d), d)
        fam = Anchored(rng.normal(size=d))
        m = Method(Identity(), fam, aggregation_preset(name, d))
        x = rng.normal(size=d)
        for i in range(1, d + 1):
            S = coal(d, [i])
            assert representation_sum(m, f, S, x) == pytest.approx(evaluate(m, f, S, x), abs=1e-9)


@pytest.mark.parametrize("name, order", [("shapley", 1), ("banzhaf", 1), ("stii", 2), ("sii", 2), ("bii", 2), ("pfi", 1)])
def test_derivative_form_matches_term_by_term_sum(name, order):
    rng = np.random.default_rng(order * 10 + len(name))
    d = 4
    m = anchored_method(name, d=d, order=order)
    for _ in range(5):
        f = fm(random_expression(rng, d), d)
        x = rng.normal(size=d)
        game = pointwise_game(Identity(), m.removal, f, x)
        for S in all_coalitions(d):
            if 1 <= S.size <= order:
                assert evaluate(m, f, S, x) == pytest.approx(derivative_sum(m, game, S), abs=1e-10)


def test_banzhaf_matches_definition_oracle():
    rng = np.random.default_rng(17)
    d = 4
    f = fm(random_expression(rng, d), d)
    x = rng.normal(size=d)
    m = anchored_method("banzhaf", d=d)
    game = pointwise_game(Identity(), m.removal, f, x)
    want = banzhaf_by_definition(lambda S: game(Coalition.of(d, sorted(S))), d)
    got = [evaluate(m, f, coal(d, [i]), x) for i in range(1, d + 1)]
    assert np.allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("players, expected", [([1], 3.0), ([2], 14.0), ([3], 10.0)])
def test_component_route_on_fixture(players, expected):
    res = mc_attribution_via_components(anchored_method("shapley"), fm(F3, 3), coal(3, players), X3)
    assert res.value == pytest.approx(expected, abs=1e-12) and not res.truncated


def test_component_route_truncation_reports_dropped_terms():
    res = mc_attribution_via_components(anchored_method("shapley"), fm(F3, 3), coal(3, [2]), X3, max_order=1)
    assert res.value == pytest.approx(4.0)
    assert res.truncated and res.dropped_terms == 1 and res.dropped_contribution == pytest.approx(10.0)


def test_component_route_rejects_other_behaviours():
    m = Method(LocalLoss("squared", fm("x1", 2)), Anchored([0, 0]), aggregation_preset("shapley", 2))
    with pytest.raises(ValueError):
        mc_attribution_via_components(m, fm("x1", 2), coal(2, [1]), [1.0, 1.0])


def test_component_route_for_generic_derivative_form():
    d = 3
    rng = np.random.default_rng(4)
    coeffs = {}
    for S in all_coalitions(d):
        if S.size == 1:
            for T in all_coalitions(d):
                if not (T & S).bits:
                    coeffs[(S, T)] = float(rng.uniform(0, 1))
    m = Method(Identity(), Anchored([0.2, 0.1, -0.3]), DerivativeForm(1, coeffs))
    f = fm("x1*x2 + x3*x1 - x2^2", d)
    x = [1.1, -0.4, 0.9]
    for i in (1, 2, 3):
        S = coal(d, [i])
        assert mc_attribution_via_components(m, f, S, x).value == pytest.approx(evaluate(m, f, S, x), abs=1e-10)


@pytest.mark.parametrize("agg", ["shapley", "banzhaf", "stii"])
def test_component_route_matches_evaluate_with_exact_empirical(agg):
    rng = np.random.default_rng(31)
    d = 3
    data = Dataset(rng.normal(size=(4, d)))
    m = Method(Identity(), Marginal(Empirical(data), exact=True), aggregation_preset(agg, d, order=2 if agg == "stii" else None))
    f = fm(random_expression(rng, d), d)
    x = rng.normal(size=d)
    for S in all_coalitions(d):
        if 1 <= S.size <= m.order:
            assert mc_attribution_via_components(m, f, S, x).value == pytest.approx(evaluate(m, f, S, x), abs=1e-8)


def test_occlusion_preset_uses_feature_means():
    data = Dataset([[0.0, 2.0], [2.0, 4.0]])
    m = preset("occlusion", 2, data=data)
    assert m.removal.baseline.tolist() == [1.0, 3.0]
    assert m.aggregation.name == "occlusion"


def test_loco_preset_triple():
    data = Dataset([[0.0, 1.0], [1.0, 0.0], [2.0, 3.0]], [1.0, 1.0, 5.0])
    m = preset("loco", 2, data=data)
    assert isinstance(m.removal, Retraining) and isinstance(m.behaviour, DatasetLoss)
    assert m.aggregation.name == "pfi"


def test_conditional_shapley_preset_triple():
    m = preset("conditional_shapley", 2, gaussian=GaussianSpec.bivariate(0.5))
    assert isinstance(m.removal, ConditionalGaussian) and isinstance(m.behaviour, Identity)
    assert m.aggregation.name == "shapley"


def test_shapley_effects_from_data_sum_to_total_variance():
    data = Dataset(np.random.default_rng(0).normal(size=(6, 2)))
    m = preset("shapley_effects", 2, data=data)
    assert isinstance(m.behaviour, Variance)
    f = fm("x1 + 2*x2 + x1*x2", 2)
    total = sum(attribute_point(m, f, [0.0, 0.0]).values())
    assert total == pytest.approx(float(np.var(f(data.X))), abs=1e-10)


@pytest.mark.parametrize("name, kw", [("pfi", {}), ("conditional_shapley", {}), ("nope", {})])
def test_preset_errors(name, kw):
    with pytest.raises(ValueError):
        preset(name, 2, **kw)


def test_config_hash_is_stable_and_sensitive():
    a = anchored_method("shapley")
    assert a.config_hash() == anchored_method("shapley").config_hash()
    assert a.config_hash() != anchored_method("banzhaf").config_hash()


def test_batch_attributions_are_ordered_and_threads_agree():
    rng = np.random.default_rng(2)
    data = Dataset(rng.normal(size=(50, 3)))
    m = Method(Identity(), Marginal(Empirical(data), mc_samples=32, seed=0), aggregation_preset("shapley", 3))
    pts = rng.normal(size=(6, 3)).tolist()
    one = attributions(m, fm(F3, 3), pts, seed=5).to_dict()
    many = attributions(m, fm(F3, 3), pts, seed=5, threads=3).to_dict()
    assert json.dumps(one, sort_keys=True) == json.dumps(many, sort_keys=True)
    assert [p["x"] for p in one["points"]] == pts


def test_internal_consistency_on_max():
    m = anchored_method("shapley", d=2)
    f = fm("max(x1,x2)", 2)
    at_zero = check_internal_consistency(m, f, [0.0, 2.0])
    assert at_zero.locally_independent == [1] and at_zero.attributions["1"] == 0.0 and at_zero.passed
    at_one = check_internal_consistency(m, f, [1.0, 2.0])
    assert 1 not in at_one.locally_independent and at_one.dependence_witness[1] == "2"


def test_constant_method_fails_static_consistency():
    m = anchored_method("constant", d=2)
    report = check_internal_consistency(m, fm("x1", 2), [1.0, 1.0])
    assert not report.sign_flip_holds and not report.passed


def test_explicit_sign_flip_detection():
    d = 2
    S = coal(d, [1])
    ok = Explicit(1, {(S, Coalition.empty(d)): 1.0, (S, S): -1.0})
    bad = Explicit(1, {(S, Coalition.empty(d)): 1.0})
    assert ok.satisfies_sign_flip(d)[0]
    assert not bad.satisfies_sign_flip(d)[0]


def test_functional_null_dichotomy():
    sigma = 0.5
    f = fm("x1", 2)
    cond = preset("conditional_shapley", 2, gaussian=GaussianSpec.bivariate(sigma), mc_samples=100_000, seed=3)
    value = evaluate(cond, f, coal(2, [2]), [0.0, 1.0])
    assert abs(value - sigma / 2) < 5e-3
    assert not check_functional_axiom(cond, "null", f, i=2, points=[[0.0, 1.0]], eps=1e-3).passed
    data = Dataset(np.random.default_rng(0).normal(size=(8, 2)))
    marg = preset("marginal_shapley", 2, data=data)
    report = check_functional_axiom(marg, "null", f, i=2)
    assert report.passed and report.max_deviation < 1e-10


def test_functional_dummy_for_anchored_shapley():
    m = anchored_method("shapley")
    assert check_functional_axiom(m, "dummy", fm("x1^2 + x2*x3", 3), i=1).passed
    assert not check_functional_axiom(m, "dummy", fm("x1*x2 + x3", 3), i=1).passed


def test_functional_symmetry_needs_equal_baselines():
    f = fm("x1*x2 + x3", 3)
    assert check_functional_axiom(anchored_method("shapley", baseline=[1.0, 1.0, 0.0]), "symmetry", f, i=1, j=2).passed
    assert not check_functional_axiom(anchored_method("shapley", baseline=[1.0, 2.0, 0.0]), "symmetry", f, i=1, j=2).passed


def test_isolated_method_anonymity_depends_on_baselines():
    f = fm("x1+x2^2+x3^3", 3)
    pi = Permutation((2, 3, 1))
    S1 = [coal(3, [1])]
    equal = Method(Identity(), Anchored([0.4, 0.4, 0.4]), aggregation_preset("isolated", 3))
    distinct = Method(Identity(), Anchored([0.1, 0.5, 0.9]), aggregation_preset("isolated", 3))
    assert check_functional_axiom(equal, "anonymity", f, pi=pi, coalitions=S1).passed
    assert not check_functional_axiom(distinct, "anonymity", f, pi=pi, coalitions=S1).passed


def test_cardinal_from_table_matches_preset():
    d = 3
    from math import comb
    table = {(1, t): 1.0 / (d * comb(d - 1, t)) for t in range(d)}
    custom = Method(Identity(), Anchored(np.zeros(d)), Cardinal.from_table(1, table))
    for i in (1, 2, 3):
        S = coal(d, [i])
        assert evaluate(custom, fm(F3, d), S, X3) == pytest.approx(evaluate(anchored_method("shapley"), fm(F3, d), S, X3))
