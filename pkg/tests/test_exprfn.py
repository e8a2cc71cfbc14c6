import numpy as np
import pytest
from hypothesis import given, strategies as st

from rbamkit.coalition import Permutation
from rbamkit.exprfn import (
    BinOp,
    Call,
    ExprDomainError,
    ExprSyntaxError,
    FunctionModel,
    Neg,
    Num,
    Var,
    evaluate,
    parse,
    permute_point,
    permuted_function,
    unparse,
)


def test_parse_respects_precedence():
    assert parse("x1 + x2*x3", 3) == BinOp("+", Var(1), BinOp("*", Var(2), Var(3)))


def test_parse_call():
    assert parse("max(x1,x2)", 2) == Call("max", (Var(1), Var(2)))


def test_parse_reports_byte_offset_of_syntax_error():
    with pytest.raises(ExprSyntaxError) as err:
        parse("x1 + + x2", 2)
    assert err.value.offset == 5


def test_power_is_right_associative_and_unary_binds_tighter():
    assert parse("x1^x2^x3", 3) == BinOp("^", Var(1), BinOp("^", Var(2), Var(3)))
    assert parse("-x1^2", 1) == BinOp("^", Neg(Var(1)), Num(2.0))


@pytest.mark.parametrize(
    "source, d",
    [("x3", 2), ("y1", 2), ("foo(x1)", 1), ("max(x1)", 1), ("(x1", 1), ("x1 x2", 2), ("", 1), ("x1 # 2", 1)],
)
def test_parse_errors(source, d):
    with pytest.raises(ExprSyntaxError):
        parse(source, d)


def test_byte_offset_counts_utf8_bytes():
    with pytest.raises(ExprSyntaxError) as err:
        parse("x1 + é", 1)
    assert err.value.offset == 5


@pytest.mark.parametrize(
    "source, d, x, expected",
    [
        ("x1+x2+x2*x3", 3, (3, 4, 5), 27.0),
        ("x1 + x2^2 + x3^3", 3, (0, 0, 0), 0.0),
        ("max(x1,x2)", 2, (0, 2), 2.0),
        ("relu(x1) + abs(x2) - min(x1, x2)", 2, (-1, -3), 6.0),
        ("exp(0) + log(1) + 8/4", 1, (0,), 3.0),
        ("2^-1", 1, (0,), 0.5),
    ],
)
def test_evaluate_examples(source, d, x, expected):
    assert evaluate(parse(source, d), x) == expected


@pytest.mark.parametrize("source, x", [("1/x1", (0.0,)), ("log(x1)", (-1.0,)), ("x1^0.5", (-4.0,))])
def test_domain_errors_report_the_point(source, x):
    with pytest.raises(ExprDomainError) as err:
        evaluate(parse(source, 1), x)
    assert "x1=" in str(err.value)


def test_batch_evaluation_matches_pointwise():
    e = parse("x1*x2 - max(x1, 0.5)", 2)
    X = np.array([[1.0, 2.0], [-1.0, 3.0], [0.25, 0.5]])
    assert np.array_equal(evaluate(e, X), [evaluate(e, row) for row in X])


def test_function_model_arithmetic():
    f = FunctionModel.from_expression("x1", 2)
    g = FunctionModel.from_expression("x2^2", 2)
    h = 2 * f - g + FunctionModel.constant(2, 1.0)
    assert h([3.0, 2.0]) == 2 * 3 - 4 + 1


CUBIC_F = "x1 + x2^2 + x3^3"


def test_permuted_function_identity_for_cyclic_shift():
    pi = Permutation((2, 3, 1))
    f = FunctionModel.from_expression(CUBIC_F, 3)
    pf = permuted_function(pi, f)
    rng = np.random.default_rng(7)
    Z = rng.uniform(-2, 2, size=(100, 3))
    # πz = (z2, z3, z1)
    assert np.allclose(pf(Z[:, [1, 2, 0]]), f(Z), rtol=0, atol=0)
    # (πf)(z2, b2, b3) = f(b3, z2, b2)
    z2, b2, b3 = 0.7, -1.1, 1.9
    assert pf([z2, b2, b3]) == f([b3, z2, b2])


def test_permuted_function_identity_and_involution():
    f = FunctionModel.from_expression(CUBIC_F, 3)
    X = np.random.default_rng(1).normal(size=(50, 3))
    assert np.array_equal(permuted_function(Permutation.identity(3), f)(X), f(X))
    swap = Permutation((3, 2, 1))
    assert np.array_equal(permuted_function(swap, permuted_function(swap, f))(X), f(X))


def test_permute_point_matches_definition():
    assert list(permute_point(Permutation((2, 3, 1)), np.array([10.0, 20.0, 30.0]))) == [20.0, 30.0, 10.0]


def test_permuted_function_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        permuted_function(Permutation((2, 1)), FunctionModel.from_expression("x1", 3))


D = 4
leaves = st.one_of(
    st.integers(1, D).map(Var),
    st.floats(0, 100, allow_nan=False, allow_infinity=False).map(Num),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(st.sampled_from(["max", "min"]), children, children).map(lambda t: Call(t[0], (t[1], t[2]))),
        st.tuples(st.sampled_from(["abs", "exp", "log", "relu"]), children).map(lambda t: Call(t[0], (t[1],))),
    )


expressions = st.recursive(leaves, _extend, max_leaves=12)


@given(expressions)
def test_unparse_reparses_to_identical_tree(e):
    assert parse(unparse(e), D) == e


@given(expressions)
def test_unparse_is_a_fixpoint(e):
    text = unparse(e)
    assert unparse(parse(text, D)) == text
