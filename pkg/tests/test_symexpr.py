import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import VARS, points, polynomials
from jetvar.symexpr import (
    Base,
    Expr,
    ExprSyntaxError,
    FuncDeriv,
    Jet,
    MissingBindingError,
    Momentum,
    Param,
    ParseContext,
    RuleSet,
    UnknownVariableError,
    biharmonic_rule,
    equals,
    evaluate,
    func,
    normalize,
    p,
    parse,
    parse_tree,
    partial,
    specialize_functions,
    substitute,
    to_text,
    u,
    x,
)


# -- parsing and printing ----------------------------------------------------

def test_parse_literal_examples():
    ctx = ParseContext(n=1, m=1, max_order=2)
    assert parse("1/2 * u[1,1]^2", ctx) == Fraction(1, 2) * u(1, 1) ** 2
    assert parse("p[;1]*u[1] + x1") == p((), 1) * u(1) + x(1)


def test_syntax_error_column():
    with pytest.raises(ExprSyntaxError) as err:
        parse("u[1,2")
    assert err.value.column == 6
    assert "column 6" in str(err.value)


@pytest.mark.parametrize("text", ["u[1,", "2*", "(x1", "u[1;2]", "x1 $ x2", "p[1]"])
def test_syntax_errors(text):
    with pytest.raises(ExprSyntaxError):
        parse(text)


def test_validation_against_context():
    ctx = ParseContext(n=2, m=1, max_order=2, momentum_order=1)
    with pytest.raises(UnknownVariableError):
        parse("u[1,1,1]", ctx)
    with pytest.raises(UnknownVariableError):
        parse("x3", ctx)
    with pytest.raises(UnknownVariableError):
        parse("u2[1]", ctx)
    with pytest.raises(UnknownVariableError):
        parse("p[1,1;1]", ctx)


def test_alpha_and_index_forms():
    assert parse("u2[2,1]") == Expr(Jet(2, (1, 2)))
    assert parse("u1[]") == parse("u") == Expr(Jet(1, ()))
    assert parse("p1[1,1;2]") == Expr(Momentum(1, (1, 1), 2))
    assert parse("phi[2,1](x)") == Expr(FuncDeriv("phi", (1, 2)))
    assert parse("A1") == Expr(Param("A1"))


def test_printer_examples():
    assert to_text(parse("u[1,2]*p[;1] - 3/4*x1^2 + 1")) == "-3/4*x1^2 + u[1,2]*p[;1] + 1"
    assert to_text(Expr(0)) == "0"
    assert to_text(-u(1)) == "-u[1]"


@given(polynomials())
def test_print_parse_round_trip(e):
    assert parse(to_text(e)) == e


# -- algebra -----------------------------------------------------------------

def test_partial_examples():
    assert partial(Fraction(1, 2) * u(1, 1) ** 2, Jet(1, (1, 1))) == u(1, 1)
    assert partial(p((), 1) * u(1), Momentum(1, (), 1)) == u(1)
    # opaque functions do not depend on jets
    assert partial(func("phi") * u(), Jet(1, (1,))).is_zero()
    assert partial(func("phi", 1), Base(2)) == func("phi", 1, 2)


def test_substitute_examples():
    e = u(1, 1) * p((), 1)
    assert substitute(e, {Jet(1, (1, 1)): p((1,), 1)}) == p((1,), 1) * p((), 1)
    assert substitute(e, {}) == e
    # simultaneous, not sequential
    assert substitute(u(1) + u(2), {Jet(1, (1,)): u(2), Jet(1, (2,)): u(1)}) == u(1) + u(2)


def test_equals_examples():
    assert equals(u(1, 2), parse("u[2,1]"))
    a, b = Expr(Param("a")), Expr(Param("b"))
    assert equals((a + b) ** 2, a ** 2 + 2 * a * b + b ** 2)
    assert not equals(x(1), x(2))


def test_eval_examples():
    assert evaluate(Fraction(1, 2) * u() ** 2, {Jet(1, ()): 4}) == 8
    assert evaluate(x(1) + x(2), {Base(1): Fraction(1, 3), Base(2): Fraction(1, 6)}) == Fraction(1, 2)
    assert isinstance(evaluate(x(1), {Base(1): 0.5}), float)
    with pytest.raises(MissingBindingError):
        evaluate(x(1) * x(2), {Base(1): 1})


def test_division_rules():
    assert (u() / 2) * 2 == u()
    with pytest.raises(ZeroDivisionError):
        u() / 0
    with pytest.raises(ValueError):
        u() / x(1)


def test_normalized_and_raw_tree_agree():
    rng = random.Random(7)
    text = "(x1 + 2*u[1])^3 - (u - x2)*(u + x2) + 1/3*a*(u[1,2] - x1)^2"
    tree = parse_tree(text)
    e = normalize(tree)
    for _ in range(100):
        pt = {v: Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for v in VARS}
        assert tree.evaluate(pt) == e.eval(pt)


@given(polynomials(), polynomials(), points())
def test_eval_is_ring_homomorphism(a, b, pt):
    assert (a + b).eval(pt) == a.eval(pt) + b.eval(pt)
    assert (a * b).eval(pt) == a.eval(pt) * b.eval(pt)


@given(polynomials(), st.sampled_from(VARS), st.sampled_from(VARS))
def test_partials_commute(e, v, w):
    assert partial(partial(e, v), w) == partial(partial(e, w), v)


@given(polynomials(), polynomials(), st.sampled_from(VARS), st.fractions(max_denominator=5), st.integers(-3, 3))
def test_partial_is_linear(e1, e2, v, a, b):
    assert partial(a * e1 + b * e2, v) == a * partial(e1, v) + b * partial(e2, v)


@given(polynomials())
def test_normalize_is_idempotent(e):
    assert normalize(normalize(e)) == normalize(e)


# -- opaque-function rules ---------------------------------------------------

def test_biharmonic_rule_reduces_bilaplacian():
    rules = RuleSet([biharmonic_rule("phi", 2)])
    lap2 = func("phi", 1, 1, 1, 1) + 2 * func("phi", 1, 1, 2, 2) + func("phi", 2, 2, 2, 2)
    assert rules.reduce(lap2).is_zero()
    # derivatives of the relation vanish too
    assert rules.reduce(partial(partial(lap2, Base(1)), Base(2))).is_zero()
    assert equals(lap2 * u(), 0, rules)
    assert not rules.reduce(func("phi", 1, 1, 2, 2)).is_zero()


def test_specialize_functions():
    e = func("phi", 1) * u() + func("phi", 1, 2)
    out = specialize_functions(e, {"phi": parse("x1^3*x2")})
    assert out == 3 * x(1) ** 2 * x(2) * u() + 3 * x(1) ** 2
