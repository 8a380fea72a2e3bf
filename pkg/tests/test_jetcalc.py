import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import polynomials
from jetvar.jetcalc import (
    HorizontalForm,
    JetContext,
    JetOrderError,
    SectionT,
    connection_pullback,
    momenta,
    prolong,
    substitute_prolongation,
    total_derivative,
    total_derivative_multi,
    total_divergence,
    vertical_differential,
)
from jetvar.multiindex import MultiIndex
from jetvar.numcheck import jet_variables, random_polynomial
from jetvar.symexpr import Base, Expr, Jet, Momentum, func, p, parse, partial, u, x

CTX = JetContext(2, 1, 6)
JETS = [Base(1), Base(2)] + [Jet(1, I) for I in [(), (1,), (2,), (1, 1), (1, 2), (2, 2)]]


def test_total_derivative_examples():
    assert total_derivative(u(), 1, CTX) == u(1)
    assert total_derivative(x(1) * u(2), 1, CTX) == u(2) + x(1) * u(1, 2)
    assert total_derivative(func("phi"), 2, CTX) == func("phi", 2)


def test_total_derivative_errors():
    with pytest.raises(JetOrderError):
        total_derivative(u(1, 1), 1, JetContext(1, 1, 2))
    with pytest.raises(ValueError):
        total_derivative(p((), 1), 1, CTX)
    with pytest.raises(IndexError):
        total_derivative(u(), 3, CTX)


def test_total_derivative_multi_examples():
    e = Fraction(1, 2) * u() ** 2
    assert total_derivative_multi(e, MultiIndex((), 1), CTX) == e
    assert total_derivative_multi(e, MultiIndex((1, 1), 2), CTX) == u(1) ** 2 + u() * u(1, 1)


@given(polynomials(variables=JETS))
def test_total_derivatives_commute(e):
    a = total_derivative(total_derivative(e, 1, CTX), 2, CTX)
    b = total_derivative(total_derivative(e, 2, CTX), 1, CTX)
    assert a == b


@given(polynomials(variables=JETS), polynomials(variables=JETS), st.integers(1, 2))
def test_leibniz(a, b, i):
    assert total_derivative(a * b, i, CTX) == total_derivative(a, i, CTX) * b + a * total_derivative(b, i, CTX)


def test_prolong_examples():
    jet = prolong([x(1) * x(2)], 2, 2)
    assert jet[Jet(1, ())] == x(1) * x(2)
    assert jet[Jet(1, (1,))] == x(2)
    assert jet[Jet(1, (2,))] == x(1)
    assert jet[Jet(1, (1, 2))] == 1
    assert jet[Jet(1, (1, 1))].is_zero() and jet[Jet(1, (2, 2))].is_zero()
    opaque = prolong([func("phi")], 1, 2)
    assert opaque[Jet(1, (2,))] == func("phi", 2)
    with pytest.raises(ValueError):
        prolong([u()], 1, 1)


def test_chain_rule_consistency():
    rng = random.Random(3)
    for _ in range(20):
        e = random_polynomial(rng, jet_variables(2, 1, 2), 3)
        s = [random_polynomial(rng, [Base(1), Base(2)], 4)]
        for i in (1, 2):
            lhs = total_derivative(e, i, CTX).substitute(prolong(s, 3, 2))
            rhs = partial(e.substitute(prolong(s, 2, 2)), Base(i))
            assert lhs == rhs


def test_chain_rule_numerically():
    rng = random.Random(5)
    e = parse("x1*u[1]^2 - u*u[2] + u[1,2]")
    s = [parse("x1^2*x2 - 3*x2^3 + x1")]
    d = total_derivative(e, 1, CTX)
    for _ in range(10):
        x0 = {Base(1): rng.uniform(-1, 1), Base(2): rng.uniform(-1, 1)}
        h = 1e-5
        up = dict(x0)
        up[Base(1)] += h
        dn = dict(x0)
        dn[Base(1)] -= h
        fd = (substitute_prolongation(e, s, 2).eval(up) - substitute_prolongation(e, s, 2).eval(dn)) / (2 * h)
        exact = substitute_prolongation(d, s, 2).eval(x0)
        assert abs(fd - exact) <= 1e-9 * max(1.0, abs(exact)) + 1e-9


def test_vertical_differential_examples():
    T = vertical_differential(HorizontalForm([u(), Expr(0)]), 1, 1)
    assert T[Momentum(1, (), 1)] == 1
    assert all(T[k].is_zero() for k in T.momenta() if k != Momentum(1, (), 1))
    assert vertical_differential(HorizontalForm([x(1) ** 2, x(2)]), 1, 1).coeffs == {}
    with pytest.raises(JetOrderError):
        vertical_differential(HorizontalForm([u(1, 1), Expr(0)]), 1, 1)


def test_total_divergence_examples():
    assert total_divergence(HorizontalForm([u()]), JetContext(1, 1, 2)) == u(1)
    assert total_divergence(HorizontalForm([Expr(3), Expr(-1)]), CTX).is_zero()


def test_horizontal_form_rejects_momenta():
    with pytest.raises(ValueError):
        HorizontalForm([p((), 1)])


def test_section_validation_and_arithmetic():
    with pytest.raises(ValueError):
        SectionT(2, 1, 1, {Momentum(1, (1, 1), 1): u()})
    with pytest.raises(ValueError):
        SectionT(2, 1, 1, {Momentum(1, (), 1): u(1, 1)})
    with pytest.raises(ValueError):
        SectionT(2, 1, 1, {Momentum(1, (), 1): p((), 2)})
    a = SectionT(2, 1, 1, {Momentum(1, (), 1): u()})
    b = SectionT(2, 1, 1, {Momentum(1, (), 1): -u(), Momentum(1, (1,), 2): x(1)})
    assert (a + b).coeffs == {Momentum(1, (1,), 2): x(1)}
    assert len(momenta(2, 1, 1)) == 6


def test_connection_pullback():
    top = {Jet(1, (1, 1)): x(1)}
    assert connection_pullback(u(1, 1) * u(), top, 1) == x(1) * u()
    with pytest.raises(JetOrderError):
        connection_pullback(u(1, 1, 1), top, 1)
