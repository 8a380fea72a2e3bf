import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetvar.jetcalc import HorizontalForm, JetOrderError, prolong, total_divergence
from jetvar.numcheck import jet_variables, random_polynomial
from jetvar.symexpr import Base, Expr, Jet, parse, u
from jetvar.variational import (
    InvalidProblemError,
    LagrangianProblem,
    add_divergence,
    constraint_equations,
    find_zero,
    hessian,
    is_hyperregular,
    variational_derivative,
)

BIHARMONIC = LagrangianProblem(2, 1, 2, parse("1/2*u[1,1]^2 + u[1,2]^2 + 1/2*u[2,2]^2"))
FREE = LagrangianProblem(1, 1, 1, parse("1/2*u[1]^2"))


def test_problem_validation():
    with pytest.raises(InvalidProblemError):
        LagrangianProblem(1, 1, 1, parse("u[1,1]"))
    with pytest.raises(InvalidProblemError):
        LagrangianProblem(1, 1, 1, parse("p[;1]"))
    with pytest.raises(InvalidProblemError):
        LagrangianProblem(1, 1, 1, parse("u2[1]"))
    with pytest.raises(InvalidProblemError):
        LagrangianProblem(1, 1, 0, Expr(0))


def test_euler_lagrange_examples():
    assert variational_derivative(BIHARMONIC) == [parse("u[1,1,1,1] + 2*u[1,1,2,2] + u[2,2,2,2]")]
    assert variational_derivative(FREE) == [-u(1, 1)]


def test_hessian_examples():
    assert hessian(BIHARMONIC) == [[1, 0, 0], [0, 2, 0], [0, 0, 1]]
    assert hessian(FREE) == [[1]]


def test_hyperregularity_verdicts():
    yes = is_hyperregular(BIHARMONIC)
    assert yes.verdict == "yes" and yes.det == 2
    degenerate = is_hyperregular(LagrangianProblem(1, 1, 2, parse("u[1,1]")))
    assert degenerate.verdict == "no" and degenerate.det.is_zero()
    cubic = is_hyperregular(LagrangianProblem(1, 1, 2, parse("1/6*u[1,1]^3")))
    assert cubic.verdict == "no"
    assert cubic.witness == {Jet(1, (1, 1)): 0}


def test_hyperregularity_undetermined_without_zero():
    P = LagrangianProblem(1, 1, 1, parse("1/12*u[1]^4 + 1/2*u[1]^2"))
    r = is_hyperregular(P)
    assert r.det == parse("u[1]^2 + 1")
    assert r.verdict == "undetermined" and r.seed == 42


def test_find_zero_lattice():
    assert find_zero(parse("u[1] - x1 - 1")) is not None
    assert find_zero(parse("x1^2 + 1")) is None


def test_constraint_examples():
    eqs = constraint_equations(BIHARMONIC).by_label()
    assert eqs[("constraint", 1, (1, 2))].lhs == parse("2*u[1,2] - p[1;2] - p[2;1]")
    assert eqs[("constraint", 1, (1, 1))].lhs == parse("u[1,1] - p[1;1]")
    free = constraint_equations(FREE).equations
    assert [e.lhs for e in free] == [parse("u[1] - p[;1]")]


def test_add_divergence_examples():
    assert add_divergence(BIHARMONIC, HorizontalForm([Expr(0), Expr(0)])).L == BIHARMONIC.L
    Pt = add_divergence(BIHARMONIC, HorizontalForm([u(), Expr(0)]))
    assert Pt.L == BIHARMONIC.L + u(1)
    assert variational_derivative(Pt) == variational_derivative(BIHARMONIC)
    with pytest.raises(JetOrderError):
        add_divergence(BIHARMONIC, HorizontalForm([u(1, 1), Expr(0)]))


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6))
def test_divergence_invariance(seed):
    rng = random.Random(seed)
    rho = HorizontalForm([random_polynomial(rng, jet_variables(2, 1, 1), 3) for _ in range(2)])
    Pt = add_divergence(BIHARMONIC, rho)
    assert variational_derivative(Pt) == variational_derivative(BIHARMONIC)
    assert hessian(Pt) == hessian(BIHARMONIC)
    assert is_hyperregular(Pt).verdict == "yes"
    assert variational_derivative(LagrangianProblem(2, 1, 2, total_divergence(rho, BIHARMONIC.context()))) == [0]


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6))
def test_hessian_symmetric(seed):
    rng = random.Random(seed)
    L = random_polynomial(rng, jet_variables(2, 1, 2), 3, terms=6)
    H = hessian(LagrangianProblem(2, 1, 2, L))
    assert all(H[r][c] == H[c][r] for r in range(3) for c in range(3))


@pytest.mark.parametrize("text, order", [
    ("1/2*u[1]^2 + x1*u^3", 1),
    ("1/2*u[1,1]^2 - u*u[1]^2", 2),
])
def test_discrete_action_gradient(text, order):
    """Nodal gradient of a discretized action approximates the variational derivative."""
    P = LagrangianProblem(1, 1, order, parse(text))
    el = variational_derivative(P)[0]
    s = parse("1/3*x1^3 - x1 + 1/2")
    h = 1e-2
    grid = [k * h for k in range(-30, 31)]
    nodes = [float(s.eval({Base(1): xk})) for xk in grid]

    def action(vals):
        total = 0.0
        for k in range(2, len(vals) - 2):
            pt = {Base(1): grid[k], Jet(1, ()): vals[k], Jet(1, (1,)): (vals[k + 1] - vals[k - 1]) / (2 * h)}
            if order == 2:
                pt[Jet(1, (1, 1))] = (vals[k + 1] - 2 * vals[k] + vals[k - 1]) / h ** 2
            total += float(P.L.eval(pt)) * h
        return total

    jets = prolong([s], 2 * order, 1)
    for k in (20, 30, 40):
        eps = 1e-4
        up, dn = list(nodes), list(nodes)
        up[k] += eps
        dn[k] -= eps
        grad = (action(up) - action(dn)) / (2 * eps) / h
        exact = float(el.substitute(jets).eval({Base(1): grid[k]}))
        assert abs(grad - exact) <= 1e-2 * (1 + abs(exact))
