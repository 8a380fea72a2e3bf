import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetvar.dedonder import (
    EliminationError,
    HamiltonianData,
    NotLagrangianError,
    affine_top_system,
    fiber_derivative_check,
    hamiltonian,
    hdwe,
    psi_covariance,
    psi_shift,
    recover_lagrangian,
    solve_top_jets,
)
from jetvar.jetcalc import HorizontalForm
from jetvar.multiindex import count_up_to
from jetvar.numcheck import BIHARMONIC_H, jet_variables, random_polynomial
from jetvar.symexpr import Expr, Jet, Momentum, parse, partial, u, x
from jetvar.variational import LagrangianProblem, add_divergence, constraint_equations

BIHARMONIC = LagrangianProblem(2, 1, 2, parse("1/2*u[1,1]^2 + u[1,2]^2 + 1/2*u[2,2]^2"))
FREE = LagrangianProblem(1, 1, 1, parse("1/2*u[1]^2"))
THIRD = LagrangianProblem(1, 1, 3, parse("1/2*u[1,1,1]^2"))


def test_top_jets_examples():
    s = solve_top_jets(BIHARMONIC)
    assert s[Jet(1, (1, 2))] == parse("1/2*p[1;2] + 1/2*p[2;1]")
    assert s[Jet(1, (1, 1))] == parse("p[1;1]")
    assert solve_top_jets(FREE) == {Jet(1, (1,)): parse("p[;1]")}


def test_hamiltonian_examples():
    assert hamiltonian(BIHARMONIC).H == parse(BIHARMONIC_H)
    assert hamiltonian(FREE).H == parse("1/2*p[;1]^2")
    Hd = hamiltonian(BIHARMONIC)
    for i in (1, 2):
        assert partial(Hd.H, Momentum(1, (), i)) == u(i)


def test_elimination_rejects_unsupported():
    with pytest.raises(EliminationError, match="not affine"):
        affine_top_system(LagrangianProblem(1, 1, 2, parse("1/6*u[1,1]^3")))
    with pytest.raises(EliminationError):
        hamiltonian(LagrangianProblem(1, 1, 2, parse("u[1,1]*u")))


def test_nonconstant_hessian_with_constant_determinant():
    # Hessian [[1, u], [u, 1 + u^2]] has determinant 1
    L = parse("1/2*u[1,1]^2 + u*u[1,1]*u[1,2] + 1/2*(1 + u^2)*u[1,2]^2 + 1/2*u[2,2]^2")
    P = LagrangianProblem(2, 1, 2, L)
    Hd = hamiltonian(P)
    back = {k: v for k, v in Hd.top_jets.items()}
    for eq in constraint_equations(P):
        assert eq.lhs.substitute(back).is_zero()


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6))
def test_back_substitution_random_quadratic(seed):
    rng = random.Random(seed)
    a, b, c = (rng.randint(1, 5) for _ in range(3))
    low = jet_variables(2, 1, 1)
    L = (a * u(1, 1) ** 2 + b * u(1, 2) ** 2 + c * u(2, 2) ** 2 + u(1, 1) * u(2, 2)
         + random_polynomial(rng, low, 2) * u(1, 2) + random_polynomial(rng, low, 3))
    P = LagrangianProblem(2, 1, 2, L)
    Hd = hamiltonian(P)
    for eq in constraint_equations(P):
        assert eq.lhs.substitute(Hd.top_jets).is_zero()
    assert fiber_derivative_check(Hd).passed
    assert recover_lagrangian(HamiltonianData(Hd.H, {}, 2, 1, 1)).problem.L == L


def test_hdwe_biharmonic_families():
    eqs = hdwe(hamiltonian(BIHARMONIC))
    texts = [e.text() for e in eqs]
    assert "p[;1],1 + p[;2],2 = 0" in texts
    assert "p[1;1],1 + p[1;2],2 = -p[;1]" in texts
    assert "u,2 = u[2]" in texts
    assert "u[2],1 = 1/2*p[1;2] + 1/2*p[2;1]" in texts
    assert len(eqs) == count_up_to(2, 1) * 1 * 3


def test_hdwe_first_order():
    eqs = hdwe(HamiltonianData(parse("1/2*p[;1]^2"), {}, 1, 1, 0))
    assert [e.text() for e in eqs] == ["p[;1],1 = 0", "u,1 = p[;1]"]


def test_hamiltonian_json():
    data = hamiltonian(BIHARMONIC).to_dict()
    assert json.loads(json.dumps(data)) == data
    assert parse(data["H"]) == parse(BIHARMONIC_H)
    assert parse(data["top_jets"]["(1,(1,2))"]) == parse("1/2*(p[1;2] + p[2;1])")


def test_fiber_derivative_checks():
    rep = fiber_derivative_check(hamiltonian(BIHARMONIC))
    assert rep.passed
    assert any("dH/dp[1;2] = dH/dp[2;1]" == c.name for c in rep.checks)
    third = hamiltonian(THIRD)
    assert partial(third.H, Momentum(1, (1,), 1)) == u(1, 1)
    assert fiber_derivative_check(third).passed
    with pytest.raises(ValueError):
        fiber_derivative_check(HamiltonianData(third.H, {}, 1, 1, 2))


def test_psi_covariance_examples():
    assert psi_covariance(BIHARMONIC, HorizontalForm([Expr(0), Expr(0)])).passed
    rho_x = HorizontalForm([x(1) ** 2 * x(2), x(2) ** 3])
    Ht = hamiltonian(add_divergence(BIHARMONIC, rho_x)).H
    assert Ht == parse(BIHARMONIC_H) - parse("2*x1*x2 + 3*x2^2")
    rho = HorizontalForm([u(), Expr(0)])
    assert psi_covariance(BIHARMONIC, rho).passed
    assert psi_shift(rho, 1, 1)[Momentum(1, (), 1)] == parse("p[;1] - 1")
    Ht = hamiltonian(add_divergence(BIHARMONIC, rho)).H
    assert Ht == parse(BIHARMONIC_H).substitute({Momentum(1, (), 1): parse("p[;1] - 1")})


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6))
def test_psi_covariance_random(seed):
    rng = random.Random(seed)
    rho = HorizontalForm([random_polynomial(rng, jet_variables(2, 1, 1), 3) for _ in range(2)])
    assert psi_covariance(BIHARMONIC, rho).passed


@pytest.mark.parametrize("P", [BIHARMONIC, FREE, THIRD], ids=["biharmonic", "free", "third"])
def test_recover_round_trip(P):
    Hd = hamiltonian(P)
    rec = recover_lagrangian(HamiltonianData(Hd.H, {}, Hd.n, Hd.m, Hd.l))
    assert rec.problem.L == P.L
    assert rec.problem.order == P.order
    assert rec.report.passed


def test_recover_rejects_condition_a():
    H = parse("p[;1]*p[;2] + 1/2*p[1;1]^2 + 1/2*p[2;2]^2")
    with pytest.raises(NotLagrangianError) as err:
        recover_lagrangian(HamiltonianData(H, {}, 2, 1, 1))
    assert err.value.witness == {"momentum": "p[;1]", "derivative": "p[;2]", "expected": "u[1]"}
    assert not err.value.report.passed


def test_recover_rejects_asymmetry_and_rank():
    asym = parse("u[1]*p[;1] + u[2]*p[;2] + 1/2*p[1;1]^2 + 1/2*p[1;2]^2 + 1/2*p[2;2]^2")
    with pytest.raises(NotLagrangianError):
        recover_lagrangian(HamiltonianData(asym, {}, 2, 1, 1))
    flat = parse("u[1]*p[;1]")
    with pytest.raises(NotLagrangianError, match="rank"):
        recover_lagrangian(HamiltonianData(flat, {}, 1, 1, 1))
    curved = parse("u[1]*p[;1] + 1/12*p[1;1]^4")
    with pytest.raises(NotLagrangianError, match="affine"):
        recover_lagrangian(HamiltonianData(curved, {}, 1, 1, 1))


def test_liouville_form_has_no_momenta():
    Hd = hamiltonian(THIRD)
    L = recover_lagrangian(HamiltonianData(Hd.H, {}, 1, 1, 2)).problem.L
    assert not any(isinstance(v, Momentum) for v in L.free_vars)
