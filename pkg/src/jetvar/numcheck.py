"""Numeric oracles and the end-to-end biharmonic verification harness."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .dedonder import HamiltonianData, hamiltonian, hdwe
from .equations import Report
from .hamjac import (
    HJAnsatz,
    classical_hj_residual,
    curvature,
    dv_closed_check,
    generalized_hj_residual,
    integral_section_check,
    nabla_symbols,
)
from .linalg import expr_inverse, identity, is_constant_matrix, matmul, to_fractions
from .multiindex import enumerate_indices
from .symexpr import (
    ZERO,
    Base,
    Expr,
    FuncDeriv,
    Jet,
    Momentum,
    RuleSet,
    VarId,
    as_expr,
    biharmonic_rule,
    func,
    param,
    parse,
    partial,
    specialize_functions,
    to_text,
    var_text,
    u,
    x,
)
from .variational import (
    LagrangianProblem,
    constraint_equations,
    hessian,
    is_hyperregular,
    variational_derivative,
)


@dataclass(frozen=True)
class OracleConfig:
    seed: int = 42
    samples: int = 20
    fd_step: Fraction = Fraction(1, 10 ** 4)
    tol_rel: float = 1e-6

    def __post_init__(self) -> None:
        object.__setattr__(self, "fd_step", Fraction(self.fd_step))
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")
        if self.tol_rel <= 0:
            raise ValueError("tol_rel must be positive")

    def rng(self) -> random.Random:
        return random.Random(self.seed)


def random_rational(rng: random.Random, bound: int = 1000, den: int = 100) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, den))


def random_point(variables, rng: random.Random, scale: int = 2) -> dict[VarId, Fraction]:
    """Rationals in ``[-scale, scale]`` with denominators up to 1000."""
    return {v: Fraction(rng.randint(-1000 * scale, 1000 * scale), 1000) for v in variables}


def random_polynomial(rng: random.Random, variables: Sequence[VarId], degree: int,
                      terms: int = 4, coeff_bound: int = 9) -> Expr:
    out = ZERO
    variables = list(variables)
    for _ in range(terms):
        mono = Expr(Fraction(rng.randint(-coeff_bound, coeff_bound), rng.randint(1, 4)))
        for _ in range(rng.randint(0, degree)):
            mono = mono * Expr(rng.choice(variables))
        out = out + mono
    return out


def jet_variables(n: int, m: int, order: int, with_base: bool = True) -> list[VarId]:
    out: list[VarId] = [Base(i) for i in range(1, n + 1)] if with_base else []
    out.extend(Jet(a, I.entries) for a in range(1, m + 1) for I in enumerate_indices(n, order))
    return out


def _rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def fd_partial_check(e: Expr, v: VarId, cfg: OracleConfig = OracleConfig()) -> Report:
    """Symbolic partial against a central difference at ``cfg.samples`` random points.

    The difference quotient is formed exactly in rationals, so the only error
    is truncation, ``O(step^2)``.  The error is relative to ``max(|a|, |b|, 1)``.
    """
    e = as_expr(e)
    if any(isinstance(w, FuncDeriv) for w in e.free_vars):
        raise ValueError("finite differences need an expression free of opaque functions")
    d = partial(e, v)
    rng = cfg.rng()
    variables = sorted(e.free_vars | {v}, key=lambda w: w.sort_key)
    h = cfg.fd_step
    worst = 0.0
    for _ in range(cfg.samples):
        pt = random_point(variables, rng)
        plus, minus = dict(pt), dict(pt)
        plus[v] += h
        minus[v] -= h
        fd = (e.eval(plus) - e.eval(minus)) / (2 * h)
        worst = max(worst, _rel_err(float(d.eval(pt)), float(fd)))
    report = Report("finite-difference partial", meta={"seed": cfg.seed, "max_rel_error": worst})
    report.add(f"d/d{var_text(v)}", worst <= cfg.tol_rel, f"max relative error {worst:.3e}")
    return report


def hdwe_solution_check(Hd: HamiltonianData, candidate: Mapping[VarId, Expr],
                        cfg: OracleConfig = OracleConfig(), rules: Optional[RuleSet] = None) -> Report:
    """Substitute a candidate ``(u_I(x), p^{I.i}(x))`` into every field equation.

    Residuals are exact; they are also sampled at random rational points
    when they are free of opaque functions.
    """
    system = hdwe(Hd)
    missing = [v for v in system.variables if v not in candidate]
    if missing:
        raise ValueError("incomplete candidate: no value for " + ", ".join(map(str, missing)))
    cand = {k: as_expr(v) for k, v in candidate.items()}
    for k, v in cand.items():
        if any(isinstance(w, (Jet, Momentum)) for w in v.free_vars):
            raise ValueError(f"candidate for {k} must depend on base variables only")
    report = Report("hdwe solution", meta={"seed": cfg.seed})
    rng = cfg.rng()
    worst = 0.0
    for eq in system:
        r = eq.lhs.substitute(cand)
        for var, i in eq.flux:
            r = r + partial(cand[var], Base(i))
        if rules:
            r = rules.reduce(r)
        report.require_zero(eq.text(), r)
        if not any(isinstance(w, FuncDeriv) for w in r.free_vars):
            for _ in range(cfg.samples):
                pt = random_point(r.free_vars, rng)
                worst = max(worst, abs(float(r.eval(pt))))
    report.meta["max_abs_residual"] = worst
    return report


def bilaplacian_stencil(e: Expr, point: Mapping[VarId, Fraction], h: Fraction = Fraction(1)) -> Fraction:
    """13-point finite-difference bilaplacian in ``(x1, x2)``; exact for quintic polynomials."""
    x0, y0 = point[Base(1)], point[Base(2)]

    def at(dx: int, dy: int) -> Fraction:
        pt = dict(point)
        pt[Base(1)] = x0 + dx * h
        pt[Base(2)] = y0 + dy * h
        return Fraction(e.eval(pt))

    s = 20 * at(0, 0)
    s -= 8 * (at(1, 0) + at(-1, 0) + at(0, 1) + at(0, -1))
    s += 2 * (at(1, 1) + at(1, -1) + at(-1, 1) + at(-1, -1))
    s += at(2, 0) + at(-2, 0) + at(0, 2) + at(0, -2)
    return s / h ** 4


def is_biharmonic(e: Expr, rng: random.Random, points: int = 5) -> bool:
    """Stencil oracle; only meaningful for polynomials of degree at most five."""
    e = as_expr(e)
    if e.degree() > 5:
        raise ValueError("stencil oracle is exact only up to degree five")
    for _ in range(points):
        pt = random_point([Base(1), Base(2)], rng)
        for v in e.free_vars:
            pt.setdefault(v, Fraction(0))
        if bilaplacian_stencil(e, pt) != 0:
            return False
    return True


# -- the biharmonic theory ---------------------------------------------------

BIHARMONIC_L = "1/2*u[1,1]^2 + u[1,2]^2 + 1/2*u[2,2]^2"
BIHARMONIC_H = "u[1]*p[;1] + u[2]*p[;2] + 1/2*p[1;1]^2 + 1/4*(p[1;2] + p[2;1])^2 + 1/2*p[2;2]^2"
PHI_CHOICES = ("x1^3*x2", "x1^4 - 3*x1^2*x2^2")


def biharmonic_problem() -> LagrangianProblem:
    return LagrangianProblem(2, 1, 2, parse(BIHARMONIC_L))


def _phi(name: str, *index: int) -> Expr:
    return func(name, *index)


def _lap_d(name: str, i: int) -> Expr:
    """``phi,_{jji}``."""
    return sum((_phi(name, j, j, i) for j in (1, 2)), ZERO)


def biharmonic_ansatz(phi: str = "phi", G: Optional[Sequence[Expr]] = None) -> HJAnsatz:
    """``S^i = u_j phi,_{ji} - u phi,_{jji} + G^i`` with ``G^i`` defaulting to the
    choice that makes ``f`` vanish, ``1/2 (phi phi,_{jji} - phi,_j phi,_{ji})``."""
    S = []
    for i in (1, 2):
        s = sum((u(j) * _phi(phi, j, i) for j in (1, 2)), ZERO) - u() * _lap_d(phi, i)
        if G is None:
            g = (_phi(phi) * _lap_d(phi, i) - sum((_phi(phi, j) * _phi(phi, j, i) for j in (1, 2)), ZERO)) / 2
        else:
            g = as_expr(G[i - 1])
        S.append(s + g)
    return HJAnsatz(S)


def biharmonic_candidate(phi: Expr, A: Sequence, B) -> dict[VarId, Expr]:
    """Fields ``u = phi + A_i x^i + B``, ``u_i``, ``p^{.i} = -phi,_{jji}``, ``p^{j.i} = phi,_{ij}``."""
    phi = as_expr(phi)
    d = lambda e, *idx: _chain(e, idx)  # noqa: E731
    uu = phi + sum((as_expr(A[i - 1]) * x(i) for i in (1, 2)), ZERO) + as_expr(B)
    cand: dict[VarId, Expr] = {Jet(1, ()): uu}
    for i in (1, 2):
        cand[Jet(1, (i,))] = d(phi, i) + as_expr(A[i - 1])
        cand[Momentum(1, (), i)] = -sum((d(phi, j, j, i) for j in (1, 2)), ZERO)
        for j in (1, 2):
            cand[Momentum(1, (j,), i)] = d(phi, i, j)
    return cand


def _chain(e: Expr, idx) -> Expr:
    for i in idx:
        e = partial(e, Base(i))
    return e


def biharmonic_suite(cfg: OracleConfig = OracleConfig(), phis: Sequence[str] = PHI_CHOICES) -> Report:
    """Full pipeline on the biharmonic Lagrangian, symbolic and specialized."""
    report = Report("biharmonic suite", meta={"seed": cfg.seed})
    rng = cfg.rng()
    P = biharmonic_problem()

    el = variational_derivative(P)[0]
    report.require_zero("EL = u[1,1,1,1] + 2*u[1,1,2,2] + u[2,2,2,2]",
                        el - parse("u[1,1,1,1] + 2*u[1,1,2,2] + u[2,2,2,2]"))
    cons = constraint_equations(P).by_label()
    for i, j in ((1, 1), (1, 2), (2, 2)):
        lhs = cons[("constraint", 1, (i, j))].lhs
        weight = 2 if i != j else 1
        expected = weight * (u(i, j) - (parse(f"p[{i};{j}]") + parse(f"p[{j};{i}]")) / 2)
        report.require_zero(f"constraint u[{i},{j}] = p({i}.{j})", lhs - expected)
    hr = is_hyperregular(P)
    report.add("hyperregular", hr.verdict == "yes", f"det = {to_text(hr.det)}")
    H = hamiltonian(P)
    report.require_zero("H = p^{.i} u_i + 1/2 p_(i.j) p^(i.j)", H.H - parse(BIHARMONIC_H))

    by = hdwe(H).by_label()
    def p(spec: str) -> Expr:
        return parse(f"p[{spec}]")

    for i in (1, 2):
        report.require_zero(f"gradient u,{i} = u[{i}]", by[("gradient", 1, (), i)].lhs + u(i))
        for j in (1, 2):
            sym = (p(f"{i};{j}") + p(f"{j};{i}")) / 2
            report.require_zero(f"gradient u[{i}],{j} = p({i}.{j})", by[("gradient", 1, (i,), j)].lhs + sym)
        eq = by[("divergence", 1, (i,))]
        report.require_zero(f"divergence p[{i};j],j = -p[;{i}]", eq.lhs - p(f";{i}"))
    report.require_zero("divergence p[;i],i = 0", by[("divergence", 1, ())].lhs)

    # symbolic phi with the bilaplacian reduction rule
    rules = RuleSet([biharmonic_rule("phi", 2)])
    G = [func("G1"), func("G2")]
    eqs, f_general = classical_hj_residual(H, biharmonic_ansatz("phi", G), rules)
    report.add("HJ residuals vanish for any G", all(e.lhs.is_zero() for e in eqs))
    report.add("f depends on x only", not any(isinstance(v, (Jet, Momentum)) for v in f_general.free_vars),
               f"f = {to_text(f_general)}")
    _, f0 = classical_hj_residual(H, biharmonic_ansatz("phi"), rules)
    report.require_zero("f = 0 for the balancing G", f0)
    T = biharmonic_ansatz("phi").section(1, 1)
    R = curvature(H, T, rules)
    report.add("connection flat", R.verdict == "flat", R.verdict)
    report.add("T is d^V-closed", dv_closed_check(T)[0])
    report.add("generalized HJ residuals vanish", generalized_hj_residual(H, T, rules).all_zero())
    nab = nabla_symbols(H, T)
    A1, A2, B = param("A1"), param("A2"), param("B")
    leaf = [func("phi") + A1 * x(1) + A2 * x(2) + B]
    report.extend(integral_section_check(nab, leaf, rules), "leaf: ")

    for text in phis:
        phi = parse(text)
        if not is_biharmonic(phi, rng):
            report.meta.setdefault("skipped", []).append(text)
            continue
        spec = {"phi": phi}
        Ts = T.map(lambda e: specialize_functions(e, spec))
        report.add(f"[{text}] flat", curvature(H, Ts).verdict == "flat")
        Ss = HJAnsatz([specialize_functions(s, spec) for s in biharmonic_ansatz("phi").S])
        _, fs = classical_hj_residual(H, Ss)
        report.require_zero(f"[{text}] f = 0", fs)
        for k in range(cfg.samples):
            A = (random_rational(rng), random_rational(rng))
            b = random_rational(rng)
            sub = hdwe_solution_check(H, biharmonic_candidate(phi, A, b), cfg)
            report.add(f"[{text}] HDWE candidate #{k}", sub.passed,
                       "" if sub.passed else "; ".join(c.name for c in sub.failures()))
    return report


def hessian_inverse_check(P: LagrangianProblem, cfg: OracleConfig = OracleConfig()) -> Report:
    """``M * Hessian = 1``: exactly for constant entries, else at random points."""
    Hm = hessian(P)
    M = expr_inverse(Hm)
    prod = matmul(M, Hm)
    report = Report("inverse hessian", meta={"seed": cfg.seed})
    one = identity(len(Hm))
    if is_constant_matrix(Hm):
        report.add("M H = 1 exactly", to_fractions(prod) == to_fractions(one))
        return report
    rng = cfg.rng()
    worst = 0.0
    variables = set().union(*(e.free_vars for row in prod for e in row))
    for _ in range(cfg.samples):
        pt = random_point(variables, rng)
        for r, row in enumerate(prod):
            for c, e in enumerate(row):
                worst = max(worst, abs(float(e.eval(pt)) - (1.0 if r == c else 0.0)))
    report.add("M H = 1 at sample points", worst <= 1e-9, f"max deviation {worst:.3e}")
    return report
