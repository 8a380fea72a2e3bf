"""Hamiltonian side of a hyperregular higher-order theory.

The implicit equations for the top jets are solved exactly when they are
affine in the top jets and the Hessian has a nonzero constant determinant;
the inverse is then polynomial.  Anything else is rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .equations import Equation, EquationSet, Report
from .jetcalc import HorizontalForm, momenta, vertical_differential
from .linalg import SingularMatrixError, expr_inverse, is_constant_matrix, rank, to_fractions
from .multiindex import enumerate_indices, of_length
from .symexpr import ZERO, Base, Expr, Jet, Momentum, partial, to_text, var_text
from .variational import LagrangianProblem, add_divergence, constraint_equations


class EliminationError(ValueError):
    """The top-jet equations fall outside the supported (affine, invertible) class."""


class NotLagrangianError(ValueError):
    """A Hamiltonian fails the conditions for having a Lagrangian counterpart."""

    def __init__(self, message: str, report: Report, witness: Optional[dict] = None):
        super().__init__(message)
        self.report = report
        self.witness = witness or {}


@dataclass
class HamiltonianData:
    H: Expr
    top_jets: dict[Jet, Expr]
    n: int
    m: int
    l: int
    source: Optional[LagrangianProblem] = None

    def momenta(self) -> list[Momentum]:
        return momenta(self.n, self.m, self.l)

    def to_dict(self) -> dict:
        return {
            "H": to_text(self.H),
            "top_jets": {f"({j.alpha},({','.join(map(str, j.index))}))": to_text(e)
                         for j, e in self.top_jets.items()},
        }


@dataclass
class AffineSystem:
    """Top-jet equations written as ``A t + g = 0``."""

    top: list[Jet]
    A: list[list[Expr]]
    g: list[Expr]
    inverse: list[list[Expr]] = field(default_factory=list)


def affine_top_system(P: LagrangianProblem) -> AffineSystem:
    eqs = constraint_equations(P).equations
    top = P.top_jets()
    zero_top = {v: ZERO for v in top}
    A, g = [], []
    for eq in eqs:
        row = [partial(eq.lhs, v) for v in top]
        for c, entry in enumerate(row):
            bad = [v for v in top if not partial(entry, v).is_zero()]
            if bad:
                raise EliminationError(
                    f"equation {to_text(eq.lhs)} = 0 is not affine in the top jets "
                    f"(nonlinear in {var_text(top[c])})")
        A.append(row)
        g.append(eq.lhs.substitute(zero_top))
    return AffineSystem(top, A, g)


def solve_top_jets(P: LagrangianProblem) -> dict[Jet, Expr]:
    return _solve(P).solution


@dataclass
class _Solved:
    system: AffineSystem
    solution: dict[Jet, Expr]


def _solve(P: LagrangianProblem) -> _Solved:
    system = affine_top_system(P)
    try:
        M = expr_inverse(system.A)
    except SingularMatrixError as exc:
        raise EliminationError(f"cannot eliminate the top jets: {exc}") from exc
    system.inverse = M
    solution = {}
    for r, v in enumerate(system.top):
        solution[v] = -sum((M[r][c] * system.g[c] for c in range(len(system.top))), ZERO)
    return _Solved(system, solution)


def energy(P: LagrangianProblem) -> Expr:
    """``E = sum_{|I| <= l} p^{I.i}_a u^a_{Ii} - L``."""
    out = -P.L
    for mom in momenta(P.n, P.m, P.l):
        out = out + Expr(mom) * Expr(Jet(mom.alpha, mom.index + (mom.direction,)))
    return out


def hamiltonian(P: LagrangianProblem) -> HamiltonianData:
    top = solve_top_jets(P)
    H = energy(P).substitute(top)
    return HamiltonianData(H, top, P.n, P.m, P.l, P)


def hdwe(Hd: HamiltonianData) -> EquationSet:
    """De Donder field equations as first-order system with formal ``,_i`` flux terms."""
    eqs = []
    variables = []
    for alpha in range(1, Hd.m + 1):
        for I in enumerate_indices(Hd.n, Hd.l):
            jet = Jet(alpha, I.entries)
            moms = [Momentum(alpha, I.entries, i) for i in range(1, Hd.n + 1)]
            variables.append(jet)
            variables.extend(moms)
            flux = tuple((mom, mom.direction) for mom in moms)
            eqs.append(Equation(("divergence", alpha, I.entries), partial(Hd.H, jet), flux))
            for mom in moms:
                eqs.append(Equation(("gradient", alpha, I.entries, mom.direction),
                                    -partial(Hd.H, mom), ((jet, mom.direction),)))
    return EquationSet(eqs, variables)


def _symmetry_classes(n: int, m: int, l: int) -> dict[tuple, list[Momentum]]:
    """Top momenta grouped by the multiset ``Ii`` (and fiber index)."""
    classes: dict[tuple, list[Momentum]] = {}
    for alpha in range(1, m + 1):
        for I in of_length(n, l):
            for i in range(1, n + 1):
                key = (alpha, tuple(sorted(I.entries + (i,))))
                classes.setdefault(key, []).append(Momentum(alpha, I.entries, i))
    return classes


def _fiber_conditions(Hd: HamiltonianData, report: Report) -> Optional[dict]:
    """Lower-order identities and well-definedness of the fiber derivative.

    Returns a witness for the first failure, ``None`` when all hold.
    """
    witness = None
    for mom in Hd.momenta():
        if mom.order < Hd.l:
            target = Expr(Jet(mom.alpha, mom.index + (mom.direction,)))
            diff = partial(Hd.H, mom) - target
            c = report.require_zero(f"dH/d{var_text(mom)} = {to_text(target)}", diff)
            if not c.passed and witness is None:
                witness = {"momentum": var_text(mom), "derivative": to_text(partial(Hd.H, mom)),
                           "expected": to_text(target)}
    for (alpha, K), group in _symmetry_classes(Hd.n, Hd.m, Hd.l).items():
        first = partial(Hd.H, group[0])
        for other in group[1:]:
            diff = partial(Hd.H, other) - first
            c = report.require_zero(f"dH/d{var_text(group[0])} = dH/d{var_text(other)}", diff)
            if not c.passed and witness is None:
                witness = {"momentum": var_text(other), "derivative": to_text(partial(Hd.H, other)),
                           "expected": to_text(first)}
    return witness


def fiber_derivative_check(Hd: HamiltonianData) -> Report:
    if Hd.source is None:
        raise ValueError("fiber_derivative_check needs the source Lagrangian")
    report = Report("fiber derivative")
    _fiber_conditions(Hd, report)
    for mom in Hd.momenta():
        if mom.order == Hd.l:
            top = Jet(mom.alpha, mom.index + (mom.direction,))
            report.require_zero(f"dH/d{var_text(mom)} = s[{var_text(top)}]",
                                partial(Hd.H, mom) - Hd.top_jets[top])
    return report


def psi_shift(rho: HorizontalForm, l: int, m: int) -> dict[Momentum, Expr]:
    """The fiber map ``p -> p - d^V rho``."""
    T = vertical_differential(rho, l, m)
    return {mom: Expr(mom) - T[mom] for mom in momenta(rho.n, m, l)}


def psi_covariance(P: LagrangianProblem, rho: HorizontalForm) -> Report:
    """Coordinate form of the transformation rules under ``L -> L + div(rho)``."""
    report = Report("psi covariance")
    Hd = hamiltonian(P)
    Pt = add_divergence(P, rho)
    Ht = hamiltonian(Pt)
    shift = psi_shift(rho, P.l, P.m)
    for jet, s in Hd.top_jets.items():
        report.require_zero(f"s~[{var_text(jet)}] = s[{var_text(jet)}] o Psi",
                            Ht.top_jets[jet] - s.substitute(shift))
    for mom in Hd.momenta():
        report.require_zero(f"dH~/d{var_text(mom)} = (dH/d{var_text(mom)}) o Psi",
                            partial(Ht.H, mom) - partial(Hd.H, mom).substitute(shift))
    div_x = sum((partial(c, Base(i)) for i, c in enumerate(rho.components, start=1)), ZERO)
    report.require_zero("H~ = H o Psi - d_i rho^i", Ht.H - (Hd.H.substitute(shift) - div_x))
    return report


@dataclass
class Recovery:
    problem: LagrangianProblem
    report: Report


def recover_lagrangian(Hd: HamiltonianData) -> Recovery:
    """Rebuild ``L`` from a bare Hamiltonian, pulling ``sum p dH/dp - H`` back through the fiber derivative."""
    n, m, l = Hd.n, Hd.m, Hd.l
    report = Report("lagrangian recovery")
    witness = _fiber_conditions(Hd, report)
    if witness is not None:
        raise NotLagrangianError("fiber derivative conditions fail; H is not Lagrangian-induced",
                                 report, witness)

    classes = _symmetry_classes(n, m, l)
    keys = list(classes)  # (alpha, K) with |K| = l+1, fiber index outermost
    top_moms = [mom for mom in momenta(n, m, l) if mom.order == l]
    # fiber derivative restricted to the top jets: s_K = dH/dp^{I.i} for any Ii = K
    fd = {Jet(a, K): partial(Hd.H, classes[(a, K)][0]) for a, K in keys}

    for a, K in keys:
        for mom in top_moms:
            w = partial(fd[Jet(a, K)], mom)
            if not w.is_constant():
                report.add("fiber derivative affine with constant coefficients", False,
                           f"d(dH/dp)/d{var_text(mom)} = {to_text(w)}")
                raise NotLagrangianError("fiber derivative is outside the supported affine class", report)
    report.add("fiber derivative affine with constant coefficients", True)

    # rank condition: rows (alpha, I, i), columns (beta, K) aggregated over J1 j = K
    rows = []
    for mom in top_moms:
        dH = partial(Hd.H, mom)
        rows.append([sum((partial(dH, q) for q in classes[key]), ZERO) for key in keys])
    if not is_constant_matrix(rows):
        report.add("rank condition", False, "Hessian in the momenta is not constant")
        raise NotLagrangianError("rank condition cannot be decided exactly", report)
    r = rank(to_fractions(rows))
    ok = r == len(keys)
    report.add("rank condition", ok, f"rank {r}, required {len(keys)}")
    if not ok:
        raise NotLagrangianError("rank condition fails", report, {"rank": r, "required": len(keys)})

    # section of the fiber derivative: symmetric top momenta p^{J.j} = q_{Jj}, lower momenta 0
    q = {key: Expr(Momentum(key[0], key[1][:-1], key[1][-1])) for key in keys}
    sym_sub: dict = {}
    for key, group in classes.items():
        for mom in group:
            sym_sub[mom] = q[key]
    for mom in momenta(n, m, l):
        if mom.order < l:
            sym_sub[mom] = ZERO
    rep_vars = [Momentum(a, K[:-1], K[-1]) for a, K in keys]
    s_sym = [fd[Jet(a, K)].substitute(sym_sub) for a, K in keys]
    # s_sym = B q + b with constant B
    B = [[partial(s, v) for v in rep_vars] for s in s_sym]
    b = [s.substitute({v: ZERO for v in rep_vars}) for s in s_sym]
    Binv = expr_inverse(B)
    section = dict(sym_sub)
    for k, key in enumerate(keys):
        value = sum((Binv[k][c] * (Expr(Jet(*keys[c])) - b[c]) for c in range(len(keys))), ZERO)
        for mom in classes[key]:
            section[mom] = value

    liouville = -Hd.H
    for mom in momenta(n, m, l):
        liouville = liouville + Expr(mom) * partial(Hd.H, mom)
    L = liouville.substitute(section)
    report.add("recovered L free of momenta", not any(isinstance(v, Momentum) for v in L.free_vars))

    # pull-back identity: FH*(L) = sum p dH/dp - H
    report.require_zero("FH*(L) = Delta(H) - H", L.substitute(fd) - liouville)
    P = LagrangianProblem(n, m, l + 1, L)
    return Recovery(P, report)
