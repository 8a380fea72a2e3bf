"""Hamilton-Jacobi machinery: the connection induced by a section, its curvature,
and the generalized and classical HJ residual systems.

A section ``T`` of the reduced multimomentum bundle induces a connection on
``J^l`` whose symbols are ``dH/dp^{I.i} o T``.  Composition "along the
connection" means: apply a total derivative, then replace every jet of order
``l+1`` by the corresponding top-order symbol.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .dedonder import HamiltonianData, _solve, hamiltonian, psi_shift
from .equations import Equation, EquationSet, Report, label_text
from .jetcalc import (
    HorizontalForm,
    JetContext,
    SectionT,
    connection_pullback,
    prolong,
    total_derivative,
    vertical_differential,
)
from .multiindex import MultiIndex, enumerate_indices
from .symexpr import ZERO, Base, Expr, FuncDeriv, Jet, Momentum, RuleSet, as_expr, partial, to_text, var_text
from .variational import LagrangianProblem, add_divergence, is_hyperregular, top_momentum_sum

__all__ = [
    "ConnectionSymbols", "Curvature", "HJAnsatz", "SectionT", "classical_hj_residual",
    "curvature", "dv_closed_check", "equivalence_check", "generalized_hj_residual",
    "integral_section_check", "nabla_symbols",
]


def _reduce(e: Expr, rules: Optional[RuleSet]) -> Expr:
    return rules.reduce(e) if rules else e


@dataclass
class HJAnsatz:
    """Components ``S^i`` of an ``(n-1)``-form on ``J^l``."""

    S: tuple[Expr, ...]

    def __init__(self, S: Sequence):
        self.S = tuple(as_expr(s) for s in S)

    @property
    def n(self) -> int:
        return len(self.S)

    def form(self) -> HorizontalForm:
        return HorizontalForm(self.S)

    def section(self, l: int, m: int) -> SectionT:
        return vertical_differential(self.form(), l, m)


@dataclass
class ConnectionSymbols:
    """Symbols ``nabla^a_{I.i}`` keyed by ``Momentum(a, I, i)``; ``top`` holds the
    order ``l+1`` values keyed by jet, which is what composition along the
    connection substitutes."""

    n: int
    m: int
    l: int
    symbols: dict[Momentum, Expr]
    top: dict[Jet, Expr]

    def __getitem__(self, key: Momentum) -> Expr:
        return self.symbols[key]

    def pullback(self, e: Expr) -> Expr:
        return connection_pullback(e, self.top, self.l)

    def context(self) -> JetContext:
        return JetContext(self.n, self.m, self.l + 1)

    def covariant(self, e: Expr, i: int) -> Expr:
        """``D_i e`` composed along the connection."""
        return self.pullback(total_derivative(e, i, self.context()))


def _check_dims(Hd: HamiltonianData, T: SectionT) -> None:
    if (Hd.n, Hd.m, Hd.l) != (T.n, T.m, T.l):
        raise ValueError(f"section has (n, m, l) = {(T.n, T.m, T.l)}, Hamiltonian has {(Hd.n, Hd.m, Hd.l)}")


def nabla_symbols(Hd: HamiltonianData, T: SectionT) -> ConnectionSymbols:
    _check_dims(Hd, T)
    bind = T.bindings()
    symbols: dict[Momentum, Expr] = {}
    top: dict[Jet, Expr] = {}
    for mom in Hd.momenta():
        target = Jet(mom.alpha, mom.index + (mom.direction,))
        if mom.order < Hd.l:
            symbols[mom] = Expr(target)
        else:
            if target not in top:
                top[target] = Hd.top_jets[target].substitute(bind)
            symbols[mom] = top[target]
    return ConnectionSymbols(Hd.n, Hd.m, Hd.l, symbols, top)


@dataclass
class Curvature:
    components: dict[tuple, Expr]  # (alpha, I, i, j) with i < j
    verdict: str  # "flat" | "not flat" | "undetermined"
    method: str

    @property
    def flat(self) -> bool:
        return self.verdict == "flat"

    def nonzero(self) -> dict[tuple, Expr]:
        return {k: v for k, v in self.components.items() if not v.is_zero()}


def _matrix_route(Hd: HamiltonianData, T: SectionT, nab: ConnectionSymbols) -> dict[Jet, dict[int, Expr]]:
    """``D_j sbar`` through the inverse Hessian.

    Differentiating ``A sbar = c(T) - g`` gives
    ``D_j sbar = M (D_j c(T) - D_j g - (D_j A) sbar)``, with ``g`` the
    top-jet-free part of ``dL/du_K``.
    """
    P = Hd.source
    solved = _solve(P)
    system = solved.system
    M = system.inverse
    top = system.top
    ctx = JetContext(Hd.n, Hd.m, Hd.l + 1)
    bind = T.bindings()
    c_T = [top_momentum_sum(v.alpha, MultiIndex(v.index, Hd.n)).substitute(bind) for v in top]
    g0 = [system.g[k] + top_momentum_sum(v.alpha, MultiIndex(v.index, Hd.n)) for k, v in enumerate(top)]
    sbar = [nab.top[v] for v in top]
    out: dict[Jet, dict[int, Expr]] = {v: {} for v in top}
    N = len(top)
    for j in range(1, Hd.n + 1):
        rhs = []
        for c in range(N):
            r = total_derivative(c_T[c], j, ctx) - total_derivative(g0[c], j, ctx)
            for d in range(N):
                dA = total_derivative(system.A[c][d], j, ctx)
                if not dA.is_zero():
                    r = r - dA * sbar[d]
            rhs.append(r)
        for k, v in enumerate(top):
            val = sum((M[k][c] * rhs[c] for c in range(N)), ZERO)
            out[v][j] = nab.pullback(val)
    return out


def _verdict(components: dict[tuple, Expr], rules: Optional[RuleSet]) -> str:
    residual = [e for e in components.values() if not e.is_zero()]
    if not residual:
        return "flat"
    ruled = {r.name for r in rules.rules} if rules else set()
    for e in residual:
        opaque = {v.name for v in e.free_vars if isinstance(v, FuncDeriv)}
        if opaque - ruled:
            return "undetermined"
    return "not flat"


def curvature(Hd: HamiltonianData, T: SectionT, rules: Optional[RuleSet] = None,
              method: str = "matrix") -> Curvature:
    """Curvature ``R^a_{I.ij} = 1/2 (D_i nabla_{I.j} - D_j nabla_{I.i}) o nabla``.

    ``method="matrix"`` goes through the inverse Hessian of the source theory;
    ``method="direct"`` differentiates the symbols themselves.  Without a
    source Lagrangian only the direct route is available.

    A nonzero component that still contains opaque functions with no
    reduction rule makes the verdict ``undetermined``.
    """
    if method not in ("matrix", "direct"):
        raise ValueError(f"unknown method {method!r}")
    nab = nabla_symbols(Hd, T)
    if method == "matrix" and Hd.source is None:
        method = "direct"
    if method == "matrix" and not is_hyperregular(Hd.source):
        raise ValueError("curvature needs an invertible Hessian")
    dsbar = _matrix_route(Hd, T, nab) if method == "matrix" else None
    comps: dict[tuple, Expr] = {}
    for alpha in range(1, Hd.m + 1):
        for I in enumerate_indices(Hd.n, Hd.l):
            for i in range(1, Hd.n + 1):
                for j in range(i + 1, Hd.n + 1):
                    if dsbar is not None and len(I) == Hd.l:
                        a = dsbar[Jet(alpha, I.entries + (j,))][i]
                        b = dsbar[Jet(alpha, I.entries + (i,))][j]
                    else:
                        a = nab.covariant(nab[Momentum(alpha, I.entries, j)], i)
                        b = nab.covariant(nab[Momentum(alpha, I.entries, i)], j)
                    comps[(alpha, I.entries, i, j)] = _reduce((a - b) / 2, rules)
    return Curvature(comps, _verdict(comps, rules), method)


def _hj_family(Hd: HamiltonianData, T: SectionT, nab: ConnectionSymbols,
               rules: Optional[RuleSet]) -> list[Equation]:
    bind = T.bindings()
    eqs = []
    for beta in range(1, Hd.m + 1):
        for J in enumerate_indices(Hd.n, Hd.l):
            total = partial(Hd.H, Jet(beta, J.entries)).substitute(bind)
            for i in range(1, Hd.n + 1):
                total = total + nab.covariant(T[Momentum(beta, J.entries, i)], i)
            eqs.append(Equation(("hj", beta, J.entries), _reduce(total, rules)))
    return eqs


def generalized_hj_residual(Hd: HamiltonianData, T: SectionT, rules: Optional[RuleSet] = None,
                            method: str = "matrix") -> EquationSet:
    """Flatness family plus ``D_i T^{J.i} o nabla + (dH/du_J) o T`` for ``|J| <= l``."""
    R = curvature(Hd, T, rules, method)
    nab = nabla_symbols(Hd, T)
    eqs = [Equation(("flatness",) + key, e) for key, e in R.components.items()]
    eqs.extend(_hj_family(Hd, T, nab, rules))
    return EquationSet(eqs, T.momenta())


def classical_hj_residual(Hd: HamiltonianData, S: HJAnsatz,
                          rules: Optional[RuleSet] = None) -> tuple[EquationSet, Expr]:
    """Gradient system ``d/du_J (d_i S^i + H o d^V S) = 0`` together with ``f`` itself."""
    if S.n != Hd.n:
        raise ValueError(f"ansatz has {S.n} components, Hamiltonian has n={Hd.n}")
    if max((s.jet_order() for s in S.S), default=-1) > Hd.l:
        raise ValueError(f"ansatz depends on jets above order l={Hd.l}")
    T = S.section(Hd.l, Hd.m)
    f = Hd.H.substitute(T.bindings())
    for i, s in enumerate(S.S, start=1):
        f = f + partial(s, Base(i))
    f = _reduce(f, rules)
    eqs = []
    for beta in range(1, Hd.m + 1):
        for J in enumerate_indices(Hd.n, Hd.l):
            eqs.append(Equation(("hj", beta, J.entries), _reduce(partial(f, Jet(beta, J.entries)), rules)))
    return EquationSet(eqs, [Jet(b, J.entries) for b in range(1, Hd.m + 1)
                             for J in enumerate_indices(Hd.n, Hd.l)]), f


def dv_closed_check(T: SectionT) -> tuple[bool, Optional[tuple]]:
    """Symmetry ``d T^{J.i}_b / d u^c_K = d T^{K.i}_c / d u^b_J`` of the vertical Jacobian.

    Returns ``(True, None)`` or ``(False, (i, (b, J), (c, K)))`` for the first failing pair.
    """
    jets = [(a, I.entries) for a in range(1, T.m + 1) for I in enumerate_indices(T.n, T.l)]
    for i in range(1, T.n + 1):
        for x, (b, J) in enumerate(jets):
            for c, K in jets[x + 1:]:
                lhs = partial(T[Momentum(b, J, i)], Jet(c, K))
                rhs = partial(T[Momentum(c, K, i)], Jet(b, J))
                if lhs != rhs:
                    return False, (i, (b, J), (c, K))
    return True, None


def integral_section_check(nab: ConnectionSymbols, section: Sequence[Expr],
                           rules: Optional[RuleSet] = None) -> Report:
    """``d_i (j_l s)_I = nabla_{I.i} o j_l s``: the prolonged section is a leaf of the connection."""
    report = Report("integral section")
    jet = prolong(section, nab.l + 1, nab.n)
    low = {k: v for k, v in jet.items() if k.order <= nab.l}
    for mom, sym in nab.symbols.items():
        lhs = partial(jet[Jet(mom.alpha, mom.index)], Base(mom.direction))
        diff = _reduce(lhs - sym.substitute(low), rules)
        report.require_zero(f"d_{mom.direction} {var_text(Jet(mom.alpha, mom.index))} = nabla[{var_text(mom)}]", diff)
    return report


def equivalence_check(P: LagrangianProblem, rho: HorizontalForm, T: SectionT,
                      rules: Optional[RuleSet] = None) -> Report:
    """Residuals of ``T`` for ``L`` and of ``T + d^V rho`` for ``L + div rho`` agree exactly."""
    if not is_hyperregular(P):
        raise ValueError("equivalence check needs a hyperregular theory")
    Hd = hamiltonian(P)
    Pt = add_divergence(P, rho)
    Ht = hamiltonian(Pt)
    Tt = T + vertical_differential(rho, P.l, P.m)
    before = generalized_hj_residual(Hd, T, rules)
    after = generalized_hj_residual(Ht, Tt, rules)
    report = Report("equivalence")
    old = before.by_label()
    for eq in after:
        report.require_zero(f"{eq.family}{label_text(eq.label[1:])}", eq.lhs - old[eq.label].lhs)
    report.meta["solution"] = before.all_zero()
    # the shifted section is the Psi-image of the original one
    shift = psi_shift(rho, P.l, P.m)
    back = {k: v.substitute(Tt.bindings()) for k, v in shift.items()}
    for mom in T.momenta():
        report.require_zero(f"Psi(T~) = T at {var_text(mom)}", back[mom] - T[mom])
    return report


def section_text(T: SectionT) -> dict[str, str]:
    return {f"({k.alpha},({','.join(map(str, k.index))});{k.direction})": to_text(v)
            for k, v in T.coeffs.items()}

