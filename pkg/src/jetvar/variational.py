"""Euler-Lagrange operator, top-jet Hessian, hyperregularity and constraint equations."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .equations import Equation, EquationSet
from .jetcalc import HorizontalForm, JetContext, JetOrderError, total_derivative_multi, total_divergence
from .linalg import determinant
from .multiindex import MultiIndex, decompositions, enumerate_indices, of_length
from .symexpr import ZERO, Expr, Jet, Momentum, as_expr, partial


class InvalidProblemError(ValueError):
    pass


@dataclass(frozen=True)
class LagrangianProblem:
    n: int
    m: int
    order: int
    L: Expr

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1 or self.order < 1:
            raise InvalidProblemError(f"need n, m >= 1 and order >= 1, got {self.n}, {self.m}, {self.order}")
        L = as_expr(self.L)
        object.__setattr__(self, "L", L)
        for v in L.free_vars:
            if isinstance(v, Momentum):
                raise InvalidProblemError("a Lagrangian must not contain momentum variables")
            if isinstance(v, Jet):
                if v.order > self.order:
                    raise InvalidProblemError(f"jet {v} exceeds the declared order {self.order}")
                if not 1 <= v.alpha <= self.m or any(not 1 <= i <= self.n for i in v.index):
                    raise InvalidProblemError(f"jet {v} outside the declared dimensions")

    @property
    def l(self) -> int:
        return self.order - 1

    def context(self) -> JetContext:
        return JetContext(self.n, self.m, 2 * self.order)

    def top_jets(self) -> list[Jet]:
        """Jets of order ``l+1`` as ``(alpha, I)`` pairs, fiber index outermost."""
        return [Jet(a, I.entries) for a in range(1, self.m + 1) for I in of_length(self.n, self.order)]


def variational_derivative(P: LagrangianProblem) -> list[Expr]:
    ctx = P.context()
    out = []
    for alpha in range(1, P.m + 1):
        total = ZERO
        for I in enumerate_indices(P.n, P.order):
            dL = partial(P.L, Jet(alpha, I.entries))
            if dL.is_zero():
                continue
            term = total_derivative_multi(dL, I, ctx)
            total = total - term if len(I) % 2 else total + term
        out.append(total)
    return out


def hessian(P: LagrangianProblem) -> list[list[Expr]]:
    top = P.top_jets()
    first = [partial(P.L, v) for v in top]
    return [[partial(first[r], top[c]) for c in range(len(top))] for r in range(len(top))]


@dataclass
class Hyperregularity:
    verdict: str  # "yes" | "no" | "undetermined"
    det: Expr
    witness: Optional[dict] = None
    seed: Optional[int] = None

    def __bool__(self) -> bool:
        return self.verdict == "yes"


def _random_rational(rng: random.Random, bound: int = 10 ** 6) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def find_zero(e: Expr, seed: int = 42, samples: int = 50) -> Optional[dict]:
    """Search for a rational point where ``e`` vanishes.

    Tries the origin, then the small integer lattice ``{-1, 0, 1}``, then
    random rationals, then univariate integer roots along each variable.
    """
    variables = sorted(e.free_vars, key=lambda v: v.sort_key)
    candidates = [{v: Fraction(0) for v in variables}]
    rng = random.Random(seed)
    for _ in range(samples):
        candidates.append({v: Fraction(rng.choice((-1, 0, 1))) for v in variables})
    for _ in range(samples):
        candidates.append({v: _random_rational(rng) for v in variables})
    for pt in candidates:
        if e.eval(pt) == 0:
            return pt
    return None


def is_hyperregular(P: LagrangianProblem, seed: int = 42, samples: int = 50) -> Hyperregularity:
    det = determinant(hessian(P))
    if det.is_zero():
        return Hyperregularity("no", det, {}, seed)
    if det.is_constant():
        return Hyperregularity("yes", det, None, seed)
    witness = find_zero(det, seed, samples)
    if witness is not None:
        return Hyperregularity("no", det, witness, seed)
    return Hyperregularity("undetermined", det, None, seed)


def top_momentum_sum(alpha: int, I: MultiIndex) -> Expr:
    """``sum_{|J| <= l} delta^I_{Ji} p^{J.i}_alpha``."""
    out = ZERO
    for J, i in decompositions(I):
        out = out + Expr(Momentum(alpha, J.entries, i))
    return out


def constraint_equations(P: LagrangianProblem) -> EquationSet:
    eqs = []
    for alpha in range(1, P.m + 1):
        for I in of_length(P.n, P.order):
            lhs = partial(P.L, Jet(alpha, I.entries)) - top_momentum_sum(alpha, I)
            eqs.append(Equation(("constraint", alpha, I.entries), lhs))
    return EquationSet(eqs, list(P.top_jets()))


def add_divergence(P: LagrangianProblem, rho: HorizontalForm) -> LagrangianProblem:
    if rho.n != P.n:
        raise InvalidProblemError(f"form has {rho.n} components, theory has n={P.n}")
    if rho.order() > P.l:
        raise JetOrderError(f"divergence form depends on jets of order {rho.order()} > l = {P.l}")
    return LagrangianProblem(P.n, P.m, P.order, P.L + total_divergence(rho, P.context()))
