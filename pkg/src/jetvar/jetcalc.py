"""Total derivatives, prolongations, vertical differentials and total divergences."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .multiindex import MultiIndex, enumerate_indices
from .symexpr import ZERO, Base, Expr, Jet, Momentum, as_expr, partial


class JetOrderError(ValueError):
    pass


@dataclass(frozen=True)
class JetContext:
    n: int
    m: int
    max_order: int

    def jets(self, order: int) -> list[Jet]:
        """Jet variables ``u^alpha_I`` with ``|I| <= order``, fiber index outermost."""
        return [Jet(a, I.entries) for a in range(1, self.m + 1) for I in enumerate_indices(self.n, order)]


def _index(I) -> tuple[int, ...]:
    if isinstance(I, MultiIndex):
        return I.entries
    return tuple(sorted(I))


def total_derivative(e: Expr, i: int, ctx: JetContext) -> Expr:
    """``D_i e = d e/dx^i + sum u^a_{Ii} d e/du^a_I``; opaque ``f,_I`` goes to ``f,_{Ii}``."""
    if not 1 <= i <= ctx.n:
        raise IndexError(f"base index {i} out of range 1..{ctx.n}")
    e = as_expr(e)
    out = partial(e, Base(i))
    for v in sorted(e.free_vars, key=lambda v: v.sort_key):
        if isinstance(v, Momentum):
            raise ValueError("total derivatives act on functions on jet space; found a momentum variable")
        if not isinstance(v, Jet):
            continue
        if v.order + 1 > ctx.max_order:
            raise JetOrderError(
                f"D_{i} of a jet of order {v.order} exceeds the context ceiling {ctx.max_order}")
        out = out + Expr(Jet(v.alpha, v.index + (i,))) * partial(e, v)
    return out


def total_derivative_multi(e: Expr, index, ctx: JetContext) -> Expr:
    for i in _index(index):
        e = total_derivative(e, i, ctx)
    return as_expr(e)


def prolong(section: Sequence[Expr], k: int, n: int) -> dict[Jet, Expr]:
    """``(j_k s)^a_I = d_I s^a`` for every ``|I| <= k``."""
    out: dict[Jet, Expr] = {}
    for alpha, s in enumerate(section, start=1):
        s = as_expr(s)
        if any(isinstance(v, (Jet, Momentum)) for v in s.free_vars):
            raise ValueError("a section must depend on base variables only")
        cache: dict[tuple, Expr] = {(): s}
        for I in enumerate_indices(n, k):
            idx = I.entries
            if idx not in cache:
                cache[idx] = partial(cache[idx[:-1]], Base(idx[-1]))
            out[Jet(alpha, idx)] = cache[idx]
    return out


@dataclass(frozen=True)
class HorizontalForm:
    """Components ``rho^i`` of an ``(n-1)``-horizontal form ``rho^i d^{n-1}x_i``."""

    components: tuple[Expr, ...]

    def __init__(self, components: Iterable):
        object.__setattr__(self, "components", tuple(as_expr(c) for c in components))
        for c in self.components:
            if any(isinstance(v, Momentum) for v in c.free_vars):
                raise ValueError("horizontal form components must not contain momenta")

    @property
    def n(self) -> int:
        return len(self.components)

    def order(self) -> int:
        return max((c.jet_order() for c in self.components), default=-1)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)


@dataclass
class SectionT:
    """Coefficients ``T^{I.i}_a`` of a section of the reduced multimomentum bundle.

    Coefficients that are not stored are zero.
    """

    n: int
    m: int
    l: int
    coeffs: dict[Momentum, Expr] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: dict[Momentum, Expr] = {}
        for k, v in self.coeffs.items():
            if not isinstance(k, Momentum):
                raise TypeError(f"section keys must be momenta, got {k!r}")
            if k.order > self.l or not 1 <= k.alpha <= self.m or not 1 <= k.direction <= self.n:
                raise ValueError(f"momentum {k} outside the declared dimensions")
            v = as_expr(v)
            if any(isinstance(w, Momentum) for w in v.free_vars):
                raise ValueError("section coefficients must not contain momenta")
            if v.jet_order() > self.l:
                raise ValueError(f"coefficient of {k} depends on jets above order {self.l}")
            if not v.is_zero():
                clean[k] = v
        self.coeffs = clean

    def momenta(self) -> list[Momentum]:
        return momenta(self.n, self.m, self.l)

    def __getitem__(self, key: Momentum) -> Expr:
        return self.coeffs.get(key, ZERO)

    def bindings(self) -> dict[Momentum, Expr]:
        """Substitution ``p -> T`` covering every momentum, zeros included."""
        return {k: self[k] for k in self.momenta()}

    def __add__(self, other: SectionT) -> SectionT:
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, ZERO) + v
        return SectionT(self.n, self.m, self.l, out)

    def map(self, fn) -> SectionT:
        return SectionT(self.n, self.m, self.l, {k: fn(v) for k, v in self.coeffs.items()})


def momenta(n: int, m: int, l: int) -> list[Momentum]:
    """All ``p^{I.i}_a`` with ``|I| <= l`` in deterministic order."""
    return [Momentum(a, I.entries, i)
            for a in range(1, m + 1)
            for I in enumerate_indices(n, l)
            for i in range(1, n + 1)]


def vertical_differential(rho: HorizontalForm, l: int, m: int) -> SectionT:
    """``T^{J.i}_b = d rho^i / d u^b_J`` for ``|J| <= l``."""
    n = rho.n
    if rho.order() > l:
        raise JetOrderError(f"form depends on jets of order {rho.order()} > {l}")
    coeffs = {}
    for b in range(1, m + 1):
        for J in enumerate_indices(n, l):
            jet = Jet(b, J.entries)
            for i, comp in enumerate(rho.components, start=1):
                coeffs[Momentum(b, J.entries, i)] = partial(comp, jet)
    return SectionT(n, m, l, coeffs)


def total_divergence(rho: HorizontalForm, ctx: JetContext) -> Expr:
    if rho.n != ctx.n:
        raise ValueError(f"form has {rho.n} components, context has n={ctx.n}")
    out = ZERO
    for i, comp in enumerate(rho.components, start=1):
        out = out + total_derivative(comp, i, ctx)
    return out


def substitute_prolongation(e: Expr, section: Sequence[Expr], n: int) -> Expr:
    """Pull ``e`` back along ``j_k s`` with ``k`` the highest jet order in ``e``."""
    k = max(as_expr(e).jet_order(), 0)
    return as_expr(e).substitute(prolong(section, k, n))


def jets_of(e: Expr) -> list[Jet]:
    return sorted((v for v in as_expr(e).free_vars if isinstance(v, Jet)), key=lambda v: v.sort_key)


def connection_pullback(e: Expr, top: Mapping[Jet, Expr], l: int) -> Expr:
    """Replace order-``l+1`` jets by the supplied top-order symbols."""
    e = as_expr(e)
    bindings = {}
    for v in jets_of(e):
        if v.order == l + 1:
            bindings[v] = top[v]
        elif v.order > l + 1:
            raise JetOrderError(f"jet of order {v.order} cannot be pulled back along a connection on J^{l}")
    return e.substitute(bindings)
