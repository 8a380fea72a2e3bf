"""Canonical polynomial expressions over jet, momentum and parameter variables.

Every :class:`Expr` is stored in expanded normal form: a mapping from sorted
monomials to nonzero :class:`fractions.Fraction` coefficients.  Two
expressions are equal exactly when their normal forms coincide.

Opaque functions of the base coordinates (``phi(x)``) are represented by
their derivative atoms ``phi[I](x)``; differentiating in ``x^i`` appends
``i`` to the (sorted) index, so mixed derivatives commute by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction, float]


# -- variables --------------------------------------------------------------

@dataclass(frozen=True)
class Base:
    """Base coordinate ``x^i``."""

    i: int

    @cached_property
    def sort_key(self) -> tuple:
        return (0, self.i)


@dataclass(frozen=True)
class Param:
    """Free symbolic constant."""

    name: str

    @cached_property
    def sort_key(self) -> tuple:
        return (1, self.name)


@dataclass(frozen=True)
class FuncDeriv:
    """Derivative ``f,_I`` of an opaque function ``f(x)``; ``index=()`` is ``f`` itself."""

    name: str
    index: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", tuple(sorted(self.index)))

    @cached_property
    def sort_key(self) -> tuple:
        return (2, self.name, len(self.index), self.index)


@dataclass(frozen=True)
class Jet:
    """Jet coordinate ``u^alpha_I``."""

    alpha: int
    index: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", tuple(sorted(self.index)))

    @property
    def order(self) -> int:
        return len(self.index)

    @cached_property
    def sort_key(self) -> tuple:
        return (3, self.alpha, len(self.index), self.index)


@dataclass(frozen=True)
class Momentum:
    """Multimomentum ``p_alpha^{I.i}``."""

    alpha: int
    index: tuple[int, ...]
    direction: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", tuple(sorted(self.index)))

    @property
    def order(self) -> int:
        return len(self.index)

    @cached_property
    def sort_key(self) -> tuple:
        return (4, self.alpha, len(self.index), self.index, self.direction)


VarId = Union[Base, Param, FuncDeriv, Jet, Momentum]
Monomial = tuple  # tuple[tuple[VarId, int], ...], sorted by variable sort key


class MissingBindingError(KeyError):
    pass


def _coerce_coeff(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    powers = dict(a)
    for v, e in b:
        powers[v] = powers.get(v, 0) + e
    return tuple(sorted(powers.items(), key=lambda ve: ve[0].sort_key))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


# -- expressions ------------------------------------------------------------

class Expr:
    """Immutable expanded polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash", "_free")

    def __init__(self, value=0):
        if isinstance(value, Expr):
            self._terms = value._terms
        elif isinstance(value, dict):
            self._terms = {m: c for m, c in value.items() if c != 0}
        elif isinstance(value, (Base, Param, FuncDeriv, Jet, Momentum)):
            self._terms = {((value, 1),): Fraction(1)}
        else:
            c = _coerce_coeff(value)
            self._terms = {(): c} if c != 0 else {}
        self._hash = None
        self._free = None

    # construction helpers
    @classmethod
    def _raw(cls, terms: dict) -> Expr:
        e = cls.__new__(cls)
        e._terms = terms
        e._hash = None
        e._free = None
        return e

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    # arithmetic
    def __add__(self, other) -> Expr:
        other = as_expr(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Expr._raw(out)

    __radd__ = __add__

    def __neg__(self) -> Expr:
        return Expr._raw({m: -c for m, c in self._terms.items()})

    def __pos__(self) -> Expr:
        return self

    def __sub__(self, other) -> Expr:
        return self + (-as_expr(other))

    def __rsub__(self, other) -> Expr:
        return as_expr(other) + (-self)

    def __mul__(self, other) -> Expr:
        other = as_expr(other)
        if not self._terms or not other._terms:
            return ZERO
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Expr._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Expr:
        other = as_expr(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero")
        if not other.is_constant():
            raise ValueError("division by a non-constant expression is not supported")
        c = other.constant_value()
        return Expr._raw({m: v / c for m, v in self._terms.items()})

    def __pow__(self, k: int) -> Expr:
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"only non-negative integer powers are supported, got {k!r}")
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # comparison
    def __eq__(self, other) -> bool:
        if isinstance(other, Expr):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Expr(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    # inspection
    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == () for m in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"expression is not constant: {self}")
        return self._terms.get((), Fraction(0))

    @property
    def free_vars(self) -> frozenset:
        if self._free is None:
            self._free = frozenset(v for m in self._terms for v, _ in m)
        return self._free

    def degree(self) -> int:
        return max((_mono_degree(m) for m in self._terms), default=0)

    def depends_on(self, pred) -> bool:
        return any(pred(v) for v in self.free_vars)

    def jet_order(self) -> int:
        """Highest jet order present, ``-1`` when no jet variable occurs."""
        return max((v.order for v in self.free_vars if isinstance(v, Jet)), default=-1)

    # calculus
    def partial(self, v: VarId) -> Expr:
        return partial(self, v)

    def substitute(self, bindings: Mapping) -> Expr:
        return substitute(self, bindings)

    def eval(self, point: Mapping) -> Number:
        return evaluate(self, point)

    def __str__(self) -> str:
        from .printer import to_text

        return to_text(self)

    def __repr__(self) -> str:
        return f"Expr({str(self)!r})"


ZERO = Expr._raw({})
ONE = Expr._raw({(): Fraction(1)})


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Expr(value)


def var(v: VarId) -> Expr:
    return Expr(v)


# Convenience constructors used throughout the library and tests.
def x(i: int) -> Expr:
    return Expr(Base(i))


def u(*index: int, alpha: int = 1) -> Expr:
    return Expr(Jet(alpha, index))


def p(index: Iterable[int], direction: int, alpha: int = 1) -> Expr:
    return Expr(Momentum(alpha, tuple(index), direction))


def param(name: str) -> Expr:
    return Expr(Param(name))


def func(name: str, *index: int) -> Expr:
    return Expr(FuncDeriv(name, index))


def _atom_partial(a: VarId, v: VarId):
    """Partial derivative of a single atom, ``None`` when identically zero."""
    if a == v:
        return ONE
    if isinstance(v, Base) and isinstance(a, FuncDeriv):
        return Expr(FuncDeriv(a.name, a.index + (v.i,)))
    return None


def partial(e: Expr, v: VarId) -> Expr:
    """Formal partial derivative; each variable is independent, ``f(x)`` depends on every ``x^i``."""
    out: dict = {}
    check_chain = isinstance(v, Base)
    for m, c in e._terms.items():
        for k, (a, exp) in enumerate(m):
            if a != v and not (check_chain and isinstance(a, FuncDeriv)):
                continue
            da = _atom_partial(a, v)
            if da is None:
                continue
            rest = m[:k] + ((a, exp - 1),) + m[k + 1:] if exp > 1 else m[:k] + m[k + 1:]
            coeff = c * exp
            for dm, dc in da._terms.items():
                mm = _mono_mul(rest, dm)
                s = out.get(mm, 0) + coeff * dc
                if s:
                    out[mm] = s
                else:
                    out.pop(mm, None)
    return Expr._raw(out)


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution ``v -> bindings[v]``; unbound variables are kept."""
    if not bindings:
        return e
    if not any(v in bindings for v in e.free_vars):
        return e
    cache: dict = {}

    def power(v, k):
        key = (v, k)
        if key not in cache:
            target = as_expr(bindings[v]) if v in bindings else Expr(v)
            cache[key] = target ** k
        return cache[key]

    acc: dict = {}
    for m, c in e._terms.items():
        kept = tuple((v, k) for v, k in m if v not in bindings)
        prod = Expr._raw({kept: c})
        for v, k in m:
            if v in bindings:
                prod = prod * power(v, k)
                if prod.is_zero():
                    break
        for mm, cc in prod._terms.items():
            s = acc.get(mm, 0) + cc
            if s:
                acc[mm] = s
            else:
                acc.pop(mm, None)
    return Expr._raw(acc)


def evaluate(e: Expr, point: Mapping) -> Number:
    """Evaluate at a point; exact when every bound value is rational."""
    missing = [v for v in e.free_vars if v not in point]
    if missing:
        from .printer import var_text

        names = ", ".join(sorted(var_text(v) for v in missing))
        raise MissingBindingError(f"no value bound for: {names}")
    total: Number = 0
    for m, c in e._terms.items():
        term: Number = c
        for v, k in m:
            term = term * point[v] ** k
        total = total + term
    if isinstance(total, float):
        return total
    return Fraction(total)


def equals(a, b, rules=None) -> bool:
    """Normal-form equality, optionally modulo derivative rules on opaque functions.

    Opaque derivative atoms are algebraically independent, so the comparison
    is exact; no sampling is involved.
    """
    diff = as_expr(a) - as_expr(b)
    if rules is not None:
        diff = rules.reduce(diff)
    return diff.is_zero()


def normalize(e) -> Expr:
    """Expressions are stored canonically; this coerces numbers and parse trees."""
    if hasattr(e, "to_expr"):
        return e.to_expr()
    return as_expr(e)


def coefficient_split(e: Expr, variables: Iterable[VarId]) -> dict[Monomial, Expr]:
    """Group ``e`` by monomials in ``variables``: ``e = sum(mono * coeff)``."""
    chosen = set(variables)
    out: dict[Monomial, dict] = {}
    for m, c in e._terms.items():
        inner = tuple((v, k) for v, k in m if v in chosen)
        outer = tuple((v, k) for v, k in m if v not in chosen)
        bucket = out.setdefault(inner, {})
        bucket[outer] = bucket.get(outer, 0) + c
    return {k: Expr(v) for k, v in out.items()}


def only_base(e: Expr) -> bool:
    """True when ``e`` involves no jet or momentum variables."""
    return not any(isinstance(v, (Jet, Momentum)) for v in e.free_vars)


# -- relations between opaque-function derivatives ---------------------------

class DerivativeRule:
    """Linear relation ``f,_lead = sum(c * f,_K)`` used to reduce derivative atoms.

    Every derivative ``f,_J`` whose index contains ``lead`` as a sub-multiset is
    rewritten by differentiating the relation.  The replacement indices must
    be smaller in the termination measure ``count(J, pivot)`` where ``pivot``
    is the most frequent entry of ``lead``.
    """

    def __init__(self, name: str, lead: tuple[int, ...], replacement: Mapping[tuple, Fraction]):
        self.name = name
        self.lead = tuple(sorted(lead))
        self.replacement = {tuple(sorted(k)): Fraction(v) for k, v in replacement.items()}
        self._memo: dict[FuncDeriv, Expr] = {}

    def _contains_lead(self, index: tuple) -> tuple | None:
        rest = list(index)
        for e in self.lead:
            if e not in rest:
                return None
            rest.remove(e)
        return tuple(rest)

    def reduce_atom(self, atom: FuncDeriv) -> Expr:
        if atom in self._memo:
            return self._memo[atom]
        rest = self._contains_lead(atom.index) if atom.name == self.name else None
        if rest is None:
            out = Expr(atom)
        else:
            out = ZERO
            for k, c in self.replacement.items():
                out = out + c * self.reduce_atom(FuncDeriv(self.name, rest + k))
        self._memo[atom] = out
        return out

    def reduce(self, e: Expr) -> Expr:
        atoms = [v for v in e.free_vars if isinstance(v, FuncDeriv) and v.name == self.name]
        bindings = {}
        for a in atoms:
            r = self.reduce_atom(a)
            if r != Expr(a):
                bindings[a] = r
        return substitute(e, bindings) if bindings else e


class RuleSet:
    """A collection of derivative rules applied in turn until nothing changes."""

    def __init__(self, rules: Iterable[DerivativeRule] = ()):
        self.rules = list(rules)

    def reduce(self, e: Expr) -> Expr:
        e = as_expr(e)
        while True:
            before = e
            for r in self.rules:
                e = r.reduce(e)
            if e == before:
                return e

    def __bool__(self) -> bool:
        return bool(self.rules)


def biharmonic_rule(name: str, n: int) -> DerivativeRule:
    """``sum_{i,j} f,_{iijj} = 0`` solved for ``f,_{1111}``."""
    replacement: dict[tuple, Fraction] = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j == 1:
                continue
            key = tuple(sorted((i, i, j, j)))
            replacement[key] = replacement.get(key, Fraction(0)) - 1
    return DerivativeRule(name, (1, 1, 1, 1), replacement)


def specialize_functions(e: Expr, functions: Mapping[str, Expr]) -> Expr:
    """Replace opaque ``f,_I`` by the corresponding derivative of a concrete expression."""
    bindings = {}
    for v in e.free_vars:
        if isinstance(v, FuncDeriv) and v.name in functions:
            d = as_expr(functions[v.name])
            for i in v.index:
                d = partial(d, Base(i))
            bindings[v] = d
    return substitute(e, bindings)
