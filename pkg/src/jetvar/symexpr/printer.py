"""Text rendering in the same grammar accepted by :mod:`jetvar.symexpr.parser`."""
from __future__ import annotations

from fractions import Fraction

from .core import Base, Expr, FuncDeriv, Jet, Momentum, Param


def _index_text(index) -> str:
    return ",".join(map(str, index))


def var_text(v) -> str:
    if isinstance(v, Base):
        return f"x{v.i}"
    if isinstance(v, Param):
        return v.name
    if isinstance(v, FuncDeriv):
        return f"{v.name}[{_index_text(v.index)}](x)" if v.index else f"{v.name}(x)"
    if isinstance(v, Jet):
        head = "u" if v.alpha == 1 else f"u{v.alpha}"
        return f"{head}[{_index_text(v.index)}]" if v.index else head
    if isinstance(v, Momentum):
        head = "p" if v.alpha == 1 else f"p{v.alpha}"
        return f"{head}[{_index_text(v.index)};{v.direction}]"
    raise TypeError(f"not a variable: {v!r}")


def _term_order(item):
    mono, _ = item
    degree = sum(k for _, k in mono)
    return (-degree if mono else 1, tuple((v.sort_key, -k) for v, k in mono))


def _coeff_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_text(e: Expr) -> str:
    if e.is_zero():
        return "0"
    parts = []
    for mono, c in sorted(e.terms.items(), key=_term_order):
        factors = [var_text(v) + (f"^{k}" if k > 1 else "") for v, k in mono]
        mag = abs(c)
        if not factors:
            body = _coeff_text(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_coeff_text(mag)] + factors)
        parts.append(("-" if c < 0 else "+", body))
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
