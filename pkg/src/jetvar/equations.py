"""Labelled equation systems and check reports, with JSON export."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from .symexpr import Expr, VarId, to_text, var_text


@dataclass(frozen=True)
class Equation:
    """``sum(var,_i for var, i in flux) + lhs = 0``.

    ``flux`` holds formal first derivatives ``var,_i`` of dependent
    variables in the base coordinate ``x^i``; it is empty for purely
    algebraic equations.
    """

    label: tuple
    lhs: Expr
    flux: tuple[tuple[VarId, int], ...] = ()

    @property
    def family(self) -> str:
        return self.label[0]

    def text(self) -> str:
        if not self.flux:
            return f"{to_text(self.lhs)} = 0"
        left = " + ".join(f"{var_text(v)},{i}" for v, i in self.flux)
        return f"{left} = {to_text(-self.lhs)}"

    def residual_text(self) -> str:
        """Single-sided rendering ``<expr> = 0`` with ``var,i`` flux tags."""
        parts = [f"{var_text(v)},{i}" for v, i in self.flux]
        if not self.lhs.is_zero() or not parts:
            parts.append(to_text(self.lhs))
        text = " + ".join(parts).replace("+ -", "- ")
        return f"{text} = 0"


@dataclass
class EquationSet:
    equations: list[Equation] = field(default_factory=list)
    variables: list[VarId] = field(default_factory=list)

    def __iter__(self) -> Iterator[Equation]:
        return iter(self.equations)

    def __len__(self) -> int:
        return len(self.equations)

    def family(self, name: str) -> list[Equation]:
        return [e for e in self.equations if e.family == name]

    def by_label(self) -> dict[tuple, Equation]:
        return {e.label: e for e in self.equations}

    def all_zero(self) -> bool:
        return all(e.lhs.is_zero() and not e.flux for e in self.equations)

    def nonzero(self) -> list[Equation]:
        return [e for e in self.equations if not e.lhs.is_zero() or e.flux]

    def to_dict(self) -> dict[str, Any]:
        return {
            "vars": [var_text(v) for v in self.variables],
            "equations": [e.residual_text() for e in self.equations],
        }

    def residual_report(self) -> dict[str, list[dict[str, str]]]:
        """Families keyed by name, each a list of ``{"index", "expr"}`` entries."""
        out: dict[str, list[dict[str, str]]] = {}
        for e in self.equations:
            out.setdefault(e.family, []).append(
                {"index": label_text(e.label[1:]), "expr": to_text(e.lhs)})
        return out


def label_text(parts: tuple) -> str:
    def one(p):
        if isinstance(p, tuple):
            return "(" + ",".join(map(str, p)) + ")"
        return str(p)

    return "(" + ",".join(one(p) for p in parts) + ")"


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    residual: Optional[Expr] = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "status": "pass" if self.passed else "fail"}
        if self.detail:
            out["detail"] = self.detail
        if self.residual is not None:
            out["residual"] = to_text(self.residual)
        return out


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, passed: bool, detail: str = "", residual: Optional[Expr] = None) -> Check:
        c = Check(name, bool(passed), detail, residual)
        self.checks.append(c)
        return c

    def require_zero(self, name: str, expr: Expr, detail: str = "") -> Check:
        return self.add(name, expr.is_zero(), detail, None if expr.is_zero() else expr)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def extend(self, other: Report, prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.detail, c.residual))

    def to_dict(self) -> dict[str, Any]:
        return {"title": self.title, "passed": self.passed, **self.meta,
                "checks": [c.to_dict() for c in self.checks]}

    def lines(self) -> list[str]:
        return [f"[{'PASS' if c.passed else 'FAIL'}] {c.name}" + (f": {c.detail}" if c.detail else "")
                for c in self.checks]
