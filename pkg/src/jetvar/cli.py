"""Command-line front end.

Problem files are TOML.  Recognised tables:

``[problem]``      n, m, order, lagrangian
``[hamiltonian]``  n, m, l, H (input for ``recover``)
``[functions]``    opaque function name -> "free" | "biharmonic"
``[divergence]``   rho = [...], one component per base direction
``[ansatz]``       S = [...]
``[section]``      momentum text -> coefficient, e.g. "p[1;2]" = "phi[1,2](x)"
``[candidate]``    jet or momentum text -> field value in x
``[oracle]``       seed, samples, fd_step, tol_rel

Exit codes: 0 success, 1 a check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dedonder import (
    EliminationError,
    HamiltonianData,
    NotLagrangianError,
    hamiltonian,
    hdwe,
    psi_covariance,
    recover_lagrangian,
)
from .equations import Report, label_text
from .hamjac import (
    HJAnsatz,
    classical_hj_residual,
    curvature,
    equivalence_check,
    generalized_hj_residual,
)
from .jetcalc import HorizontalForm, JetOrderError, SectionT
from .numcheck import OracleConfig, biharmonic_suite, hdwe_solution_check
from .symexpr import (
    Expr,
    ExprSyntaxError,
    Momentum,
    ParseContext,
    RuleSet,
    UnknownVariableError,
    biharmonic_rule,
    parse,
    to_text,
    var_text,
)
from .variational import (
    InvalidProblemError,
    LagrangianProblem,
    add_divergence,
    constraint_equations,
    hessian,
    is_hyperregular,
    variational_derivative,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
FUNCTION_KINDS = ("free", "biharmonic")


class InputError(Exception):
    pass


@dataclass
class ProblemFile:
    path: str
    raw: dict
    functions: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str) -> ProblemFile:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise InputError(f"{path}: no such file")
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"{path}: {exc}")
        functions = raw.get("functions", {})
        for name, kind in functions.items():
            if kind not in FUNCTION_KINDS:
                raise InputError(f"{path}: [functions] {name} = {kind!r}; expected one of {FUNCTION_KINDS}")
        return cls(path, raw, dict(functions))

    def _table(self, name: str, what: str) -> dict:
        if name not in self.raw:
            raise InputError(f"{what} required ([{name}] missing in {self.path})")
        return self.raw[name]

    def _int(self, table: dict, key: str, where: str) -> int:
        value = table.get(key)
        if not isinstance(value, int):
            raise InputError(f"{self.path}: [{where}] needs an integer '{key}'")
        return value

    def _parse(self, text: Any, where: str, ctx: ParseContext):
        if not isinstance(text, (str, int, float)):
            raise InputError(f"{self.path}: {where}: expected an expression string")
        text = str(text)
        try:
            return parse(text, ctx)
        except ExprSyntaxError as exc:
            raise InputError(f"{self.path}: {where}: {exc}\n    {text}\n    {' ' * (exc.column - 1)}^")
        except UnknownVariableError as exc:
            raise InputError(f"{self.path}: {where}: {exc}")

    def rules(self) -> RuleSet:
        n = self.dims()[0]
        return RuleSet([biharmonic_rule(name, n) for name, kind in self.functions.items() if kind == "biharmonic"])

    def dims(self) -> tuple[int, int, int]:
        """``(n, m, l)`` from whichever table is present."""
        if "problem" in self.raw:
            t = self.raw["problem"]
            return self._int(t, "n", "problem"), self._int(t, "m", "problem"), self._int(t, "order", "problem") - 1
        t = self._table("hamiltonian", "problem dimensions")
        return self._int(t, "n", "hamiltonian"), self._int(t, "m", "hamiltonian"), self._int(t, "l", "hamiltonian")

    def context(self, max_order: int, momenta: bool = False) -> ParseContext:
        n, m, l = self.dims()
        return ParseContext(n=n, m=m, max_order=max_order, momentum_order=l if momenta else -1,
                            params=None, functions=frozenset(self.functions))

    def problem(self) -> LagrangianProblem:
        t = self._table("problem", "Lagrangian problem")
        n, m, l = self.dims()
        if "lagrangian" not in t:
            raise InputError(f"{self.path}: [problem] needs 'lagrangian'")
        L = self._parse(t["lagrangian"], "[problem] lagrangian", self.context(l + 1))
        try:
            return LagrangianProblem(n, m, l + 1, L)
        except InvalidProblemError as exc:
            raise InputError(f"{self.path}: {exc}")

    def bare_hamiltonian(self) -> HamiltonianData:
        t = self._table("hamiltonian", "Hamiltonian")
        n, m, l = self.dims()
        if "H" not in t:
            raise InputError(f"{self.path}: [hamiltonian] needs 'H'")
        H = self._parse(t["H"], "[hamiltonian] H", self.context(l, momenta=True))
        return HamiltonianData(H, {}, n, m, l)

    def _components(self, table: str, key: str, what: str) -> list:
        t = self._table(table, what)
        items = t.get(key)
        n, _, l = self.dims()
        if not isinstance(items, list) or len(items) != n:
            raise InputError(f"{self.path}: [{table}] {key} must be a list of {n} expressions")
        return [self._parse(s, f"[{table}] {key}[{k}]", self.context(l)) for k, s in enumerate(items)]

    def divergence(self) -> HorizontalForm:
        return HorizontalForm(self._components("divergence", "rho", "divergence rho"))

    def ansatz(self) -> HJAnsatz:
        return HJAnsatz(self._components("ansatz", "S", "ansatz S"))

    def section(self) -> SectionT:
        t = self._table("section", "section T")
        n, m, l = self.dims()
        coeffs = {}
        for key, value in t.items():
            v = self._single_var(key, "section", self.context(-1, momenta=True))
            if not isinstance(v, Momentum):
                raise InputError(f"{self.path}: [section] key {key!r} is not a momentum variable")
            coeffs[v] = self._parse(value, f"[section] {key}", self.context(l))
        return SectionT(n, m, l, coeffs)

    def _single_var(self, key: str, table: str, ctx: ParseContext):
        e = self._parse(key, f"[{table}] key {key!r}", ctx)
        if len(e.free_vars) != 1:
            raise InputError(f"{self.path}: [{table}] key {key!r} is not a single variable")
        v = next(iter(e.free_vars))
        if e != Expr(v):
            raise InputError(f"{self.path}: [{table}] key {key!r} is not a single variable")
        return v

    def candidate(self) -> Optional[dict]:
        if "candidate" not in self.raw:
            return None
        n, m, l = self.dims()
        out = {}
        for key, value in self.raw["candidate"].items():
            v = self._single_var(key, "candidate", self.context(l, momenta=True))
            out[v] = self._parse(value, f"[candidate] {key}", self.context(-1))
        return out

    def oracle(self, seed: Optional[int], tol: Optional[float]) -> OracleConfig:
        t = dict(self.raw.get("oracle", {}))
        if "fd_step" in t:
            t["fd_step"] = Fraction(str(t["fd_step"]))
        if seed is not None:
            t["seed"] = seed
        if tol is not None:
            t["tol_rel"] = tol
        try:
            return OracleConfig(**t)
        except (TypeError, ValueError) as exc:
            raise InputError(f"{self.path}: [oracle] {exc}")


def _default_oracle(seed: Optional[int], tol: Optional[float]) -> OracleConfig:
    kw: dict[str, Any] = {}
    if seed is not None:
        kw["seed"] = seed
    if tol is not None:
        kw["tol_rel"] = tol
    return OracleConfig(**kw)


# -- subcommands --------------------------------------------------------------
# Each returns (exit code, printable lines, JSON payload).

def cmd_el(pf: ProblemFile, args) -> tuple:
    P = pf.problem()
    el = variational_derivative(P)
    lines = [f"{to_text(e)} = 0" for e in el]
    return EXIT_OK, lines, {"vars": [f"u{a}" for a in range(1, P.m + 1)], "equations": lines}


def cmd_constraint(pf: ProblemFile, args) -> tuple:
    eqs = constraint_equations(pf.problem())
    return EXIT_OK, [e.text() for e in eqs], eqs.to_dict()


def cmd_hessian(pf: ProblemFile, args) -> tuple:
    P = pf.problem()
    Hm = hessian(P)
    verdict = is_hyperregular(P, seed=_seed(pf, args))
    labels = [var_text(v) for v in P.top_jets()]
    lines = [f"rows/cols: {', '.join(labels)}"]
    lines += ["[" + ", ".join(to_text(e) for e in row) + "]" for row in Hm]
    lines.append(f"det = {to_text(verdict.det)}")
    lines.append(f"hyperregular: {verdict.verdict}")
    payload: dict[str, Any] = {"rows": labels, "matrix": [[to_text(e) for e in row] for row in Hm],
                               "det": to_text(verdict.det), "verdict": verdict.verdict, "seed": verdict.seed}
    if verdict.witness:
        wit = {var_text(k): str(v) for k, v in verdict.witness.items()}
        lines.append(f"witness: {wit}")
        payload["witness"] = wit
    return (EXIT_OK if verdict.verdict == "yes" else EXIT_FAIL), lines, payload


def _seed(pf: ProblemFile, args) -> int:
    return pf.oracle(args.seed, args.tol).seed


def _hamiltonian(pf: ProblemFile) -> HamiltonianData:
    try:
        return hamiltonian(pf.problem())
    except EliminationError as exc:
        raise InputError(f"{pf.path}: {exc}")


def cmd_hamiltonian(pf: ProblemFile, args) -> tuple:
    Hd = _hamiltonian(pf)
    lines = [f"H = {to_text(Hd.H)}"]
    lines += [f"{var_text(j)} = {to_text(e)}" for j, e in Hd.top_jets.items()]
    return EXIT_OK, lines, Hd.to_dict()


def cmd_hdwe(pf: ProblemFile, args) -> tuple:
    Hd = _hamiltonian(pf)
    eqs = hdwe(Hd)
    lines = [e.text() for e in eqs]
    payload: dict[str, Any] = eqs.to_dict()
    code = EXIT_OK
    cand = pf.candidate()
    if cand is not None:
        try:
            report = hdwe_solution_check(Hd, cand, pf.oracle(args.seed, args.tol), pf.rules())
        except ValueError as exc:
            raise InputError(f"{pf.path}: {exc}")
        lines += ["", "candidate:"] + report.lines()
        payload["candidate"] = report.to_dict()
        code = EXIT_OK if report.passed else EXIT_FAIL
    return code, lines, payload


def _residual_lines(report: dict) -> list[str]:
    out = []
    for family, items in report.items():
        for item in items:
            out.append(f"{family}{item['index']}: {item['expr']}")
    return out


def cmd_hj_check(pf: ProblemFile, args) -> tuple:
    S = pf.ansatz()
    Hd = _hamiltonian(pf)
    eqs, f = classical_hj_residual(Hd, S, pf.rules())
    ok = all(e.lhs.is_zero() for e in eqs)
    lines = [f"f = {to_text(f)}"] + _residual_lines(eqs.residual_report())
    lines.append("HJ equations: " + ("satisfied" if ok else "violated"))
    return (EXIT_OK if ok else EXIT_FAIL), lines, {"f": to_text(f), "residuals": eqs.residual_report(),
                                                   "passed": ok}


def _section(pf: ProblemFile) -> SectionT:
    if "section" in pf.raw:
        return pf.section()
    if "ansatz" in pf.raw:
        n, m, l = pf.dims()
        return pf.ansatz().section(l, m)
    raise InputError(f"section T required ([section] or [ansatz] missing in {pf.path})")


def cmd_hj_gen_check(pf: ProblemFile, args) -> tuple:
    T = pf.section()
    Hd = _hamiltonian(pf)
    eqs = generalized_hj_residual(Hd, T, pf.rules())
    ok = eqs.all_zero()
    lines = _residual_lines(eqs.residual_report())
    lines.append("generalized HJ problem: " + ("solved" if ok else "not solved"))
    return (EXIT_OK if ok else EXIT_FAIL), lines, {"residuals": eqs.residual_report(), "passed": ok}


def cmd_flatness(pf: ProblemFile, args) -> tuple:
    T = _section(pf)
    Hd = _hamiltonian(pf)
    R = curvature(Hd, T, pf.rules())
    lines = [f"R{label_text(k)} = {to_text(v)}" for k, v in R.components.items()]
    lines.append(f"connection: {R.verdict}")
    payload = {"verdict": R.verdict,
               "components": [{"index": label_text(k), "expr": to_text(v)} for k, v in R.components.items()]}
    return (EXIT_OK if R.flat else EXIT_FAIL), lines, payload


def cmd_equiv(pf: ProblemFile, args) -> tuple:
    rho = pf.divergence()
    P = pf.problem()
    n, m, l = pf.dims()
    try:
        Pt = add_divergence(P, rho)
    except JetOrderError as exc:
        raise InputError(f"{pf.path}: {exc}")
    report = Report("equivalence under a total divergence")
    for a, (e0, e1) in enumerate(zip(variational_derivative(P), variational_derivative(Pt)), start=1):
        report.require_zero(f"same Euler-Lagrange expression for u{a}", e1 - e0)
    H0, H1 = hessian(P), hessian(Pt)
    report.add("same Hessian", all(a == b for r0, r1 in zip(H0, H1) for a, b in zip(r0, r1)))
    if not is_hyperregular(P):
        raise InputError(f"{pf.path}: the theory is not hyperregular")
    try:
        report.extend(psi_covariance(P, rho), "psi: ")
        T = _section(pf) if ("section" in pf.raw or "ansatz" in pf.raw) else SectionT(n, m, l)
        report.extend(equivalence_check(P, rho, T, pf.rules()), "HJ: ")
    except EliminationError as exc:
        raise InputError(f"{pf.path}: {exc}")
    lines = [f"L~ = {to_text(Pt.L)}"] + report.lines()
    return (EXIT_OK if report.passed else EXIT_FAIL), lines, report.to_dict()


def cmd_recover(pf: ProblemFile, args) -> tuple:
    Hd = pf.bare_hamiltonian()
    try:
        rec = recover_lagrangian(Hd)
    except NotLagrangianError as exc:
        lines = exc.report.lines() + [f"not Lagrangian: {exc}"]
        if exc.witness:
            lines.append(f"witness: {exc.witness}")
        return EXIT_FAIL, lines, {**exc.report.to_dict(), "witness": exc.witness}
    lines = [f"L = {to_text(rec.problem.L)}"] + rec.report.lines()
    payload = {**rec.report.to_dict(), "L": to_text(rec.problem.L), "order": rec.problem.order}
    return (EXIT_OK if rec.report.passed else EXIT_FAIL), lines, payload


def cmd_verify_biharmonic(pf: Optional[ProblemFile], args) -> tuple:
    cfg = pf.oracle(args.seed, args.tol) if pf else _default_oracle(args.seed, args.tol)
    report = biharmonic_suite(cfg)
    lines = report.lines()
    if report.meta.get("skipped"):
        lines.append(f"skipped (not biharmonic): {report.meta['skipped']}")
    return (EXIT_OK if report.passed else EXIT_FAIL), lines, report.to_dict()


COMMANDS = {
    "el": (cmd_el, "Euler-Lagrange expressions"),
    "constraint": (cmd_constraint, "constraint equations of the Legendre map"),
    "hessian": (cmd_hessian, "top-jet Hessian and hyperregularity verdict"),
    "hamiltonian": (cmd_hamiltonian, "de Donder Hamiltonian and eliminated top jets"),
    "hdwe": (cmd_hdwe, "Hamilton-de Donder-Weyl equations (checks [candidate] if given)"),
    "hj-check": (cmd_hj_check, "classical HJ residuals for the ansatz S"),
    "hj-gen-check": (cmd_hj_gen_check, "generalized HJ residuals for the section T"),
    "flatness": (cmd_flatness, "curvature of the connection induced by T"),
    "equiv": (cmd_equiv, "equivalence under L -> L + div(rho)"),
    "recover": (cmd_recover, "recover a Lagrangian from a bare Hamiltonian"),
    "verify-biharmonic": (cmd_verify_biharmonic, "end-to-end biharmonic suite"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jetvar", description="Higher-order variational calculus on jet spaces.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("file", nargs="?" if name == "verify-biharmonic" else None, help="TOML problem file")
        sp.add_argument("--json", metavar="PATH", help="write machine-readable output to PATH")
        sp.add_argument("--seed", type=int, help="override the oracle seed")
        sp.add_argument("--tol", type=float, help="override the relative tolerance")
    return ap


def run(argv: Optional[list[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    fn, _ = COMMANDS[args.command]
    try:
        pf = ProblemFile.load(args.file) if args.file else None
        code, lines, payload = fn(pf, args)
    except InputError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except (ValueError, JetOrderError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    for line in lines:
        print(line, file=out)
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
