"""Small exact linear algebra over rationals and over polynomial expressions."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .symexpr import ONE, ZERO, Expr, as_expr

Matrix = list[list[Expr]]


class SingularMatrixError(ArithmeticError):
    pass


def is_constant_matrix(a: Sequence[Sequence[Expr]]) -> bool:
    return all(as_expr(e).is_constant() for row in a for e in row)


def to_fractions(a: Sequence[Sequence[Expr]]) -> list[list[Fraction]]:
    return [[as_expr(e).constant_value() for e in row] for row in a]


def to_exprs(a: Sequence[Sequence[Fraction]]) -> Matrix:
    return [[Expr(v) for v in row] for row in a]


def rank(a: Sequence[Sequence[Fraction]]) -> int:
    rows = [list(map(Fraction, r)) for r in a]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        pivot = next((k for k in range(r, len(rows)) if rows[k][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for k in range(len(rows)):
            if k != r and rows[k][c] != 0:
                f = rows[k][c] / rows[r][c]
                rows[k] = [a - f * b for a, b in zip(rows[k], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def inverse(a: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Gauss-Jordan inverse; raises :class:`SingularMatrixError`."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        pivot = next((k for k in range(c, n) if aug[k][c] != 0), None)
        if pivot is None:
            raise SingularMatrixError("matrix is singular")
        aug[c], aug[pivot] = aug[pivot], aug[c]
        pv = aug[c][c]
        aug[c] = [v / pv for v in aug[c]]
        for k in range(n):
            if k != c and aug[k][c] != 0:
                f = aug[k][c]
                aug[k] = [x - f * y for x, y in zip(aug[k], aug[c])]
    return [row[n:] for row in aug]


def determinant(a: Sequence[Sequence[Expr]]) -> Expr:
    """Laplace expansion along the first row with memoised minors."""
    n = len(a)
    if n == 0:
        return ONE
    if is_constant_matrix(a):
        return Expr(_det_fractions(to_fractions(a)))
    a = [[as_expr(e) for e in row] for row in a]
    memo: dict[tuple, Expr] = {}

    def minor(row: int, cols: tuple) -> Expr:
        if row == n:
            return ONE
        key = (row, cols)
        if key in memo:
            return memo[key]
        total = ZERO
        for k, c in enumerate(cols):
            entry = a[row][c]
            if entry.is_zero():
                continue
            sub = minor(row + 1, cols[:k] + cols[k + 1:])
            term = entry * sub
            total = total - term if k % 2 else total + term
        memo[key] = total
        return total

    return minor(0, tuple(range(n)))


def _det_fractions(a: list[list[Fraction]]) -> Fraction:
    rows = [list(r) for r in a]
    n = len(rows)
    det = Fraction(1)
    for c in range(n):
        pivot = next((k for k in range(c, n) if rows[k][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            rows[c], rows[pivot] = rows[pivot], rows[c]
            det = -det
        det *= rows[c][c]
        for k in range(c + 1, n):
            if rows[k][c] != 0:
                f = rows[k][c] / rows[c][c]
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[c])]
    return det


def adjugate(a: Sequence[Sequence[Expr]]) -> Matrix:
    n = len(a)
    if n == 1:
        return [[ONE]]
    adj: Matrix = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [[a[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = determinant(sub)
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return adj


def expr_inverse(a: Sequence[Sequence[Expr]]) -> Matrix:
    """Inverse of a matrix whose determinant is a nonzero constant.

    Constant matrices go through exact Gauss-Jordan; otherwise the adjugate
    is divided by the constant determinant so entries stay polynomial.
    """
    if is_constant_matrix(a):
        return to_exprs(inverse(to_fractions(a)))
    det = determinant(a)
    if det.is_zero():
        raise SingularMatrixError("matrix is singular")
    if not det.is_constant():
        raise SingularMatrixError(f"determinant {det} is not constant; inverse is not polynomial")
    return [[e / det for e in row] for row in adjugate(a)]


def matmul(a: Sequence[Sequence[Expr]], b: Sequence[Sequence[Expr]]) -> Matrix:
    out = []
    for row in a:
        out.append([sum((as_expr(row[k]) * as_expr(b[k][j]) for k in range(len(b))), ZERO)
                    for j in range(len(b[0]))])
    return out


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
