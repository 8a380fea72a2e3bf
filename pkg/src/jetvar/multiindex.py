"""Symmetric multi-indices over base indices ``1..n``.

A multi-index is an unordered tuple of base indices; the canonical
representative is the ascending sorted tuple.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb
from typing import Iterator


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"base dimension must be >= 1, got {self.n}")
        entries = tuple(sorted(int(e) for e in self.entries))
        for e in entries:
            if not 1 <= e <= self.n:
                raise IndexError(f"base index {e} out of range 1..{self.n}")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __lt__(self, other: MultiIndex) -> bool:
        return self.sort_key < other.sort_key

    @property
    def sort_key(self) -> tuple:
        return (len(self.entries), self.entries)

    def concat(self, i: int) -> MultiIndex:
        return concat(self, i)

    def __add__(self, other: MultiIndex) -> MultiIndex:
        _same_base(self, other)
        return MultiIndex(self.entries + other.entries, self.n)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.entries)) + ")"


def _same_base(a: MultiIndex, b: MultiIndex) -> None:
    if a.n != b.n:
        raise ValueError(f"multi-indices over different bases: n={a.n} vs n={b.n}")


def concat(index: MultiIndex, i: int) -> MultiIndex:
    """Return the canonical form of ``Ii``."""
    if not 1 <= i <= index.n:
        raise IndexError(f"base index {i} out of range 1..{index.n}")
    return MultiIndex(index.entries + (i,), index.n)


def delta(a: MultiIndex, b: MultiIndex) -> int:
    _same_base(a, b)
    return int(a.entries == b.entries)


def of_length(n: int, k: int) -> list[MultiIndex]:
    """All multi-indices with exactly ``k`` entries, lexicographic."""
    return [MultiIndex(c, n) for c in combinations_with_replacement(range(1, n + 1), k)]


def enumerate_indices(n: int, k: int) -> list[MultiIndex]:
    """All multi-indices with ``|I| <= k``, ordered by length then lexicographically."""
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    out: list[MultiIndex] = []
    for j in range(k + 1):
        out.extend(of_length(n, j))
    return out


def count_up_to(n: int, k: int) -> int:
    return comb(n + k, k)


def decompositions(index: MultiIndex) -> list[tuple[MultiIndex, int]]:
    """Pairs ``(J, i)`` with ``Ji = I``, one per distinct entry of ``I``.

    These are exactly the pairs selected by ``delta(I, concat(J, i)) == 1``
    when ``J`` ranges over multi-indices of length ``|I| - 1``.
    """
    out = []
    for i in sorted(set(index.entries)):
        rest = list(index.entries)
        rest.remove(i)
        out.append((MultiIndex(tuple(rest), index.n), i))
    return out
