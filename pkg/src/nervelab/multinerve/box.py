"""Multisimplicial sets given cell-by-cell: representables, simplicial factors and box products.

A cell of a ``k``-fold multisimplicial set at shape ``(m_1, ..., m_k)`` is a
tuple with one component per direction.  Faces and degeneracies act on one
direction at a time.
"""
from __future__ import annotations

from itertools import combinations_with_replacement, product
from typing import Sequence

from ..errors import PreconditionError
from ..simplicial import TruncSSet


def monotone_maps(m: int, n: int) -> list[tuple[int, ...]]:
    """Monotone maps ``[m] -> [n]`` as value tuples, lexicographic."""
    return list(combinations_with_replacement(range(n + 1), m + 1))


class Representable:
    """``Δ^{n_1, ..., n_k}``: cells are tuples of monotone maps ``[m_i] -> [n_i]``."""

    def __init__(self, ns: Sequence[int]):
        self.ns = tuple(ns)
        self.k = len(self.ns)

    def cells(self, shape: Sequence[int]) -> list[tuple]:
        self._check(shape)
        return list(product(*(monotone_maps(m, n) for m, n in zip(shape, self.ns))))

    def face(self, x: tuple, direction: int, j: int) -> tuple:
        comp = x[direction - 1]
        if len(comp) < 2 or not 0 <= j < len(comp):
            raise PreconditionError(f"no face d_{j} in direction {direction}")
        return x[: direction - 1] + (comp[:j] + comp[j + 1 :],) + x[direction:]

    def degeneracy(self, x: tuple, direction: int, j: int) -> tuple:
        comp = x[direction - 1]
        return x[: direction - 1] + (comp[: j + 1] + comp[j:],) + x[direction:]

    def is_degenerate(self, x: tuple) -> bool:
        return any(len(set(c)) < len(c) for c in x)

    def _check(self, shape):
        if len(shape) != self.k:
            raise PreconditionError(f"shape needs {self.k} entries")


class SimplicialFactor:
    """A truncated simplicial set viewed as a one-direction multisimplicial set."""

    def __init__(self, X: TruncSSet):
        self.X = X
        self.k = 1

    def cells(self, shape: Sequence[int]) -> list[tuple]:
        (m,) = shape
        if m > self.X.max_dim:
            raise PreconditionError(f"dimension {m} exceeds the truncation {self.X.max_dim}")
        return [(x,) for x in self.X.simplices(m)]

    def face(self, x: tuple, direction: int, j: int) -> tuple:
        return (self.X.face(x[0], j),)

    def degeneracy(self, x: tuple, direction: int, j: int) -> tuple:
        return (self.X.degeneracy(x[0], j),)

    def is_degenerate(self, x: tuple) -> bool:
        return self.X.is_degenerate(x[0])


class BoxProduct:
    """``(S ⊠ S')_{m, m'} = S_m x S'_{m'}``; cells are concatenated tuples."""

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self.k = left.k + right.k

    def cells(self, shape: Sequence[int]) -> list[tuple]:
        if len(shape) != self.k:
            raise PreconditionError(f"shape needs {self.k} entries")
        a = self.left.cells(shape[: self.left.k])
        b = self.right.cells(shape[self.left.k :])
        return [x + y for x in a for y in b]

    def _split(self, x):
        return x[: self.left.k], x[self.left.k :]

    def face(self, x: tuple, direction: int, j: int) -> tuple:
        a, b = self._split(x)
        if direction <= self.left.k:
            return self.left.face(a, direction, j) + b
        return a + self.right.face(b, direction - self.left.k, j)

    def degeneracy(self, x: tuple, direction: int, j: int) -> tuple:
        a, b = self._split(x)
        if direction <= self.left.k:
            return self.left.degeneracy(a, direction, j) + b
        return a + self.right.degeneracy(b, direction - self.left.k, j)

    def is_degenerate(self, x: tuple) -> bool:
        a, b = self._split(x)
        return self.left.is_degenerate(a) or self.right.is_degenerate(b)


def box_product(left, right) -> BoxProduct:
    return BoxProduct(_as_multi(left), _as_multi(right))


def _as_multi(S):
    return SimplicialFactor(S) if isinstance(S, TruncSSet) else S


def cell_count(S, shape: Sequence[int], nondegenerate: bool = False) -> int:
    cells = S.cells(shape)
    if nondegenerate:
        return sum(1 for x in cells if not S.is_degenerate(x))
    return len(cells)
