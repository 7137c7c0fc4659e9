"""Reduced arc-cost structure for a derangement over a cost matrix.

For a cost matrix M and fixed-point-free permutation D, the reduced matrix
assigns arc (i, j) the value M(i, D(j)) - M(i, D(i)). Composing D with a
permutation s whose arcs are permitted changes the total cost by exactly
the summed arc values of s, so negative cycles here are cost-reducing
modifications of D. Arc (i, i) is forbidden, and arc (i, D^-1(i)) is
forbidden because it would give the composed permutation a fixed point.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .errors import FixedPointError, ForbiddenArcError, SizeMismatchError
from .instance import CostMatrix
from .permutation import Permutation, RowForm


class ReducedMatrix:
    """Arc values plus an explicit permitted-arc mask.

    The mask is authoritative: forbidden entries hold 0 in the value array
    and must never enter any sum. Immutable after construction.
    """

    __slots__ = ("n", "values", "permitted", "derangement", "matrix")

    def __init__(
        self,
        values: np.ndarray,
        permitted: np.ndarray,
        derangement: Permutation | None = None,
        matrix: CostMatrix | None = None,
    ):
        self.n = int(values.shape[0])
        values = values.astype(np.int64, copy=True)
        permitted = permitted.astype(bool, copy=True)
        values[~permitted] = 0
        values.setflags(write=False)
        permitted.setflags(write=False)
        self.values = values
        self.permitted = permitted
        self.derangement = derangement
        self.matrix = matrix

    def is_permitted(self, i: int, j: int) -> bool:
        return bool(self.permitted[i, j])

    def value(self, i: int, j: int) -> int:
        if not self.permitted[i, j]:
            raise ForbiddenArcError(f"arc ({i + 1},{j + 1}) is forbidden")
        return int(self.values[i, j])

    def to_tsv(self) -> str:
        """Debug dump, one row per line, 'X' for forbidden entries."""
        lines = []
        for i in range(self.n):
            cells = [
                str(int(self.values[i, j])) if self.permitted[i, j] else "X"
                for j in range(self.n)
            ]
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"ReducedMatrix(n={self.n})"


def build_reduced(m: CostMatrix, d: Permutation) -> ReducedMatrix:
    """Reduced matrix of d over m; d must be fixed-point-free."""
    if m.n != d.n:
        raise SizeMismatchError(f"matrix n={m.n} vs permutation on {d.n}")
    img = np.asarray(d.image, dtype=np.intp)
    if np.any(img == np.arange(m.n)):
        raise FixedPointError("reduced matrix needs a fixed-point-free permutation")
    base = m.costs[np.arange(m.n), img]  # cost of the current outgoing edge
    values = m.costs[:, img] - base[:, None]
    permitted = np.ones((m.n, m.n), dtype=bool)
    np.fill_diagonal(permitted, False)
    inv = np.empty(m.n, dtype=np.intp)
    inv[img] = np.arange(m.n)
    permitted[np.arange(m.n), inv] = False  # arcs that would create fixed points
    return ReducedMatrix(values, permitted, derangement=d, matrix=m)


def reduced_from_arcs(n: int, arcs: Mapping[tuple[int, int], int]) -> ReducedMatrix:
    """Sparse fixture constructor: only the listed arcs are permitted."""
    values = np.zeros((n, n), dtype=np.int64)
    permitted = np.zeros((n, n), dtype=bool)
    for (i, j), v in arcs.items():
        if i == j:
            raise ForbiddenArcError(f"arc ({i + 1},{i + 1}) cannot be permitted")
        values[i, j] = v
        permitted[i, j] = True
    return ReducedMatrix(values, permitted)


def path_arcs(vertices: Iterable[int]) -> list[tuple[int, int]]:
    """Consecutive arcs of an open vertex sequence."""
    seq = list(vertices)
    return list(zip(seq, seq[1:]))


def cycle_arcs(cycle: Iterable[int]) -> list[tuple[int, int]]:
    """Arcs of a closed cycle, including the wrap-around arc."""
    seq = list(cycle)
    return list(zip(seq, seq[1:] + seq[:1]))


def arcs_of_permutation(s: Permutation) -> list[tuple[int, int]]:
    """Non-fixed arcs (i, s(i)) of a permutation."""
    return [(i, v) for i, v in enumerate(s.image) if v != i]


def cycle_value(arcs: Iterable[tuple[int, int]], r: ReducedMatrix) -> int:
    """Exact sum of arc values; valid for open paths and closed cycles."""
    total = 0
    for i, j in arcs:
        total += r.value(i, j)
    return total
