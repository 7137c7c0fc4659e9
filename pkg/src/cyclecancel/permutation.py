"""Permutation algebra: cycles, composition, costs, edge-derangement checks.

A permutation stores a 0-based image array. An *edge derangement* is a
fixed-point-free permutation whose n undirected edges {i, p(i)} are
pairwise distinct, which is equivalent to every cycle having length >= 3.
All I/O-facing representations (cycle notation, JSON) are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import FixedPointError, SizeMismatchError
from .instance import CostMatrix


class Permutation:
    """Bijection on {0..n-1}, immutable."""

    __slots__ = ("_image",)

    def __init__(self, image: Sequence[int]):
        img = tuple(int(v) for v in image)
        n = len(img)
        if sorted(img) != list(range(n)):
            raise ValueError(f"image {img} is not a bijection on 0..{n - 1}")
        self._image = img

    @classmethod
    def from_one_based(cls, image: Sequence[int]) -> "Permutation":
        return cls([v - 1 for v in image])

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        """Product of disjoint cycles given as 0-based vertex sequences."""
        img = list(range(n))
        seen: set[int] = set()
        for cyc in cycles:
            for v in cyc:
                if v in seen:
                    raise ValueError(f"cycles are not disjoint at vertex {v + 1}")
                seen.add(v)
            for a, b in zip(cyc, tuple(cyc[1:]) + (cyc[0],)):
                img[a] = b
        return cls(img)

    @property
    def n(self) -> int:
        return len(self._image)

    @property
    def image(self) -> tuple[int, ...]:
        return self._image

    def __call__(self, i: int) -> int:
        return self._image[i]

    def one_based(self) -> list[int]:
        return [v + 1 for v in self._image]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self._image):
            inv[v] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self._image))

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """Disjoint cycles, each rotated to start at its minimum vertex,
        sorted by that minimum. Fixed points appear as length-1 cycles."""
        seen = [False] * self.n
        out: list[tuple[int, ...]] = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            v = self._image[start]
            while v != start:
                seen[v] = True
                cyc.append(v)
                v = self._image[v]
            out.append(tuple(cyc))
        return tuple(out)

    def cycle_notation(self) -> str:
        return "".join(
            "(" + " ".join(str(v + 1) for v in c) + ")" for c in self.cycles()
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self._image == other._image

    def __hash__(self) -> int:
        return hash(self._image)

    def __repr__(self) -> str:
        return f"{type(self).__name__}{self.cycle_notation()}"

    def to_json_dict(self) -> dict:
        return {"image": self.one_based(), "cycles": self.cycle_notation()}


def cycle_decomposition(p: Permutation) -> tuple[tuple[int, ...], ...]:
    return p.cycles()


def compose_apply(d: Permutation, s: Permutation) -> Permutation:
    """The permutation i -> d(s(i)).

    Makes no validity claim about the result; cycle-set validation decides
    whether it is an edge derangement.
    """
    if d.n != s.n:
        raise SizeMismatchError(f"size mismatch: {d.n} vs {s.n}")
    di = d.image
    return Permutation([di[v] for v in s.image])


def permutation_cost(p: Permutation, m: CostMatrix) -> int:
    """Exact integer cost sum(M(i, p(i))); p must have no fixed points."""
    if p.n != m.n:
        raise SizeMismatchError(f"permutation on {p.n} vertices vs matrix n={m.n}")
    total = 0
    costs = m.costs
    for i, v in enumerate(p.image):
        if v == i:
            raise FixedPointError(f"fixed point at vertex {i + 1}")
        total += int(costs[i, v])
    return total


@dataclass(frozen=True)
class EdgeViolation:
    """First structural defect keeping a permutation from being an edge
    derangement; vertices are 0-based."""

    kind: str  # "fixed_point" | "two_cycle"
    vertices: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "vertices": [v + 1 for v in self.vertices]}


def edge_derangement_violation(p: Permutation) -> EdgeViolation | None:
    """Lowest-index violation, or None when p is an edge derangement."""
    img = p.image
    for i, v in enumerate(img):
        if v == i:
            return EdgeViolation("fixed_point", (i,))
        if img[v] == i:
            return EdgeViolation("two_cycle", (i, v))
    return None


def is_edge_derangement(p: Permutation) -> bool:
    return edge_derangement_violation(p) is None


@dataclass(frozen=True)
class RowForm:
    """Forward and inverse lookup arrays for a permutation: O(1) both ways."""

    forward: tuple[int, ...]
    inverse: tuple[int, ...]

    @classmethod
    def from_permutation(cls, p: Permutation) -> "RowForm":
        inv = [0] * p.n
        for i, v in enumerate(p.image):
            inv[v] = i
        return cls(p.image, tuple(inv))

    @classmethod
    def identity(cls, n: int) -> "RowForm":
        ident = tuple(range(n))
        return cls(ident, ident)

    @property
    def n(self) -> int:
        return len(self.forward)

    def permutation(self) -> Permutation:
        return Permutation(self.forward)


def row_form(p: Permutation) -> RowForm:
    return RowForm.from_permutation(p)


class Derangement(Permutation):
    """Edge derangement: validated at construction, with the row form and
    cycle decomposition cached."""

    def __init__(self, image: Sequence[int]):
        super().__init__(image)
        bad = edge_derangement_violation(self)
        if bad is not None:
            if bad.kind == "fixed_point":
                raise FixedPointError(f"fixed point at vertex {bad.vertices[0] + 1}")
            i, j = bad.vertices
            raise ValueError(f"2-cycle ({i + 1} {j + 1}) is not an edge derangement")

    @classmethod
    def canonical_cycle(cls, n: int) -> "Derangement":
        """The n-cycle sending 0 -> 1 -> ... -> n-1 -> 0."""
        return cls([(i + 1) % n for i in range(n)])

    @cached_property
    def row_form(self) -> RowForm:  # type: ignore[override]
        return RowForm.from_permutation(self)

    @cached_property
    def cycle_list(self) -> tuple[tuple[int, ...], ...]:
        return self.cycles()
