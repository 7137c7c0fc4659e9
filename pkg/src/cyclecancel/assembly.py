"""Candidate cycle sets: validation and application to a derangement.

A cycle set is a family of pairwise vertex-disjoint cycles over permitted
arcs of a reduced matrix. Applying its product permutation s to the
underlying derangement D yields D∘s; the set is *valid* when D∘s is again
an edge derangement. Validation runs two routes:

  * the direct certificate — compose and check the result structurally;
  * the condition checks — every arc whose induced edge duplicates an
    edge of D (a *mirror arc*, criterion a = D(D(b)) for arc (a, b)) must
    have D(b) inside the set's vertex span, and non-mirror arcs of
    different cycles must induce pairwise distinct matrix edges.

The certificate is authoritative. A disagreement between the two routes
is reported on the result and logged, never silently resolved.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import DisjointnessError, InvalidSetError, SizeMismatchError
from .permutation import (
    Derangement,
    EdgeViolation,
    Permutation,
    RowForm,
    compose_apply,
    edge_derangement_violation,
)
from .reduced import ReducedMatrix, cycle_arcs, cycle_value

logger = logging.getLogger(__name__)


class CycleSet:
    """Pairwise vertex-disjoint cycles, each with at least 2 vertices.

    Cycles are stored canonically (rotated to their minimum vertex, sorted
    by it), so equal sets compare equal.
    """

    def __init__(self, n: int, cycles: Iterable[Sequence[int]]):
        canon = []
        seen: set[int] = set()
        for cyc in cycles:
            seq = tuple(int(v) for v in cyc)
            if len(seq) < 2:
                raise ValueError(f"cycle {seq} needs at least 2 vertices")
            if len(set(seq)) != len(seq):
                raise ValueError(f"cycle {seq} repeats a vertex")
            if any(v < 0 or v >= n for v in seq):
                raise SizeMismatchError(f"cycle {seq} leaves vertex range 0..{n - 1}")
            overlap = seen.intersection(seq)
            if overlap:
                raise DisjointnessError(
                    f"vertex {min(overlap) + 1} lies on two cycles"
                )
            seen.update(seq)
            k = seq.index(min(seq))
            canon.append(seq[k:] + seq[:k])
        canon.sort()
        self.n = n
        self.cycles = tuple(canon)

    @classmethod
    def empty(cls, n: int) -> "CycleSet":
        return cls(n, ())

    @cached_property
    def points(self) -> frozenset[int]:
        return frozenset(v for c in self.cycles for v in c)

    def arcs(self) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        for cyc in self.cycles:
            out.extend(cycle_arcs(cyc))
        return out

    def permutation(self) -> Permutation:
        return Permutation.from_cycles(self.n, self.cycles)

    def total_value(self, r: ReducedMatrix) -> int:
        return cycle_value(self.arcs(), r)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CycleSet)
            and self.n == other.n
            and self.cycles == other.cycles
        )

    def __hash__(self) -> int:
        return hash((self.n, self.cycles))

    def __len__(self) -> int:
        return len(self.cycles)

    def __repr__(self) -> str:
        body = "".join(
            "(" + " ".join(str(v + 1) for v in c) + ")" for c in self.cycles
        )
        return f"CycleSet{body or '()'}"

    def to_json_dict(self) -> dict:
        return {"cycles": [[v + 1 for v in c] for c in self.cycles]}


def _row(d: RowForm | Derangement) -> RowForm:
    if isinstance(d, RowForm):
        return d
    return d.row_form


def sym_arcs(s: CycleSet, d: RowForm | Derangement) -> set[tuple[int, int]]:
    """Arcs (a, b) of the set whose induced edge [a, D(b)] duplicates an
    existing edge of D; algebraically a == D(D(b))."""
    row = _row(d)
    fwd = row.forward
    return {(a, b) for a, b in s.arcs() if a == fwd[fwd[b]]}


@dataclass
class SetValidation:
    """Outcome of validating a cycle set against a derangement.

    ``valid`` follows the direct certificate on the composed permutation;
    the condition-check fields are diagnostics, and ``theorem_discrepancy``
    marks runs where the two routes disagree.
    """

    valid: bool
    composed: Permutation
    certificate_violations: list[EdgeViolation] = field(default_factory=list)
    mirror_violations: list[dict] = field(default_factory=list)
    edge_conflicts: list[dict] = field(default_factory=list)
    conditions_ok: bool = True
    theorem_discrepancy: bool = False

    def to_json_dict(self) -> dict:
        return {
            "valid": self.valid,
            "composed": self.composed.one_based(),
            "certificate_violations": [
                v.to_json_dict() for v in self.certificate_violations
            ],
            "mirror_violations": self.mirror_violations,
            "edge_conflicts": self.edge_conflicts,
            "conditions_ok": self.conditions_ok,
            "theorem_discrepancy": self.theorem_discrepancy,
        }


def validate_cycle_set(
    s: CycleSet, d: RowForm | Derangement, r: ReducedMatrix
) -> SetValidation:
    """Check a cycle set both by conditions and by direct certificate.

    Raises ForbiddenArcError if any arc of the set is not permitted in
    ``r`` (disjointness is enforced by CycleSet itself).
    """
    row = _row(d)
    if row.n != s.n or r.n != s.n:
        raise SizeMismatchError("cycle set, derangement and matrix sizes differ")
    for i, j in s.arcs():
        r.value(i, j)  # raises ForbiddenArcError on masked arcs

    fwd = row.forward
    mirrors = sym_arcs(s, row)
    points = s.points

    mirror_violations = []
    for a, b in sorted(mirrors):
        if fwd[b] not in points:
            mirror_violations.append(
                {
                    "arc": [a + 1, b + 1],
                    "successor": fwd[b] + 1,
                    "why": "mirror arc needs the replaced endpoint inside the set",
                }
            )

    # Non-mirror arcs of different cycles must induce distinct edges.
    edge_owner: dict[frozenset[int], tuple[int, tuple[int, int]]] = {}
    edge_conflicts = []
    for ci, cyc in enumerate(s.cycles):
        for a, b in cycle_arcs(cyc):
            if (a, b) in mirrors:
                continue
            edge = frozenset((a, fwd[b]))
            prev = edge_owner.get(edge)
            if prev is not None and prev[0] != ci:
                edge_conflicts.append(
                    {
                        "edge": sorted(v + 1 for v in edge),
                        "arcs": [
                            [prev[1][0] + 1, prev[1][1] + 1],
                            [a + 1, b + 1],
                        ],
                    }
                )
            else:
                edge_owner[edge] = (ci, (a, b))

    conditions_ok = not mirror_violations and not edge_conflicts

    composed = compose_apply(row.permutation(), s.permutation())
    cert: list[EdgeViolation] = []
    img = composed.image
    for i, v in enumerate(img):
        if v == i:
            cert.append(EdgeViolation("fixed_point", (i,)))
        elif img[v] == i and i < v:
            cert.append(EdgeViolation("two_cycle", (i, v)))

    valid = not cert
    discrepancy = conditions_ok != valid
    if discrepancy:
        logger.warning(
            "cycle-set conditions (%s) disagree with certificate (%s) for %r",
            "ok" if conditions_ok else "violated",
            "ok" if valid else "violated",
            s,
        )
    return SetValidation(
        valid=valid,
        composed=composed,
        certificate_violations=cert,
        mirror_violations=mirror_violations,
        edge_conflicts=edge_conflicts,
        conditions_ok=conditions_ok,
        theorem_discrepancy=discrepancy,
    )


def apply_cycle_set(s: CycleSet, d: Derangement) -> Derangement:
    """Compose the set's permutation onto d; the result must again be an
    edge derangement, otherwise InvalidSetError."""
    if s.n != d.n:
        raise SizeMismatchError(f"cycle set on {s.n} vertices vs derangement {d.n}")
    composed = compose_apply(d, s.permutation())
    bad = edge_derangement_violation(composed)
    if bad is not None:
        raise InvalidSetError(
            f"applying {s!r} breaks the derangement: {bad.kind} at "
            f"{tuple(v + 1 for v in bad.vertices)}"
        )
    return Derangement(composed.image)
