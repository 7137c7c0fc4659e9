"""Column-sweep search for negative cycles among permutation arcs.

A Floyd-Warshall-style relaxation restricted to *negative* simple paths:
the search repeats rounds, each round sweeping target columns k = 1..n in
order. At column k every retained path (and every seed arc) may be
extended by one arc into k, subject to the admissibility conditions below;
entries written earlier in the same round are visible to later columns.
When an extension returns to its own source with negative total value, the
closed cycle is extracted independently and recorded.

An extension of the stored path Q = (d .. c') by arc (c', a) is admitted
iff both hold:

  1. the arc (D(a), D^-1(c')) is not an arc of Q, where D is the
     underlying derangement in row form -- otherwise the new arc would
     duplicate an undirected matrix edge already induced by Q
     (reject reason ``sym_edge_conflict``);
  2. one of: (i) the entry (d, a) is blank; (ii/iii) a is not already a
     vertex of Q, verified by back-tracking. A revisit whose closure
     difference value(Q') - value(d, a) matches a recorded negative-cycle
     value through a is rejected as ``known_cycle_value``; a revisit with
     an unrecorded difference is rejected as ``revisits_vertex`` so that
     retained paths stay vertex-simple.

Per (source, target) only the best (most negative) path value is retained;
equal-value candidates are resolved toward the lexicographically smaller
vertex sequence, and replaced entries can be archived for the positive-
cycle search built on top.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BlankEntryError,
    ForbiddenArcError,
    NonNegativeCycleError,
    PredecessorLoopError,
    SearchStateError,
)
from .permutation import RowForm
from .reduced import ReducedMatrix, cycle_arcs, cycle_value

_BIG = 2**62  # candidate sentinel; filtered before any write or comparison
_NOCHAIN = -2  # chain-predecessor code for "vertex not on this path"


class PathNode:
    """One stored path entry: an immutable link in a predecessor chain.

    Nodes are persistent, so a replaced entry keeps its full history and
    back-tracking always reproduces the exact path the value was computed
    from.
    """

    __slots__ = (
        "vertex",
        "value",
        "parent",
        "pass_no",
        "column",
        "cumulative",
        "length",
        "_path",
    )

    def __init__(self, vertex, value, parent, pass_no, column, cumulative):
        self.vertex = vertex
        self.value = value
        self.parent = parent
        self.pass_no = pass_no
        self.column = column
        self.cumulative = cumulative
        self.length = 0 if parent is None else parent.length + 1
        self._path: tuple[int, ...] | None = None

    def path(self) -> tuple[int, ...]:
        """Vertex sequence from the path's source to this node (cached)."""
        if self._path is None:
            if self.parent is not None and self.parent._path is not None:
                self._path = self.parent._path + (self.vertex,)
            else:
                out = []
                node = self
                while node is not None:
                    out.append(node.vertex)
                    node = node.parent
                out.reverse()
                self._path = tuple(out)
        return self._path

    def __repr__(self) -> str:
        return f"PathNode({'-'.join(str(v + 1) for v in self.path())}: {self.value})"


def _chain_predecessor(node: PathNode, vertex: int) -> int | None:
    """Predecessor of ``vertex`` on the chain ending at ``node``; None when
    the vertex is absent or is the chain's source."""
    cur = node
    while cur is not None:
        if cur.vertex == vertex:
            return cur.parent.vertex if cur.parent is not None else None
        cur = cur.parent
    return None


class PathMatrix:
    """Best-path entries per (source, target) with predecessor links.

    The entry keyed (d, d) is the closure entry of source d (a recorded
    cycle back to d); the root of d's tree is held separately. When
    ``archive`` is enabled, every replaced entry is kept. For each live
    entry the set of chain vertices is cached so membership tests during
    admissibility checks cost O(1).
    """

    def __init__(self, n: int, sources: Iterable[int], archive: bool = False):
        self.n = n
        self.sources = tuple(sorted(sources))
        self.roots = {
            d: PathNode(d, 0, None, pass_no=0, column=0, cumulative=0)
            for d in self.sources
        }
        self.nodes: dict[tuple[int, int], PathNode] = {}
        self._chain_sets: dict[tuple[int, int], frozenset[int]] = {}
        self.archive: dict[tuple[int, int], list[PathNode]] | None = (
            {} if archive else None
        )

    def root(self, d: int) -> PathNode:
        return self.roots[d]

    def node(self, d: int, t: int) -> PathNode | None:
        return self.nodes.get((d, t))

    def is_blank(self, d: int, t: int) -> bool:
        return (d, t) not in self.nodes

    def value(self, d: int, t: int) -> int:
        node = self.nodes.get((d, t))
        if node is None:
            raise BlankEntryError(f"entry ({d + 1},{t + 1}) is blank")
        return node.value

    def put(self, d: int, t: int, node: PathNode) -> None:
        old = self.nodes.get((d, t))
        if old is not None and self.archive is not None:
            self.archive.setdefault((d, t), []).append(old)
        self.nodes[(d, t)] = node
        self._chain_sets.pop((d, t), None)

    def chain_set(self, d: int, t: int) -> frozenset[int]:
        """Vertices on the stored path (d .. t); {d} for the bare root."""
        if t == d and (d, d) not in self.nodes:
            return frozenset((d,))
        cached = self._chain_sets.get((d, t))
        if cached is not None:
            return cached
        node = self.nodes.get((d, t))
        if node is None:
            raise BlankEntryError(f"entry ({d + 1},{t + 1}) is blank")
        chain = frozenset(node.path())
        self._chain_sets[(d, t)] = chain
        return chain

    def archived(self, d: int, t: int) -> list[PathNode]:
        if self.archive is None:
            return []
        return list(self.archive.get((d, t), ()))

    def all_nodes(self) -> list[PathNode]:
        """Current entries plus archived ones, in a deterministic order."""
        out = [self.nodes[k] for k in sorted(self.nodes)]
        if self.archive is not None:
            for k in sorted(self.archive):
                out.extend(self.archive[k])
        return out

    def install_path(self, d: int, vertices: Sequence[int], r: ReducedMatrix) -> None:
        """Fixture helper: store the given path and all its prefixes.

        Values are taken from ``r``; arcs must be permitted.
        """
        if vertices[0] != d:
            raise SearchStateError("path must start at its source")
        node = self.roots.setdefault(d, PathNode(d, 0, None, 0, 0, 0))
        self.sources = tuple(sorted(set(self.sources) | {d}))
        total = 0
        for prev, nxt in zip(vertices, vertices[1:]):
            total += r.value(prev, nxt)
            node = PathNode(nxt, total, node, pass_no=0, column=0, cumulative=0)
            self.put(d, nxt, node)


def backtrack(paths: PathMatrix, d: int, t: int) -> list[int]:
    """Full vertex sequence d..t of the stored entry, via predecessor links."""
    node = paths.node(d, t)
    if node is None:
        raise BlankEntryError(f"entry ({d + 1},{t + 1}) is blank")
    out = []
    limit = paths.n + 2  # a closure entry revisits its source once
    cur = node
    while cur is not None:
        out.append(cur.vertex)
        if len(out) > limit:
            raise PredecessorLoopError(
                f"predecessor chain of ({d + 1},{t + 1}) exceeds {limit} steps"
            )
        cur = cur.parent
    out.reverse()
    if out[0] != d:
        raise PredecessorLoopError(
            f"entry ({d + 1},{t + 1}) back-tracks to {out[0] + 1}, not its source"
        )
    return out


class NegativeCycleValues:
    """Per-vertex sorted lists of recorded negative-cycle values.

    Row a holds the value of every recorded negative cycle that passes
    through a, ascending. Distinct cycles of equal value through the same
    vertex keep one copy each. Rows are sorted lazily on read; membership
    tests are O(1).
    """

    def __init__(self, n: int):
        self.n = n
        self._rows: list[list[int]] = [[] for _ in range(n)]
        self._sets: list[set[int]] = [set() for _ in range(n)]
        self._dirty: set[int] = set()

    def row(self, a: int) -> list[int]:
        if a in self._dirty:
            self._rows[a].sort()
            self._dirty.discard(a)
        return list(self._rows[a])

    def contains(self, a: int, value: int) -> bool:
        return value in self._sets[a]

    def insert(self, a: int, value: int) -> None:
        self._rows[a].append(value)
        self._sets[a].add(value)
        self._dirty.add(a)

    def to_json_dict(self) -> dict:
        return {"rows": [self.row(a) for a in range(self.n)]}


@dataclass(frozen=True)
class CycleRecord:
    """A recorded negative cycle, canonically rotated to its minimum vertex."""

    cycle: tuple[int, ...]
    value: int
    source: int  # root whose closure produced the record
    pass_no: int
    column: int
    cumulative: int  # columns swept from the start of the search, inclusive
    index: int  # discovery order

    @property
    def points(self) -> frozenset[int]:
        return frozenset(self.cycle)

    def to_json_dict(self) -> dict:
        return {
            "cycle": [v + 1 for v in self.cycle],
            "value": self.value,
            "source": self.source + 1,
            "round": self.pass_no,
            "column": self.column + 1,
            "cumulative_columns": self.cumulative,
        }


def canonical_cycle(cycle: Sequence[int]) -> tuple[int, ...]:
    seq = tuple(cycle)
    k = seq.index(min(seq))
    return seq[k:] + seq[:k]


class CyclePool:
    """Canonical negative cycles found so far, in discovery order."""

    def __init__(self):
        self.records: list[CycleRecord] = []
        self._by_key: dict[tuple[int, ...], CycleRecord] = {}

    def __contains__(self, canonical: tuple[int, ...]) -> bool:
        return canonical in self._by_key

    def __len__(self) -> int:
        return len(self.records)

    def get(self, canonical: tuple[int, ...]) -> CycleRecord | None:
        return self._by_key.get(canonical)

    def add(self, record: CycleRecord) -> None:
        self._by_key[record.cycle] = record
        self.records.append(record)


def record_negative_cycle(
    cycle: Sequence[int],
    r: ReducedMatrix,
    table: NegativeCycleValues,
    pool: CyclePool,
    *,
    source: int | None = None,
    pass_no: int = 0,
    column: int = 0,
    cumulative: int = 0,
) -> CycleRecord:
    """Record a simple negative cycle: value into every member row of the
    table, canonical form into the pool. Re-recording the same cycle is a
    no-op returning the existing record."""
    seq = tuple(cycle)
    if len(set(seq)) != len(seq) or len(seq) < 2:
        raise SearchStateError(f"cycle {seq} is not simple")
    value = cycle_value(cycle_arcs(seq), r)
    if value >= 0:
        raise NonNegativeCycleError(f"cycle value {value} is not negative")
    canon = canonical_cycle(seq)
    existing = pool.get(canon)
    if existing is not None:
        return existing
    record = CycleRecord(
        cycle=canon,
        value=value,
        source=canon[0] if source is None else source,
        pass_no=pass_no,
        column=column,
        cumulative=cumulative,
        index=len(pool),
    )
    pool.add(record)
    for v in canon:
        table.insert(v, value)
    return record


@dataclass(frozen=True)
class Admissibility:
    """Verdict for adjoining one arc to a stored path."""

    admitted: bool
    reason: str | None = None  # reject code; None when admitted
    new_value: int | None = None
    closure_diff: int | None = None  # new value minus existing (d, a) entry


def check_extension(
    d: int,
    tail: int,
    target: int,
    r: ReducedMatrix,
    paths: PathMatrix,
    table: NegativeCycleValues,
    d_row: RowForm,
) -> Admissibility:
    """Decide whether the stored path (d .. tail) may take arc (tail, target).

    ``tail == d`` denotes the empty path at the root. Reject reasons:
    ``forbidden_arc``, ``fixed_point_arc``, ``sym_edge_conflict``,
    ``known_cycle_value``, ``revisits_vertex``.
    """
    if not r.is_permitted(tail, target):
        if target == d_row.inverse[tail]:
            return Admissibility(False, "fixed_point_arc")
        return Admissibility(False, "forbidden_arc")

    if tail == d:
        prefix = paths.roots.get(d)
        if prefix is None:
            raise SearchStateError(f"source {d + 1} has no root")
        chain = frozenset((d,))
    else:
        prefix = paths.node(d, tail)
        if prefix is None:
            raise SearchStateError(
                f"no stored path ({d + 1} .. {tail + 1}) to extend"
            )
        chain = paths.chain_set(d, tail)

    new_value = prefix.value + r.value(tail, target)

    # Condition 1: the mirrored arc (D(target), D^-1(tail)) must not lie on
    # the path. The stored predecessor of entry (d, D^-1(tail)) is only a
    # hint (entries can be replaced after the path grew through them), so
    # when the mirror vertex lies on the chain, the chain itself decides.
    w = d_row.forward[target]
    z = d_row.inverse[tail]
    if z in chain and _chain_predecessor(prefix, z) == w:
        return Admissibility(False, "sym_edge_conflict", new_value=new_value)

    existing = paths.node(d, target)
    if existing is None:
        return Admissibility(True, new_value=new_value)
    diff = new_value - existing.value
    if target not in chain:
        return Admissibility(True, new_value=new_value, closure_diff=diff)
    if table.contains(target, diff):
        return Admissibility(
            False, "known_cycle_value", new_value=new_value, closure_diff=diff
        )
    return Admissibility(
        False, "revisits_vertex", new_value=new_value, closure_diff=diff
    )


@dataclass
class SearchConfig:
    max_passes: int | None = None  # None: run until a full round changes nothing
    archive: bool = False  # keep replaced path entries
    record_events: bool = True


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # "entry" | "cycle" | "wrap_reject"
    pass_no: int
    column: int
    cumulative: int
    source: int
    target: int
    value: int
    diff: int | None = None

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "round": self.pass_no,
            "column": self.column + 1,
            "cumulative_columns": self.cumulative,
            "source": self.source + 1,
            "target": self.target + 1,
            "value": self.value,
        }
        if self.diff is not None:
            out["closure_diff"] = self.diff
        return out


@dataclass
class SearchTrace:
    """Column-iteration accounting of one search run.

    Each event carries both counting units: the cumulative column index
    (n columns per round) and the running entry count.
    """

    n: int
    events: list[TraceEvent] = field(default_factory=list)
    rounds: list[dict] = field(default_factory=list)
    entries_added: int = 0
    cycles_closed: int = 0
    wrap_rejections: int = 0
    columns_scanned: int = 0

    def to_json_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "events": [e.to_json_dict() for e in self.events],
            "column_tallies": {
                "columns_per_round": self.n,
                "columns_scanned": self.columns_scanned,
                "entries_added": self.entries_added,
                "cycles_closed": self.cycles_closed,
                "wrap_rejections": self.wrap_rejections,
            },
        }

    def first_cumulative(self, kind: str) -> int | None:
        for e in self.events:
            if e.kind == kind:
                return e.cumulative
        return None


@dataclass
class SearchResult:
    cycles: list[CycleRecord]
    paths: PathMatrix
    values_table: NegativeCycleValues
    trace: SearchTrace
    complete: bool
    passes: int




def run_search(
    r: ReducedMatrix, d_row: RowForm, config: SearchConfig | None = None
) -> SearchResult:
    """Run the column-sweep negative-cycle search to quiescence.

    Paths are rooted at every vertex with at least one negative permitted
    arc; non-negative path values are never retained. The result is
    deterministic. If ``config.max_passes`` cuts the run short the result
    is flagged incomplete.
    """
    if config is None:
        config = SearchConfig()
    n = r.n
    if d_row.n != n:
        raise SearchStateError(f"row form on {d_row.n} vertices vs matrix n={n}")

    perm = r.permitted
    active = [int(x) for x in np.flatnonzero((perm & (r.values < 0)).any(axis=1))]

    paths = PathMatrix(n, active, archive=config.archive)
    table = NegativeCycleValues(n)
    pool = CyclePool()
    trace = SearchTrace(n=n)

    # Path values are bounded by (n+1) arcs of peak magnitude; narrow
    # buffers halve the bandwidth of the per-column relaxation when safe.
    peak = int(np.abs(np.where(perm, r.values, 0)).max(initial=0))
    if (n + 1) * max(peak, 1) < 2**30:
        dtype, big = np.int32, 2**30
    else:
        dtype, big = np.int64, _BIG
    rz = np.where(perm, r.values, 0).astype(dtype)

    vals = np.full((n, n), big, dtype=dtype)
    valsz = np.zeros((n, n), dtype=dtype)
    blank = np.ones((n, n), dtype=bool)
    # chainpred[d, t, v]: predecessor of v on the stored path (d .. t);
    # -1 marks the source, NOCHAIN absence. It both masks revisiting
    # candidates wholesale and answers the mirrored-arc test in O(1).
    chainpred = np.full((n, n, n), _NOCHAIN, dtype=np.int16)
    # conflict[d, t] caches chainpred[d, t, D^-1(t)]: the one chain
    # predecessor the mirrored-arc condition compares against.
    conflict = np.full((n, n), _NOCHAIN, dtype=np.int16)
    dinv = d_row.inverse
    cand = np.empty((n, n), dtype=dtype)  # per-column work buffers
    dead = np.empty((n, n), dtype=bool)
    mins = np.empty(n, dtype=dtype)
    mins_rev = np.empty(n, dtype=dtype)
    mins_all = np.empty(n, dtype=dtype)
    for d in active:
        vals[d, d] = 0  # root of d's tree: the empty path
        blank[d, d] = False
        chainpred[d, d, d] = -1
        conflict[d, d] = chainpred[d, d, dinv[d]]

    pass_no = 0
    complete = False
    cumulative = 0
    while True:
        pass_no += 1
        changed = False
        round_entries = 0
        round_cycles = 0
        round_wraps = 0
        for k in range(n):
            cumulative += 1
            rcol = rz[:, k]
            np.add(valsz, rcol[None, :], out=cand)
            np.logical_or(blank, ~perm[:, k][None, :], out=dead)
            cand[dead] = big
            if config.record_events:
                cand.min(axis=1, out=mins_all)
            # closure candidates must be read before revisits are masked:
            # the source lies on every one of its own chains
            closure_row = cand[k].copy() if k in paths.roots else None
            np.copyto(cand, big, where=(chainpred[:, :, k] != _NOCHAIN))
            if config.record_events:
                cand.min(axis=1, out=mins_rev)
            # mirrored-arc conflicts (Theorem-2 condition 1) masked wholesale
            np.copyto(cand, big, where=(conflict == d_row.forward[k]))
            cand.min(axis=1, out=mins)
            thresh_col = np.where(vals[:, k] < 0, vals[:, k], 0)

            if config.record_events:
                # A better candidate that revisits k marks the path trying
                # to wrap around a cycle; trace it for the column tallies.
                wraps = np.flatnonzero(
                    (mins_all < thresh_col) & (mins_all < mins_rev)
                )
                for d in wraps:
                    d = int(d)
                    if d == k:
                        continue
                    trace.wrap_rejections += 1
                    round_wraps += 1
                    diff = (
                        int(mins_all[d]) - int(vals[d, k])
                        if vals[d, k] != big
                        else None
                    )
                    trace.events.append(
                        TraceEvent(
                            "wrap_reject",
                            pass_no,
                            k,
                            cumulative,
                            d,
                            k,
                            int(mins_all[d]),
                            diff=diff,
                        )
                    )

            # Surviving candidates satisfy every admissibility condition,
            # so the cheapest one is written outright.
            targets = np.flatnonzero(mins < thresh_col)
            for d in targets:
                d = int(d)
                if d == k:
                    continue  # closures handled below
                row = cand[d]
                m = int(mins[d])
                ties = np.flatnonzero(row == m)
                if len(ties) == 1:
                    cp = int(ties[0])
                else:
                    # equal values: lexicographically smaller path wins
                    cp = min(
                        (
                            (
                                paths.roots[d].path()
                                if c == d
                                else paths.nodes[(d, c)].path()
                            ),
                            int(c),
                        )
                        for c in ties
                    )[1]
                prefix = paths.roots[d] if cp == d else paths.nodes[(d, cp)]
                node = PathNode(k, m, prefix, pass_no, k, cumulative)
                paths.put(d, k, node)
                vals[d, k] = m
                valsz[d, k] = m
                blank[d, k] = False
                chainpred[d, k] = chainpred[d, cp]
                chainpred[d, k, k] = cp
                conflict[d, k] = chainpred[d, k, dinv[k]]
                trace.entries_added += 1
                round_entries += 1
                if config.record_events:
                    trace.events.append(
                        TraceEvent("entry", pass_no, k, cumulative, d, k, m)
                    )
                changed = True

            # Closures: arcs from stored paths of source k back into k.
            if closure_row is not None:
                crow = closure_row
                neg_idx = np.flatnonzero(crow < 0)
                if len(neg_idx):
                    order = neg_idx[np.lexsort((neg_idx, crow[neg_idx]))]
                    closure = paths.node(k, k)
                    for cp in order:
                        cp = int(cp)
                        if cp == k:
                            continue
                        v = int(crow[cp])
                        if closure is not None and v >= closure.value:
                            continue  # best-per-pair: only improving closures
                        prefix = paths.nodes[(k, cp)]
                        if int(conflict[k, cp]) == d_row.forward[k]:
                            continue  # closing arc would duplicate an edge
                        canon = canonical_cycle(prefix.path())
                        if canon not in pool:
                            record = CycleRecord(
                                cycle=canon,
                                value=v,
                                source=k,
                                pass_no=pass_no,
                                column=k,
                                cumulative=cumulative,
                                index=len(pool),
                            )
                            pool.add(record)
                            for vx in canon:
                                table.insert(vx, v)
                            trace.cycles_closed += 1
                            round_cycles += 1
                            if config.record_events:
                                trace.events.append(
                                    TraceEvent(
                                        "cycle", pass_no, k, cumulative, k, k, v
                                    )
                                )
                            changed = True
                        node = PathNode(k, v, prefix, pass_no, k, cumulative)
                        paths.put(k, k, node)
                        closure = node
                        changed = True

        trace.rounds.append(
            {
                "round": pass_no,
                "entries_added": round_entries,
                "cycles_closed": round_cycles,
                "wrap_rejections": round_wraps,
            }
        )
        trace.columns_scanned = cumulative
        if not changed:
            complete = True
            break
        if config.max_passes is not None and pass_no >= config.max_passes:
            break

    return SearchResult(
        cycles=list(pool.records),
        paths=paths,
        values_table=table,
        trace=trace,
        complete=complete,
        passes=pass_no,
    )
