"""Cost descent over edge derangements and the bound-chain report.

``descend`` repeatedly builds the reduced matrix of the current
derangement, collects negative cycles with the column-sweep engine,
assembles the most negative valid disjoint cycle set greedily, and applies
it, stopping when no valid negative set remains. ``search_absolute`` then
tries to beat that local minimum by pairing disjoint families of negative
cycles with cheap positive cycles, enumerated within explicit limits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .assembly import CycleSet, apply_cycle_set, validate_cycle_set
from .engine import PathMatrix, SearchConfig, run_search
from .errors import NonTourError, SolverError
from .instance import CostMatrix
from .permutation import Derangement, Permutation, permutation_cost
from .reduced import ReducedMatrix, build_reduced


@dataclass
class DescentStep:
    """One accepted improvement (the first step records the start state)."""

    derangement: Derangement
    cost: int
    applied: CycleSet | None = None
    value: int | None = None
    search_passes: int = 0
    cycles_found: int = 0
    discrepancies: int = 0

    def to_json_dict(self) -> dict:
        return {
            "derangement": self.derangement.one_based(),
            "cycles": self.derangement.cycle_notation(),
            "cost": self.cost,
            "applied": self.applied.to_json_dict() if self.applied else None,
            "value": self.value,
            "search_passes": self.search_passes,
            "cycles_found": self.cycles_found,
        }


@dataclass
class DescentTrace:
    steps: list[DescentStep]
    termination: str  # "exhausted" | "cap_exceeded"
    complete: bool
    searches_complete: bool = True
    discrepancies: int = 0
    engine_traces: list[dict] = field(default_factory=list)

    @property
    def final(self) -> DescentStep:
        return self.steps[-1]

    def to_json_dict(self) -> dict:
        return {
            "steps": [s.to_json_dict() for s in self.steps],
            "termination": self.termination,
            "complete": self.complete,
            "searches_complete": self.searches_complete,
            "theorem_discrepancies": self.discrepancies,
        }


@dataclass
class DescentConfig:
    max_rounds: int = 1000
    step_mode: str = "greedy_set"  # or "single_cycle" for ablation
    search: SearchConfig = field(
        default_factory=lambda: SearchConfig(record_events=False)
    )
    collect_engine_traces: bool = False


def _assemble_set(
    records, d: Derangement, r: ReducedMatrix, mode: str
) -> tuple[CycleSet, int, int] | None:
    """Most negative valid disjoint set from the cycle pool.

    Cycles are tried in ascending (value, cycle) order and kept when they
    stay vertex-disjoint and the accumulated set still validates. Returns
    (set, total value, discrepancy count) or None.
    """
    chosen: list = []
    used: set[int] = set()
    total = 0
    discrepancies = 0
    for rec in sorted(records, key=lambda c: (c.value, c.cycle)):
        if used.intersection(rec.cycle):
            continue
        candidate = CycleSet(d.n, [c.cycle for c in chosen] + [rec.cycle])
        outcome = validate_cycle_set(candidate, d.row_form, r)
        discrepancies += outcome.theorem_discrepancy
        if not outcome.valid:
            continue
        chosen.append(rec)
        used.update(rec.cycle)
        total += rec.value
        if mode == "single_cycle":
            break
    if not chosen:
        return None
    return CycleSet(d.n, [c.cycle for c in chosen]), total, discrepancies


def descend(
    m: CostMatrix, d0: Derangement | Permutation, config: DescentConfig | None = None
) -> DescentTrace:
    """Iterate cycle canceling until no valid negative set remains.

    Costs decrease strictly; each step's cost delta equals its applied
    set's value exactly. A round cap turns the trace incomplete instead of
    looping forever on adversarial inputs.
    """
    if config is None:
        config = DescentConfig()
    d = d0 if isinstance(d0, Derangement) else Derangement(d0.image)
    steps = [DescentStep(derangement=d, cost=permutation_cost(d, m))]
    termination = "exhausted"
    complete = True
    searches_complete = True
    discrepancies = 0
    engine_traces: list[dict] = []
    rounds = 0
    while True:
        if rounds >= config.max_rounds:
            termination = "cap_exceeded"
            complete = False
            break
        rounds += 1
        r = build_reduced(m, d)
        result = run_search(r, d.row_form, config.search)
        searches_complete = searches_complete and result.complete
        if config.collect_engine_traces:
            engine_traces.append(result.trace.to_json_dict())
        if not result.cycles:
            break
        pick = _assemble_set(result.cycles, d, r, config.step_mode)
        if pick is None:
            break
        chosen, value, disc = pick
        discrepancies += disc
        new_d = apply_cycle_set(chosen, d)
        new_cost = permutation_cost(new_d, m)
        if new_cost != steps[-1].cost + value:
            raise SolverError(
                f"cost bookkeeping broke: {steps[-1].cost} + {value} != {new_cost}"
            )
        steps.append(
            DescentStep(
                derangement=new_d,
                cost=new_cost,
                applied=chosen,
                value=value,
                search_passes=result.passes,
                cycles_found=len(result.cycles),
                discrepancies=disc,
            )
        )
        d = new_d
    return DescentTrace(
        steps=steps,
        termination=termination,
        complete=complete,
        searches_complete=searches_complete,
        discrepancies=discrepancies,
        engine_traces=engine_traces,
    )


@dataclass
class AbsoluteSearchLimits:
    """Work caps for the exhaustive refinement; all must be positive."""

    max_cycle_len: int = 8
    max_cycles_per_set: int = 3
    max_candidate_sets: int = 5000
    time_budget_ms: float = 2000.0

    def __post_init__(self):
        for name in ("max_cycle_len", "max_cycles_per_set", "max_candidate_sets"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.time_budget_ms <= 0:
            raise ValueError("time_budget_ms must be positive")


@dataclass
class AbsoluteResult:
    derangement: Derangement
    cost: int
    applied: CycleSet | None
    value: int | None
    stats: dict
    complete: bool

    def to_json_dict(self) -> dict:
        return {
            "derangement": self.derangement.one_based(),
            "cycles": self.derangement.cycle_notation(),
            "cost": self.cost,
            "applied": self.applied.to_json_dict() if self.applied else None,
            "value": self.value,
            "stats": self.stats,
            "complete": self.complete,
        }


def _bounded_negative_cycles(
    r: ReducedMatrix, max_len: int, deadline: float
) -> tuple[list[tuple[tuple[int, ...], int]], bool]:
    """All simple negative cycles up to max_len, or a truncated prefix."""
    n = r.n
    permitted = r.permitted
    values = r.values
    found: list[tuple[tuple[int, ...], int]] = []
    truncated = False

    def dfs(root: int, v: int, total: int, path: list[int], on_path: set[int]):
        nonlocal truncated
        if truncated or time.perf_counter() > deadline:
            truncated = True
            return
        if len(path) >= 2 and permitted[v, root]:
            closing = total + int(values[v, root])
            if closing < 0:
                found.append((tuple(path), closing))
        if len(path) == max_len:
            return
        for w in range(root + 1, n):
            if w in on_path or not permitted[v, w]:
                continue
            path.append(w)
            on_path.add(w)
            dfs(root, w, total + int(values[v, w]), path, on_path)
            on_path.discard(w)
            path.pop()

    for root in range(n):
        if truncated:
            break
        dfs(root, root, 0, [root], {root})
    found.sort(key=lambda cv: (cv[1], cv[0]))
    return found, truncated


def _disjoint_families(
    cycles: list[tuple[tuple[int, ...], int]],
    max_size: int,
    max_count: int,
    deadline: float,
) -> tuple[list[tuple[tuple[int, ...], int]], bool]:
    """Non-empty pairwise-disjoint families; each entry is (member index
    tuple, total value)."""
    out: list[tuple[tuple[int, ...], int]] = []
    truncated = False
    points = [frozenset(c) for c, _ in cycles]

    def grow(start: int, picked: list[int], used: frozenset[int], total: int):
        nonlocal truncated
        if truncated:
            return
        if len(out) >= max_count or time.perf_counter() > deadline:
            truncated = True
            return
        for i in range(start, len(cycles)):
            if used & points[i]:
                continue
            chosen = picked + [i]
            out.append((tuple(chosen), total + cycles[i][1]))
            if len(chosen) < max_size:
                grow(i + 1, chosen, used | points[i], total + cycles[i][1])
            if truncated:
                return

    grow(0, [], frozenset(), 0)
    return out, truncated


def _positive_cycles_from_paths(
    r: ReducedMatrix,
    paths: PathMatrix,
    roots: list[int],
    bound: int,
    max_len: int,
    deadline: float,
) -> tuple[list[tuple[tuple[int, ...], int]], bool]:
    """Positive cycles with 0 < value < bound, grown depth-first from the
    retained and archived search paths whose source is a determining root."""
    permitted = r.permitted
    values = r.values
    seen: set[tuple[int, ...]] = set()
    found: list[tuple[tuple[int, ...], int]] = []
    truncated = False

    seeds: dict[tuple[int, ...], int] = {}
    for d in roots:
        seeds[(d,)] = 0
    for node in paths.all_nodes():
        seq = node.path()
        if seq[0] in roots and len(seq) == len(set(seq)) and len(seq) <= max_len:
            seeds.setdefault(seq, node.value)

    def dfs(root: int, v: int, total: int, path: list[int], on_path: set[int]):
        nonlocal truncated
        if truncated or time.perf_counter() > deadline:
            truncated = True
            return
        if len(path) >= 2 and permitted[v, root]:
            closing = total + int(values[v, root])
            if 0 < closing < bound:
                canon = tuple(
                    path[path.index(min(path)):] + path[: path.index(min(path))]
                )
                if canon not in seen:
                    seen.add(canon)
                    found.append((canon, closing))
        if len(path) == max_len:
            return
        for w in range(r.n):
            if w in on_path or not permitted[v, w]:
                continue
            path.append(w)
            on_path.add(w)
            dfs(root, w, total + int(values[v, w]), path, on_path)
            on_path.discard(w)
            path.pop()

    for seq in sorted(seeds):
        if truncated:
            break
        dfs(seq[0], seq[-1], seeds[seq], list(seq), set(seq))
    found.sort(key=lambda cv: (cv[1], cv[0]))
    return found, truncated


def search_absolute(
    m: CostMatrix, dfw: Derangement, limits: AbsoluteSearchLimits | None = None
) -> AbsoluteResult:
    """Pair disjoint negative-cycle families with cheap positive cycles.

    Enumerates (within the limits) the negative simple cycles of the
    reduced matrix and their disjoint families, takes the most negative
    family value V, collects positive cycles of value below -V from the
    archived search paths, and applies the valid union of smallest total
    value. Returns the input unchanged when nothing qualifies; a truncated
    enumeration is flagged incomplete.
    """
    if limits is None:
        limits = AbsoluteSearchLimits()
    deadline = time.perf_counter() + limits.time_budget_ms / 1000.0
    r = build_reduced(m, dfw)
    base_cost = permutation_cost(dfw, m)
    max_len = min(limits.max_cycle_len, m.n)

    negatives, trunc_neg = _bounded_negative_cycles(r, max_len, deadline)
    stats: dict = {
        "negative_cycles": len(negatives),
        "families": 0,
        "family_value_min": None,
        "positive_cycles": 0,
        "pairs_evaluated": 0,
        "valid_candidates": 0,
        "truncated": trunc_neg,
    }
    if not negatives:
        return AbsoluteResult(dfw, base_cost, None, None, stats, complete=not trunc_neg)

    families, trunc_fam = _disjoint_families(
        negatives, limits.max_cycles_per_set, limits.max_candidate_sets, deadline
    )
    v_min = min(total for _, total in families)
    stats["families"] = len(families)
    stats["family_value_min"] = v_min

    engine_out = run_search(
        r, dfw.row_form, SearchConfig(archive=True, record_events=False)
    )
    roots = sorted({rec.cycle[0] for rec in engine_out.cycles})
    positives, trunc_pos = _positive_cycles_from_paths(
        r, engine_out.paths, roots, -v_min, max_len, deadline
    )
    stats["positive_cycles"] = len(positives)
    pos_points = [frozenset(c) for c, _ in positives]

    best: tuple[int, tuple, CycleSet] | None = None
    evaluated = 0
    truncated = trunc_neg or trunc_fam or trunc_pos

    def consider(cycles: list[tuple[int, ...]], total: int):
        nonlocal best
        stats["pairs_evaluated"] += 1
        if total >= 0:
            return
        candidate = CycleSet(m.n, cycles)
        key = (total, candidate.cycles)
        if best is not None and key >= (best[0], best[1]):
            return
        if validate_cycle_set(candidate, dfw.row_form, r).valid:
            stats["valid_candidates"] += 1
            best = (total, candidate.cycles, candidate)

    for members, fam_total in sorted(families, key=lambda f: (f[1], f[0])):
        if evaluated >= limits.max_candidate_sets or time.perf_counter() > deadline:
            truncated = True
            break
        fam_cycles = [negatives[i][0] for i in members]
        fam_points = frozenset(v for c in fam_cycles for v in c)
        evaluated += 1
        consider(fam_cycles, fam_total)  # the family alone (empty positive part)

        usable = [
            i for i in range(len(positives)) if not pos_points[i] & fam_points
        ]

        def grow_pos(start: int, chosen: list[int], used: frozenset[int], ptotal: int):
            nonlocal evaluated, truncated
            for idx_pos in range(start, len(usable)):
                i = usable[idx_pos]
                if used & pos_points[i]:
                    continue
                if (
                    evaluated >= limits.max_candidate_sets
                    or time.perf_counter() > deadline
                ):
                    truncated = True
                    return
                evaluated += 1
                picked = chosen + [i]
                consider(
                    fam_cycles + [positives[j][0] for j in picked],
                    fam_total + ptotal + positives[i][1],
                )
                if len(picked) < limits.max_cycles_per_set:
                    grow_pos(
                        idx_pos + 1,
                        picked,
                        used | pos_points[i],
                        ptotal + positives[i][1],
                    )
                if truncated:
                    return

        grow_pos(0, [], frozenset(), 0)
        if truncated:
            break

    if best is None:
        return AbsoluteResult(dfw, base_cost, None, None, stats, complete=not truncated)
    total, _, chosen = best
    new_d = apply_cycle_set(chosen, dfw)
    new_cost = permutation_cost(new_d, m)
    if new_cost != base_cost + total:
        raise SolverError(
            f"cost bookkeeping broke: {base_cost} + {total} != {new_cost}"
        )
    return AbsoluteResult(new_d, new_cost, chosen, total, stats, complete=not truncated)


def nearest_neighbor_tour(m: CostMatrix, start: int = 0) -> Derangement:
    """Greedy tour: always hop to the cheapest unvisited vertex (ties to
    the lowest index). Plumbing for upper-bound reporting only."""
    n = m.n
    costs = m.costs
    order = [start]
    visited = {start}
    cur = start
    for _ in range(n - 1):
        best_v = -1
        best_c = None
        for v in range(n):
            if v in visited:
                continue
            c = int(costs[cur, v])
            if best_c is None or c < best_c:
                best_c = c
                best_v = v
        order.append(best_v)
        visited.add(best_v)
        cur = best_v
    return Derangement(Permutation.from_cycles(n, [order]).image)


def greedy_initial(m: CostMatrix) -> Derangement:
    """Greedy 2-factor used for --initial greedy (a nearest-neighbor tour)."""
    return nearest_neighbor_tour(m)


def _require_tour(tour: Permutation, n: int) -> None:
    cycles = tour.cycles()
    if len(cycles) != 1 or len(cycles[0]) != n:
        raise NonTourError(
            f"expected a single {n}-cycle, got {tour.cycle_notation()}"
        )


@dataclass
class BoundLink:
    name: str
    lhs_label: str
    lhs: int
    rhs_label: str
    rhs: int

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": {"label": self.lhs_label, "cost": self.lhs},
            "rhs": {"label": self.rhs_label, "cost": self.rhs},
            "ok": self.ok,
            "line": f"{self.lhs} <= {self.rhs}",
        }


@dataclass
class BoundChainReport:
    links: list[BoundLink]
    tour_cost: int | None = None

    @property
    def ok(self) -> bool:
        return all(link.ok for link in self.links)

    @property
    def flags(self) -> list[str]:
        return [] if self.ok else ["solver_bug"]

    def to_json_dict(self) -> dict:
        return {
            "links": [link.to_json_dict() for link in self.links],
            "tour_cost": self.tour_cost,
            "ok": self.ok,
            "flags": self.flags,
        }


def bound_chain(
    m: CostMatrix,
    descent_cost: int,
    absolute_cost: int | None = None,
    tour: Permutation | None = None,
    oracle_min_cost: int | None = None,
) -> BoundChainReport:
    """Ordering report over the computed costs.

    Asserts absolute <= descent, and (oracle minimum or absolute) <= tour
    cost when a tour is supplied; a violated link flags a solver bug since
    every tour is itself an edge derangement.
    """
    links: list[BoundLink] = []
    if absolute_cost is not None:
        links.append(
            BoundLink("refined_vs_descent", "d_absolute", absolute_cost,
                      "d_fwabs", descent_cost)
        )
    tour_cost = None
    if tour is not None:
        _require_tour(tour, m.n)
        tour_cost = permutation_cost(tour, m)
        if oracle_min_cost is not None:
            links.append(
                BoundLink("oracle_vs_tour", "oracle_min_derangement",
                          oracle_min_cost, "tour", tour_cost)
            )
        elif absolute_cost is not None:
            links.append(
                BoundLink("refined_vs_tour", "d_absolute", absolute_cost,
                          "tour", tour_cost)
            )
        else:
            links.append(
                BoundLink("descent_vs_tour", "d_fwabs", descent_cost,
                          "tour", tour_cost)
            )
    return BoundChainReport(links=links, tour_cost=tour_cost)


@dataclass
class SolveOutcome:
    matrix: CostMatrix
    initial: Derangement
    trace: DescentTrace
    absolute: AbsoluteResult | None
    chain: BoundChainReport
    flags: list[str]
    stats: dict

    @property
    def descent_minimum(self) -> Derangement:
        return self.trace.final.derangement

    @property
    def descent_cost(self) -> int:
        return self.trace.final.cost

    @property
    def best_cost(self) -> int:
        return self.absolute.cost if self.absolute else self.descent_cost

    def to_json_dict(self, instance_id: str | None = None) -> dict:
        d0 = self.trace.steps[0]
        return {
            "instance_id": instance_id,
            "d0": {
                "derangement": d0.derangement.one_based(),
                "cycles": d0.derangement.cycle_notation(),
                "cost": d0.cost,
            },
            "trace": self.trace.to_json_dict(),
            "d_fwabs": {
                "derangement": self.descent_minimum.one_based(),
                "cycles": self.descent_minimum.cycle_notation(),
                "cost": self.descent_cost,
            },
            "d_absolute": self.absolute.to_json_dict() if self.absolute else None,
            "bound_chain": self.chain.to_json_dict(),
            "stats": self.stats,
            "flags": self.flags,
        }


def solve(
    m: CostMatrix,
    initial: str | Permutation = "canonical",
    absolute: bool = False,
    config: DescentConfig | None = None,
    limits: AbsoluteSearchLimits | None = None,
    tour: str | Permutation | None = "nn",
) -> SolveOutcome:
    """Full pipeline: descend, optionally refine, report the bound chain."""
    if isinstance(initial, Permutation):
        d0 = initial if isinstance(initial, Derangement) else Derangement(initial.image)
    elif initial == "canonical":
        d0 = Derangement.canonical_cycle(m.n)
    elif initial == "greedy":
        d0 = greedy_initial(m)
    else:
        raise ValueError(f"unknown initial derangement choice {initial!r}")

    trace = descend(m, d0, config)
    result = search_absolute(m, trace.final.derangement, limits) if absolute else None

    if tour == "nn":
        tour_perm: Permutation | None = nearest_neighbor_tour(m)
    else:
        tour_perm = tour
    chain = bound_chain(
        m,
        trace.final.cost,
        absolute_cost=result.cost if result else None,
        tour=tour_perm,
    )

    flags = list(chain.flags)
    if not trace.complete:
        flags.append("descent_cap_exceeded")
    if not trace.searches_complete:
        flags.append("search_incomplete")
    if result is not None and not result.complete:
        flags.append("absolute_truncated")

    stats = {
        "rounds": len(trace.steps) - 1,
        "initial_cost": trace.steps[0].cost,
        "descent_cost": trace.final.cost,
        "best_cost": result.cost if result else trace.final.cost,
        "theorem_discrepancies": trace.discrepancies,
        "absolute": result.stats if result else None,
    }
    return SolveOutcome(
        matrix=m,
        initial=d0,
        trace=trace,
        absolute=result,
        chain=chain,
        flags=flags,
        stats=stats,
    )
