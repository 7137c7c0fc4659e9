"""Brute-force ground truth at desk scale.

Exact minimum edge derangement by pruned enumeration, exact optimal tour
by dynamic programming over vertex subsets, and exhaustive negative-cycle
enumeration. Size caps are hard errors: an oracle that silently truncates
is worse than none.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .errors import CapExceededError
from .instance import CostMatrix
from .permutation import Derangement, Permutation
from .reduced import ReducedMatrix

MAX_DERANGEMENT_N = 9
MAX_TOUR_N = 12
MAX_CYCLE_NODES = 5_000_000


@dataclass(frozen=True)
class OracleResult:
    optimum_cost: int
    witness: Permutation
    search_space_size: int
    elapsed_ms: float

    def to_json_dict(self) -> dict:
        return {
            "optimum_cost": self.optimum_cost,
            "witness": self.witness.one_based(),
            "witness_cycles": self.witness.cycle_notation(),
            "search_space_size": self.search_space_size,
            "elapsed_ms": self.elapsed_ms,
        }


def brute_min_edge_derangement(m: CostMatrix) -> OracleResult:
    """Exact minimum over all permutations with every cycle length >= 3.

    Enumerates images in lexicographic order, pruning fixed points and
    2-cycles as they appear; the witness is the first optimum in that
    order. search_space_size counts complete candidates examined.
    """
    n = m.n
    if n > MAX_DERANGEMENT_N:
        raise CapExceededError(f"edge-derangement oracle capped at n={MAX_DERANGEMENT_N}")
    t0 = time.perf_counter()
    costs = m.costs
    image = [-1] * n
    used = [False] * n
    best_cost: int | None = None
    best_image: list[int] | None = None
    candidates = 0

    def extend(i: int, partial: int) -> None:
        nonlocal best_cost, best_image, candidates
        if i == n:
            candidates += 1
            if best_cost is None or partial < best_cost:
                best_cost = partial
                best_image = image.copy()
            return
        for v in range(n):
            if used[v] or v == i:
                continue
            if v < i and image[v] == i:
                continue  # i -> v while v -> i is already set: a 2-cycle
            image[i] = v
            used[v] = True
            extend(i + 1, partial + int(costs[i, v]))
            used[v] = False
            image[i] = -1

    extend(0, 0)
    assert best_image is not None
    witness = Derangement(best_image)
    return OracleResult(
        optimum_cost=int(best_cost),
        witness=witness,
        search_space_size=candidates,
        elapsed_ms=(time.perf_counter() - t0) * 1000.0,
    )


def brute_optimal_tour(m: CostMatrix) -> OracleResult:
    """Exact minimum Hamiltonian cycle via subset dynamic programming.

    search_space_size counts the DP states evaluated.
    """
    n = m.n
    if n > MAX_TOUR_N:
        raise CapExceededError(f"tour oracle capped at n={MAX_TOUR_N}")
    t0 = time.perf_counter()
    costs = m.costs
    full = (1 << n) - 1
    # best[mask][last]: cheapest path 0 -> last visiting exactly mask
    best: dict[tuple[int, int], int] = {(1 | (1 << k), k): int(costs[0, k]) for k in range(1, n)}
    parent: dict[tuple[int, int], int] = {}
    states = len(best)
    for mask in range(1 << n):
        if not mask & 1:
            continue
        for last in range(1, n):
            key = (mask, last)
            if key not in best:
                continue
            base = best[key]
            for nxt in range(1, n):
                if mask & (1 << nxt):
                    continue
                nmask = mask | (1 << nxt)
                cand = base + int(costs[last, nxt])
                nkey = (nmask, nxt)
                states += 1
                if nkey not in best or cand < best[nkey]:
                    best[nkey] = cand
                    parent[nkey] = last
    best_cost: int | None = None
    best_last = -1
    for last in range(1, n):
        key = (full, last)
        if key not in best:
            continue
        total = best[key] + int(costs[last, 0])
        if best_cost is None or total < best_cost:
            best_cost = total
            best_last = last
    order = [0]
    mask, last = full, best_last
    chain = []
    while last != -1 and (mask, last) in best:
        chain.append(last)
        prev = parent.get((mask, last), -1)
        mask ^= 1 << last
        last = prev
    order.extend(reversed(chain))
    witness = Permutation.from_cycles(n, [order])
    return OracleResult(
        optimum_cost=int(best_cost),
        witness=witness,
        search_space_size=states,
        elapsed_ms=(time.perf_counter() - t0) * 1000.0,
    )


def enumerate_negative_cycles(
    r: ReducedMatrix, max_len: int, max_nodes: int = MAX_CYCLE_NODES
) -> list[tuple[tuple[int, ...], int]]:
    """Every simple cycle of length <= max_len over permitted arcs with
    negative value, canonically rotated, sorted by (value, cycle).

    The work cap is a hard error, not a truncation: exceeding ``max_nodes``
    visited DFS nodes raises CapExceededError. Dense matrices beyond
    roughly n = 12 (or max_len 6) blow the default budget; sparse arc
    structures of any size enumerate fine.
    """
    n = r.n
    permitted = r.permitted
    values = r.values
    found: list[tuple[tuple[int, ...], int]] = []
    nodes = 0

    def dfs(root: int, v: int, total: int, path: list[int], on_path: set[int]):
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise CapExceededError(
                f"cycle enumeration exceeded its {max_nodes}-node budget"
            )
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
        dfs(root, root, 0, [root], {root})
    found.sort(key=lambda cv: (cv[1], cv[0]))
    return found
