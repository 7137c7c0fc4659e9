"""Command-line front end: gen / solve / oracle / check / bench.

Exit codes: 0 success, 1 invariant violation (check), 2 usage or input
error, 3 oracle/cap exceeded. Result files are deterministic for fixed
flags and seed; wall-clock facts live in a separate "meta" field.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .assembly import CycleSet, apply_cycle_set
from .engine import SearchConfig
from .errors import CapExceededError, SolverError
from .instance import CostMatrix, load_instance, random_instance
from .optimizer import (
    AbsoluteSearchLimits,
    DescentConfig,
    solve,
)
from .oracle import (
    MAX_DERANGEMENT_N,
    MAX_TOUR_N,
    brute_min_edge_derangement,
    brute_optimal_tour,
)
from .permutation import (
    Derangement,
    Permutation,
    edge_derangement_violation,
    permutation_cost,
)
from .reduced import build_reduced

SCHEMA_VERSION = 1


def _dump_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _instance_id(m: CostMatrix) -> str:
    return hashlib.sha256(m.to_json().encode()).hexdigest()


def _load_source(ns, parser: argparse.ArgumentParser) -> CostMatrix:
    sources = [s for s in (ns.json, ns.tsplib) if s] + (
        ["random"] if ns.n is not None else []
    )
    if len(sources) != 1:
        parser.error("exactly one input source required: --json, --tsplib, or -n")
    if ns.json:
        return load_instance(Path(ns.json).read_bytes(), "json")
    if ns.tsplib:
        return load_instance(Path(ns.tsplib).read_bytes(), "tsplib")
    return random_instance(ns.n, ns.lo, ns.hi, ns.seed)


def _add_source_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--json", metavar="PATH", help="instance JSON file")
    sub.add_argument("--tsplib", metavar="PATH", help="TSPLIB file (subset)")
    sub.add_argument("-n", type=int, default=None, help="generate a random instance")
    sub.add_argument("--seed", type=int, default=0, help="random seed")
    sub.add_argument("--lo", type=int, default=1, help="minimum random cost")
    sub.add_argument("--hi", type=int, default=100, help="maximum random cost")


def cmd_gen(ns, parser) -> int:
    if ns.n is None:
        parser.error("gen requires -n")
    m = random_instance(ns.n, ns.lo, ns.hi, ns.seed)
    _dump_json(m.to_json_dict(), ns.output)
    return 0


def _initial_from_args(ns, m: CostMatrix, parser):
    if ns.initial == "canonical":
        return "canonical"
    if ns.initial == "greedy":
        return "greedy"
    if ns.initial_file is None:
        parser.error("--initial file requires --initial-file PATH")
    payload = json.loads(Path(ns.initial_file).read_text())
    image = payload["image"] if isinstance(payload, dict) else payload
    return Derangement(Permutation.from_one_based(image).image)


def cmd_solve(ns, parser) -> int:
    t0 = time.perf_counter()
    m = _load_source(ns, parser)
    config = DescentConfig(
        max_rounds=ns.max_rounds,
        search=SearchConfig(
            max_passes=ns.max_passes,
            archive=ns.archive_paths,
            record_events=ns.trace is not None,
        ),
        collect_engine_traces=ns.trace is not None,
    )
    limits = AbsoluteSearchLimits(
        max_cycle_len=ns.max_cycle_len,
        max_cycles_per_set=ns.max_cycles_per_set,
        max_candidate_sets=ns.max_sets,
        time_budget_ms=ns.time_budget_ms,
    )
    outcome = solve(
        m,
        initial=_initial_from_args(ns, m, parser),
        absolute=ns.absolute,
        config=config,
        limits=limits,
    )
    body = outcome.to_json_dict(instance_id=_instance_id(m))
    body["schema_version"] = SCHEMA_VERSION
    body["instance"] = m.to_json_dict()
    body["meta"] = {
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "runtime_ms": (time.perf_counter() - t0) * 1000.0,
        "tool_version": __version__,
    }
    _dump_json(body, ns.output)
    if ns.trace:
        _dump_json(
            {
                "schema_version": SCHEMA_VERSION,
                "instance_id": body["instance_id"],
                "rounds": outcome.trace.engine_traces,
            },
            ns.trace,
        )
    return 0


def cmd_oracle(ns, parser) -> int:
    m = _load_source(ns, parser)
    out: dict = {"schema_version": SCHEMA_VERSION, "n": m.n}
    if ns.which in ("both", "derangement"):
        out["min_edge_derangement"] = brute_min_edge_derangement(m).to_json_dict()
    if ns.which in ("both", "tour"):
        out["optimal_tour"] = brute_optimal_tour(m).to_json_dict()
    _dump_json(out, ns.output)
    return 0


def _check_result(body: dict) -> list[str]:
    """Re-verify every assertable invariant of a solve result."""
    problems: list[str] = []
    m = CostMatrix(body["instance"]["costs"])
    if body.get("instance_id") != _instance_id(m):
        problems.append("instance_id does not match the embedded instance")

    def as_derangement(payload, label) -> Derangement | None:
        try:
            d = Derangement(Permutation.from_one_based(payload["derangement"]).image)
        except (SolverError, ValueError) as exc:
            problems.append(f"{label} is not an edge derangement: {exc}")
            return None
        cost = permutation_cost(d, m)
        if cost != payload["cost"]:
            problems.append(
                f"{label} cost mismatch: stated {payload['cost']}, actual {cost}"
            )
        return d

    steps = body["trace"]["steps"]
    prev: Derangement | None = None
    prev_cost = None
    for idx, step in enumerate(steps):
        d = as_derangement(step, f"trace step {idx}")
        if d is None:
            return problems
        if idx:
            if step["cost"] >= prev_cost:
                problems.append(f"trace step {idx} does not strictly decrease")
            if step["applied"] is None:
                problems.append(f"trace step {idx} lacks its applied cycle set")
            else:
                cycles = [
                    [v - 1 for v in c] for c in step["applied"]["cycles"]
                ]
                s = CycleSet(m.n, cycles)
                r = build_reduced(m, prev)
                try:
                    value = s.total_value(r)
                except SolverError as exc:
                    problems.append(f"trace step {idx} uses a forbidden arc: {exc}")
                    return problems
                if value != step["value"]:
                    problems.append(
                        f"trace step {idx} value mismatch: stated "
                        f"{step['value']}, actual {value}"
                    )
                if step["cost"] - prev_cost != value:
                    problems.append(
                        f"trace step {idx} cost delta {step['cost'] - prev_cost} "
                        f"!= set value {value}"
                    )
                replayed = apply_cycle_set(s, prev)
                if replayed.image != d.image:
                    problems.append(f"trace step {idx} does not replay")
        prev = d
        prev_cost = step["cost"]

    final = as_derangement(body["d_fwabs"], "d_fwabs")
    if final is not None and prev is not None and final.image != prev.image:
        problems.append("d_fwabs differs from the last trace step")

    best_cost = body["d_fwabs"]["cost"]
    if body.get("d_absolute"):
        refined = as_derangement(body["d_absolute"], "d_absolute")
        if refined is not None:
            if body["d_absolute"]["cost"] > body["d_fwabs"]["cost"]:
                problems.append("d_absolute costs more than d_fwabs")
            best_cost = body["d_absolute"]["cost"]

    for link in body["bound_chain"]["links"]:
        if (link["lhs"]["cost"] <= link["rhs"]["cost"]) != link["ok"]:
            problems.append(f"bound link {link['name']} mislabeled")
        if not link["ok"]:
            problems.append(f"bound link {link['name']} violated: {link['line']}")

    if m.n <= MAX_DERANGEMENT_N:
        floor = brute_min_edge_derangement(m)
        if best_cost < floor.optimum_cost:
            problems.append(
                f"result cost {best_cost} beats the exact minimum "
                f"{floor.optimum_cost}: bookkeeping is wrong"
            )
        if m.n <= MAX_TOUR_N:
            tour = brute_optimal_tour(m)
            if floor.optimum_cost > tour.optimum_cost:
                problems.append(
                    "oracle ordering broken: min derangement above optimal tour"
                )
    return problems


def cmd_check(ns, parser) -> int:
    body = json.loads(Path(ns.result).read_text())
    if body.get("schema_version") != SCHEMA_VERSION:
        print(f"unsupported schema_version {body.get('schema_version')}")
        return 1
    problems = _check_result(body)
    for p in problems:
        print(f"VIOLATION: {p}")
    if problems:
        return 1
    print("ok: all assertable invariants hold")
    return 0


def cmd_bench(ns, parser) -> int:
    sizes = [int(s) for s in ns.sizes.split(",") if s]
    rows = []
    config = DescentConfig(
        max_rounds=ns.max_rounds,
        search=SearchConfig(max_passes=ns.max_passes, record_events=False),
    )
    for n in sizes:
        for i in range(ns.per_size):
            seed = ns.seed + i
            m = random_instance(n, ns.lo, ns.hi, seed)
            t0 = time.perf_counter()
            outcome = solve(m, absolute=False, config=config, tour=None)
            ms = (time.perf_counter() - t0) * 1000.0
            rows.append(
                {
                    "n": n,
                    "seed": seed,
                    "initial_cost": outcome.trace.steps[0].cost,
                    "final_cost": outcome.descent_cost,
                    "rounds": len(outcome.trace.steps) - 1,
                    "total_ms": round(ms, 3),
                }
            )
    fieldnames = ["n", "seed", "initial_cost", "final_cost", "rounds", "total_ms"]
    out = sys.stdout if ns.csv in (None, "-") else open(ns.csv, "w", newline="")
    try:
        writer = csv.DictWriter(out, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    by_n: dict[int, list[float]] = {}
    for row in rows:
        by_n.setdefault(row["n"], []).append(row["total_ms"])
    for n in sorted(by_n):
        times = by_n[n]
        print(f"n={n}: mean {sum(times) / len(times):.1f} ms over {len(times)} runs",
              file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclecancel",
        description="Edge-derangement descent over symmetric cost matrices",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="write a random instance as JSON")
    _add_source_args(gen)
    gen.add_argument("-o", "--output", metavar="PATH", default=None)

    slv = subs.add_parser("solve", help="run the descent pipeline")
    _add_source_args(slv)
    slv.add_argument("--initial", choices=("canonical", "greedy", "file"),
                     default="canonical")
    slv.add_argument("--initial-file", metavar="PATH", default=None,
                     help="JSON permutation (1-based image) for --initial file")
    slv.add_argument("--absolute", action="store_true",
                     help="run the exhaustive refinement after the descent")
    slv.add_argument("--max-rounds", type=int, default=1000)
    slv.add_argument("--max-passes", type=int, default=None,
                     help="cap search rounds per descent step")
    slv.add_argument("--archive-paths", action="store_true",
                     help="keep replaced path entries during the search")
    slv.add_argument("--max-cycle-len", type=int, default=8)
    slv.add_argument("--max-sets", type=int, default=5000)
    slv.add_argument("--time-budget-ms", type=float, default=2000.0)
    slv.add_argument("-o", "--output", metavar="PATH", default=None)
    slv.add_argument("--trace", metavar="PATH", default=None,
                     help="write per-round engine traces to PATH")

    orc = subs.add_parser("oracle", help="exact ground truth (small n)")
    _add_source_args(orc)
    orc.add_argument("--which", choices=("both", "derangement", "tour"),
                     default="both")
    orc.add_argument("-o", "--output", metavar="PATH", default=None)

    chk = subs.add_parser("check", help="re-verify a solve result file")
    chk.add_argument("--result", metavar="PATH", required=True)

    ben = subs.add_parser("bench", help="seed-sweep scaling benchmark")
    ben.add_argument("--sizes", default="50,100,200")
    ben.add_argument("--per-size", type=int, default=1)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--lo", type=int, default=1)
    ben.add_argument("--hi", type=int, default=100)
    ben.add_argument("--max-rounds", type=int, default=1000)
    ben.add_argument("--max-passes", type=int, default=None)
    ben.add_argument("--csv", metavar="PATH", default=None)
    return parser


_COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "check": cmd_check,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return _COMMANDS[ns.command](ns, parser)
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())
