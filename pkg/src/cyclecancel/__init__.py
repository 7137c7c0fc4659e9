"""Minimum-cost edge derangements in symmetric integer cost matrices.

The pipeline: build the reduced arc-cost matrix of the current
derangement, search it for negative cycles with a column-sweep
Floyd-Warshall variant, validate disjoint cycle sets, apply the best one,
repeat. Brute-force oracles provide exact ground truth at desk scale, and
the bound-chain report ties the solved cost to tour upper bounds.
"""

from .assembly import CycleSet, SetValidation, apply_cycle_set, sym_arcs, validate_cycle_set
from .engine import (
    Admissibility,
    CyclePool,
    CycleRecord,
    NegativeCycleValues,
    PathMatrix,
    SearchConfig,
    SearchResult,
    backtrack,
    canonical_cycle,
    check_extension,
    record_negative_cycle,
    run_search,
)
from .errors import (
    AsymmetryError,
    BlankEntryError,
    CapExceededError,
    CostOverflowError,
    CostRangeError,
    DisjointnessError,
    FixedPointError,
    ForbiddenArcError,
    InvalidSetError,
    NonNegativeCycleError,
    NonTourError,
    ParseError,
    PredecessorLoopError,
    SearchStateError,
    SizeError,
    SizeMismatchError,
    SolverError,
)
from .estimator import DerangementDescent
from .instance import CostMatrix, from_array, load_instance, loads_json, loads_tsplib, random_instance
from .optimizer import (
    AbsoluteResult,
    AbsoluteSearchLimits,
    BoundChainReport,
    DescentConfig,
    DescentTrace,
    bound_chain,
    descend,
    greedy_initial,
    nearest_neighbor_tour,
    search_absolute,
    solve,
)
from .oracle import (
    OracleResult,
    brute_min_edge_derangement,
    brute_optimal_tour,
    enumerate_negative_cycles,
)
from .permutation import (
    Derangement,
    EdgeViolation,
    Permutation,
    RowForm,
    compose_apply,
    cycle_decomposition,
    edge_derangement_violation,
    is_edge_derangement,
    permutation_cost,
    row_form,
)
from .reduced import (
    ReducedMatrix,
    arcs_of_permutation,
    build_reduced,
    cycle_arcs,
    cycle_value,
    path_arcs,
    reduced_from_arcs,
)

__version__ = "0.1.0"

__all__ = [
    "Admissibility",
    "AbsoluteResult",
    "AbsoluteSearchLimits",
    "AsymmetryError",
    "BlankEntryError",
    "BoundChainReport",
    "CapExceededError",
    "CostMatrix",
    "CostOverflowError",
    "CostRangeError",
    "CyclePool",
    "CycleRecord",
    "CycleSet",
    "Derangement",
    "DerangementDescent",
    "DescentConfig",
    "DescentTrace",
    "DisjointnessError",
    "EdgeViolation",
    "FixedPointError",
    "ForbiddenArcError",
    "InvalidSetError",
    "NegativeCycleValues",
    "NonNegativeCycleError",
    "NonTourError",
    "OracleResult",
    "ParseError",
    "PathMatrix",
    "Permutation",
    "PredecessorLoopError",
    "ReducedMatrix",
    "RowForm",
    "SearchConfig",
    "SearchResult",
    "SearchStateError",
    "SetValidation",
    "SizeError",
    "SizeMismatchError",
    "SolverError",
    "apply_cycle_set",
    "arcs_of_permutation",
    "backtrack",
    "bound_chain",
    "brute_min_edge_derangement",
    "brute_optimal_tour",
    "build_reduced",
    "canonical_cycle",
    "check_extension",
    "compose_apply",
    "cycle_arcs",
    "cycle_decomposition",
    "cycle_value",
    "descend",
    "edge_derangement_violation",
    "enumerate_negative_cycles",
    "from_array",
    "greedy_initial",
    "is_edge_derangement",
    "load_instance",
    "loads_json",
    "loads_tsplib",
    "nearest_neighbor_tour",
    "path_arcs",
    "permutation_cost",
    "random_instance",
    "record_negative_cycle",
    "reduced_from_arcs",
    "row_form",
    "run_search",
    "search_absolute",
    "solve",
    "sym_arcs",
    "validate_cycle_set",
]
