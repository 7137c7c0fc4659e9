"""Estimator-style front end so the solver composes with sklearn tooling.

``DerangementDescent.fit(X)`` accepts a square symmetric integer cost
matrix (the ``metric='precomputed'`` convention) and exposes the solved
derangement through fitted attributes. get_params/set_params/clone all
work, so the solver drops into pipelines and parameter sweeps.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .engine import SearchConfig
from .instance import from_array
from .optimizer import AbsoluteSearchLimits, DescentConfig, solve


class DerangementDescent(BaseEstimator):
    """Minimum-cost edge-derangement solver with an estimator interface.

    Parameters mirror the library/CLI knobs: the starting derangement
    ("canonical" n-cycle or "greedy" nearest-neighbor tour), whether to run
    the exhaustive refinement after the descent, and the refinement's work
    limits.

    Attributes (after fit)
    ----------------------
    derangement_ : ndarray of shape (n,)
        0-based successor of every vertex; all cycles have length >= 3.
    cost_ : int
        Total cost of ``derangement_`` (a lower bound on any tour that the
        refinement can certify against).
    initial_cost_ : int
        Cost of the starting derangement.
    trace_ : DescentTrace
        Full descent history.
    absolute_result_ : AbsoluteResult or None
        Refinement outcome when ``absolute=True``.
    bound_chain_ : BoundChainReport
        Ordering report of the computed costs.
    n_iter_ : int
        Number of accepted descent steps.
    """

    def __init__(
        self,
        initial: str = "canonical",
        absolute: bool = False,
        max_rounds: int = 1000,
        max_passes: int | None = None,
        archive_paths: bool = False,
        max_cycle_len: int = 8,
        max_cycles_per_set: int = 3,
        max_candidate_sets: int = 5000,
        time_budget_ms: float = 2000.0,
    ):
        self.initial = initial
        self.absolute = absolute
        self.max_rounds = max_rounds
        self.max_passes = max_passes
        self.archive_paths = archive_paths
        self.max_cycle_len = max_cycle_len
        self.max_cycles_per_set = max_cycles_per_set
        self.max_candidate_sets = max_candidate_sets
        self.time_budget_ms = time_budget_ms

    def _validate(self, X):
        arr = np.asarray(X)
        return from_array(arr)

    def fit(self, X, y=None):
        """Solve the instance in X (n x n symmetric integer costs)."""
        m = self._validate(X)
        config = DescentConfig(
            max_rounds=self.max_rounds,
            search=SearchConfig(max_passes=self.max_passes, archive=self.archive_paths),
        )
        limits = AbsoluteSearchLimits(
            max_cycle_len=self.max_cycle_len,
            max_cycles_per_set=self.max_cycles_per_set,
            max_candidate_sets=self.max_candidate_sets,
            time_budget_ms=self.time_budget_ms,
        )
        outcome = solve(
            m,
            initial=self.initial,
            absolute=self.absolute,
            config=config,
            limits=limits,
        )
        best = (
            outcome.absolute.derangement
            if outcome.absolute is not None
            else outcome.descent_minimum
        )
        self.n_features_in_ = m.n
        self.derangement_ = np.asarray(best.image, dtype=np.intp)
        self.cost_ = outcome.best_cost
        self.initial_cost_ = outcome.trace.steps[0].cost
        self.trace_ = outcome.trace
        self.absolute_result_ = outcome.absolute
        self.bound_chain_ = outcome.chain
        self.flags_ = outcome.flags
        self.n_iter_ = len(outcome.trace.steps) - 1
        return self

    def fit_predict(self, X, y=None):
        """Fit and return the 0-based successor array of the solution."""
        return self.fit(X, y).derangement_
