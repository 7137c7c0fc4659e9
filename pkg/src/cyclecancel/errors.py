"""Exception hierarchy for the solver.

Input-validation failures also subclass ValueError so callers that follow
numpy/sklearn conventions can catch them generically; state errors stay
plain SolverError subclasses.
"""


class SolverError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SolverError, ValueError):
    """Malformed instance stream (JSON or TSPLIB subset)."""


class AsymmetryError(ParseError):
    """Explicit matrix with cost(i,j) != cost(j,i)."""


class SizeError(SolverError, ValueError):
    """Instance too small (n < 3) or dimension mismatch in loaded data."""


class CostRangeError(SolverError, ValueError):
    """Generator range invalid (lo > hi)."""


class CostOverflowError(SolverError, ValueError):
    """Costs so large that an n-term sum could leave the 63-bit signed range."""


class SizeMismatchError(SolverError, ValueError):
    """Objects defined on different vertex counts combined."""


class FixedPointError(SolverError, ValueError):
    """A diagonal cost would be read (permutation with a fixed point)."""


class ForbiddenArcError(SolverError):
    """An arc excluded by the reduced-matrix mask was dereferenced."""


class BlankEntryError(SolverError, LookupError):
    """Back-tracking requested for a path entry that does not exist."""


class PredecessorLoopError(SolverError):
    """Predecessor links do not terminate; search state is corrupted."""


class SearchStateError(SolverError):
    """A path required by an admissibility check cannot be reconstructed."""


class NonNegativeCycleError(SolverError, ValueError):
    """Attempt to record a cycle whose value is not negative."""


class DisjointnessError(SolverError, ValueError):
    """Cycles of a candidate set share a vertex."""


class InvalidSetError(SolverError):
    """A cycle set failed validation but was applied anyway."""


class NonTourError(SolverError, ValueError):
    """A permutation supplied as a tour is not a single n-cycle."""


class CapExceededError(SolverError):
    """A hard size cap of a brute-force oracle was exceeded."""
