"""Symmetric integer cost matrices: loading, validation, generation.

Vertices are 0-based everywhere in memory; every file format and report
uses 1-based labels. Costs are exact signed integers. The diagonal is
never read by any algorithm; loaders accept arbitrary diagonal values and
store zeros in their place.
"""

from __future__ import annotations

import json
import math
import warnings
from typing import IO, Iterable

import numpy as np

from .errors import (
    AsymmetryError,
    CostOverflowError,
    CostRangeError,
    FixedPointError,
    ParseError,
    SizeError,
)

# An n-term sum of costs must stay within signed 63 bits.
_SUM_LIMIT = 2**62


class CostMatrix:
    """Dense symmetric integer cost matrix with a forbidden diagonal.

    Immutable after construction and safe to share across threads.
    """

    __slots__ = ("n", "_costs")

    def __init__(self, costs: np.ndarray | Iterable[Iterable[int]]):
        arr = np.asarray(costs)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise SizeError(f"cost matrix must be square, got shape {arr.shape}")
        n = int(arr.shape[0])
        if n < 3:
            raise SizeError(f"need at least 3 vertices, got n={n}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ParseError("costs must be exact integers")
            arr = arr.astype(np.int64)
        arr = arr.astype(np.int64, copy=True)
        np.fill_diagonal(arr, 0)  # diagonal is unused by contract
        if not np.array_equal(arr, arr.T):
            i, j = np.argwhere(arr != arr.T)[0]
            raise AsymmetryError(
                f"cost({i + 1},{j + 1})={arr[i, j]} != cost({j + 1},{i + 1})={arr[j, i]}"
            )
        peak = int(np.abs(arr).max(initial=0))
        if peak and n > _SUM_LIMIT // peak:
            raise CostOverflowError(
                f"|cost| up to {peak} with n={n} could overflow a 63-bit sum"
            )
        arr.setflags(write=False)
        self.n = n
        self._costs = arr

    @property
    def costs(self) -> np.ndarray:
        """Read-only (n, n) int64 view; diagonal entries are meaningless."""
        return self._costs

    def cost(self, i: int, j: int) -> int:
        if i == j:
            raise FixedPointError(f"diagonal cost ({i + 1},{i + 1}) is not defined")
        return int(self._costs[i, j])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CostMatrix) and np.array_equal(
            self._costs, other._costs
        )

    def __hash__(self) -> int:
        return hash((self.n, self._costs.tobytes()))

    def __repr__(self) -> str:
        return f"CostMatrix(n={self.n})"

    def to_json_dict(self) -> dict:
        return {"n": self.n, "costs": self._costs.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))


def from_array(arr) -> CostMatrix:
    """Validate an array-like as a CostMatrix (exact ints, symmetric, n >= 3)."""
    return CostMatrix(arr)


def _json_instance(payload) -> CostMatrix:
    if not isinstance(payload, dict):
        raise ParseError("instance JSON must be an object")
    try:
        n = payload["n"]
        costs = payload["costs"]
    except KeyError as exc:
        raise ParseError(f"instance JSON missing key {exc}") from None
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError("'n' must be an integer")
    rows = list(costs)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise SizeError(f"'costs' must be {n}x{n}")
    for row in rows:
        for v in row:
            if not isinstance(v, int) or isinstance(v, bool):
                raise ParseError(f"cost entry {v!r} is not an integer")
    return CostMatrix(rows)


def loads_json(text: str) -> CostMatrix:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return _json_instance(payload)


_TSPLIB_KNOWN = {
    "NAME",
    "TYPE",
    "COMMENT",
    "DIMENSION",
    "EDGE_WEIGHT_TYPE",
    "EDGE_WEIGHT_FORMAT",
}


def _tsplib_numbers(lines: list[str], start: int) -> tuple[list[float], int]:
    """Collect whitespace-separated numbers until a non-numeric line."""
    out: list[float] = []
    idx = start
    while idx < len(lines):
        toks = lines[idx].split()
        if not toks:
            idx += 1
            continue
        try:
            vals = [float(t) for t in toks]
        except ValueError:
            break
        out.extend(vals)
        idx += 1
    return out, idx


def loads_tsplib(text: str) -> CostMatrix:
    """Parse the supported TSPLIB subset.

    TYPE must be TSP. EDGE_WEIGHT_TYPE EXPLICIT (FULL_MATRIX or UPPER_ROW)
    or EUC_2D; EUC_2D distances are rounded to the nearest integer.
    Unsupported header fields are ignored with a warning.
    """
    header: dict[str, str] = {}
    lines = text.splitlines()
    coords: list[tuple[float, float]] = []
    weights: list[float] | None = None
    idx = 0
    while idx < len(lines):
        line = lines[idx].strip()
        idx += 1
        if not line or line == "EOF":
            continue
        if line == "NODE_COORD_SECTION":
            nums, idx = _tsplib_numbers(lines, idx)
            if len(nums) % 3:
                raise ParseError("NODE_COORD_SECTION entries must be 'index x y'")
            coords = [(nums[k + 1], nums[k + 2]) for k in range(0, len(nums), 3)]
            continue
        if line == "EDGE_WEIGHT_SECTION":
            weights, idx = _tsplib_numbers(lines, idx)
            continue
        if ":" in line:
            key, _, val = line.partition(":")
            key = key.strip().upper()
            header[key] = val.strip()
            if key not in _TSPLIB_KNOWN:
                warnings.warn(f"ignoring TSPLIB field {key}", stacklevel=2)
            continue
        warnings.warn(f"ignoring TSPLIB line {line!r}", stacklevel=2)

    if header.get("TYPE", "TSP").upper() != "TSP":
        raise ParseError(f"unsupported TSPLIB TYPE {header.get('TYPE')!r}")
    try:
        n = int(header["DIMENSION"])
    except KeyError:
        raise ParseError("TSPLIB header missing DIMENSION") from None
    except ValueError:
        raise ParseError("DIMENSION must be an integer") from None
    if n < 3:
        raise SizeError(f"need at least 3 vertices, got n={n}")

    ew_type = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if ew_type == "EUC_2D":
        if len(coords) != n:
            raise ParseError(f"expected {n} coordinates, got {len(coords)}")
        arr = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                dx = coords[i][0] - coords[j][0]
                dy = coords[i][1] - coords[j][1]
                d = int(math.sqrt(dx * dx + dy * dy) + 0.5)
                arr[i, j] = arr[j, i] = d
        return CostMatrix(arr)

    if ew_type == "EXPLICIT":
        fmt = header.get("EDGE_WEIGHT_FORMAT", "").upper()
        if weights is None:
            raise ParseError("missing EDGE_WEIGHT_SECTION")
        vals = [int(w) for w in weights]
        if any(v != w for v, w in zip(vals, weights)):
            raise ParseError("explicit edge weights must be integers")
        if fmt == "FULL_MATRIX":
            if len(vals) != n * n:
                raise SizeError(f"FULL_MATRIX needs {n * n} entries, got {len(vals)}")
            arr = np.asarray(vals, dtype=np.int64).reshape(n, n)
            np.fill_diagonal(arr, 0)
            if not np.array_equal(arr, arr.T):
                i, j = np.argwhere(arr != arr.T)[0]
                raise AsymmetryError(
                    f"entry ({i + 1},{j + 1})={arr[i, j]} != ({j + 1},{i + 1})={arr[j, i]}"
                )
            return CostMatrix(arr)
        if fmt == "UPPER_ROW":
            need = n * (n - 1) // 2
            if len(vals) != need:
                raise SizeError(f"UPPER_ROW needs {need} entries, got {len(vals)}")
            arr = np.zeros((n, n), dtype=np.int64)
            k = 0
            for i in range(n):
                for j in range(i + 1, n):
                    arr[i, j] = arr[j, i] = vals[k]
                    k += 1
            return CostMatrix(arr)
        raise ParseError(f"unsupported EDGE_WEIGHT_FORMAT {fmt!r}")

    raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {ew_type!r}")


def load_instance(source: bytes | str | IO, fmt: str) -> CostMatrix:
    """Load an instance from a byte/text stream in the given format.

    fmt is "json" or "tsplib".
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if fmt == "json":
        return loads_json(source)
    if fmt == "tsplib":
        return loads_tsplib(source)
    raise ParseError(f"unknown instance format {fmt!r}")


def random_instance(n: int, lo: int, hi: int, seed: int) -> CostMatrix:
    """Symmetric matrix with off-diagonal costs uniform on [lo, hi].

    Driven by numpy's PCG64 generator, so equal seeds give bit-identical
    matrices on every platform.
    """
    if n < 3:
        raise SizeError(f"need at least 3 vertices, got n={n}")
    if lo > hi:
        raise CostRangeError(f"empty cost range [{lo}, {hi}]")
    rng = np.random.Generator(np.random.PCG64(seed))
    arr = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, k=1)
    arr[iu] = rng.integers(lo, hi + 1, size=len(iu[0]), dtype=np.int64)
    arr += arr.T
    return CostMatrix(arr)
