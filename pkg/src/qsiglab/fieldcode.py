"""Prime-field machinery behind the stand-alone signature scheme.

A key is a stack of 2k linear functionals on Z_d^k (d prime), built as a
Vandermonde matrix over distinct evaluation points so that every k-row
submatrix is invertible (the MDS property). From it derive:

  * the decode bijection: k received coordinates determine the underlying
    message vector x, hence also x_0 and every remaining coordinate;
  * the parity constraints: the k-1 independent linear relations satisfied
    by every valid coordinate tuple (y_1, ..., y_{2k-1}).

All arithmetic is mod d with d prime; inverses via pow(a, -1, d).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

# ---------------------------------------------------------------------------
# modular linear algebra (small systems, plain elimination)


def is_prime(d: int) -> bool:
    if d < 2:
        return False
    f = 2
    while f * f <= d:
        if d % f == 0:
            return False
        f += 1
    return True


def mod_rref(mat: np.ndarray, d: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod prime d; returns (rref, pivot columns)."""
    a = np.array(mat, dtype=np.int64) % d
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        pivot = next((i for i in range(r, rows) if a[i, c] % d != 0), None)
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, d) % d
        for i in range(rows):
            if i != r and a[i, c] % d != 0:
                a[i] = (a[i] - a[i, c] * a[r]) % d
        pivots.append(c)
        r += 1
    return a % d, pivots


def mod_rank(mat: np.ndarray, d: int) -> int:
    return len(mod_rref(mat, d)[1])


def mod_inv_matrix(mat: np.ndarray, d: int) -> np.ndarray:
    """Inverse of a square matrix mod prime d; raises on singular input."""
    a = np.array(mat, dtype=np.int64) % d
    k = a.shape[0]
    if a.shape != (k, k):
        raise ValueError("matrix must be square")
    aug = np.concatenate([a, np.eye(k, dtype=np.int64)], axis=1)
    rref, pivots = mod_rref(aug, d)
    if pivots[:k] != list(range(k)):
        raise ValueError("matrix is singular mod d")
    return rref[:, k:]


def mod_nullspace(mat: np.ndarray, d: int) -> np.ndarray:
    """Basis (rows) of the nullspace {v : mat @ v = 0 mod d}."""
    a = np.array(mat, dtype=np.int64) % d
    _, cols = a.shape
    rref, pivots = mod_rref(a, d)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = np.zeros(cols, dtype=np.int64)
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-rref[r, fc]) % d
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(free), cols)


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class FunctionalMatrix:
    """2k linear functionals on Z_d^k: row i computes coordinate y_i(x).

    Row 0 is the unit vector e_0, so y_0 = x_0 always. ``betas`` records the
    Vandermonde evaluation points when the matrix was generated from them
    (None for hand-built matrices in tests).
    """

    d: int
    k: int
    rows: np.ndarray
    betas: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not is_prime(self.d):
            raise ValueError(f"modulus {self.d} is not prime")
        if self.d < 2 * self.k:
            raise ValueError(f"need d >= 2k, got d={self.d}, k={self.k}")
        rows = np.asarray(self.rows, dtype=np.int64) % self.d
        if rows.shape != (2 * self.k, self.k):
            raise ValueError(f"expected {2 * self.k}x{self.k} rows, got {rows.shape}")
        e0 = np.zeros(self.k, dtype=np.int64)
        e0[0] = 1
        if not np.array_equal(rows[0], e0):
            raise ValueError("row 0 must be the unit vector e_0")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """All 2k coordinates y_i(x) for message vector(s) x."""
        return np.asarray(x, dtype=np.int64) % self.d @ self.rows.T % self.d


@dataclass(frozen=True)
class TableBijection:
    """Bijection on Z_d^m backed by precomputed flat-index lookup tables."""

    d: int
    m: int
    forward_table: np.ndarray
    inverse_table: np.ndarray

    def _digits(self, idx: int) -> tuple[int, ...]:
        out = [0] * self.m
        for q in range(self.m - 1, -1, -1):
            out[q] = idx % self.d
            idx //= self.d
        return tuple(out)

    def _index(self, labels: tuple[int, ...]) -> int:
        idx = 0
        for v in labels:
            idx = idx * self.d + int(v) % self.d
        return idx

    def apply(self, labels: tuple[int, ...]) -> tuple[int, ...]:
        return self._digits(int(self.forward_table[self._index(labels)]))

    def invert(self, labels: tuple[int, ...]) -> tuple[int, ...]:
        return self._digits(int(self.inverse_table[self._index(labels)]))


@dataclass(frozen=True)
class DecodeBijection(TableBijection):
    """The receiver-side relabeling on k registers.

    Forward: read the coordinates (y_{r_1}, ..., y_{r_k}) at the input rows
    ``in_subset``, solve the k x k system for the message vector x, and
    output (x_0, complement coordinates excluding index 0, ascending order):
    ``out_indices`` lists the complement rows actually emitted. Index 0 must
    not be in ``in_subset`` (the output slot for x_0 is what keeps the tuple
    length at k). Inverse lookup provided; both directions are total on
    Z_d^k.
    """

    in_subset: tuple[int, ...] = ()
    out_indices: tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return self.m

    def inverted(self) -> TableBijection:
        return TableBijection(self.d, self.m, self.inverse_table, self.forward_table)


@dataclass(frozen=True)
class ParityConstraintSet:
    """k-1 independent vectors annihilating every (y_1, ..., y_{2k-1}) tuple."""

    d: int
    vectors: np.ndarray

    def __post_init__(self) -> None:
        vecs = np.asarray(self.vectors, dtype=np.int64) % self.d
        vecs.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)


# ---------------------------------------------------------------------------
# operations


def gen_functionals(d: int, k: int, betas) -> FunctionalMatrix:
    """Vandermonde functional stack: row i = (beta_i^0, ..., beta_i^{k-1}).

    Distinct betas with beta_0 = 0 guarantee the MDS property (every k x k
    row submatrix is a Vandermonde matrix on distinct points).
    """
    if not is_prime(d):
        raise ValueError(f"modulus {d} is not prime")
    betas = [int(b) % d for b in betas]
    if len(betas) != 2 * k:
        raise ValueError(f"need 2k = {2 * k} evaluation points, got {len(betas)}")
    if len(set(betas)) != len(betas):
        raise ValueError(f"duplicate evaluation points in {betas}")
    if betas[0] != 0:
        raise ValueError(f"betas[0] must be 0, got {betas[0]}")
    rows = np.empty((2 * k, k), dtype=np.int64)
    for i, b in enumerate(betas):
        rows[i] = [pow(b, e, d) for e in range(k)]
    return FunctionalMatrix(d, k, rows, betas=tuple(betas))


def check_mds(fm: FunctionalMatrix) -> bool:
    """True iff every k-row submatrix is invertible mod d (exhaustive)."""
    for subset in itertools.combinations(range(2 * fm.k), fm.k):
        if mod_rank(fm.rows[list(subset)], fm.d) < fm.k:
            return False
    return True


def decode_bijection(fm: FunctionalMatrix, in_subset) -> DecodeBijection:
    """Build the relabeling (y at in_subset rows) -> (x_0, complement coords).

    ``in_subset``: k distinct row indices in 1..2k-1 (index 0 excluded; its
    coordinate IS x_0, which occupies the first output slot). Lookup tables
    cover all d^k points; forward and inverse are checked to compose to the
    identity at build time.
    """
    d, k = fm.d, fm.k
    subset = tuple(sorted(int(i) for i in in_subset))
    if len(subset) != k or len(set(subset)) != k:
        raise ValueError(f"in_subset must hold {k} distinct indices, got {in_subset}")
    if any(i < 0 or i >= 2 * k for i in subset):
        raise ValueError(f"row indices out of range in {in_subset}")
    if 0 in subset:
        raise ValueError("index 0 cannot be an input row (its coordinate is the output x_0)")
    out_rows = tuple(i for i in range(2 * k) if i not in subset and i != 0)

    a_inv = mod_inv_matrix(fm.rows[list(subset)], d)  # MDS makes this total
    powers = d ** np.arange(k - 1, -1, -1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*[np.arange(d)] * k, indexing="ij"), axis=-1).reshape(-1, k)

    # forward: labels read as y-values at subset rows -> (x_0, out-row coords)
    x_all = grid @ a_inv.T % d
    out_cols = np.concatenate([x_all[:, :1], x_all @ fm.rows[list(out_rows)].T % d], axis=1)
    forward = (out_cols @ powers).astype(np.int64)
    inverse = np.empty_like(forward)
    inverse[forward] = np.arange(d**k)
    if len(np.unique(forward)) != d**k:
        raise ValueError("internal fault: decode map not bijective")
    forward.flags.writeable = False
    inverse.flags.writeable = False
    return DecodeBijection(d, k, forward, inverse, in_subset=subset, out_indices=out_rows)


def parity_constraints(fm: FunctionalMatrix) -> ParityConstraintSet:
    """Nullspace of the coordinate rows 1..2k-1: exactly k-1 constraints.

    Each returned vector c satisfies sum_i c_i * y_i(x) = 0 mod d for every
    message vector x (the y_i here are coordinates 1..2k-1).
    """
    basis = mod_nullspace(fm.rows[1:].T, fm.d)
    if basis.shape[0] != fm.k - 1:
        raise ValueError(f"internal fault: expected {fm.k - 1} constraints, got {basis.shape[0]}")
    return ParityConstraintSet(fm.d, basis)


# ---------------------------------------------------------------------------
# key-material serialization


def key_json(fm: FunctionalMatrix, in_subset) -> str:
    """Serialize generating data as JSON {d, k, betas, in_subset}."""
    if fm.betas is None:
        raise ValueError("only generated (Vandermonde) matrices serialize")
    return json.dumps(
        {"d": fm.d, "k": fm.k, "betas": list(fm.betas), "in_subset": sorted(int(i) for i in in_subset)}
    )


def key_from_json(text: str) -> tuple[FunctionalMatrix, tuple[int, ...]]:
    obj = json.loads(text)
    fm = gen_functionals(int(obj["d"]), int(obj["k"]), obj["betas"])
    return fm, tuple(int(i) for i in obj["in_subset"])
