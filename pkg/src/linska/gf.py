"""Exact linear algebra over prime fields F_q.

Matrices are small dense ``int64`` arrays with entries reduced mod ``q``.
The binary field gets a bit-packed elimination path (rows as Python ints,
row operations as XOR); every other prime uses residue arithmetic.

All results are canonical: echelon forms are the unique reduced row echelon
form, kernels use the basis induced by the free columns, and subspace
enumeration yields one RREF-derived basis per subspace.  Two calls on equal
inputs therefore return equal matrices.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, SearchBudgetExceeded, ValidationError

MAX_FIELD_ORDER = 251
DEFAULT_SUBSPACE_DIM_CAP = 6


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def check_field(q) -> int:
    """Return ``q`` as an int after checking it is a supported prime order."""
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
        raise ValidationError(f"field order must be an integer, got {q!r}")
    q = int(q)
    if not 2 <= q <= MAX_FIELD_ORDER or not is_prime(q):
        raise ValidationError(f"field order must be a prime in [2, {MAX_FIELD_ORDER}], got {q}")
    return q


class GfMatrix:
    """Immutable dense matrix over the prime field F_q.

    Parameters
    ----------
    data : array_like
        2-D integer data; entries are reduced mod ``q``.
    q : int
        Prime field order.
    shape : tuple of int, optional
        Required when ``data`` is empty and its shape cannot be inferred
        (for example ``[]`` for a 3x0 matrix).
    """

    __slots__ = ("q", "data")

    def __init__(self, data, q: int, shape: tuple[int, int] | None = None):
        q = check_field(q)
        arr = np.array(data, dtype=np.int64)
        if shape is not None:
            if arr.size == 0:
                arr = np.zeros(shape, dtype=np.int64)
            elif arr.shape != tuple(shape):
                raise DimensionMismatch(f"data shape {arr.shape} != declared shape {shape}")
        if arr.ndim != 2:
            raise DimensionMismatch(f"GfMatrix needs 2-D data, got ndim={arr.ndim}")
        arr %= q
        arr.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("GfMatrix is immutable")

    def __reduce__(self):
        return (GfMatrix, (self.data.copy(), self.q, self.data.shape))

    # construction helpers
    @classmethod
    def zeros(cls, rows: int, cols: int, q: int) -> "GfMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), q)

    @classmethod
    def identity(cls, n: int, q: int) -> "GfMatrix":
        return cls(np.eye(n, dtype=np.int64), q)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int, q: int) -> "GfMatrix":
        """Build a ``rows x len(columns)`` matrix whose j-th column is ``columns[j]``."""
        if len(columns) == 0:
            return cls.zeros(rows, 0, q)
        arr = np.array(columns, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != rows:
            raise DimensionMismatch(f"every column must have length {rows}")
        return cls(arr.T, q)

    @classmethod
    def unit(cls, n: int, j: int, q: int) -> "GfMatrix":
        """Column vector e_j of length n."""
        arr = np.zeros((n, 1), dtype=np.int64)
        arr[j, 0] = 1
        return cls(arr, q)

    # basic protocol
    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def T(self) -> "GfMatrix":
        return GfMatrix(self.data.T, self.q)

    def __eq__(self, other):
        if not isinstance(other, GfMatrix):
            return NotImplemented
        return self.q == other.q and self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash((self.q, self.shape, self.data.tobytes()))

    def __repr__(self):
        return f"GfMatrix(q={self.q}, {self.data.tolist()!r}, shape={self.shape})"

    def _check_same_field(self, other: "GfMatrix"):
        if self.q != other.q:
            raise DimensionMismatch(f"field mismatch: q={self.q} vs q={other.q}")

    def __matmul__(self, other: "GfMatrix") -> "GfMatrix":
        self._check_same_field(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        if self.cols == 0:
            return GfMatrix.zeros(self.rows, other.cols, self.q)
        return GfMatrix(self.data @ other.data, self.q)

    def __add__(self, other: "GfMatrix") -> "GfMatrix":
        self._check_same_field(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        return GfMatrix(self.data + other.data, self.q)

    def __sub__(self, other: "GfMatrix") -> "GfMatrix":
        self._check_same_field(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot subtract {self.shape} and {other.shape}")
        return GfMatrix(self.data - other.data, self.q)

    def __neg__(self) -> "GfMatrix":
        return GfMatrix(-self.data, self.q)

    def scale(self, c: int) -> "GfMatrix":
        return GfMatrix(self.data * int(c), self.q)

    def __getitem__(self, key) -> "GfMatrix":
        """Slice into a sub-matrix; always returns a 2-D GfMatrix."""
        if not isinstance(key, tuple):
            key = (key, slice(None))
        r, c = key
        if isinstance(r, (int, np.integer)):
            r = [r]
        if isinstance(c, (int, np.integer)):
            c = [c]
        sub = self.data[r, :][:, c]
        return GfMatrix(sub, self.q)

    def columns(self, idx: Sequence[int]) -> "GfMatrix":
        return GfMatrix(self.data[:, list(idx)].reshape(self.rows, len(idx)), self.q)

    def column_vectors(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in col) for col in self.data.T]

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def is_zero(self) -> bool:
        return not self.data.any()


def hstack(mats: Sequence[GfMatrix], rows: int | None = None, q: int | None = None) -> GfMatrix:
    """Concatenate matrices side by side.  ``rows``/``q`` are needed only for an empty list."""
    if not mats:
        if rows is None or q is None:
            raise DimensionMismatch("hstack of nothing needs rows and q")
        return GfMatrix.zeros(rows, 0, q)
    q0, r0 = mats[0].q, mats[0].rows
    for m in mats[1:]:
        if m.q != q0 or m.rows != r0:
            raise DimensionMismatch("hstack operands must share row count and field")
    total = sum(m.cols for m in mats)
    return GfMatrix(np.hstack([m.data for m in mats]).reshape(r0, total), q0)


def vstack(mats: Sequence[GfMatrix]) -> GfMatrix:
    q0, c0 = mats[0].q, mats[0].cols
    for m in mats[1:]:
        if m.q != q0 or m.cols != c0:
            raise DimensionMismatch("vstack operands must share column count and field")
    total = sum(m.rows for m in mats)
    return GfMatrix(np.vstack([m.data for m in mats]).reshape(total, c0), q0)


# ---------------------------------------------------------------------------
# elimination kernels

def _pack_rows(arr: np.ndarray) -> list[int]:
    return [sum(1 << int(j) for j in np.flatnonzero(row)) for row in arr]


def _unpack_rows(rows: list[int], ncols: int) -> np.ndarray:
    out = np.zeros((len(rows), ncols), dtype=np.int64)
    for i, v in enumerate(rows):
        j = 0
        while v:
            if v & 1:
                out[i, j] = 1
            v >>= 1
            j += 1
    return out


def _rref_gf2(arr: np.ndarray) -> tuple[np.ndarray, list[int]]:
    nrows, ncols = arr.shape
    rows = _pack_rows(arr)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        bit = 1 << c
        for i in range(r, nrows):
            if rows[i] & bit:
                break
        else:
            continue
        rows[r], rows[i] = rows[i], rows[r]
        prow = rows[r]
        for k in range(nrows):
            if k != r and rows[k] & bit:
                rows[k] ^= prow
        pivots.append(c)
        r += 1
    return _unpack_rows(rows, ncols), pivots


def _rref_modp(arr: np.ndarray, q: int) -> tuple[np.ndarray, list[int]]:
    a = arr.copy()
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, q)) % q
        factors = a[:, c].copy()
        factors[r] = 0
        a = (a - np.outer(factors, a[r])) % q
        pivots.append(c)
        r += 1
    return a, pivots


def rref(m: GfMatrix) -> tuple[GfMatrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    if m.rows == 0 or m.cols == 0:
        return m, []
    if m.q == 2:
        out, piv = _rref_gf2(m.data)
    else:
        out, piv = _rref_modp(m.data, m.q)
    return GfMatrix(out, m.q), piv


def _rank_gf2_packed(rows: list[int]) -> int:
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def rank(m: GfMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.q == 2:
        # pack along the shorter axis; rank is transpose invariant
        arr = m.data if m.cols <= m.rows else m.data.T
        return _rank_gf2_packed(_pack_rows(arr.T))
    return len(_rref_modp(m.data, m.q)[1])


def right_nullspace(m: GfMatrix) -> GfMatrix:
    """Columns form the canonical basis of ``{v : m v = 0}`` (one per free column)."""
    n = m.cols
    r, piv = rref(m)
    free = [c for c in range(n) if c not in piv]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, p in enumerate(piv):
            basis[p, k] = -r.data[i, f]
    return GfMatrix(basis, m.q)


def left_nullspace(m: GfMatrix) -> GfMatrix:
    """Rows form a basis of ``{v : v m = 0}``."""
    return right_nullspace(m.T).T


def column_space_basis(m: GfMatrix) -> GfMatrix:
    """The pivot columns of ``m``: an independent subset spanning its column space."""
    _, piv = rref(m)
    return m.columns(piv)


def canonical_column_basis(m: GfMatrix) -> GfMatrix:
    """Canonical basis of colspace(m): the nonzero rows of rref(m^T), as columns."""
    r, piv = rref(m.T)
    return GfMatrix(r.data[: len(piv)].T.reshape(m.rows, len(piv)), m.q)


def column_space_intersection(a: GfMatrix, b: GfMatrix) -> GfMatrix:
    """Basis (as columns) of colspace(a) ∩ colspace(b) by the Zassenhaus algorithm.

    Stack ``[[a^T, a^T], [b^T, 0]]`` and row reduce; the rows whose left half
    vanished carry an intersection basis in their right half.
    """
    if a.q != b.q or a.rows != b.rows:
        raise DimensionMismatch(f"intersection needs equal row counts and fields: {a.shape}/q={a.q} vs {b.shape}/q={b.q}")
    n, q = a.rows, a.q
    top = np.hstack([a.data.T, a.data.T]).reshape(a.cols, 2 * n)
    bottom = np.hstack([b.data.T, np.zeros_like(b.data.T)]).reshape(b.cols, 2 * n)
    block = GfMatrix(np.vstack([top, bottom]).reshape(a.cols + b.cols, 2 * n), q)
    r, piv = rref(block)
    # pivots past the left half index the intersection rows
    rows = [i for i, p in enumerate(piv) if p >= n]
    out = r.data[rows, n:].T.reshape(n, len(rows))
    return GfMatrix(out, q)


def is_in_span(v: GfMatrix, basis: GfMatrix) -> tuple[bool, GfMatrix | None]:
    """Whether column vector ``v`` lies in colspace(basis).

    Returns ``(True, w)`` with ``basis @ w == v`` when it does and
    ``(False, None)`` otherwise.
    """
    if v.q != basis.q or v.rows != basis.rows or v.cols != 1:
        raise DimensionMismatch(f"is_in_span needs a column of length {basis.rows} over q={basis.q}")
    k = basis.cols
    r, piv = rref(hstack([basis, v]))
    if k in piv:
        return False, None
    w = np.zeros((k, 1), dtype=np.int64)
    for i, p in enumerate(piv):
        w[p, 0] = r.data[i, k]
    return True, GfMatrix(w, v.q)


def solve(a: GfMatrix, b: GfMatrix) -> GfMatrix | None:
    """Some ``x`` with ``a @ x == b`` (free variables zero), or None if inconsistent."""
    if a.q != b.q or a.rows != b.rows:
        raise DimensionMismatch(f"solve needs equal row counts: {a.shape} vs {b.shape}")
    cols = []
    for j in range(b.cols):
        ok, w = is_in_span(b.columns([j]), a)
        if not ok:
            return None
        cols.append(w.data[:, 0])
    return GfMatrix.from_columns(cols, a.cols, a.q)


def inverse(m: GfMatrix) -> GfMatrix:
    if m.rows != m.cols:
        raise DimensionMismatch(f"inverse of non-square {m.shape}")
    n = m.rows
    r, piv = rref(hstack([m, GfMatrix.identity(n, m.q)]))
    if piv[:n] != list(range(n)):
        raise DimensionMismatch("matrix is singular")
    return GfMatrix(r.data[:, n:], m.q)


def complete_to_full_column_rank(t: GfMatrix) -> GfMatrix:
    """Standard basis columns that extend colspace(t) to the whole space.

    The chosen coordinates are those that are not pivots of rref(t^T), so
    ``[t | N]`` has column rank ``t.rows`` and ``N`` is canonical.
    """
    n = t.rows
    _, piv = rref(t.T)
    missing = [j for j in range(n) if j not in piv]
    out = np.zeros((n, len(missing)), dtype=np.int64)
    for k, j in enumerate(missing):
        out[j, k] = 1
    return GfMatrix(out, t.q)


# ---------------------------------------------------------------------------
# subspace enumeration

def galois_number(d: int, q: int) -> int:
    """Number of subspaces of F_q^d (sum of Gaussian binomials)."""
    total = 0
    for k in range(d + 1):
        num = den = 1
        for i in range(k):
            num *= q ** (d - i) - 1
            den *= q ** (i + 1) - 1
        total += num // den
    return total


def _rref_patterns(d: int, k: int, q: int) -> Iterator[np.ndarray]:
    """All k x d matrices in reduced row echelon form with full row rank."""
    for pivots in itertools.combinations(range(d), k):
        free = [
            (i, c)
            for i, p in enumerate(pivots)
            for c in range(p + 1, d)
            if c not in pivots
        ]
        for values in itertools.product(range(q), repeat=len(free)):
            mat = np.zeros((k, d), dtype=np.int64)
            for i, p in enumerate(pivots):
                mat[i, p] = 1
            for (i, c), v in zip(free, values):
                mat[i, c] = v
            yield mat


def enumerate_subspaces(
    basis: GfMatrix,
    max_dim: int = DEFAULT_SUBSPACE_DIM_CAP,
    dims: Sequence[int] | None = None,
) -> Iterator[GfMatrix]:
    """Yield one basis per subspace of colspace(basis).

    ``basis`` must have independent columns, of count ``d``.  Subspaces come
    in order of dimension ``0..d``; within a dimension, by pivot pattern then
    free entries of the coefficient RREF.  Each yielded matrix is
    ``basis @ S`` where the columns of ``S`` are the rows of a canonical
    RREF over the coefficient space, so with an identity ``basis`` the
    output is itself canonical.  ``dims`` restricts the dimensions visited.

    Raises SearchBudgetExceeded if ``d > max_dim``.
    """
    d = basis.cols
    if d > max_dim:
        raise SearchBudgetExceeded(f"subspace enumeration of dimension {d} exceeds cap {max_dim}")
    q = basis.q
    for k in (range(d + 1) if dims is None else dims):
        if k == 0:
            yield GfMatrix.zeros(basis.rows, 0, q)
            continue
        for pattern in _rref_patterns(d, k, q):
            yield basis @ GfMatrix(pattern.T, q)
