"""Brute-force ground truth.

Nothing here calls the elimination routines in :mod:`linska.gf`.  Fibers and
distributions come from enumerating every base realization and grouping
equal rows; subspaces are built as explicit sets of vectors by closure under
addition.  A bug in rank or echelon code therefore cannot certify itself.

Vectors in ``F_q^l`` are handled as integer codes: the base-``q`` number
whose digits (most significant first) are the vector's entries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EnumerationCapExceeded, InternalInconsistency
from .protocol import SkaScheme
from .source import FiniteLinearSource

DEFAULT_ENUMERATION_CAP = 2**26
DEFAULT_ORACLE_CAP = 2**30


def _all_vectors(q: int, n: int) -> np.ndarray:
    """Every vector of F_q^n as rows, in code order."""
    codes = np.arange(q**n, dtype=np.int64)
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % q


def _encode(rows: np.ndarray, q: int) -> np.ndarray:
    n = rows.shape[-1]
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (rows * powers).sum(axis=-1)


def _decode(codes: np.ndarray, q: int, n: int) -> np.ndarray:
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (np.asarray(codes)[..., None] // powers) % q


def digit_string(x: Sequence[int], q: int) -> str:
    """Realization as a base-q digit string (dot-separated when q > 10)."""
    return "".join(str(int(v)) for v in x) if q <= 10 else ".".join(str(int(v)) for v in x)


def _exact_log(count: int, q: int) -> int:
    k = 0
    while count % q == 0 and count > 1:
        count //= q
        k += 1
    if count != 1:
        raise InternalInconsistency(f"count is not a power of {q}")
    return k


def _group_ids(arr: np.ndarray) -> np.ndarray:
    if arr.shape[1] == 0:
        return np.zeros(arr.shape[0], dtype=np.int64)
    return np.unique(arr, axis=0, return_inverse=True)[1].reshape(-1)


def _fiber_conflict(fibers: np.ndarray, values: np.ndarray) -> tuple[int, int] | None:
    """Two realizations in one fiber with different values, if any."""
    _, first = np.unique(fibers, return_index=True)
    ref = values[first[fibers]]
    bad = np.flatnonzero(values != ref)
    if bad.size == 0:
        return None
    b = int(bad[0])
    return int(first[fibers[b]]), b


def _check_enumeration(q: int, n: int, cap: int):
    if q**n > cap:
        raise EnumerationCapExceeded(f"q^l = {q}^{n} realizations exceed the enumeration cap {cap}")


# ---------------------------------------------------------------------------
# scheme verification

@dataclass
class VerificationReport:
    omniscient: list[bool]
    recoverable: list[bool]
    key_uniform: bool
    key_independent: bool
    key_length_logq: int
    realizations_checked: int
    counterexamples: dict[str, str] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return all(self.recoverable) and self.key_uniform and self.key_independent


def verify_scheme(s: FiniteLinearSource, scheme: SkaScheme, cap: int = DEFAULT_ENUMERATION_CAP) -> VerificationReport:
    """Exhaustively check recoverability, secrecy, and omniscience of ``scheme`` on ``s``.

    Every base realization is enumerated.  For each user the fibers of
    ``(z_i, f_V)`` must fix the key (recoverability) and, for the omniscience
    flag, the whole observation ``z_V``.  The key must take every value of
    ``F_q^k`` equally often overall and inside every fiber of ``f_V``.
    """
    q, ell = s.q, s.base_len
    _check_enumeration(q, ell, cap)
    x = _all_vectors(q, ell)
    n_real = x.shape[0]
    z = [(x @ m.data) % q for m in s.matrices]
    f = np.hstack([(zi @ a.data) % q for zi, a in zip(z, scheme.discussion.matrices)]).reshape(n_real, -1)
    key = (x @ scheme.key_matrix.data) % q
    zv_ids = _group_ids(np.hstack(z).reshape(n_real, -1))
    key_ids = _group_ids(key)
    f_ids = _group_ids(f)

    cex: dict[str, str] = {}
    omniscient, recoverable = [], []
    for name, zi in zip(s.names, z):
        fiber = _group_ids(np.hstack([zi, f]).reshape(n_real, -1))
        conflict = _fiber_conflict(fiber, zv_ids)
        omniscient.append(conflict is None)
        if conflict:
            cex[f"omniscience:{name}"] = digit_string(x[conflict[1]], q)
        conflict = _fiber_conflict(fiber, key_ids)
        recoverable.append(conflict is None)
        if conflict:
            cex[f"recoverability:{name}"] = digit_string(x[conflict[1]], q)

    k = scheme.key_matrix.cols
    n_keys = q**k
    key_counts = np.bincount(key_ids, minlength=1)
    uniform = n_real % n_keys == 0 and key_counts.size == n_keys and bool(np.all(key_counts == n_real // n_keys))
    if not uniform:
        odd = np.flatnonzero(key_counts != n_real // n_keys) if n_real % n_keys == 0 else np.array([0])
        cex["uniformity"] = digit_string(x[int(np.flatnonzero(key_ids == odd[0])[0])], q)

    pair_ids = _group_ids(np.stack([f_ids, key_ids], axis=1))
    pair_counts = np.bincount(pair_ids)
    fiber_sizes = np.bincount(f_ids)
    distinct_per_fiber = np.bincount(f_ids[np.unique(pair_ids, return_index=True)[1]], minlength=fiber_sizes.size)
    per_real_expected = fiber_sizes[f_ids] * 1.0 / n_keys
    bad = (distinct_per_fiber[f_ids] != n_keys) | (pair_counts[pair_ids] != per_real_expected)
    independent = not bool(bad.any())
    if not independent:
        cex["independence"] = digit_string(x[int(np.flatnonzero(bad)[0])], q)

    return VerificationReport(omniscient, recoverable, uniform, independent, k, n_real, cex)


# ---------------------------------------------------------------------------
# rate region

def _entropies_by_enumeration(s: FiniteLinearSource, cap: int) -> list[int]:
    q, ell = s.q, s.base_len
    _check_enumeration(q, ell, cap)
    x = _all_vectors(q, ell)
    z = [(x @ m.data) % q for m in s.matrices]
    out = []
    for mask in range(1 << s.m):
        parts = [z[i] for i in range(s.m) if mask >> i & 1]
        if not parts or sum(p.shape[1] for p in parts) == 0:
            out.append(0)
            continue
        rows = np.hstack(parts)
        out.append(_exact_log(np.unique(rows, axis=0).shape[0], q))
    return out


def check_rate_vector(
    s: FiniteLinearSource, r: Sequence[int], cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple[bool, int | None]:
    """Whether ``r(B) >= H(z_B | z_rest)`` for every proper non-empty ``B``.

    Entropies are log-counts of distinct observation tuples.  Returns
    ``(True, None)`` or ``(False, B)`` with ``B`` the first violating subset
    as a bitmask: the one with the largest shortfall, lowest mask on ties.
    """
    if len(r) != s.m:
        raise ValueError(f"rate vector must have {s.m} entries")
    h = _entropies_by_enumeration(s, cap)
    full = (1 << s.m) - 1
    worst, witness = 0, None
    for b in range(1, full):
        rb = sum(r[i] for i in range(s.m) if b >> i & 1)
        shortfall = h[full] - h[full ^ b] - rb
        if shortfall > worst:
            worst, witness = shortfall, b
    return witness is None, witness


# ---------------------------------------------------------------------------
# explicit subspaces

class _Space:
    """Subspaces of F_q^n as sorted arrays of vector codes."""

    def __init__(self, q: int, n: int):
        self.q, self.n = q, n

    def span_of_columns(self, mat: np.ndarray) -> np.ndarray:
        t = mat.shape[1]
        if t == 0:
            return np.zeros(1, dtype=np.int64)
        coeffs = _all_vectors(self.q, t)
        return np.unique(_encode((coeffs @ mat.T) % self.q, self.q))

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        da, db = _decode(a, self.q, self.n), _decode(b, self.q, self.n)
        return np.unique(_encode((da[:, None, :] + db[None, :, :]) % self.q, self.q))

    def line(self, v: int) -> np.ndarray:
        dv = _decode(np.array([v]), self.q, self.n)
        return np.unique(_encode((np.arange(self.q)[:, None] * dv) % self.q, self.q))

    def subspaces(self, space: np.ndarray, max_dim: int) -> list[list[np.ndarray]]:
        """All subspaces of ``space`` by dimension, built by adding one line at a time."""
        levels = [[np.zeros(1, dtype=np.int64)]]
        for _ in range(max_dim):
            seen: dict[bytes, np.ndarray] = {}
            for w in levels[-1]:
                for v in space:
                    if v in w:
                        continue
                    grown = self.add(w, self.line(int(v)))
                    seen.setdefault(grown.tobytes(), grown)
            if not seen:
                break
            levels.append(list(seen.values()))
        return levels

    def dim(self, w: np.ndarray) -> int:
        return _exact_log(len(w), self.q)


def brute_force_gk(s: FiniteLinearSource, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    """Dimension of the set of functionals every user can compute, by counting vectors."""
    _check_enumeration(s.q, s.base_len, cap)
    space = _Space(s.q, s.base_len)
    common = None
    for m in s.matrices:
        _check_enumeration(s.q, m.cols, cap)
        span = space.span_of_columns(m.data)
        common = span if common is None else np.intersect1d(common, span)
    return _exact_log(len(common), s.q)


def brute_force_cs_of_r(
    s: FiniteLinearSource,
    r_total: int,
    cap: int = DEFAULT_ORACLE_CAP,
) -> int:
    """Longest perfect key over all linear discussions of total length at most ``r_total``.

    Only the information each user reveals matters, so user ``i``'s
    discussion ranges over the subspaces of its observation space of
    dimension at most ``r_total`` (a matrix with fewer independent columns
    than its width reveals a lower-dimensional subspace).  For a fixed
    discussion space ``F`` the longest key is ``dim G - dim F``, where ``G``
    is the set of functionals every user can compute from its observation
    plus the discussion; the key must lie in ``G`` and avoid ``F``.

    Raises EnumerationCapExceeded when the number of discussion tuples times
    ``q^l`` exceeds ``cap``.
    """
    q, ell = s.q, s.base_len
    _check_enumeration(q, ell, cap)
    space = _Space(q, ell)
    own = [space.span_of_columns(m.data) for m in s.matrices]
    subs = [space.subspaces(o, min(r_total, space.dim(o))) for o in own]

    # count tuples with total dimension <= r_total before doing any work
    ways = [1] + [0] * r_total
    for levels in subs:
        nxt = [0] * (r_total + 1)
        for used, c in enumerate(ways):
            for d, lvl in enumerate(levels):
                if used + d <= r_total:
                    nxt[used + d] += c * len(lvl)
        ways = nxt
    if sum(ways) * q**ell > cap:
        raise EnumerationCapExceeded(
            f"{sum(ways)} discussion tuples over {q}^{ell} realizations exceed the oracle cap {cap}"
        )

    best = 0
    zero = np.zeros(1, dtype=np.int64)

    def search(i: int, budget: int, disc: np.ndarray):
        nonlocal best
        if i == s.m:
            common = None
            for o in own:
                u = space.add(o, disc)
                common = u if common is None else np.intersect1d(common, u)
            best = max(best, space.dim(common) - space.dim(disc))
            return
        for d, lvl in enumerate(subs[i]):
            if d > budget:
                break
            for w in lvl:
                search(i + 1, budget - d, space.add(disc, w))

    search(0, r_total, zero)
    return best
