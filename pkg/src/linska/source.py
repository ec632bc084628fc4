"""Finite linear sources.

A source over F_q has a base ``x`` of ``base_len`` i.i.d. uniform symbols and
``m >= 2`` users; user ``i`` observes ``z_i = x @ M_i``.  Because the image of a
uniform vector under a linear map is uniform on that image, the entropy (in
units of ``log q``) of any group of users is simply the rank of their stacked
observation matrices.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import gf
from .errors import DimensionMismatch, ParseError, ValidationError
from .gf import GfMatrix

MAX_USERS = 20


def _mask(users: Iterable[int] | int) -> int:
    if isinstance(users, (int, np.integer)):
        return int(users)
    mask = 0
    for i in users:
        mask |= 1 << int(i)
    return mask


class FiniteLinearSource:
    """Immutable finite linear source.

    Parameters
    ----------
    q : int
        Prime field order.
    base_len : int
        Length of the base vector ``x``.
    users : sequence of (name, GfMatrix)
        Observation matrices, each with ``base_len`` rows.
    """

    def __init__(self, q: int, base_len: int, users: Sequence[tuple[str, GfMatrix]]):
        q = gf.check_field(q)
        if base_len < 0:
            raise ValidationError(f"base_len must be non-negative, got {base_len}")
        if len(users) < 2:
            raise ValidationError(f"a source needs at least 2 users, got {len(users)}")
        if len(users) > MAX_USERS:
            raise ValidationError(f"at most {MAX_USERS} users are supported, got {len(users)}")
        names = [str(n) for n, _ in users]
        if len(set(names)) != len(names):
            raise ValidationError(f"user names must be unique: {names}")
        for name, mat in users:
            if mat.q != q or mat.rows != base_len:
                raise ValidationError(
                    f"user {name!r}: observation matrix {mat.shape} over q={mat.q} "
                    f"does not match base_len={base_len}, q={q}"
                )
        self.q = q
        self.base_len = base_len
        self.names = tuple(names)
        self.matrices = tuple(m for _, m in users)
        self._entropy: dict[int, int] = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"FiniteLinearSource(q={self.q}, base_len={self.base_len}, t={self.t})"

    def __eq__(self, other):
        if not isinstance(other, FiniteLinearSource):
            return NotImplemented
        return (self.q, self.base_len, self.names, self.matrices) == (
            other.q, other.base_len, other.names, other.matrices)

    def __hash__(self):
        return hash((self.q, self.base_len, self.names, self.matrices))

    def __getstate__(self):
        state = dict(self.__dict__)
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    @property
    def m(self) -> int:
        return len(self.matrices)

    @property
    def t(self) -> tuple[int, ...]:
        return tuple(mat.cols for mat in self.matrices)

    @property
    def full_mask(self) -> int:
        return (1 << self.m) - 1

    def users(self) -> list[tuple[str, GfMatrix]]:
        return list(zip(self.names, self.matrices))

    def matrix(self, subset: Iterable[int] | int | None = None) -> GfMatrix:
        """Stacked observation matrix ``[M_i : i in subset]`` (all users by default)."""
        mask = self.full_mask if subset is None else _mask(subset)
        parts = [self.matrices[i] for i in range(self.m) if mask >> i & 1]
        return gf.hstack(parts, rows=self.base_len, q=self.q)

    def index(self, name: str) -> int:
        return self.names.index(str(name))

    def entropy(self, subset: Iterable[int] | int) -> int:
        mask = _mask(subset)
        if mask >> self.m:
            raise DimensionMismatch(f"subset mask {mask:b} refers to users beyond m={self.m}")
        h = self._entropy.get(mask)
        if h is None:
            h = gf.rank(self.matrix(mask))
            with self._lock:
                self._entropy[mask] = h
        return h

    def conditional_entropy(self, subset, given) -> int:
        b, c = _mask(subset), _mask(given)
        return self.entropy(b | c) - self.entropy(c)

    def entropy_table(self) -> list[int]:
        """``H(z_B)`` for every bitmask ``B`` in ``0 .. 2^m - 1``."""
        if len(self._entropy) < 1 << self.m:
            table = subset_ranks(self.matrices, self.base_len, self.q)
            with self._lock:
                self._entropy.update(enumerate(table))
        return [self._entropy[b] for b in range(1 << self.m)]


def subset_ranks(blocks: Sequence[GfMatrix], rows: int, q: int) -> list[int]:
    """Rank of every union of column blocks, indexed by bitmask.

    Over F_2 this grows one XOR basis per mask from its parent mask, which is
    much cheaper than re-running elimination 2^m times.
    """
    m = len(blocks)
    if q != 2:
        out = [0] * (1 << m)
        for mask in range(1, 1 << m):
            out[mask] = gf.rank(gf.hstack([blocks[i] for i in range(m) if mask >> i & 1]))
        return out
    packed = [gf._pack_rows(b.data.T) for b in blocks]
    bases: list[dict[int, int]] = [{}] * (1 << m)
    out = [0] * (1 << m)
    for mask in range(1, 1 << m):
        low = (mask & -mask).bit_length() - 1
        basis = dict(bases[mask & (mask - 1)])
        for v in packed[low]:
            while v:
                top = v.bit_length() - 1
                if top not in basis:
                    basis[top] = v
                    break
                v ^= basis[top]
        bases[mask] = basis
        out[mask] = len(basis)
    return out


# ---------------------------------------------------------------------------
# file format

def parse_source(document) -> FiniteLinearSource:
    """Build a source from a JSON document (text, bytes, or an already-decoded dict)."""
    if isinstance(document, (str, bytes, bytearray)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"source document is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ParseError("source document must be a JSON object")
    for key in ("field", "base_len", "users"):
        if key not in document:
            raise ParseError(f"source document is missing {key!r}")
    q, ell, users = document["field"], document["base_len"], document["users"]
    q = gf.check_field(q)
    if isinstance(ell, bool) or not isinstance(ell, int):
        raise ParseError("base_len must be an integer")
    if not isinstance(users, list):
        raise ParseError("users must be an array")
    parsed = []
    for k, user in enumerate(users):
        if not isinstance(user, dict) or "columns" not in user:
            raise ParseError(f"user #{k} must be an object with 'columns'")
        name = user.get("name", str(k + 1))
        if not isinstance(name, str) or not name:
            raise ParseError(f"user #{k} name must be a non-empty string")
        cols = user["columns"]
        if not isinstance(cols, list):
            raise ParseError(f"user {name!r}: columns must be an array")
        for col in cols:
            if not isinstance(col, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in col):
                raise ParseError(f"user {name!r}: every column must be an array of integers")
            if len(col) != ell:
                raise ValidationError(f"user {name!r}: column of length {len(col)} but base_len is {ell}")
            if any(not 0 <= v < q for v in col):
                raise ValidationError(f"user {name!r}: entry out of range [0, {q})")
        parsed.append((name, GfMatrix.from_columns(cols, ell, q)))
    return FiniteLinearSource(q, ell, parsed)


def load_source(path) -> FiniteLinearSource:
    return parse_source(Path(path).read_text())


def source_to_dict(s: FiniteLinearSource) -> dict:
    return {
        "field": s.q,
        "base_len": s.base_len,
        "users": [{"name": n, "columns": [list(c) for c in m.column_vectors()]} for n, m in s.users()],
    }


def dump_source(s: FiniteLinearSource) -> str:
    """Canonical JSON encoding (sorted keys, fixed separators)."""
    return json.dumps(source_to_dict(s), sort_keys=True, separators=(",", ":"))


def source_digest(s: FiniteLinearSource) -> str:
    return hashlib.sha256(dump_source(s).encode()).hexdigest()


# ---------------------------------------------------------------------------
# transformations

def normalize(s: FiniteLinearSource) -> tuple[FiniteLinearSource, GfMatrix]:
    """Re-express ``s`` on a base of length ``rank(M)``.

    Returns ``(s2, W)`` where ``W`` (``base_len x rank``) has full column rank
    and ``M_i = W @ M2_i`` for every user, so ``s`` is ``s2`` evaluated at
    ``y = x @ W``.  Sources that already have full row rank come back
    unchanged with ``W = I``.
    """
    full = s.matrix()
    r, piv = gf.rref(full)
    rho = len(piv)
    if rho == s.base_len:
        return s, GfMatrix.identity(s.base_len, s.q)
    w = full.columns(piv)
    reduced = GfMatrix(r.data[:rho].reshape(rho, full.cols), s.q)
    users, start = [], 0
    for name, mat in s.users():
        users.append((name, reduced[:, list(range(start, start + mat.cols))]))
        start += mat.cols
    return FiniteLinearSource(s.q, rho, users), w


def is_normalized(s: FiniteLinearSource) -> bool:
    return s.entropy(s.full_mask) == s.base_len


def apply_reduction(s: FiniteLinearSource, processors: Sequence[GfMatrix]) -> FiniteLinearSource:
    """Per-user linear processing ``M_i -> M_i @ C_i``.  Not re-normalized."""
    if len(processors) != s.m:
        raise DimensionMismatch(f"need {s.m} processors, got {len(processors)}")
    users = []
    for (name, mat), c in zip(s.users(), processors):
        if c.q != s.q or c.rows != mat.cols:
            raise DimensionMismatch(f"user {name!r}: processor {c.shape} does not fit {mat.cols} observations")
        users.append((name, mat @ c))
    return FiniteLinearSource(s.q, s.base_len, users)


def evaluate(s: FiniteLinearSource, x) -> list[np.ndarray]:
    """Observations ``z_i = x @ M_i`` for one realization of the base."""
    x = np.asarray(x, dtype=np.int64).reshape(-1)
    if x.shape[0] != s.base_len:
        raise DimensionMismatch(f"realization has length {x.shape[0]}, base_len is {s.base_len}")
    if np.any((x < 0) | (x >= s.q)):
        raise ValidationError("realization entries must lie in [0, q)")
    return [(x @ mat.data) % s.q for mat in s.matrices]


def random_source(
    rng: np.random.Generator,
    q: int,
    base_len: int,
    m: int,
    max_cols: int = 3,
    normalized: bool = True,
) -> FiniteLinearSource:
    """Random source with ``1..max_cols`` observation symbols per user.

    With ``normalized=True`` the result is re-based to full row rank, so its
    base length may come out smaller than ``base_len``.
    """
    users = []
    for i in range(m):
        t = int(rng.integers(1, max_cols + 1))
        users.append((str(i + 1), GfMatrix(rng.integers(0, q, size=(base_len, t)), q)))
    s = FiniteLinearSource(q, base_len, users)
    return normalize(s)[0] if normalized else s
