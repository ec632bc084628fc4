"""Linear secret key agreement schemes: synthesis, execution, reduction.

A scheme is a list of per-user discussion matrices ``A_i`` (user ``i``
broadcasts ``f_i = z_i @ A_i``) and a key matrix ``N`` (key ``x @ N``).
Discussion is non-interactive and uses no private randomness.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import capacity, gf
from .config import RunConfig
from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    NoWitness,
    NotOmniscient,
    ParseError,
    RateVectorInfeasible,
    SynthesisFailed,
    ValidationError,
)
from .gf import GfMatrix
from .source import FiniteLinearSource, apply_reduction, normalize, source_digest

SYNTHESIS_ATTEMPTS = 64
GREEDY_CANDIDATE_CAP = 2**16
EXHAUSTIVE_FALLBACK_CAP = 2**16


@dataclass(frozen=True)
class DiscussionScheme:
    matrices: tuple[GfMatrix, ...]
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def rates(self) -> tuple[int, ...]:
        return tuple(a.cols for a in self.matrices)

    @property
    def length(self) -> int:
        return sum(self.rates)


@dataclass(frozen=True)
class SkaScheme:
    discussion: DiscussionScheme
    key_matrix: GfMatrix
    mode: str = "omniscience"
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def key_length(self) -> int:
        return self.key_matrix.cols

    @property
    def discussion_length(self) -> int:
        return self.discussion.length


def _check_discussion(s: FiniteLinearSource, matrices: Sequence[GfMatrix]):
    if len(matrices) != s.m:
        raise DimensionMismatch(f"scheme has {len(matrices)} users, source has {s.m}")
    for name, mat, a in zip(s.names, s.matrices, matrices):
        if a.q != s.q or a.rows != mat.cols:
            raise DimensionMismatch(f"user {name!r}: discussion matrix {a.shape} does not fit {mat.cols} observations")


def total_matrix(s: FiniteLinearSource, matrices: Sequence[GfMatrix]) -> GfMatrix:
    """``T = [M_1 A_1 | ... | M_m A_m]`` so that ``f_V = x @ T``."""
    _check_discussion(s, matrices)
    return gf.hstack([m @ a for m, a in zip(s.matrices, matrices)], rows=s.base_len, q=s.q)


def omniscience_flags(s: FiniteLinearSource, matrices: Sequence[GfMatrix]) -> list[bool]:
    """Per user: does ``(z_i, f_V)`` determine ``z_V``?"""
    t = total_matrix(s, matrices)
    h = s.entropy(s.full_mask)
    return [gf.rank(gf.hstack([m, t])) == h for m in s.matrices]


# ---------------------------------------------------------------------------
# omniscience

def _greedy(s: FiniteLinearSource, r: Sequence[int]) -> tuple[list[GfMatrix], list]:
    q = s.q
    cols: list[list[np.ndarray]] = [[] for _ in range(s.m)]
    t_partial = GfMatrix.zeros(s.base_len, 0, q)
    trace = []
    for i, ri in enumerate(r):
        mat = s.matrices[i]
        for _ in range(ri):
            best = None
            candidates = itertools.product(range(q), repeat=mat.cols)
            for a in itertools.islice(candidates, 1, GREEDY_CANDIDATE_CAP + 1):
                col = mat @ GfMatrix(np.array(a).reshape(-1, 1), q)
                trial = gf.hstack([t_partial, col])
                ranks = [gf.rank(gf.hstack([mj, trial])) for mj in s.matrices]
                score = (min(ranks), sum(ranks))
                if best is None or score > best[0]:
                    best = (score, a, trial)
            _, a, t_partial = best
            cols[i].append(np.array(a))
            trace.append([s.names[i], list(a)])
    mats = [
        GfMatrix(np.array(c).T.reshape(s.matrices[i].cols, len(c)), q) if c else GfMatrix.zeros(s.matrices[i].cols, 0, q)
        for i, c in enumerate(cols)
    ]
    return mats, trace


def _exhaustive(s: FiniteLinearSource, r: Sequence[int]) -> list[GfMatrix] | None:
    sizes = [s.matrices[i].cols * ri for i, ri in enumerate(r)]
    if s.q ** sum(sizes) > EXHAUSTIVE_FALLBACK_CAP:
        return None
    for flat in itertools.product(range(s.q), repeat=sum(sizes)):
        mats, pos = [], 0
        for i, ri in enumerate(r):
            t = s.matrices[i].cols
            mats.append(GfMatrix(np.array(flat[pos:pos + t * ri], dtype=np.int64).reshape(t, ri), s.q))
            pos += t * ri
        if all(omniscience_flags(s, mats)):
            return mats
    return None


def synthesize_omniscience(
    s: FiniteLinearSource,
    r: Sequence[int],
    seed: int = 0,
    attempts: int = SYNTHESIS_ATTEMPTS,
    fallback: bool = True,
) -> DiscussionScheme:
    """Discussion with exactly ``r[i]`` symbols from user ``i`` giving every user omniscience.

    Random matrices are tried with seeds ``seed, seed+1, ...``; if none of
    ``attempts`` works a deterministic greedy construction is used, and for
    tiny instances an exhaustive search after that (``fallback=False``
    skips both).

    Over small fields a vector of the rate region need not be achievable in
    one shot: three users holding ``y1``, ``y2``, ``y1+y2`` cannot all be
    completed by a single binary symbol.  SynthesisFailed is raised then.
    """
    r = tuple(int(v) for v in r)
    if len(r) != s.m or any(v < 0 for v in r):
        raise RateVectorInfeasible(f"rate vector {r} is not a non-negative vector of length {s.m}")
    bad = capacity.region_violation(s, r)
    if bad is not None:
        members = [s.names[i] for i in range(s.m) if bad >> i & 1]
        raise RateVectorInfeasible(f"rate vector {r} violates the region constraint for users {members}")
    for k in range(attempts):
        rng = np.random.default_rng(seed + k)
        mats = [GfMatrix(rng.integers(0, s.q, size=(mat.cols, ri)), s.q) for mat, ri in zip(s.matrices, r)]
        if all(omniscience_flags(s, mats)):
            return DiscussionScheme(tuple(mats), {"method": "random", "seed": seed + k})
    if not fallback:
        raise SynthesisFailed(f"{attempts} random discussions at rate vector {r} all failed")
    mats, trace = _greedy(s, r)
    if all(omniscience_flags(s, mats)):
        return DiscussionScheme(tuple(mats), {"method": "greedy", "trace": trace})
    mats = _exhaustive(s, r)
    if mats is not None:
        return DiscussionScheme(tuple(mats), {"method": "exhaustive"})
    raise SynthesisFailed(f"no omniscience discussion found for rate vector {r}")


def synthesize_min_omniscience(s: FiniteLinearSource, seed: int = 0, partition_cap: int = capacity.DEFAULT_PARTITION_CAP) -> DiscussionScheme:
    """Omniscience discussion of total length ``r_co``.

    Rate vectors of the region are tried in lexicographic order, first with
    random matrices only, then with the deterministic fallbacks.
    """
    total = capacity.r_co(s, partition_cap)
    vectors = list(capacity.region_vectors(s, total))
    for fallback in (False, True):
        for r in vectors:
            try:
                return synthesize_omniscience(s, r, seed=seed, fallback=fallback)
            except SynthesisFailed:
                continue
    raise SynthesisFailed(f"no rate vector of sum {total} admits a one-shot linear omniscience discussion")


def extract_key(s: FiniteLinearSource, d: DiscussionScheme) -> SkaScheme:
    """Longest key independent of an omniscience-achieving discussion.

    The key is ``x @ N`` with ``[T | N]`` of full rank; inside every
    discussion fiber this labels the base realizations bijectively.
    """
    if not all(omniscience_flags(s, d.matrices)):
        raise NotOmniscient("discussion does not achieve omniscience")
    s2, w = normalize(s)
    t2 = total_matrix(s2, d.matrices)
    n = w @ gf.complete_to_full_column_rank(t2)
    return SkaScheme(d, n, "omniscience", dict(d.provenance))


def synthesize_optimal_ska(s: FiniteLinearSource, config: RunConfig | None = None) -> SkaScheme:
    """Scheme with key length ``cs`` and discussion length ``r_s``.

    Reduce each user's observation with the processors found by the
    reduction search, run a minimum-length omniscience discussion on the
    reduced source, take the key there, and lift the discussion back to
    original observation coordinates.
    """
    config = config or RunConfig()
    cs, _, _ = capacity.cs_unconstrained(s, config.partition_cap)
    rs = capacity.r_s_search(
        s, config.subspace_dim_cap, config.partition_cap, config.worker_count,
        achievable=lambda red: capacity.omniscience_achievable(red, config.seed),
    )
    reduced = apply_reduction(s, rs.processors)
    red_norm, w = normalize(reduced)
    d = synthesize_min_omniscience(red_norm, config.seed, config.partition_cap)
    t = total_matrix(red_norm, d.matrices)
    n = w @ gf.complete_to_full_column_rank(t)
    lifted = tuple(c @ a for c, a in zip(rs.processors, d.matrices))
    omniscient = all(omniscience_flags(s, lifted))
    provenance = {
        **d.provenance,
        "source_digest": source_digest(s),
        "processors": [c.tolist() for c in rs.processors],
    }
    scheme = SkaScheme(DiscussionScheme(lifted, dict(d.provenance)), n, "omniscience" if omniscient else "direct", provenance)
    if scheme.discussion_length != rs.r_s or scheme.key_length != cs:
        raise InternalInconsistency(
            f"synthesized lengths ({scheme.discussion_length}, {scheme.key_length}) != (r_s={rs.r_s}, cs={cs})"
        )
    return scheme


# ---------------------------------------------------------------------------
# execution

class Transcript(NamedTuple):
    discussion: list[np.ndarray]
    key: np.ndarray


def execute(s: FiniteLinearSource, scheme: SkaScheme, x) -> Transcript:
    _check_discussion(s, scheme.discussion.matrices)
    if scheme.key_matrix.rows != s.base_len or scheme.key_matrix.q != s.q:
        raise DimensionMismatch(f"key matrix {scheme.key_matrix.shape} does not fit base_len {s.base_len}")
    x = np.asarray(x, dtype=np.int64).reshape(-1)
    if x.shape[0] != s.base_len:
        raise DimensionMismatch(f"realization has length {x.shape[0]}, base_len is {s.base_len}")
    f = [((x @ m.data) % s.q @ a.data) % s.q for m, a in zip(s.matrices, scheme.discussion.matrices)]
    return Transcript(f, (x @ scheme.key_matrix.data) % s.q)


# ---------------------------------------------------------------------------
# reduction of a source that a non-omniscient scheme cannot fully use

class ReductionStep(NamedTuple):
    source: FiniteLinearSource
    scheme: SkaScheme
    processors: list[GfMatrix]
    witness_user: int
    direction: list[int]


def missing_users(s: FiniteLinearSource, scheme: SkaScheme) -> list[int]:
    """Users that do not reach omniscience under the scheme's discussion."""
    return [i for i, ok in enumerate(omniscience_flags(s, scheme.discussion.matrices)) if not ok]


def _split_last_row(mt: GfMatrix) -> GfMatrix | None:
    """Invertible ``C`` making the last row of ``mt @ C`` equal to ``(0, ..., 0, 1)``; None if it is zero."""
    q, t = mt.q, mt.cols
    last = mt.data[-1]
    nz = np.flatnonzero(last)
    if nz.size == 0:
        return None
    j = int(nz[0])
    inv = pow(int(last[j]), -1, q)
    order = [c for c in range(t) if c != j] + [j]
    c_mat = np.zeros((t, t), dtype=np.int64)
    for k, c in enumerate(order[:-1]):
        c_mat[c, k] = 1
        c_mat[j, k] = -int(last[c]) * inv
    c_mat[j, t - 1] = inv
    return GfMatrix(c_mat, q)


def reduce_step(s: FiniteLinearSource, scheme: SkaScheme, witness_user: int) -> ReductionStep:
    """Drop one base dimension that neither the witness user nor the discussion sees.

    Picks a nonzero observation pattern ``u @ M`` invisible to the witness
    user and to the discussion, moves it to the last base coordinate, and
    column-reduces every user so at most one observation symbol depends on
    it; that symbol is discarded.  The returned source is simulated from
    ``s`` by per-user processing, has entropy at most ``H(z_V) - 1``, and the
    returned scheme carries the same discussion and key on it.  The result
    lives on the base of the normalized input source.
    """
    s2, w = normalize(s)
    n2 = gf.solve(w, scheme.key_matrix)
    if n2 is None:
        raise ValidationError("key is not a function of the source observations")
    mats = scheme.discussion.matrices
    t = total_matrix(s2, mats)
    ell, q = s2.base_len, s2.q
    null = gf.left_nullspace(gf.hstack([s2.matrices[witness_user], t]))
    if null.rows == 0:
        raise NoWitness(f"user {s.names[witness_user]!r} already reaches omniscience")
    u = null[0, :]
    comp = gf.complete_to_full_column_rank(u.T)
    change = gf.vstack([comp.T, u])
    new_users, new_mats, processors = [], [], []
    for name, mat, a in zip(s2.names, s2.matrices, mats):
        c = _split_last_row(change @ mat)
        if c is None:
            new_users.append((name, mat))
            new_mats.append(a)
            processors.append(GfMatrix.identity(mat.cols, q))
            continue
        a_prime = gf.inverse(c) @ a
        if not a_prime[a_prime.rows - 1, :].is_zero():
            raise InternalInconsistency(f"user {name!r}: discussion depends on the discarded direction")
        keep = list(range(mat.cols - 1))
        proc = c.columns(keep)
        new_users.append((name, mat @ proc))
        new_mats.append(a_prime[keep, :] if keep else GfMatrix.zeros(0, a.cols, q))
        processors.append(proc)
    reduced = FiniteLinearSource(q, ell, new_users)
    if total_matrix(reduced, new_mats) != t:
        raise InternalInconsistency("reduced discussion differs from the original")
    if reduced.entropy(reduced.full_mask) > ell - 1:
        raise InternalInconsistency("reduction step did not lower the source entropy")
    new_scheme = SkaScheme(DiscussionScheme(tuple(new_mats), dict(scheme.discussion.provenance)), n2, "direct", dict(scheme.provenance))
    direction = (u @ s2.matrix()).data[0].tolist()
    return ReductionStep(reduced, new_scheme, processors, witness_user, direction)


def reduce_until_omniscient(s: FiniteLinearSource, scheme: SkaScheme) -> list[ReductionStep]:
    """Apply reduction steps (witness: lowest-index user lacking omniscience) until none remains."""
    steps: list[ReductionStep] = []
    h = s.entropy(s.full_mask)
    while True:
        missing = missing_users(s, scheme)
        if not missing:
            return steps
        step = reduce_step(s, scheme, missing[0])
        h_next = step.source.entropy(step.source.full_mask)
        if h_next >= h:
            raise InternalInconsistency("source entropy did not strictly decrease")
        steps.append(step)
        s, scheme, h = step.source, step.scheme, h_next


# ---------------------------------------------------------------------------
# scheme file format

def scheme_to_dict(s: FiniteLinearSource, scheme: SkaScheme) -> dict:
    return {
        "field": s.q,
        "base_len": s.base_len,
        "mode": scheme.mode,
        "key_length": scheme.key_length,
        "users": [
            {"name": n, "rate": a.cols, "A": a.tolist()}
            for n, a in zip(s.names, scheme.discussion.matrices)
        ],
        "N": scheme.key_matrix.tolist(),
        "provenance": scheme.provenance,
    }


def dump_scheme(s: FiniteLinearSource, scheme: SkaScheme) -> str:
    return json.dumps(scheme_to_dict(s, scheme), sort_keys=True, indent=2)


def _matrix(rows, nrows: int, ncols: int, q: int, what: str) -> GfMatrix:
    if not isinstance(rows, list) or len(rows) != nrows:
        raise DimensionMismatch(f"{what}: expected {nrows} rows")
    for row in rows:
        if not isinstance(row, list) or len(row) != ncols:
            raise DimensionMismatch(f"{what}: expected rows of length {ncols}")
        if any(isinstance(v, bool) or not isinstance(v, int) for v in row):
            raise ParseError(f"{what}: entries must be integers")
        if any(not 0 <= v < q for v in row):
            raise ValidationError(f"{what}: entry out of range [0, {q})")
    return GfMatrix(rows, q, shape=(nrows, ncols))


def parse_scheme(document, s: FiniteLinearSource) -> SkaScheme:
    """Read a scheme document and check it against the source it is meant for."""
    if isinstance(document, (str, bytes, bytearray)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"scheme document is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ParseError("scheme document must be a JSON object")
    for key in ("users", "N", "key_length"):
        if key not in document:
            raise ParseError(f"scheme document is missing {key!r}")
    if document.get("field", s.q) != s.q:
        raise DimensionMismatch(f"scheme field {document.get('field')} != source field {s.q}")
    if document.get("base_len", s.base_len) != s.base_len:
        raise DimensionMismatch(f"scheme base_len {document.get('base_len')} != source base_len {s.base_len}")
    users = document["users"]
    if not isinstance(users, list) or len(users) != s.m:
        raise DimensionMismatch(f"scheme must list {s.m} users")
    mats = []
    for entry, name, mat in zip(users, s.names, s.matrices):
        if not isinstance(entry, dict) or "A" not in entry:
            raise ParseError("each scheme user must be an object with 'A'")
        if str(entry.get("name", name)) != name:
            raise DimensionMismatch(f"scheme user {entry.get('name')!r} does not match source user {name!r}")
        rate = entry.get("rate")
        if rate is None:
            rate = len(entry["A"][0]) if entry["A"] else 0
        mats.append(_matrix(entry["A"], mat.cols, rate, s.q, f"user {name!r} A"))
    k = document["key_length"]
    n = _matrix(document["N"], s.base_len, k, s.q, "key matrix N")
    return SkaScheme(DiscussionScheme(tuple(mats)), n, document.get("mode", "direct"), document.get("provenance", {}))


def load_scheme(path, s: FiniteLinearSource) -> SkaScheme:
    return parse_scheme(Path(path).read_text(), s)
