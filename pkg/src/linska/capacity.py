"""Key capacities and discussion complexities of a finite linear source.

Quantities (all integers, in units of ``log q``):

* ``cs_zero``  -- longest key with no discussion: the dimension of the
  common part of every user's observation space.
* ``cs``       -- longest key with unlimited discussion: the floor of the
  minimum, over partitions ``P`` of the users into at least two blocks, of
  ``(sum_C H(z_C) - H(z_V)) / (|P| - 1)``.
* ``r_co``     -- shortest discussion giving every user the whole source,
  ``H(z_V) - cs``.
* ``r_s``      -- shortest discussion that still yields a ``cs``-length key:
  the minimum ``r_co`` over per-user linear reductions that keep ``cs``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import gf
from .config import RunConfig
from .errors import InternalInconsistency, SearchBudgetExceeded, SynthesisFailed, ValidationError
from .gf import GfMatrix
from .source import FiniteLinearSource, apply_reduction, normalize, subset_ranks

DEFAULT_PARTITION_CAP = 12


@dataclass(frozen=True)
class Partition:
    """Partition of user indices ``0..m-1`` into at least two non-empty blocks."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = [i for b in self.blocks for i in b]
        if len(self.blocks) < 2 or any(len(b) == 0 for b in self.blocks):
            raise ValidationError(f"partition needs >= 2 non-empty blocks: {self.blocks}")
        if sorted(seen) != list(range(len(seen))):
            raise ValidationError(f"blocks must be disjoint and cover 0..m-1: {self.blocks}")

    @classmethod
    def from_rgs(cls, rgs: Sequence[int]) -> "Partition":
        blocks: dict[int, list[int]] = {}
        for i, b in enumerate(rgs):
            blocks.setdefault(b, []).append(i)
        return cls(tuple(tuple(blocks[b]) for b in sorted(blocks)))

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << i for i in b) for b in self.blocks)

    def __len__(self):
        return len(self.blocks)

    def describe(self, names: Sequence[str]) -> list[list[str]]:
        return [[names[i] for i in b] for b in self.blocks]

    def __str__(self):
        return "{" + ",".join("{" + ",".join(str(i + 1) for i in b) + "}" for b in self.blocks) + "}"


def _restricted_growth_strings(m: int) -> Iterator[tuple[int, ...]]:
    def grow(prefix: list[int], top: int):
        if len(prefix) == m:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from grow(prefix, max(top, b))
            prefix.pop()

    if m == 0:
        return
    yield from grow([0], 0)


def enumerate_partitions(m: int, cap: int = DEFAULT_PARTITION_CAP) -> Iterator[Partition]:
    """Every partition of ``m`` users with at least two blocks, in restricted-growth order."""
    if m < 2:
        raise ValidationError(f"partitions need m >= 2, got {m}")
    if m > cap:
        raise SearchBudgetExceeded(f"partition enumeration for m={m} exceeds cap {cap}")
    for rgs in _restricted_growth_strings(m):
        if max(rgs) >= 1:
            yield Partition.from_rgs(rgs)


def _partition_terms(m: int, cap: int) -> list[tuple[tuple[int, ...], int]]:
    return [(p.masks, len(p) - 1) for p in enumerate_partitions(m, cap)]


# ---------------------------------------------------------------------------
# zero discussion

def cs_zero(s: FiniteLinearSource) -> tuple[int, GfMatrix]:
    """Dimension and canonical basis ``G`` of the maximum common function ``g = x @ G``."""
    common = gf.canonical_column_basis(s.matrices[0])
    for mat in s.matrices[1:]:
        common = gf.column_space_intersection(common, mat)
    common = gf.canonical_column_basis(common)
    return common.cols, common


# ---------------------------------------------------------------------------
# unlimited discussion

def partition_value(table: Sequence[int], partition: Partition) -> Fraction:
    hv = table[-1]
    return Fraction(sum(table[b] for b in partition.masks) - hv, len(partition) - 1)


def optimal_partitions(s: FiniteLinearSource, cap: int = DEFAULT_PARTITION_CAP) -> tuple[Fraction, list[Partition]]:
    """Exact minimum of the partition objective and every partition attaining it."""
    table = s.entropy_table()
    best: Fraction | None = None
    argmins: list[Partition] = []
    for p in enumerate_partitions(s.m, cap):
        v = partition_value(table, p)
        if best is None or v < best:
            best, argmins = v, [p]
        elif v == best:
            argmins.append(p)
    return best, argmins


def cs_unconstrained(s: FiniteLinearSource, cap: int = DEFAULT_PARTITION_CAP) -> tuple[int, Fraction, Partition]:
    """``(cs, lp_value, argmin)``; ties go to fewest blocks, then restricted-growth order."""
    lp, argmins = optimal_partitions(s, cap)
    chosen = min(argmins, key=len)  # min is stable, so RGS order breaks remaining ties
    return math.floor(lp), lp, chosen


def dual_lp_value(s: FiniteLinearSource, cap: int = DEFAULT_PARTITION_CAP) -> Fraction:
    """``max_P sum_C (H(z_V) - H(z_C)) / (|P| - 1)``: the fractional omniscience rate."""
    table = s.entropy_table()
    hv = table[-1]
    return max(
        Fraction(sum(hv - table[b] for b in p.masks), len(p) - 1)
        for p in enumerate_partitions(s.m, cap)
    )


def r_co(s: FiniteLinearSource, cap: int = DEFAULT_PARTITION_CAP) -> int:
    """Omniscience complexity ``H(z_V) - cs``, cross-checked against the dual LP."""
    hv = s.entropy(s.full_mask)
    cs, _, _ = cs_unconstrained(s, cap)
    value = hv - cs
    dual = math.ceil(dual_lp_value(s, cap))
    if value != dual:
        raise InternalInconsistency(f"H - cs = {value} but ceil(dual LP) = {dual}")
    return value


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Non-negative integer vectors of length ``parts`` summing to ``total``, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def region_violation(s: FiniteLinearSource, r: Sequence[int]) -> int | None:
    """Most violated subset ``B`` (bitmask) with ``r(B) < H(z_B | z_rest)``, or None if ``r`` is feasible."""
    table = s.entropy_table()
    full = s.full_mask
    hv = table[full]
    worst, witness = 0, None
    for b in range(1, full):
        shortfall = hv - table[full ^ b] - sum(r[i] for i in range(s.m) if b >> i & 1)
        if shortfall > worst:
            worst, witness = shortfall, b
    return witness


def region_vectors(s: FiniteLinearSource, total: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors of the omniscience rate region with the given sum, lexicographic."""
    for r in _compositions(total, s.m):
        if region_violation(s, r) is None:
            yield r


def optimal_rate_vector(s: FiniteLinearSource, cap: int = DEFAULT_PARTITION_CAP) -> tuple[int, ...]:
    """Lexicographically first integer rate vector in the omniscience region summing to ``r_co``."""
    total = r_co(s, cap)
    for r in region_vectors(s, total):
        return r
    raise InternalInconsistency(f"no integer rate vector of sum {total} lies in the omniscience region")


# ---------------------------------------------------------------------------
# communication complexity

@dataclass
class RsResult:
    r_s: int
    processors: list[GfMatrix]
    reduced_entropy: int
    complete: bool = True


def _user_candidates(mat: GfMatrix, max_dim: int) -> list[tuple[GfMatrix, GfMatrix]]:
    """``(C_i, M_i @ C_i)`` for every subspace of the user's observation space, largest first."""
    _, piv = gf.rref(mat)
    d = len(piv)
    select = np.zeros((mat.cols, d), dtype=np.int64)
    for k, p in enumerate(piv):
        select[p, k] = 1
    select = GfMatrix(select, mat.q)
    out = []
    for coeff in gf.enumerate_subspaces(GfMatrix.identity(d, mat.q), max_dim, dims=range(d, -1, -1)):
        c = select @ coeff
        out.append((c, mat @ c))
    return out


def _cs_from_table(table: Sequence[int], terms) -> int:
    hv = table[-1]
    return min((sum(table[b] for b in masks) - hv) // k for masks, k in terms)


class _RsSearch:
    """Depth-first branch and bound over per-user subspace choices."""

    def __init__(self, s: FiniteLinearSource, candidates, terms, target: int, bound: int, rejected=frozenset()):
        self.s = s
        self.rejected = rejected
        self.candidates = candidates
        self.terms = terms
        self.target = target
        self.bound = bound
        self.best = None  # (value, -retained_dim, index tuple)

    def run(self, prefix: tuple[int, ...]) -> tuple | None:
        mats = [self.candidates[i][j][1] for i, j in enumerate(prefix)]
        if self._viable(mats):
            self._dfs(list(prefix), mats)
        return self.best

    def _viable(self, mats: list[GfMatrix]) -> bool:
        s, k = self.s, len(mats)
        blocks = mats + list(s.matrices[k:])
        table = subset_ranks(blocks, s.base_len, s.q)
        if _cs_from_table(table, self.terms) < self.target:
            return False
        lower = table[(1 << k) - 1] - self.target
        limit = self.bound if self.best is None else self.best[0]
        return lower <= limit

    def _dfs(self, idx: list[int], mats: list[GfMatrix]):
        k = len(idx)
        if k == self.s.m:
            value = gf.rank(gf.hstack(mats)) - self.target
            retained = sum(self.candidates[i][j][0].cols for i, j in enumerate(idx))
            key = (value, -retained, tuple(idx))
            if key[2] in self.rejected:
                return
            if self.best is None or key < self.best:
                self.best = key
            return
        for j, (_, mj) in enumerate(self.candidates[k]):
            mats.append(mj)
            idx.append(j)
            if self._viable(mats):
                self._dfs(idx, mats)
            idx.pop()
            mats.pop()


def _rs_subtree(args):
    s, candidates, terms, target, bound, rejected, prefix = args
    return _RsSearch(s, candidates, terms, target, bound, rejected).run(prefix)


def _pmap(fn: Callable, items: Iterable, workers: int) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def r_s_search(
    s: FiniteLinearSource,
    subspace_dim_cap: int = gf.DEFAULT_SUBSPACE_DIM_CAP,
    partition_cap: int = DEFAULT_PARTITION_CAP,
    workers: int = 1,
    achievable: Callable[[FiniteLinearSource], bool] | None = None,
) -> RsResult:
    """Minimum ``r_co`` over capacity-preserving per-user reductions.

    Every user's observation space is replaced by each of its subspaces in
    turn (largest first).  A branch is cut once the key capacity with the
    still-unassigned users left intact drops below the original capacity,
    or once the entropy of the assigned users already forces a worse
    ``r_co`` than the best found.  Ties go to the reduction retaining the
    most observation dimensions, then to enumeration order.  The top level
    is split across ``workers`` processes with a deterministic merge.

    ``achievable`` (default: :func:`omniscience_achievable`) is asked
    whether the reduced source really admits a one-shot omniscience
    discussion of length ``r_co`` over ``F_q``.  The partition formula
    assumes a large enough field; over ``F_2`` three users holding ``y1``,
    ``y2``, ``y1+y2`` plus one holding both have formula capacity 1 yet no
    single binary symbol completes all three.  Rejected reductions are
    skipped and the search resumes.  Pass ``lambda s: True`` for the bare
    formula.

    Raises SearchBudgetExceeded (with ``best`` set to the trivial unreduced
    result) when a user's observation space exceeds ``subspace_dim_cap``,
    and SynthesisFailed when no reduction, not even the identity, passes
    the achievability check.
    """
    if achievable is None:
        achievable = omniscience_achievable
    terms = _partition_terms(s.m, partition_cap)
    target = _cs_from_table(s.entropy_table(), terms)
    rco = r_co(s, partition_cap)
    try:
        candidates = [_user_candidates(mat, subspace_dim_cap) for mat in s.matrices]
    except SearchBudgetExceeded as exc:
        trivial = RsResult(rco, [GfMatrix.identity(t, s.q) for t in s.t], s.entropy(s.full_mask), complete=False)
        raise SearchBudgetExceeded(str(exc), best=trivial) from exc
    rejected: set[tuple[int, ...]] = set()
    while True:
        frozen = frozenset(rejected)
        jobs = [(s, candidates, terms, target, rco, frozen, (j,)) for j in range(len(candidates[0]))]
        results = [r for r in _pmap(_rs_subtree, jobs, workers) if r is not None]
        if not results:
            raise SynthesisFailed(
                f"no capacity-preserving reduction admits one-shot omniscience over F_{s.q}; "
                f"the partition formula overstates the one-shot key capacity here"
            )
        value, _, idx = min(results)
        processors = [candidates[i][j][0] for i, j in enumerate(idx)]
        if achievable(apply_reduction(s, processors)):
            break
        rejected.add(idx)
    if value > rco:
        raise InternalInconsistency(f"r_s={value} exceeds r_co={rco}")
    return RsResult(value, processors, value + target)


def omniscience_achievable(s: FiniteLinearSource, seed: int = 0) -> bool:
    """Whether some linear discussion of length ``r_co`` gives every user of ``s`` omniscience."""
    from . import protocol  # protocol builds on this module

    red, _ = normalize(s)
    try:
        protocol.synthesize_min_omniscience(red, seed)
    except SynthesisFailed:
        return False
    return True


# ---------------------------------------------------------------------------
# report

@dataclass
class CapacityReport:
    h: int
    cs_zero: int
    common_basis: GfMatrix
    cs: int | None = None
    lp_value: Fraction | None = None
    dual_lp_value: Fraction | None = None
    r_co: int | None = None
    optimal_partition: Partition | None = None
    argmin_partitions: list[Partition] = field(default_factory=list)
    rate_vector: tuple[int, ...] | None = None
    r_s: int | None = None
    r_s_bound: int | None = None
    reducing_processors: list[GfMatrix] | None = None
    incomplete: bool = False
    notes: list[str] = field(default_factory=list)

    def check(self):
        """Assert the report's internal identities."""
        if self.cs is None:
            return
        if not 0 <= self.cs_zero <= self.cs <= self.h:
            raise InternalInconsistency(f"expected 0 <= cs_zero <= cs <= H, got {self.cs_zero}, {self.cs}, {self.h}")
        if self.cs != math.floor(self.lp_value):
            raise InternalInconsistency("cs != floor(lp_value)")
        if self.r_co != self.h - self.cs or self.h - math.floor(self.lp_value) != math.ceil(self.dual_lp_value):
            raise InternalInconsistency("omniscience duality identity failed")
        if self.r_s is not None and self.r_s > self.r_co:
            raise InternalInconsistency("r_s exceeds r_co")


def analyze(s: FiniteLinearSource, config: RunConfig | None = None, skip_rs: bool = False) -> CapacityReport:
    """All capacity quantities for ``s`` (which should be normalized).

    Budget overruns do not raise: the report comes back with ``incomplete``
    set and the affected fields left empty (or holding the best bound).
    """
    config = config or RunConfig()
    h = s.entropy(s.full_mask)
    cz, g = cs_zero(s)
    report = CapacityReport(h=h, cs_zero=cz, common_basis=g)
    try:
        lp, argmins = optimal_partitions(s, config.partition_cap)
    except SearchBudgetExceeded as exc:
        report.incomplete = True
        report.notes.append(str(exc))
        return report
    report.lp_value = lp
    report.argmin_partitions = argmins
    report.cs, _, report.optimal_partition = cs_unconstrained(s, config.partition_cap)
    report.dual_lp_value = dual_lp_value(s, config.partition_cap)
    report.r_co = r_co(s, config.partition_cap)
    report.rate_vector = optimal_rate_vector(s, config.partition_cap)
    if not skip_rs:
        try:
            rs = r_s_search(
                s, config.subspace_dim_cap, config.partition_cap, config.worker_count,
                achievable=lambda red: omniscience_achievable(red, config.seed),
            )
        except SearchBudgetExceeded as exc:
            report.incomplete = True
            report.notes.append(str(exc))
            rs = exc.best
        except SynthesisFailed as exc:
            report.notes.append(str(exc))
            rs = None
        if rs is not None and rs.complete:
            report.r_s = rs.r_s
            report.reducing_processors = rs.processors
        elif rs is not None:
            report.r_s_bound = rs.r_s
    report.check()
    return report
