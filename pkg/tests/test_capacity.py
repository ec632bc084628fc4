import math
from fractions import Fraction

import numpy as np
import pytest

from linska import capacity, oracle
from linska.config import RunConfig
from linska.errors import SearchBudgetExceeded, SynthesisFailed, ValidationError
from linska.gf import GfMatrix
from linska.source import FiniteLinearSource, apply_reduction, random_source

from corpus import fixture


def xor_triangle_with_hub(q):
    """Users y1, y2, y1+y2 and one holding (y1, y2), over F_q."""
    cols = [[[1, 0]], [[0, 1]], [[1, 1]], [[1, 0], [0, 1]]]
    return FiniteLinearSource(q, 2, [(str(i + 1), GfMatrix.from_columns(c, 2, q)) for i, c in enumerate(cols)])


@pytest.mark.parametrize("m,count", [(2, 1), (3, 4), (4, 14), (5, 51), (6, 202)])
def test_partition_counts_are_bell_minus_one(m, count):
    parts = list(capacity.enumerate_partitions(m))
    assert len(parts) == count
    assert len({p.blocks for p in parts}) == count


def test_partition_order_and_rendering():
    parts = list(capacity.enumerate_partitions(3))
    assert [str(p) for p in parts] == ["{{1,2},{3}}", "{{1,3},{2}}", "{{1},{2,3}}", "{{1},{2},{3}}"]
    with pytest.raises(ValidationError):
        capacity.Partition(((0, 1, 2),))
    with pytest.raises(SearchBudgetExceeded):
        list(capacity.enumerate_partitions(5, cap=4))


def test_running_example_capacities():
    s = fixture("running_example.json")
    report = capacity.analyze(s)
    assert (report.cs_zero, report.cs, report.r_co, report.r_s) == (0, 1, 3, 2)
    assert report.lp_value == Fraction(1)
    assert "{{1,2,3},{4}}" in [str(p) for p in report.argmin_partitions]
    assert str(report.optimal_partition) == "{{1,2,3},{4}}"
    assert report.rate_vector == (1, 1, 1, 0)
    reduced = apply_reduction(s, report.reducing_processors)
    assert capacity.cs_unconstrained(reduced)[0] == 1
    assert capacity.r_co(reduced) == 2


def test_running_example_dual():
    s = fixture("running_example.json")
    assert capacity.dual_lp_value(s) == Fraction(3)
    assert capacity.region_violation(s, (1, 1, 1, 0)) is None
    assert capacity.region_violation(s, (0, 0, 0, 0)) == 0b0111


def test_identical_and_independent_fixtures():
    same = capacity.analyze(fixture("identical_observations.json"))
    assert (same.cs_zero, same.cs, same.r_co, same.r_s) == (3, 3, 0, 0)
    indep = capacity.analyze(fixture("independent_pair.json"))
    assert (indep.cs_zero, indep.cs, indep.r_co, indep.r_s) == (0, 0, 2, 0)


def test_cs_zero_matches_oracle_on_random_sources():
    rng = np.random.default_rng(3)
    for _ in range(60):
        s = random_source(rng, int(rng.choice([2, 3])), int(rng.integers(1, 5)), int(rng.integers(2, 5)))
        assert capacity.cs_zero(s)[0] == oracle.brute_force_gk(s)


def test_duality_and_bounds_on_random_sources():
    rng = np.random.default_rng(8)
    for _ in range(80):
        s = random_source(rng, int(rng.choice([2, 3, 5])), int(rng.integers(1, 6)), int(rng.integers(2, 6)))
        report = capacity.analyze(s, skip_rs=True)
        h = s.entropy(s.full_mask)
        assert report.r_co == h - report.cs
        assert h - math.floor(report.lp_value) == math.ceil(report.dual_lp_value)
        assert 0 <= report.cs_zero <= report.cs <= h
        assert capacity.region_violation(s, report.rate_vector) is None
        assert sum(report.rate_vector) == report.r_co


def test_r_s_search_is_worker_independent():
    rng = np.random.default_rng(21)
    for _ in range(6):
        s = random_source(rng, 2, 5, 3)
        a = capacity.r_s_search(s, workers=1)
        b = capacity.r_s_search(s, workers=2)
        assert a.r_s == b.r_s and a.processors == b.processors


def test_r_s_search_budget():
    users = [("1", GfMatrix.identity(7, 2)), ("2", GfMatrix.identity(7, 2))]
    s = FiniteLinearSource(2, 7, users)
    with pytest.raises(SearchBudgetExceeded) as info:
        capacity.r_s_search(s, subspace_dim_cap=6)
    assert info.value.best.r_s == 0 and not info.value.best.complete
    report = capacity.analyze(s, RunConfig(subspace_dim_cap=6))
    assert report.incomplete and report.r_s is None and report.r_s_bound == 0


def test_binary_xor_triangle_exposes_formula_gap():
    s = xor_triangle_with_hub(2)
    assert capacity.cs_unconstrained(s)[0] == 1
    assert oracle.brute_force_cs_of_r(s, 2) == 0
    with pytest.raises(SynthesisFailed):
        capacity.r_s_search(s)
    report = capacity.analyze(s)
    assert report.cs == 1 and report.r_s is None and report.notes


def test_ternary_xor_triangle_is_achievable():
    s = xor_triangle_with_hub(3)
    assert capacity.cs_unconstrained(s)[0] == 1
    assert oracle.brute_force_cs_of_r(s, 1) == 1
    assert capacity.r_s_search(s).r_s == 1


def test_achievability_filter_changes_r_s_only_when_needed():
    bare = lambda _: True
    s = fixture("running_example.json")
    assert capacity.r_s_search(s, achievable=bare).r_s == capacity.r_s_search(s).r_s == 2
    # the cheapest capacity-preserving reduction here is a binary xor triangle
    cols = [
        [[0, 1, 1], [1, 1, 0]],
        [[0, 0, 0], [0, 1, 0]],
        [[1, 0, 1], [1, 0, 1], [0, 0, 1]],
        [[0, 1, 1], [0, 1, 0]],
    ]
    s = FiniteLinearSource(2, 3, [(str(i + 1), GfMatrix.from_columns(c, 3, 2)) for i, c in enumerate(cols)])
    assert capacity.r_s_search(s, achievable=bare).r_s == 1
    assert capacity.r_s_search(s).r_s == 2
    assert [oracle.brute_force_cs_of_r(s, r) for r in range(4)] == [0, 0, 1, 1]
