import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linska import gf
from linska.errors import DimensionMismatch, SearchBudgetExceeded, ValidationError
from linska.gf import GfMatrix


def matrices(q_values=(2, 3), max_rows=4, max_cols=4, min_cols=0, rows=None):
    @st.composite
    def build(draw):
        q = draw(st.sampled_from(q_values))
        r = rows if rows is not None else draw(st.integers(1, max_rows))
        c = draw(st.integers(min_cols, max_cols))
        vals = draw(st.lists(st.integers(0, q - 1), min_size=r * c, max_size=r * c))
        return GfMatrix(np.array(vals, dtype=np.int64).reshape(r, c), q)

    return build()


def span_codes(m: GfMatrix) -> set:
    """Column space as an explicit set of vectors."""
    out = set()
    for coeffs in itertools.product(range(m.q), repeat=m.cols):
        v = (m.data @ np.array(coeffs, dtype=np.int64)) % m.q if m.cols else np.zeros(m.rows, dtype=np.int64)
        out.add(tuple(int(x) for x in v))
    return out


def test_field_checks():
    assert [n for n in range(20) if gf.is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    with pytest.raises(ValidationError):
        gf.check_field(4)
    with pytest.raises(ValidationError):
        gf.check_field(257)


def test_rank_examples():
    assert gf.rank(GfMatrix([[1, 1], [1, 1]], 2)) == 1
    assert gf.rank(GfMatrix([[1, 2], [2, 1]], 3)) == 1
    assert gf.rank(GfMatrix([[1, 2], [2, 1]], 5)) == 2
    assert gf.rank(GfMatrix.zeros(3, 0, 2)) == 0


def test_rref_reduces_entries_and_orders_pivots():
    r, piv = gf.rref(GfMatrix([[0, 2, 1], [1, 1, 0]], 3))
    assert piv == [0, 1]
    assert r.tolist() == [[1, 0, 1], [0, 1, 2]]


def test_nullspaces():
    m = GfMatrix([[1, 1, 0], [0, 1, 1]], 2)
    n = gf.right_nullspace(m)
    assert n.cols == 1 and (m @ n).is_zero()
    left = gf.left_nullspace(m.T)
    assert (left @ m.T).is_zero()


def test_solve_and_inverse():
    a = GfMatrix([[1, 1], [0, 1]], 2)
    assert gf.inverse(a) @ a == GfMatrix.identity(2, 2)
    x = gf.solve(a, GfMatrix([[1], [1]], 2))
    assert a @ x == GfMatrix([[1], [1]], 2)
    assert gf.solve(GfMatrix([[1], [0]], 2), GfMatrix([[0], [1]], 2)) is None


def test_is_in_span_gives_witness():
    basis = GfMatrix([[1, 0], [0, 1], [1, 1]], 3)
    ok, w = gf.is_in_span(GfMatrix([[2], [1], [0]], 3), basis)
    assert ok and basis @ w == GfMatrix([[2], [1], [0]], 3)
    ok, w = gf.is_in_span(GfMatrix([[1], [0], [0]], 3), basis)
    assert not ok and w is None


def test_complete_to_full_column_rank():
    t = GfMatrix([[0], [1], [1], [0]], 2)
    n = gf.complete_to_full_column_rank(t)
    assert n.cols == 3
    assert gf.rank(gf.hstack([t, n])) == 4


def test_shape_errors():
    with pytest.raises(DimensionMismatch):
        GfMatrix([[1, 0]], 2) @ GfMatrix([[1, 0]], 2)
    with pytest.raises(DimensionMismatch):
        GfMatrix([1, 0], 2)


def test_hstack_of_empty_blocks():
    m = gf.hstack([GfMatrix.zeros(3, 0, 2), GfMatrix.zeros(3, 0, 2)])
    assert m.shape == (3, 0)


def test_running_example_common_part_is_trivial():
    from linska.source import load_source
    from corpus import FIXTURES

    s = load_source(FIXTURES / "running_example.json")
    common = s.matrices[0]
    for m in s.matrices[1:]:
        common = gf.column_space_intersection(common, m)
    assert common.cols == 0


@pytest.mark.parametrize("d,expected", [(0, 1), (1, 2), (2, 5), (3, 16), (4, 67)])
def test_galois_numbers_binary(d, expected):
    assert gf.galois_number(d, 2) == expected
    subs = list(gf.enumerate_subspaces(GfMatrix.identity(d, 2), max_dim=6))
    assert len(subs) == expected
    assert len({frozenset(span_codes(b)) for b in subs}) == expected


def test_subspace_enumeration_respects_cap():
    with pytest.raises(SearchBudgetExceeded):
        list(gf.enumerate_subspaces(GfMatrix.identity(7, 2), max_dim=6))


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_rref_is_idempotent(m):
    r, piv = gf.rref(m)
    r2, piv2 = gf.rref(r)
    assert r2 == r and piv2 == piv
    assert gf.rank(m) == len(piv)


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_rank_matches_span_size(m):
    assert len(span_codes(m)) == m.q ** gf.rank(m)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_zassenhaus_dimension_law(data):
    a = data.draw(matrices(max_cols=3))
    b = data.draw(matrices(q_values=(a.q,), max_cols=3, rows=a.rows))
    inter = gf.column_space_intersection(a, b)
    brute = span_codes(a) & span_codes(b)
    assert span_codes(inter) == brute
    assert gf.rank(a) + gf.rank(b) == gf.rank(gf.hstack([a, b])) + gf.rank(inter)


@settings(max_examples=100, deadline=None)
@given(matrices(min_cols=1))
def test_canonical_basis_depends_only_on_span(m):
    rng = np.random.default_rng(gf.rank(m))
    mix = GfMatrix(rng.integers(0, m.q, size=(m.cols, m.cols)), m.q)
    while gf.rank(mix) < m.cols:
        mix = GfMatrix(rng.integers(0, m.q, size=(m.cols, m.cols)), m.q)
    assert gf.canonical_column_basis(m) == gf.canonical_column_basis(m @ mix)
