from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from projrig import linalg

small_ints = st.integers(min_value=-4, max_value=4)


def int_matrices(max_rows=6, max_cols=6):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_ints, min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_exact_rank_matches_sympy(rows):
    a = linalg.exact_array(rows)
    assert linalg.rank(a) == sympy.Matrix(rows).rank()


@settings(max_examples=100, deadline=None)
@given(int_matrices())
def test_exact_kernel_is_annihilated_and_complete(rows):
    a = linalg.exact_array(rows)
    res = linalg.rank_and_kernel(a)
    assert res.rank + res.nullity == a.shape[1]
    assert all(x == 0 for x in a.dot(res.kernel).reshape(-1))
    assert linalg.span_dimension(res.kernel) == res.nullity


@settings(max_examples=60, deadline=None)
@given(int_matrices(5, 5))
def test_left_kernel(rows):
    a = linalg.exact_array(rows)
    left = linalg.left_kernel(a)
    assert left.shape[1] == a.shape[0] - linalg.rank(a)
    assert all(x == 0 for x in left.T.dot(a).reshape(-1))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(small_ints, min_size=3, max_size=3), min_size=3, max_size=3))
def test_determinant_and_inverse(rows):
    a = linalg.exact_array(rows)
    det = linalg.determinant(a)
    assert det == sympy.Matrix(rows).det()
    if det != 0:
        inv = linalg.inverse(a)
        assert (a.dot(inv) == linalg.identity(3, True)).all()


def test_bareiss_keeps_integers():
    a = linalg.exact_array([[2, 4, 6], [1, 3, 5], [3, 7, 11]])
    rows, pivots = linalg.bareiss_echelon(a)
    assert pivots == [0, 1]
    assert all(isinstance(v, int) for row in rows for v in row)


def test_fraction_entries():
    a = linalg.exact_array([["1/2", "1/3"], ["1/4", "1/6"]])
    assert linalg.rank(a) == 1
    assert a[0, 0] == Fraction(1, 2)


def test_float_rank_threshold():
    a = np.array([[1.0, 0.0], [0.0, 1e-14]])
    res = linalg.rank_and_kernel(a)
    assert res.rank == 1
    assert res.threshold == pytest.approx(2e-9)
    assert np.allclose(np.abs(res.kernel[:, 0]), [0, 1])


def test_empty_matrices():
    res = linalg.rank_and_kernel(linalg.zeros((0, 3), True))
    assert res.rank == 0 and res.nullity == 3
    res = linalg.rank_and_kernel(np.zeros((0, 2)))
    assert res.rank == 0 and res.nullity == 2


def test_intersection_dimension():
    e = linalg.identity(3, True)
    u = e[:, :2]
    v = e[:, 1:]
    assert linalg.intersection_dimension(u, v) == 1
    assert linalg.intersection_dimension(u, u) == 2
    assert linalg.intersection_dimension(e[:, :1], e[:, 2:]) == 0


def test_singular_inverse_raises():
    with pytest.raises(np.linalg.LinAlgError):
        linalg.inverse(linalg.exact_array([[1, 2], [2, 4]]))
