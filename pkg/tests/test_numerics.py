from fractions import Fraction as F

import numpy as np
import pytest

from cantorfree.errors import InvalidParameterError
from cantorfree.numerics import (
    RationalMatrix,
    Tolerance,
    as_fraction,
    max_ratio,
    metric_closure,
    min_ratio,
    to_float_array,
    triangle_defect,
)


def test_as_fraction_conversions():
    assert as_fraction("3/7") == F(3, 7)
    assert as_fraction(5) == F(5)
    assert as_fraction(F(1, 3)) == F(1, 3)
    assert as_fraction(0.5) == F(1, 2)  # exact binary value
    with pytest.raises(InvalidParameterError):
        as_fraction(object())


def test_rational_matrix_reduces_and_freezes():
    m = RationalMatrix(np.array([[0, 4], [4, 0]], dtype=np.int64), 8)
    assert m.den == 2 and m.entry(0, 1) == F(1, 2)
    with pytest.raises(ValueError):
        m.num[0, 0] = 3


def test_rational_matrix_from_fractions_and_eq():
    a = RationalMatrix.from_fractions([[0, F(1, 6)], [F(1, 6), 0]])
    b = RationalMatrix(np.array([[0, 1], [1, 0]], dtype=np.int64), 6)
    assert a == b
    assert a.entry(1, 0) == F(1, 6)


def test_object_fallback_for_huge_numerators():
    big = 10 ** 30
    m = RationalMatrix.from_fractions([[0, F(1, big)], [F(1, big), 0]])
    assert m.num.dtype == object
    assert m.entry(0, 1) == F(1, big)
    assert to_float_array(m.num, m.den)[0, 1] == pytest.approx(1e-30)


def test_scaled_and_restrict():
    m = RationalMatrix.from_fractions([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    s = m.scaled(F(3, 2))
    assert s.entry(0, 2) == 3
    r = m.restrict([0, 2])
    assert r.n == 2 and r.entry(0, 1) == 2


def test_triangle_defect_and_closure():
    bad = np.array([[0, 1, 3], [1, 0, 1], [3, 1, 0]], dtype=np.int64)
    assert triangle_defect(bad) == 1
    closed = metric_closure(bad)
    assert triangle_defect(closed) == 0
    assert closed[0, 2] == 2


def test_triangle_defect_object_dtype():
    bad = np.array([[0, 1, 3], [1, 0, 1], [3, 1, 0]], dtype=object)
    assert triangle_defect(bad) == 1


def test_max_min_ratio_exactness_on_close_values():
    # two ratios that differ only at high precision; float screening alone
    # cannot separate them
    num_a = np.array([10 ** 15 + 1, 10 ** 15], dtype=object)
    num_b = np.array([10 ** 15, 10 ** 15], dtype=object)
    mask = np.array([True, True])
    top = max_ratio(num_a, 1, num_b, 1, mask)
    assert top == F(10 ** 15 + 1, 10 ** 15)
    bot = min_ratio(num_a, 1, num_b, 1, mask)
    assert bot == 1


def test_tolerance_policy_modes():
    exact = Tolerance("rational")
    assert exact.lt(F(1, 3), F(2, 3)) and not exact.lt(F(1, 3), F(1, 3))
    assert exact.eq(F(1, 2), F(1, 2))
    dbl = Tolerance("double", tol=1e-9)
    assert dbl.eq(1.0, 1.0 + 1e-12)
    assert not dbl.lt(1.0, 1.0 + 1e-12)  # strictness needs clearance
    assert dbl.lt(1.0, 1.1)
    with pytest.raises(InvalidParameterError):
        Tolerance("decimal")
