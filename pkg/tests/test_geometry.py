import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fraxterp.errors import DomainError, StructuralError
from fraxterp.geometry import (
    COMPACT_INTERVAL, HALF_LINE, REAL_LINE, Interval, check_point, compactify, decompactify,
    fmt_point, interior_probes, local_coordinate,
)

# x/(1+x) charts lose about x * eps relative precision, so stay below 1e6
finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_parse_and_print_round_trip():
    for text in ("[0, 1]", "(0, 1]", "[0, inf)", "(-inf, inf)", "[-2.5, 3)"):
        assert str(Interval.parse(text)) == text
    assert Interval.parse("[0, ∞]").hi == math.inf


def test_parse_rejects_garbage_and_bad_order():
    with pytest.raises(StructuralError):
        Interval.parse("0..1")
    with pytest.raises(StructuralError):
        Interval(2.0, 1.0)


def test_contains_honours_open_ends():
    iv = Interval(0.0, 1.0, True, False)
    assert iv.contains(0.0) and not iv.contains(1.0)
    assert list(iv.contains(np.array([-0.1, 0.0, 0.5, 1.0]))) == [False, True, True, False]
    assert iv.contains(Fraction(1, 2))


def test_nan_is_never_a_point():
    with pytest.raises(DomainError):
        check_point(float("nan"))
    assert fmt_point(math.inf) == "inf" and fmt_point(-math.inf) == "-inf"


def test_compactify_ends():
    assert compactify(HALF_LINE, math.inf) == 1.0
    assert compactify(REAL_LINE, -math.inf) == -1.0
    assert decompactify(HALF_LINE, 1.0) == math.inf
    assert compactify(HALF_LINE, 1.0) == 0.5


@given(st.floats(0, 1e6, allow_nan=False))
def test_half_line_round_trip(x):
    back = decompactify(HALF_LINE, compactify(HALF_LINE, x))
    assert back == pytest.approx(x, rel=1e-9, abs=1e-12)


@given(finite)
def test_real_line_round_trip_and_monotone(x):
    t = compactify(REAL_LINE, x)
    assert -1.0 <= t <= 1.0
    assert decompactify(REAL_LINE, t) == pytest.approx(x, rel=1e-9, abs=1e-12)
    assert compactify(REAL_LINE, x + 1.0) >= t


@pytest.mark.parametrize("iv", [Interval(0, 1), Interval(2, math.inf), Interval(-math.inf, 3),
                                Interval(-math.inf, math.inf)])
def test_local_coordinate_round_trip(iv):
    to_u, from_u, ulo, uhi = local_coordinate(iv)
    x = interior_probes(iv, 50)
    assert np.all(iv.contains(x))
    u = to_u(x)
    assert np.all((u > ulo) & (u < uhi))
    assert np.allclose(from_u(u), x, rtol=1e-9)


def test_compact_coordinates_are_identity():
    x = np.linspace(0, 1, 5)
    assert np.array_equal(compactify(COMPACT_INTERVAL, x), x)
