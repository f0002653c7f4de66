import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraxterp.errors import StructuralError
from fraxterp.functions import (
    Constant, Hat, LinearCombination, Piecewise, Polynomial, Pullback, RationalTail,
    linear_combination,
)
from fraxterp.geometry import Interval
from fraxterp.maps import mobius
from fraxterp.scenarios import halfline_g

J = mobius(0.0, 1.0, 1.0, 1.0, Interval(0.0, math.inf))

FUNCTIONS = {
    "constant": Constant(-0.3),
    "polynomial": Polynomial([0.1, -2.0, 0.5, 1.0]),
    "hat": Hat(0.5, 0.5),
    "piecewise": halfline_g(),
    "pullback": Pullback(Hat(0.5, 0.5), J),
    "combination": LinearCombination([(2.0, Hat(0.5, 0.5)), (-1.0, Polynomial([0.0, 1.0]))]),
}


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.0, 10.0), w=st.floats(0.0, 5.0))
def test_bounds_enclose_samples(name, a, w):
    f = FUNCTIONS[name]
    lo, hi = f.bounds(a, a + w)
    x = np.linspace(a, a + w, 257)
    v = f(x)
    assert lo <= v.min() + 1e-12 and v.max() <= hi + 1e-12


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_vectorised_bounds_match_scalar(name):
    f = FUNCTIONS[name]
    rng = np.random.default_rng(1)
    lo = rng.uniform(0, 6, 64)
    hi = lo + rng.uniform(0, 3, 64)
    a, b = f.bounds_many(lo, hi)
    ref = np.array([f.bounds(u, v) for u, v in zip(lo, hi)])
    assert np.allclose(a, ref[:, 0]) and np.allclose(b, ref[:, 1])


def test_halfline_offset_values_and_limit():
    g = halfline_g()
    assert list(g(np.array([0.0, 0.5, 2.0, 4.0]))) == [0.0, -0.5, 1.0, 0.5]
    assert g(math.inf) == 0.0 and g.limit(1) == 0.0


def test_exact_paths_agree_with_floats():
    x = Fraction(3, 7)
    for name, f in FUNCTIONS.items():
        assert float(f.exact(x)) == pytest.approx(float(f(float(x))), abs=1e-15), name
    assert Hat(0.5, 0.5).exact(Fraction(1, 4)) == Fraction(1, 4)
    assert RationalTail(2.0).exact(Fraction(3)) == Fraction(2, 3)


def test_rational_tail_pole_bounds():
    assert RationalTail(2.0).bounds(-1.0, 1.0) == (-math.inf, math.inf)
    assert RationalTail(2.0).bounds(2.0, 4.0) == (0.5, 1.0)


def test_pullback_limit_at_infinity():
    assert FUNCTIONS["pullback"].limit(1) == 0.0
    assert FUNCTIONS["pullback"](math.inf) == 0.0


def test_linear_combination_folds_polynomials():
    f = linear_combination([(2.0, Polynomial([1.0, 1.0])), (3.0, Constant(1.0))])
    assert isinstance(f, Polynomial)
    assert f(2.0) == pytest.approx(9.0)


def test_construction_errors():
    with pytest.raises(StructuralError):
        Hat(0.5, 0.5, slope=0.0)
    with pytest.raises(StructuralError):
        Piecewise([1.0, 0.5], [Constant(0), Constant(1), Constant(2)])
    with pytest.raises(StructuralError):
        Piecewise([1.0], [Constant(0)])


def test_multiprecision_paths_agree_with_floats():
    import mpmath
    ctx = mpmath.MPContext()
    ctx.dps = 40
    for x in (0.0, 3 / 7, 1.75, 2.5, 40.0):
        for name, f in FUNCTIONS.items():
            assert float(f.hp(ctx.mpf(x), ctx)) == pytest.approx(float(f(x)), abs=1e-14), name
    assert float(halfline_g().hp(ctx.inf, ctx)) == 0.0
