import math

import numpy as np
import pytest

from oracles import halfline_g, orbit_oracle

from fraxterp.errors import StructuralError
from fraxterp.geometry import Interval
from fraxterp.maps import affine, mobius
from fraxterp.rb import evaluate
from fraxterp.scenarios import (
    PULLBACK, build_example1, build_halfline_global, builtin, decay_report, pullback_scenario,
)


def test_builtin_names():
    assert builtin("example1").name == "example1"
    assert builtin("example1-pullback").provenance == PULLBACK
    assert builtin("halfline").contraction == 0.75
    with pytest.raises(KeyError):
        builtin("nope")


def test_pullback_keeps_contraction_and_end_value():
    s = pullback_scenario(build_example1())
    assert s.contraction == 0.8
    assert s.operator.scheme.n == 2 and s.operator.scheme.m == 0
    f = s.fixed_point()
    assert evaluate(f, math.inf) == 0.0
    # f*(0) = f(j(0)) = f(1) = 0 and f*(1) = f(1/2) = 0.5
    assert evaluate(f, np.array([0.0, 1.0])) == pytest.approx([0.0, 0.5], abs=1e-9)


def test_pullback_rejects_wrong_j():
    bad = mobius(0.0, 2.0, 1.0, 1.0, Interval(0.0, math.inf))  # onto [0, 2]
    with pytest.raises(StructuralError):
        pullback_scenario(build_example1(), bad)
    with pytest.raises(StructuralError):
        pullback_scenario(build_halfline_global())


def test_decay_report_matches_orbit_oracle():
    f = build_halfline_global().fixed_point()
    sup, where = decay_report(f, 10.0, 1e4, probes=400)
    pieces = [(lambda v: v < 1.0, lambda v: math.tan(0.5 * math.pi * v), 0.75),
              (lambda v: v >= 1.0, lambda v: v - 1.0, 0.7)]
    x = np.geomspace(10.0, 1e4, 400)
    ref = max(abs(v * orbit_oracle(v, lambda u: float(halfline_g(u)), pieces, 400)) for v in x)
    assert sup == pytest.approx(ref, abs=1e-8)
    assert 10.0 <= where <= 1e4
    # x f(x) tends to 2 / (1 - 0.7) as x grows
    assert 1e5 * evaluate(f, 1e5) == pytest.approx(2 / 0.3, rel=1e-3)
    with pytest.raises(ValueError):
        decay_report(build_example1().fixed_point(), 1.0, 2.0)
