import numpy as np
import pytest

from fraxterp.algebra import (
    OffsetTuple, Scales, evaluate_tensor, lagrange_basis, lagrange_polynomials, offsets_of,
    operator_for, tensor, tensor_iterate, theta,
)
from fraxterp.functions import Constant, Hat, Polynomial, Pullback
from fraxterp.rb import evaluate
from fraxterp.scenarios import build_example1, build_halfline_global


@pytest.fixture(scope="module")
def setup():
    s = build_example1()
    sch = s.operator.scheme
    scales = Scales((Constant(0.8), Constant(-0.6)), ())
    return s, sch, scales


def test_lagrange_polynomials_are_cardinal():
    nodes = [0.0, 0.3, 1.0]
    L = lagrange_polynomials(nodes)
    V = np.array([[float(l(x)) for x in nodes] for l in L])
    assert np.allclose(V, np.eye(3))
    with pytest.raises(ValueError):
        lagrange_polynomials([0.0, 0.0])


def test_theta_reproduces_the_builtin(setup):
    s, sch, scales = setup
    offs = OffsetTuple(tuple(vm.offset for vm in s.operator.bounded_vmaps), ())
    x = np.linspace(0, 1, 101)
    assert np.allclose(evaluate(theta(sch, scales, offs), x), evaluate(s.fixed_point(), x))


def test_single_piece_constant_offset(setup):
    _, sch, scales = setup
    basis = lagrange_basis(sch, scales, (1, 0), ((0.5,), ()))
    assert basis.dimension == 1
    c = 0.7
    offs = OffsetTuple((Constant(c), Constant(0.0)), ())
    x = np.linspace(0, 1, 33)
    ref = evaluate(theta(sch, scales, offs), x)
    assert np.allclose(c * evaluate(basis.elements[0].function, x), ref, atol=1e-9)


def test_basis_argument_errors(setup):
    _, sch, scales = setup
    with pytest.raises(ValueError):
        lagrange_basis(sch, scales, (2, 2), ((0.0,), (0.0, 1.0)))
    with pytest.raises(ValueError):
        lagrange_basis(sch, scales, (2,), ((0.0, 1.0),))
    with pytest.raises(ValueError):
        lagrange_basis(sch, scales, (2, 2), ((0.0, 0.0), (0.0, 1.0)))


def test_offsets_of_round_trip(setup):
    s, sch, scales = setup
    f = s.fixed_point()
    offs = offsets_of(f, sch, scales)
    x = np.linspace(0, 1, 41)
    # recovered offsets equal g o b_j on each piece
    for k, pc in enumerate(sch.pieces):
        assert np.allclose(offs.all[k](x), Hat(0.5, 0.5)(pc.map.rule(x)), atol=1e-8)
    assert np.allclose(evaluate(theta(sch, scales, offs), x), evaluate(f, x), atol=1e-8)


def test_operator_for_checks_lengths(setup):
    _, sch, scales = setup
    with pytest.raises(ValueError):
        operator_for(sch, scales, OffsetTuple((Constant(0.0),), ()))


def test_tensor_values_and_rates():
    a, b = build_example1(), build_halfline_global()
    t = tensor(a.fixed_point(), b.fixed_point())
    assert t.contraction == 0.8
    v, err = evaluate_tensor(t, 0.25, 3.0)
    assert v == pytest.approx(0.65 * 41 / 30, abs=1e-9)
    assert err > 0 and t(0.25, 3.0) == v
    d, rates = tensor_iterate(a.operator, b.operator, 10)
    assert len(d) == 11 and np.all(rates[2:] <= 0.85)
