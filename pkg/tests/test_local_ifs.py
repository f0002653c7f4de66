import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_hausdorff

from fraxterp.errors import StructuralError
from fraxterp.functions import Constant, Polynomial
from fraxterp.geometry import Interval
from fraxterp.local_ifs import (
    CellSet, LocalIFS, LocalMap, Window, apply_floc, attractor_iterate, build_local_ifs,
    default_window, hausdorff_distance, rasterize_graph, write_pgm,
)
from fraxterp.maps import affine
from fraxterp.rb import VerticalMap
from fraxterp.scenarios import build_example1

UNIT = Window("compact", 0.0, 1.0, 0.0, 1.0)


def cells(window, n, pts):
    return CellSet.from_indices(window, n, n, pts)


def test_hausdorff_simple_examples():
    w = Window("compact", 0.0, 10.0, 0.0, 10.0)  # unit cells on a 10 x 10 grid
    a, b = cells(w, 10, [(0, 0)]), cells(w, 10, [(3, 0)])
    assert hausdorff_distance(a, b).distance == pytest.approx(3.0)
    c = cells(w, 10, [(0, 0), (5, 0)])
    rep = hausdorff_distance(a, c)
    assert rep.directed_ab == 0.0 and rep.directed_ba == pytest.approx(5.0)
    assert rep.distance == pytest.approx(5.0)


def test_hausdorff_empty_and_mismatch():
    e = CellSet.empty(UNIT, 4, 4)
    assert hausdorff_distance(e, e).distance == 0.0
    assert hausdorff_distance(e, CellSet.full(UNIT, 4, 4)).distance == math.inf
    with pytest.raises(StructuralError):
        hausdorff_distance(e, CellSet.empty(UNIT, 5, 4))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 11)), min_size=1, max_size=12),
       st.lists(st.tuples(st.integers(0, 15), st.integers(0, 11)), min_size=1, max_size=12))
def test_hausdorff_matches_brute_force(pa, pb):
    w = Window("compact", 0.0, 2.0, -1.0, 2.0)
    a = CellSet.from_indices(w, 16, 12, pa)
    b = CellSet.from_indices(w, 16, 12, pb)
    ta, ya = a.centers()
    tb, yb = b.centers()
    ref = brute_hausdorff(np.c_[ta, ya], np.c_[tb, yb])
    assert hausdorff_distance(a, b).distance == pytest.approx(ref, rel=1e-12)


def toy_ifs():
    """x fixed on [0, .4] with y/2, x fixed on [.6, 1] with (y+1)/2."""
    I1, I2 = Interval(0.0, 0.4), Interval(0.6, 1.0)
    m1 = LocalMap(None, I1, affine(1.0, 0.0, I1), VerticalMap.affine(Constant(0.0), Constant(0.5), I1))
    m2 = LocalMap(None, I2, affine(1.0, 0.0, I2), VerticalMap.affine(Constant(0.5), Constant(0.5), I2))
    return LocalIFS("compact", (m1, m2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_toy_ifs_union_and_monotonicity(seed):
    rng = np.random.default_rng(seed)
    ifs = toy_ifs()
    A = CellSet(UNIT, rng.random((20, 20)) < 0.2)
    B = CellSet(UNIT, rng.random((20, 20)) < 0.2)
    FA, FB = apply_floc(ifs, A), apply_floc(ifs, B)
    assert apply_floc(ifs, A.union(B)) == FA.union(FB)
    assert FA.issubset(apply_floc(ifs, A.union(B)))


def test_toy_ifs_images_stay_in_their_domains():
    ifs = toy_ifs()
    img = apply_floc(ifs, CellSet.full(UNIT, 20, 20))
    t, y = img.centers()
    half = 0.5 * img.cell_size[0]
    # every image cell meets one of the two domains
    left, right = t - half <= 0.4, t + half >= 0.6
    assert np.all(left | right)
    assert np.all(y[left] < 0.5) and np.all(y[right] > 0.5)
    assert apply_floc(ifs, CellSet.empty(UNIT, 20, 20)).is_empty()


def test_attractor_from_full_window_approaches_graph():
    s = build_example1()
    f = s.fixed_point()
    w = default_window(f)
    ifs = build_local_ifs(s.operator)
    A, trace = attractor_iterate(ifs, CellSet.full(w, 128, 128), 60)
    G = rasterize_graph(f, w, 128, 128)
    assert trace[-1].distance <= trace[0].distance
    assert hausdorff_distance(A, G).in_diagonals <= 2.0


def test_graph_raster_contains_sampled_points():
    s = build_example1()
    f = s.fixed_point()
    w = default_window(f)
    G = rasterize_graph(f, w, 64, 64)
    x = np.linspace(0.0, 1.0, 4001)
    from fraxterp.rb import evaluate
    y = evaluate(f, x)
    i = np.minimum((x * 64).astype(int), 63)
    j = np.minimum(((y - w.y_lo) / (w.y_hi - w.y_lo) * 64).astype(int), 63)
    assert G.occupied[i, j].all()


def test_write_pgm(tmp_path):
    s = CellSet.from_indices(Window("compact", 0, 1, 0, 1), 3, 2, [(0, 0), (2, 1)])
    p = tmp_path / "a.pgm"
    write_pgm(s, p)
    assert p.read_text() == "P2\n3 2\n1\n0 0 1\n1 0 0\n"


def test_window_validation():
    with pytest.raises(StructuralError):
        Window("compact", 1.0, 0.0, 0.0, 1.0)
    w = Window.from_x("half_line", 0.0, math.inf, -1.0, 1.0)
    assert (w.t_lo, w.t_hi) == (0.0, 1.0)


def test_threads_do_not_change_results(monkeypatch):
    s = build_example1()
    ifs = build_local_ifs(s.operator)
    A = CellSet(UNIT, np.random.default_rng(3).random((40, 40)) < 0.3)
    serial = apply_floc(ifs, A)
    monkeypatch.setenv("FRAXTERP_THREADS", "4")
    assert apply_floc(ifs, A) == serial


def test_empty_seed_stays_empty():
    ifs = build_local_ifs(build_example1().operator)
    A, trace = attractor_iterate(ifs, CellSet.empty(UNIT, 16, 16), 5)
    assert A.is_empty() and all(r.distance == 0.0 for r in trace)


def test_union_of_toy_attractors_is_invariant():
    # y = 0 over [0, .4] and y = 1 over [.6, 1] are the two attractors
    ifs = toy_ifs()
    w = Window("compact", 0.0, 1.0, -0.1, 1.1)
    occ = np.zeros((50, 60), dtype=bool)
    t = (np.arange(50) + 0.5) / 50
    occ[t <= 0.4, 5] = True
    occ[t >= 0.6, 54] = True
    A = CellSet(w, occ)
    assert hausdorff_distance(apply_floc(ifs, A), A).in_diagonals <= 1.0


def test_zero_offset_graph_is_invariant():
    from fraxterp.rb import RBOperator, fractal_function
    sch = build_example1().operator.scheme
    vms = [VerticalMap.affine(Constant(0.0), Constant(0.5), pc.interval) for pc in sch.pieces]
    op = RBOperator(sch, vms, [])
    f = fractal_function(op)
    from fraxterp.local_ifs import graph_invariance
    rep = graph_invariance(build_local_ifs(op), f, Window("compact", 0.0, 1.0, -1.0, 1.0), (64, 64))
    assert rep.in_diagonals <= 1.0
