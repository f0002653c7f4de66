"""Ready-made operators: the [0, 1] example, its pullback, and a direct
construction on the half line."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError
from .functions import Constant, Hat, Piecewise, Polynomial, Pullback, RationalTail, ScalarFunction
from .geometry import COMPACT_INTERVAL, HALF_LINE, Interval
from .maps import Homeomorphism1D, affine, atan_scaled, compose, mobius, translation
from .partition import PartitionScheme, validate_partition
from .rb import FractalFunction, RBOperator, VerticalMap, evaluate, fractal_function

DIRECT = "direct"
PULLBACK = "pullback"


@dataclass
class Scenario:
    name: str
    operator: RBOperator
    provenance: str = DIRECT
    source: "Scenario | None" = None
    j: Homeomorphism1D | None = None
    notes: str = ""
    g: ScalarFunction | None = field(default=None, repr=False)

    def fixed_point(self, tol: float = 1e-10) -> FractalFunction:
        return fractal_function(self.operator, tol)

    @property
    def contraction(self) -> float:
        return self.operator.contraction


def _g_operator(scheme: PartitionScheme, g: ScalarFunction, scales) -> RBOperator:
    """Operator ``Phi h = g + sum s_i h o u_i^{-1}`` in offset/scale form."""
    bv = [VerticalMap.affine(Pullback(g, pc.map), s, pc.interval)
          for pc, s in zip(scheme.bounded_pieces, scales[:scheme.m])]
    uv = [VerticalMap.affine(Pullback(g, pc.map), s, pc.interval)
          for pc, s in zip(scheme.unbounded_pieces, scales[scheme.m:])]
    return RBOperator(scheme, bv, uv)


def build_example1() -> Scenario:
    """Hat offset on [0, 1] with halving maps and scales 4/5, -3/5."""
    I = Interval(0.0, 1.0)
    scheme = PartitionScheme(
        COMPACT_INTERVAL, I,
        [(I, affine(0.5, 0.0, I)), (I, affine(0.5, 0.5, I))])
    g = Hat(0.5, 0.5)
    op = _g_operator(scheme, g, [Constant(0.8), Constant(-0.6)])
    return Scenario("example1", op, DIRECT, g=g,
                    notes="g = (1/2 - |x - 1/2|)_+, b1 = x/2, b2 = (x+1)/2, s = (4/5, -3/5)")


def reciprocal_shift() -> Homeomorphism1D:
    """``j(x) = 1/(x+1)`` from the compactified half line onto [0, 1]."""
    return mobius(0.0, 1.0, 1.0, 1.0, Interval(0.0, math.inf))


def pullback_scenario(source: Scenario, j: Homeomorphism1D | None = None) -> Scenario:
    """Transport ``source`` to the compactified half line through ``j``.

    Pieces become ``j^{-1}`` of the source images, maps become
    ``j^{-1} o u_i o j`` and offsets ``p_i o j``; the fixed point of the
    result is ``f o j``.  All pulled-back maps are defined on the whole
    compactified half line, so they form a single family with empty core.
    """
    j = reciprocal_shift() if j is None else j
    src = source.operator
    if src.scheme.ambient != COMPACT_INTERVAL:
        raise StructuralError("pullback needs a source on a compact interval")
    if not j.codomain.same_as(src.scheme.X):
        raise StructuralError(f"j maps onto {j.codomain}, source lives on {src.scheme.X}")
    if not (j.domain.lo == 0.0 and math.isinf(j.domain.hi) and j.domain.closed_hi):
        raise StructuralError("j must be defined on the compactified half line [0, inf]")
    jinv = j.inverse_map()
    pieces, vmaps = [], []
    for pc, vm in zip(src.scheme.pieces, src.vmaps):
        if not vm.is_affine:
            raise StructuralError("pullback supports affine vertical maps only")
        if not pc.interval.same_as(src.scheme.X):
            raise StructuralError("pullback needs every source map defined on the whole interval")
        u_star = compose(jinv, compose(pc.map, j))
        V = j.domain
        off, sc = Pullback(vm.offset, j), Pullback(vm.scale, j)
        if not (math.isfinite(off.limit(1)) and math.isfinite(sc.limit(1))):
            raise StructuralError(f"{pc.pid}: pulled-back offset or scale has no limit at infinity")
        pieces.append((V, u_star))
        vmaps.append(VerticalMap.affine(off, sc, V))
    scheme = PartitionScheme(HALF_LINE, None, [], pieces, compactified=True)
    op = RBOperator(scheme, [], vmaps)
    return Scenario(f"{source.name}-pullback", op, PULLBACK, source=source, j=j,
                    g=Pullback(source.g, j) if source.g is not None else None,
                    notes=f"pullback of {source.name} by {j!r}")


def halfline_g() -> Piecewise:
    """``|x - 1/2| - 1/2`` on [0, 2] and ``2/x`` beyond."""
    return Piecewise([0.5, 2.0], [Polynomial([0.0, -1.0]), Polynomial([-1.0, 1.0]), RationalTail(2.0)])


def build_halfline_global() -> Scenario:
    """Direct construction on the half line: arctan and unit shift pieces."""
    V1 = Interval(0.0, math.inf, True, False)
    V2 = Interval(0.0, math.inf)
    scheme = PartitionScheme(
        HALF_LINE, None, [],
        [(V1, atan_scaled(V1)), (V2, translation(1.0, V2))], compactified=True)
    g = halfline_g()
    op = _g_operator(scheme, g, [Constant(0.75), Constant(0.7)])
    return Scenario("halfline", op, DIRECT, g=g,
                    notes="u1 = (2/pi) arctan, u2 = x + 1, s = (3/4, 7/10)")


def decay_report(f: FractalFunction, x_lo: float, x_hi: float, probes: int = 1000,
                 tol: float = 1e-10) -> tuple:
    """``(sup |x f(x)|, argmax)`` over log-spaced points of ``[x_lo, x_hi]``."""
    if f.scheme.ambient == COMPACT_INTERVAL:
        raise ValueError("decay report needs an unbounded ambient domain")
    if not 1.0 <= x_lo < x_hi:
        raise ValueError("need 1 <= x_lo < x_hi")
    x = np.geomspace(x_lo, x_hi, int(probes))
    v = np.abs(x * evaluate(f, x, tol))
    i = int(np.argmax(v))
    return float(v[i]), float(x[i])


def builtin(name: str) -> Scenario:
    if name == "example1":
        return build_example1()
    if name in ("example1-pullback", "pullback"):
        return pullback_scenario(build_example1())
    if name == "halfline":
        return build_halfline_global()
    raise KeyError(name)


def check(s: Scenario, resolution: int = 64):
    return validate_partition(s.operator.scheme, resolution)
