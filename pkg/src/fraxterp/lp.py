"""Lp contractivity of RB operators under Lebesgue measure.

The criterion combines, per piece, a bound ``J`` on the derivative of the
inverse piece map with an Lp norm of the scale function:

* ``0 < p < 1``: ``sum_k J_k * ||s_k||_p^p``
* ``1 <= p < inf``: the same sum raised to ``1/p``
* ``p = inf``: max sup-norm over bounded pieces plus max over unbounded ones

The operator is Lp-contractive when the criterion is below 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import ScalarFunction
from .geometry import Interval, local_coordinate
from .maps import Homeomorphism1D

JACOBIAN_UNBOUNDED = math.inf

GAUSS5 = "gauss5"
MIDPOINT = "midpoint"

REGIME_SMALL = "(0,1)"
REGIME_FINITE = "[1,inf)"
REGIME_SUP = "{inf}"

_BLOWUP = 1e12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class QuadratureRule:
    """Composite rule applied to every panel between breakpoints.

    Unbounded pieces are integrated after the substitution
    ``x = a + u/(1-u)`` with its Jacobian ``1/(1-u)^2``.
    """

    scheme: str = GAUSS5
    subdivisions: int = 64
    tail_policy: str = "compactify"

    def __post_init__(self):
        if self.scheme not in (GAUSS5, MIDPOINT):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if int(self.subdivisions) < 1:
            raise ValueError("subdivisions must be >= 1")
        if self.tail_policy != "compactify":
            raise ValueError(f"unknown tail policy {self.tail_policy!r}")

    def nodes(self, lo: float, hi: float):
        """Nodes and weights of the composite rule on ``[lo, hi]``."""
        edges = np.linspace(lo, hi, int(self.subdivisions) + 1)
        a, b = edges[:-1, None], edges[1:, None]
        if self.scheme == MIDPOINT:
            return (0.5 * (a + b)).ravel(), (b - a).ravel()
        half = 0.5 * (b - a)
        x = 0.5 * (a + b) + half * _GL_NODES[None, :]
        w = half * _GL_WEIGHTS[None, :]
        return x.ravel(), w.ravel()

    def doubled(self) -> "QuadratureRule":
        return QuadratureRule(self.scheme, 2 * int(self.subdivisions), self.tail_policy)


# -- Jacobian bounds -----------------------------------------------------------------

def _inverse_derivative(m: Homeomorphism1D, y) -> np.ndarray:
    with np.errstate(all="ignore"):
        d = np.abs(m.derivative(m.inverse_map().rule(y)))
        return np.where(d > 0, 1.0 / d, math.inf)


def jacobian_bound(m: Homeomorphism1D, piece: Interval, probes: int = 2048,
                   levels: int = 14) -> float:
    """Probed ``sup |D m^{-1}|`` over the image of ``piece``.

    Besides a uniform sweep in the image's local chart, each end is
    approached at chart distances ``10^-1 ... 10^-levels``.  Returns
    :data:`JACOBIAN_UNBOUNDED` when the values near an end pass ``1e12``
    and keep growing.
    """
    img = m.image(piece)
    if img.degenerate:
        return 0.0
    _, from_u, ulo, uhi = local_coordinate(img)
    u = ulo + (uhi - ulo) * (np.arange(probes) + 0.5) / probes
    best = float(np.max(_inverse_derivative(m, from_u(u))))
    width = uhi - ulo
    for end, sign in ((ulo, 1.0), (uhi, -1.0)):
        trace = []
        for k in range(1, levels + 1):
            uk = end + sign * width * 10.0 ** -k
            v = float(_inverse_derivative(m, from_u(np.array([uk])))[0])
            trace.append(v)
        finite_end = math.isfinite(float(from_u(np.array([end]))[0]))
        closed = img.closed_lo if sign > 0 else img.closed_hi
        if closed and finite_end:
            trace.append(float(_inverse_derivative(m, from_u(np.array([end])))[0]))
        if any(math.isinf(v) or math.isnan(v) for v in trace[-2:]):
            return JACOBIAN_UNBOUNDED
        if trace[-1] > _BLOWUP and trace[-1] > trace[-2]:
            return JACOBIAN_UNBOUNDED
        best = max(best, max(trace))
    return best


# -- norms ----------------------------------------------------------------------------

def _panels(f: ScalarFunction, piece: Interval) -> list:
    cuts = [t for t in f.breakpoints() if piece.lo < t < piece.hi]
    ends = [piece.lo] + sorted(set(cuts)) + [piece.hi]
    return list(zip(ends[:-1], ends[1:]))


def _tail_diverges(f: ScalarFunction, p: float, side: int) -> bool:
    """Heuristic divergence test of ``int |f|^p`` towards ``side * inf``."""
    lim = f.limit(side)
    if math.isfinite(lim) and lim != 0.0:
        return True
    return not _decays(f, p, side)


def _decays(f: ScalarFunction, p: float, side: int) -> bool:
    x = side * np.array([1e6, 1e8, 1e10])
    with np.errstate(all="ignore"):
        w = np.abs(x) * np.abs(f(x)) ** p
    if not np.all(np.isfinite(w)):
        return False
    return bool(w[-1] < 1e-6 or (w[2] < 0.5 * w[1] and w[1] < 0.5 * w[0]))


def lp_integral(f: ScalarFunction, piece: Interval, p: float,
                rule: QuadratureRule | None = None) -> float:
    """``int_piece |f|^p dx`` (``inf`` when the tail integral diverges)."""
    rule = QuadratureRule() if rule is None else rule
    p = float(p)
    if not p > 0 or math.isinf(p):
        raise ValueError(f"p must lie in (0, inf), got {p}")
    if piece.degenerate:
        return 0.0
    if math.isinf(piece.hi) and _tail_diverges(f, p, 1):
        return math.inf
    if math.isinf(piece.lo) and _tail_diverges(f, p, -1):
        return math.inf
    to_u, from_u, _, _ = local_coordinate(piece)
    total = 0.0
    for lo, hi in _panels(f, piece):
        if piece.bounded:
            x, w = rule.nodes(lo, hi)
            total += float(np.sum(w * np.abs(f(x)) ** p))
            continue
        ulo, uhi = float(to_u(lo)), float(to_u(hi))
        u, w = rule.nodes(ulo, uhi)
        x = from_u(u)
        # every unbounded chart has dx/du = 1/(1-|u|)^2
        dxdu = 1.0 / (1.0 - np.abs(u)) ** 2
        total += float(np.sum(w * dxdu * np.abs(f(x)) ** p))
    return total


def lp_norm(f: ScalarFunction, piece: Interval, p: float,
            rule: QuadratureRule | None = None) -> float:
    """``||f||_{L^p(piece)}``; ``p = inf`` gives the sup of ``|f|``."""
    p = float(p)
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    if math.isinf(p):
        return float(f.sup_abs(piece))
    return lp_integral(f, piece, p, rule) ** (1.0 / p)


# -- criterion ------------------------------------------------------------------------

def regime_of(p: float) -> str:
    p = float(p)
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    if math.isinf(p):
        return REGIME_SUP
    return REGIME_SMALL if p < 1 else REGIME_FINITE


@dataclass(frozen=True)
class LpReport:
    p: float
    jacobians: tuple
    scale_norms: tuple
    criterion_value: float
    passes: bool
    regime: str
    reason: str = ""
    sup_norm_factor: float = math.nan

    def lines(self) -> list:
        out = [f"p = {self.p:g}  regime {self.regime}"]
        for k, (J, s) in enumerate(zip(self.jacobians, self.scale_norms)):
            out.append(f"  piece {k + 1}: J = {J:.12g}  scale norm = {s:.12g}")
        out.append(f"criterion {self.criterion_value:.12g}  ({'pass' if self.passes else 'fail'})")
        out.append(f"sup-norm factor {self.sup_norm_factor:.12g}")
        if self.reason:
            out.append(self.reason)
        return out


def lp_contractivity(op, p: float, rule: QuadratureRule | None = None) -> LpReport:
    """Evaluate the Lp contractivity criterion of an affine RB operator."""
    regime = regime_of(p)
    p = float(p)
    if not op.is_affine:
        raise ValueError("Lp criterion needs scale functions in affine form")
    rule = QuadratureRule() if rule is None else rule
    pieces = op.scheme.pieces
    J = tuple(jacobian_bound(pc.map, pc.interval) for pc in pieces)
    norms = tuple(lp_norm(vm.scale, pc.interval, p, rule) for pc, vm in zip(pieces, op.vmaps))
    factor = op.contraction
    if any(math.isinf(j) for j in J):
        bad = [str(pc.pid) for pc, j in zip(pieces, J) if math.isinf(j)]
        return LpReport(p, J, norms, math.inf, False, regime,
                        f"Jacobian hypothesis violated ({', '.join(bad)})", factor)
    if regime == REGIME_SUP:
        m = op.scheme.m
        value = max(norms[:m], default=0.0) + max(norms[m:], default=0.0)
    else:
        total = sum(j * s ** p for j, s in zip(J, norms))
        value = total if regime == REGIME_SMALL else total ** (1.0 / p)
    reason = "" if math.isfinite(value) else "scale function not p-integrable"
    return LpReport(p, J, norms, float(value), bool(value < 1.0), regime, reason, factor)
