"""Linear structure of fractal functions with fixed scales.

For fixed scale tuples the map ``theta: (offsets) -> fixed point`` is
linear and bijective, so polynomial offsets of given orders span a finite
dimensional space with a Lagrange-type basis.  Tensor products of two
fractal functions are evaluated through their factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functions import Constant, Custom, Polynomial, ScalarFunction
from .partition import PartitionScheme
from .rb import (
    FractalFunction, RBOperator, VerticalMap, evaluate, fractal_function,
    iterates_at, probe_points,
)


def _fn(v) -> ScalarFunction:
    return v if isinstance(v, ScalarFunction) else Constant(v)


@dataclass(frozen=True)
class OffsetTuple:
    bounded: tuple = ()
    unbounded: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "bounded", tuple(_fn(v) for v in self.bounded))
        object.__setattr__(self, "unbounded", tuple(_fn(v) for v in self.unbounded))

    @property
    def all(self) -> tuple:
        return self.bounded + self.unbounded

    @classmethod
    def zeros(cls, scheme: PartitionScheme) -> "OffsetTuple":
        return cls((Constant(0.0),) * scheme.m, (Constant(0.0),) * scheme.n)


@dataclass(frozen=True)
class Scales:
    """Scale tuples ``s`` (bounded pieces) and ``t`` (unbounded pieces)."""

    s: tuple = ()
    t: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(_fn(v) for v in self.s))
        object.__setattr__(self, "t", tuple(_fn(v) for v in self.t))

    @property
    def all(self) -> tuple:
        return self.s + self.t


def operator_for(scheme: PartitionScheme, scales: Scales, offsets: OffsetTuple) -> RBOperator:
    if len(offsets.bounded) != scheme.m or len(offsets.unbounded) != scheme.n:
        raise ValueError("offset tuple does not match the scheme's pieces")
    if len(scales.s) != scheme.m or len(scales.t) != scheme.n:
        raise ValueError("scale tuple does not match the scheme's pieces")
    vm = [VerticalMap.affine(o, s, pc.interval)
          for pc, o, s in zip(scheme.pieces, offsets.all, scales.all)]
    return RBOperator(scheme, vm[:scheme.m], vm[scheme.m:])


def theta(scheme: PartitionScheme, scales: Scales, offsets: OffsetTuple,
          tol: float = 1e-10) -> FractalFunction:
    """Fixed point ``f(p, q)`` for the given offsets and fixed scales."""
    return fractal_function(operator_for(scheme, scales, offsets), tol)


def offsets_of(f, scheme: PartitionScheme, scales: Scales, tol: float = 1e-10) -> OffsetTuple:
    """Offsets ``f o b_j - s_j f`` and ``f o u_i - t_i f`` reproducing ``f``.

    ``f`` is any vectorised callable bounded by its ``value_bound``
    attribute (fractal functions have one).
    """
    bound = getattr(f, "value_bound", None)
    call = (lambda x: evaluate(f, x, tol)) if isinstance(f, FractalFunction) else f
    out = []
    for pc, sc in zip(scheme.pieces, scales.all):
        m = pc.map

        def rule(x, m=m, sc=sc):
            x = np.asarray(x, dtype=float)
            return call(m.rule(x)) - sc(x) * call(x)

        b = (1.0 + sc.sup_abs(pc.interval)) * bound if bound is not None else np.max(np.abs(rule(
            np.linspace(pc.interval.lo, min(pc.interval.hi, 1e6), 1001))))
        out.append(Custom(rule, b))
    return OffsetTuple(tuple(out[:scheme.m]), tuple(out[scheme.m:]))


# -- Lagrange bases -------------------------------------------------------------------

def lagrange_polynomials(nodes) -> list:
    """Lagrange polynomials ``L_k`` with ``L_k(nodes[i]) = delta_ik``."""
    x = np.asarray(nodes, dtype=float)
    if len(np.unique(x)) != len(x):
        raise ValueError(f"duplicate nodes in {list(nodes)}")
    n = len(x)
    V = np.vander(x, n, increasing=True)
    coeffs = np.linalg.solve(V, np.eye(n))
    return [Polynomial(coeffs[:, k]) for k in range(n)]


@dataclass
class BasisElement:
    piece: int  # flat piece index
    node: float
    polynomial: Polynomial
    function: FractalFunction


@dataclass
class BasisSet:
    scheme: PartitionScheme
    scales: Scales
    nodes: tuple
    elements: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.elements)

    def coefficients(self, offsets: OffsetTuple) -> np.ndarray:
        """Values of each piece's offset at that piece's nodes."""
        fns = offsets.all
        return np.array([float(fns[e.piece](e.node)) for e in self.elements])

    def combine(self, coeffs, x, tol: float = 1e-10):
        """``sum_k coeffs[k] * element_k(x)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, e in zip(coeffs, self.elements):
            if c != 0.0:
                out = out + c * evaluate(e.function, x, tol)
        return out

    def reconstruct(self, offsets: OffsetTuple, x, tol: float = 1e-10):
        return self.combine(self.coefficients(offsets), x, tol)


def lagrange_basis(scheme: PartitionScheme, scales: Scales, orders, nodes,
                   tol: float = 1e-10) -> BasisSet:
    """Fractal Lagrange interpolants for per-piece polynomial orders.

    ``orders[k]`` is the order (number of coefficients) for flat piece
    ``k`` and ``nodes[k]`` its node sequence.  Element ``(k, kappa)`` is the
    fixed point whose offset is ``L_kappa`` on piece ``k`` and zero on
    every other piece.
    """
    orders = [int(o) for o in orders]
    if len(orders) != len(scheme.pieces) or len(nodes) != len(scheme.pieces):
        raise ValueError(f"need orders and nodes for all {len(scheme.pieces)} pieces")
    basis = BasisSet(scheme, scales, tuple(tuple(float(v) for v in nd) for nd in nodes))
    for k, (order, nd) in enumerate(zip(orders, nodes)):
        if len(nd) != order:
            raise ValueError(f"piece {k + 1}: {len(nd)} nodes for order {order}")
        iv = scheme.pieces[k].interval
        if order and not np.all(iv.contains(np.asarray(nd, dtype=float))):
            raise ValueError(f"piece {k + 1}: nodes outside {iv}")
        if order == 0:
            continue
        for node, L in zip(nd, lagrange_polynomials(nd)):
            offs = [Constant(0.0)] * len(scheme.pieces)
            offs[k] = L
            o = OffsetTuple(tuple(offs[:scheme.m]), tuple(offs[scheme.m:]))
            basis.elements.append(BasisElement(k, float(node), L, theta(scheme, scales, o, tol)))
    return basis


# -- tensor products -------------------------------------------------------------------

@dataclass(frozen=True)
class TensorFunction:
    left: FractalFunction
    right: FractalFunction

    @property
    def contraction(self) -> float:
        return max(self.left.contraction, self.right.contraction)

    def __call__(self, x, xt, tol: float = 1e-10):
        return evaluate_tensor(self, x, xt, tol)[0]


def tensor(left: FractalFunction, right: FractalFunction) -> TensorFunction:
    return TensorFunction(left, right)


def evaluate_tensor(t: TensorFunction, x, xt, tol: float = 1e-10):
    """``(left(x) * right(xt), error bound)``; arrays broadcast pointwise."""
    a = evaluate(t.left, x, tol)
    b = evaluate(t.right, xt, tol)
    value = a * b
    err = tol * (np.abs(a) + np.abs(b) + tol)
    return value, err


def tensor_iterate(left: RBOperator, right: RBOperator, k_max: int = 20, x=None, xt=None):
    """Iterate the tensor operator from ``0 (x) 0``.

    Returns ``(d, rates)`` where ``d[k]`` is the product-metric distance
    ``sup|Phi^{k+1}0 - Phi^k 0| + sup|Phi~^{k+1}0 - Phi~^k 0|`` and
    ``rates[k] = d[k+1]/d[k]``.
    """
    x = probe_points(left.scheme) if x is None else x
    xt = probe_points(right.scheme) if xt is None else xt
    a = np.vstack([np.zeros(np.size(x)), iterates_at(left, x, k_max + 1)])
    b = np.vstack([np.zeros(np.size(xt)), iterates_at(right, xt, k_max + 1)])
    d = np.array([np.max(np.abs(a[k + 1] - a[k])) + np.max(np.abs(b[k + 1] - b[k]))
                  for k in range(k_max + 1)])
    rates = d[1:] / np.where(d[:-1] > 0, d[:-1], 1.0)
    return d, rates

