"""Read-Bajraktarevic operators and their fixed points.

An operator patches vertical maps over the pieces of a partition:

    (Phi f)(x) = v(xi, f(xi)),   xi = piece_map^{-1}(x),

with ``x`` located in the image of the piece.  For affine vertical maps
``v(xi, y) = offset(xi) + scale(xi) * y``.

Fixed points are evaluated recursively along the backward orbit of ``x``;
the expansion stops once the accumulated scale product times the a-priori
bound ``sup|Phi 0| / (1 - contraction)`` falls below the requested
tolerance, which certifies the truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DepthExceededError, NotContractiveError, PrecisionError, StructuralError
from .functions import Constant, ScalarFunction
from .geometry import (
    Interval, check_point, compactify, decompactify, interior_probes,
)
from .partition import BOUNDED, PartitionScheme, PieceId

AFFINE_VMAP = "affine"
GENERAL_VMAP = "general"

GRID = "grid"
RECURSIVE = "recursive"

DEFAULT_MAX_DEPTH = 256
# compactified slack when testing whether an interval lies inside an image
_SNAP = 1e-13
_REL_SNAP = 1e-9
_MIN_WIDTH = 1e-13


def _as_function(v) -> ScalarFunction:
    return v if isinstance(v, ScalarFunction) else Constant(v)


class VerticalMap:
    """Map acting on the function value over one piece.

    Use :meth:`affine` for ``offset + scale * y`` and :meth:`general` for an
    arbitrary rule ``(x, y) -> value`` that is ``lip_y``-Lipschitz in ``y``.
    """

    def __init__(self, kind, piece_domain: Interval, offset=None, scale=None,
                 rule=None, lip_y=None, base_bound=None):
        self.kind = kind
        self.piece_domain = piece_domain
        if kind == AFFINE_VMAP:
            self.offset = _as_function(offset)
            self.scale = _as_function(scale)
            self.lip_y = self.scale.sup_abs(piece_domain)
            self.base_bound = self.offset.sup_abs(piece_domain)
        elif kind == GENERAL_VMAP:
            if rule is None or lip_y is None:
                raise StructuralError("general vertical maps need a rule and lip_y")
            self.rule = rule
            self.lip_y = float(lip_y)
            self.offset = self.scale = None
            self.base_bound = (float(base_bound) if base_bound is not None
                               else _probe_sup(lambda x: rule(x, np.zeros_like(x)), piece_domain))
        else:
            raise StructuralError(f"unknown vertical map kind {kind!r}")
        if not math.isfinite(self.base_bound):
            raise StructuralError(f"vertical map on {piece_domain} is unbounded at y=0")

    @classmethod
    def affine(cls, offset, scale, piece_domain: Interval) -> "VerticalMap":
        return cls(AFFINE_VMAP, piece_domain, offset=offset, scale=scale)

    @classmethod
    def general(cls, rule: Callable, lip_y: float, piece_domain: Interval,
                base_bound=None) -> "VerticalMap":
        return cls(GENERAL_VMAP, piece_domain, rule=rule, lip_y=lip_y, base_bound=base_bound)

    @property
    def is_affine(self) -> bool:
        return self.kind == AFFINE_VMAP

    def __call__(self, x, y):
        if self.is_affine:
            return self.offset(x) + self.scale(x) * y
        return self.rule(x, y)

    def exact(self, x, y):
        if not self.is_affine:
            return self.rule(float(x), float(y))
        return self.offset.exact(x) + self.scale.exact(x) * y

    def check_lipschitz(self, probes: int = 64, seed: int = 0) -> float:
        """Largest observed ``|v(x,y1)-v(x,y2)| / |y1-y2|`` on random triples."""
        rng = np.random.default_rng(seed)
        x = interior_probes(self.piece_domain, probes)
        y1 = rng.uniform(-10, 10, probes)
        y2 = rng.uniform(-10, 10, probes)
        d = np.abs(self(x, y1) - self(x, y2))
        return float(np.max(d / np.maximum(np.abs(y1 - y2), 1e-300)))

    def continuity_breaks(self) -> list:
        if not self.is_affine:
            return []
        return sorted(set(self.offset.jumps()) | set(self.scale.jumps()))


def _probe_sup(fn, iv: Interval, n: int = 2048) -> float:
    """Probed sup of |fn| with a 10x denser pass near the ends."""
    x = interior_probes(iv, n)
    ends = [e for e in (iv.lo, iv.hi) if iv.contains(e)]
    vals = np.abs(np.asarray(fn(np.concatenate([x, ends])), dtype=float))
    return float(np.max(vals))


class RBOperator:
    """Partition scheme together with one vertical map per piece."""

    def __init__(self, scheme: PartitionScheme, bounded_vmaps, unbounded_vmaps):
        self.scheme = scheme
        self.bounded_vmaps = tuple(bounded_vmaps)
        self.unbounded_vmaps = tuple(unbounded_vmaps)
        if len(self.bounded_vmaps) != scheme.m or len(self.unbounded_vmaps) != scheme.n:
            raise StructuralError(
                f"need {scheme.m} bounded and {scheme.n} unbounded vertical maps, got "
                f"{len(self.bounded_vmaps)} and {len(self.unbounded_vmaps)}")
        for pc, vm in zip(scheme.pieces, self.vmaps):
            if not vm.piece_domain.same_as(pc.interval):
                raise StructuralError(
                    f"{pc.pid}: vertical map domain {vm.piece_domain} differs from piece {pc.interval}")
            if pc.map.singular:
                raise StructuralError(f"{pc.pid}: piece map is singular on {pc.interval}")
        for pc, vm in zip(scheme.pieces, self.vmaps):
            if not vm.lip_y < 1.0:
                raise NotContractiveError(
                    f"{pc.pid}: sup |scale| = {vm.lip_y:.6g} is not < 1", piece=pc.pid, sup=vm.lip_y)
        self.ell1 = max((v.lip_y for v in self.bounded_vmaps), default=0.0)
        self.ell2 = max((v.lip_y for v in self.unbounded_vmaps), default=0.0)
        self.contraction = max(self.ell1, self.ell2)
        self.r0 = max((v.base_bound for v in self.vmaps), default=0.0)
        self._inverses = tuple(pc.map.inverse_map() for pc in scheme.pieces)

    @property
    def vmaps(self) -> tuple:
        return self.bounded_vmaps + self.unbounded_vmaps

    @property
    def is_affine(self) -> bool:
        return all(v.is_affine for v in self.vmaps)

    def vmap(self, pid: PieceId) -> VerticalMap:
        return self.vmaps[self.scheme.flat_index(pid)]

    def value_bound(self) -> float:
        """A-priori bound ``sup|Phi 0| / (1 - contraction)`` on the fixed point."""
        return self.r0 / (1.0 - self.contraction)

    def predicted_iterations(self, tol: float) -> int:
        """Iterations from zero guaranteeing ``l^k/(1-l) * r0 <= tol``."""
        if tol <= 0:
            raise ValueError("tol must be positive")
        ell, r0 = self.contraction, self.r0
        if ell == 0.0 or r0 == 0.0:
            return 1
        k = math.ceil(math.log(tol * (1.0 - ell) / r0) / math.log(ell))
        return max(k, 1)

    def pull(self, x):
        """Locate ``x`` and pull it back: returns (flat piece index, xi)."""
        x = np.asarray(x, dtype=float)
        idx = self.scheme.locate_index(x)
        xi = np.empty_like(x)
        for k, inv in enumerate(self._inverses):
            sel = idx == k
            if sel.any():
                xi[sel] = inv.rule(x[sel])
        return idx, xi

    def apply_to(self, fn, x):
        """``(Phi fn)(x)`` for any vectorised callable ``fn``."""
        x = np.asarray(x, dtype=float)
        idx, xi = self.pull(x)
        out = np.empty_like(x)
        fx = np.asarray(fn(xi), dtype=float)
        for k, vm in enumerate(self.vmaps):
            sel = idx == k
            if sel.any():
                out[sel] = vm(xi[sel], fx[sel])
        return out

    def __repr__(self):
        return f"RBOperator({self.scheme!r}, contraction={self.contraction:g})"


def build_rb(scheme: PartitionScheme, bounded_vmaps, unbounded_vmaps) -> RBOperator:
    return RBOperator(scheme, bounded_vmaps, unbounded_vmaps)


def affine_operator(scheme: PartitionScheme, bounded, unbounded) -> RBOperator:
    """Operator from ``(offset, scale)`` pairs per piece."""
    bv = [VerticalMap.affine(o, s, pc.interval) for (o, s), pc in zip(bounded, scheme.bounded_pieces)]
    uv = [VerticalMap.affine(o, s, pc.interval) for (o, s), pc in zip(unbounded, scheme.unbounded_pieces)]
    return RBOperator(scheme, bv, uv)


# -- grid functions --------------------------------------------------------------

@dataclass(frozen=True)
class GridFunction:
    """Samples on a grid uniform in compactified coordinates."""

    ambient: str
    grid: np.ndarray
    values: np.ndarray
    _t: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape:
            raise StructuralError("grid and values differ in length")
        t = compactify(self.ambient, g)
        if np.any(np.diff(t) <= 0):
            raise StructuralError("grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_t", np.asarray(t, dtype=float))

    def __call__(self, x):
        """Linear interpolation in compactified coordinates."""
        scalar = np.isscalar(x)
        t = compactify(self.ambient, np.asarray(x, dtype=float))
        out = np.interp(t, self._t, self.values)
        return float(out) if scalar else out

    def sup_diff(self, other: "GridFunction") -> float:
        return float(np.max(np.abs(self.values - other.values)))


def uniform_grid(scheme: PartitionScheme, resolution: int) -> np.ndarray:
    """``resolution + 1`` points uniform in compactified coordinates of X.

    Infinite ends are included only when the scheme is compactified.
    """
    X = scheme.X
    t0, t1 = compactify(scheme.ambient, np.array([X.lo, X.hi]))
    t = t0 + (t1 - t0) * np.arange(resolution + 1) / resolution
    x = decompactify(scheme.ambient, t)
    keep = X.contains(x)
    return x[keep]


def zero_grid(scheme: PartitionScheme, resolution: int) -> GridFunction:
    g = uniform_grid(scheme, resolution)
    return GridFunction(scheme.ambient, g, np.zeros_like(g))


def apply_rb(op: RBOperator, f: GridFunction) -> GridFunction:
    return GridFunction(f.ambient, f.grid, op.apply_to(f, f.grid))


def iterate(op: RBOperator, resolution: int, k: int, start: GridFunction | None = None):
    """Yield ``Phi^1 f0, ..., Phi^k f0`` on the grid (``f0`` = 0 by default)."""
    f = start if start is not None else zero_grid(op.scheme, resolution)
    for _ in range(k):
        f = apply_rb(op, f)
        yield f


def iterates_at(op: RBOperator, x, k: int) -> np.ndarray:
    """Exact iterates ``Phi^1 0, ..., Phi^k 0`` at the points ``x``.

    ``Phi^d 0(x)`` is the orbit expansion truncated after ``d`` terms, so no
    grid interpolation is involved.  Row ``d-1`` holds ``Phi^d 0``.
    """
    if not op.is_affine:
        raise NotImplementedError("iterates_at needs affine vertical maps")
    x = np.array(x, dtype=float, copy=True).ravel()
    out = np.empty((k, x.size))
    val = np.zeros(x.size)
    prod = np.ones(x.size)
    for d in range(k):
        idx, xi = op.pull(x)
        for j, vm in enumerate(op.vmaps):
            sel = idx == j
            if sel.any():
                val[sel] += prod[sel] * vm.offset(xi[sel])
                prod[sel] *= vm.scale(xi[sel])
        x = xi
        out[d] = val
    return out


def probe_points(scheme: PartitionScheme, n: int = 20011, cluster: int = 4000) -> np.ndarray:
    """Interior probes: a uniform grid plus clusters at piece-image ends.

    ``n`` points lie uniformly in compactified coordinates (the default is
    prime so that orbits under dyadic maps do not terminate after a few
    steps); ``cluster`` log-spaced points accumulate on each side of every
    image end point, where fixed points of the piece maps sit and where
    iterates develop their finest structure.
    """
    amb = scheme.ambient
    X = scheme.X
    t0, t1 = compactify(amb, np.array([X.lo, X.hi]))
    parts = [t0 + (t1 - t0) * (np.arange(1, n + 1) / (n + 1))]
    if cluster:
        offs = (t1 - t0) * np.geomspace(1e-12, 0.25, cluster)
        ends = set()
        for pc in scheme.pieces:
            ends.update(compactify(amb, np.array([pc.image.lo, pc.image.hi])).tolist())
        for e in sorted(ends):
            parts.append(e + offs)
            parts.append(e - offs)
    t = np.concatenate(parts)
    t = np.unique(t[(t > t0) & (t < t1)])
    return decompactify(amb, t)


def convergence_ratios(op: RBOperator, k_max: int = 20, x=None) -> list:
    """``sup|Phi^{k+1}0 - Phi^k 0| / sup|Phi^k 0 - Phi^{k-1} 0|`` for k = 1..k_max.

    Suprema run over ``x`` (default :func:`probe_points`); entry ``k-1``
    holds the ratio for ``k``.
    """
    x = probe_points(op.scheme) if x is None else x
    it = iterates_at(op, x, k_max + 1)
    diffs = [float(np.max(np.abs(it[0])))]
    diffs += [float(np.max(np.abs(it[d] - it[d - 1]))) for d in range(1, k_max + 1)]
    return [diffs[k] / diffs[k - 1] if diffs[k - 1] > 0 else 0.0 for k in range(1, k_max + 1)]


# -- fixed points ------------------------------------------------------------------

class FractalFunction:
    """Fixed point of a contractive operator.

    In RECURSIVE mode values come from the certified orbit expansion; in
    GRID mode from linear interpolation of the iterated grid function, with
    error about ``residual / (1 - contraction)`` (not certified).
    """

    def __init__(self, op: RBOperator, mode: str = RECURSIVE, grid: GridFunction | None = None,
                 residual: float | None = None, iterations: int = 0,
                 max_depth: int = DEFAULT_MAX_DEPTH, default_tol: float = 1e-10):
        if mode not in (GRID, RECURSIVE):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == GRID and grid is None:
            raise ValueError("GRID mode needs a grid function")
        self.operator = op
        self.value_bound = op.value_bound()
        self.mode = mode
        self.grid = grid
        self.residual = residual
        self.iterations = iterations
        self.max_depth = int(max_depth)
        self.default_tol = float(default_tol)
        self._global = None

    @property
    def contraction(self) -> float:
        return self.operator.contraction

    @property
    def scheme(self) -> PartitionScheme:
        return self.operator.scheme

    def recursive(self) -> "FractalFunction":
        return FractalFunction(self.operator, RECURSIVE, max_depth=self.max_depth,
                               default_tol=self.default_tol)

    def grid_error(self) -> float:
        if self.mode != GRID:
            return 0.0
        return self.residual / (1.0 - self.contraction) if self.contraction < 1 else math.inf

    def __call__(self, x, tol: float | None = None):
        return evaluate(self, x, self.default_tol if tol is None else tol)

    # range enclosures --------------------------------------------------------

    def global_bounds(self, iters: int = 200) -> tuple:
        """Interval ``[L, U]`` containing every value of the fixed point.

        Iterates the interval image ``hull_k(offset_k + scale_k * [L, U])``
        starting from ``[-V, V]``.
        """
        if self._global is not None:
            return self._global
        op = self.operator
        V = self.value_bound
        lo, hi = -V, V
        if not op.is_affine:
            self._global = (lo, hi)
            return self._global
        terms = []
        for pc, vm in zip(op.scheme.pieces, op.vmaps):
            terms.append((vm.offset.bounds(pc.interval.lo, pc.interval.hi),
                          vm.scale.bounds(pc.interval.lo, pc.interval.hi)))
        for _ in range(iters):
            nlo, nhi = math.inf, -math.inf
            for (olo, ohi), (slo, shi) in terms:
                prods = (slo * lo, slo * hi, shi * lo, shi * hi)
                nlo = min(nlo, olo + min(prods))
                nhi = max(nhi, ohi + max(prods))
            nlo, nhi = max(lo, nlo), min(hi, nhi)
            if nlo == lo and nhi == hi:
                break
            lo, hi = nlo, nhi
        self._global = (lo, hi)
        return self._global

    def tighten_bounds(self, eps: float) -> tuple:
        """Shrink :meth:`global_bounds` to the range of ``f`` plus ``eps``.

        Runs :func:`column_ranges` over all of X with geometrically
        decreasing precision; the result stays a rigorous enclosure.
        """
        L, U = self.global_bounds()
        X = self.scheme.X
        t = compactify(self.scheme.ambient, np.array([X.lo, X.hi]))
        step = max(U - L, eps)
        while True:
            step = max(step / 8.0, eps)
            r = column_ranges(self, t, step, samples=256)
            L, U = max(L, float(r.outer_lo[0])), min(U, float(r.outer_hi[0]))
            self._global = (L, U)
            if step <= eps:
                return self._global

    def enclose(self, a, b, depth: int = 80, rel_stop: float = 1e-6, abs_stop: float = 0.0,
                return_split: bool = False):
        """Vectorised enclosure of the fixed point over ``[a_i, b_i]``.

        Each interval is pulled back through the piece whose closed image
        contains it, accumulating interval bounds of offsets and scales; the
        expansion ends with the global bounds once an interval straddles a
        piece boundary or its remaining weight becomes negligible (relative
        to the enclosure width, or below ``abs_stop``).

        With ``return_split`` a third array holds, for intervals that ended
        on a straddle, the straddled boundary pushed forward to the original
        coordinates (NaN elsewhere).  Splitting there removes the straddle.
        """
        op = self.operator
        n = np.size(a)
        if not op.is_affine:
            L, U = self.global_bounds()
            out = (np.full(n, L), np.full(n, U))
            return out + (np.full(n, np.nan),) if return_split else out
        a = np.array(a, dtype=float, copy=True).ravel()
        b = np.array(b, dtype=float, copy=True).ravel()
        L, U = self.global_bounds()
        vlo = np.zeros(n)
        vhi = np.zeros(n)
        plo = np.ones(n)
        phi = np.ones(n)
        active = np.ones(n, dtype=bool)
        scale_ref = max(abs(L), abs(U), 1e-300)
        spread = U - L
        pieces = op.scheme.pieces
        amb = op.scheme.ambient
        path = np.full((n, depth), -1, dtype=np.int16)
        steps = np.zeros(n, dtype=np.intp)
        split = np.full(n, np.nan)
        for _ in range(depth):
            ids = np.nonzero(active)[0]
            if ids.size == 0:
                break
            mid = _midpoint(amb, a[ids], b[ids])
            k = op.scheme.locate_index(mid)
            for j, pc in enumerate(pieces):
                sel = ids[k == j]
                if sel.size == 0:
                    continue
                img = pc.image
                tlo, thi = compactify(amb, img.lo), compactify(amb, img.hi)
                ta, tb = compactify(amb, a[sel]), compactify(amb, b[sel])
                # straddles below a 1e-9 fraction of the interval are rounding
                snap = np.maximum(_SNAP, _REL_SNAP * (tb - ta))
                inside = (ta >= tlo - snap) & (tb <= thi + snap)
                stop = sel[~inside]
                if stop.size:
                    active[stop] = False
                    split[stop] = np.where(ta[~inside] < tlo - snap[~inside], img.lo, img.hi)
                sel = sel[inside]
                if sel.size == 0:
                    continue
                inv = op._inverses[j]
                ca = np.clip(a[sel], img.lo, img.hi)
                cb = np.clip(b[sel], img.lo, img.hi)
                ea, eb = inv.rule(ca), inv.rule(cb)
                xa, xb = np.minimum(ea, eb), np.maximum(ea, eb)
                vm = op.vmaps[j]
                olo, ohi = _bounds_many(vm.offset, xa, xb)
                slo, shi = _bounds_many(vm.scale, xa, xb)
                c = np.stack([plo[sel] * olo, plo[sel] * ohi, phi[sel] * olo, phi[sel] * ohi])
                vlo[sel] += c.min(axis=0)
                vhi[sel] += c.max(axis=0)
                c = np.stack([plo[sel] * slo, plo[sel] * shi, phi[sel] * slo, phi[sel] * shi])
                plo[sel], phi[sel] = c.min(axis=0), c.max(axis=0)
                a[sel], b[sel] = xa, xb
                path[sel, steps[sel]] = j
                steps[sel] += 1
                weight = np.maximum(np.abs(plo[sel]), np.abs(phi[sel]))
                done = (weight * scale_ref <= rel_stop * (np.abs(vhi[sel] - vlo[sel]) + 1e-12)) \
                    | (weight * spread <= abs_stop) | (weight == 0.0)
                active[sel[done]] = False
        c = np.stack([plo * L, plo * U, phi * L, phi * U])
        lo, hi = vlo + c.min(axis=0), vhi + c.max(axis=0)
        if not return_split:
            return lo, hi
        # push straddled boundaries forward along the recorded orbit
        todo = np.nonzero(~np.isnan(split))[0]
        for s in range(depth - 1, -1, -1):
            sel = todo[steps[todo] > s]
            if sel.size == 0:
                continue
            js = path[sel, s]
            for j, pc in enumerate(pieces):
                m = sel[js == j]
                if m.size:
                    split[m] = pc.map.rule(split[m])
        return lo, hi, split


@dataclass
class ColumnRanges:
    """Inner (sampled) and outer (certified) ranges per column."""

    lo: np.ndarray
    hi: np.ndarray
    outer_lo: np.ndarray
    outer_hi: np.ndarray
    unresolved: int = 0
    enclosures: int = 0
    ulp_limited: int = 0


def column_ranges(f: FractalFunction, t_edges, eps: float, max_rounds: int = 64,
                  samples: int = 16, tol: float | None = None) -> ColumnRanges:
    """Range of ``f`` over each column ``[t_edges[c], t_edges[c+1]]``.

    Columns are given in compactified coordinates.  Branch and bound:
    sampled values give inner bounds, interval enclosures discard
    sub-intervals that cannot move an extreme by more than ``eps``.
    Sub-intervals are split where their enclosure hit a piece boundary,
    otherwise at the compactified midpoint.  ``outer_lo``/``outer_hi``
    enclose the true range (up to the evaluation tolerance).
    """
    amb = f.scheme.ambient
    t_edges = np.asarray(t_edges, dtype=float)
    tol = eps / 8.0 if tol is None else tol
    ncol = t_edges.size - 1
    frac = np.linspace(0.0, 1.0, samples + 1)
    ts = t_edges[:-1, None] + (t_edges[1:] - t_edges[:-1])[:, None] * frac[None, :]
    v = evaluate(f, decompactify(amb, ts.ravel()), tol).reshape(ts.shape)
    lo, hi = v.min(axis=1), v.max(axis=1)
    col = np.repeat(np.arange(ncol), samples)
    x = decompactify(amb, ts)
    a, b = x[:, :-1].ravel(), x[:, 1:].ravel()
    enclosures = 0
    ulp_limited = 0
    elo = ehi = np.empty(0)
    for _ in range(max_rounds):
        if col.size == 0:
            break
        elo, ehi, split = f.enclose(a, b, abs_stop=eps / 4.0, return_split=True)
        enclosures += col.size
        need = (elo < lo[col] - eps) | (ehi > hi[col] + eps)
        col, a, b, split = col[need], a[need], b[need], split[need]
        elo, ehi = elo[need], ehi[need]
        if col.size == 0:
            break
        ta, tb = compactify(amb, a), compactify(amb, b)
        # below this width rounding in the pull-back dominates; the end
        # values are already known, so the sub-interval is settled
        tiny = tb - ta < _MIN_WIDTH
        if tiny.any():
            ulp_limited += int(tiny.sum())
            keep = ~tiny
            col, a, b, split, elo, ehi = col[keep], a[keep], b[keep], split[keep], elo[keep], ehi[keep]
            ta, tb = ta[keep], tb[keep]
            if col.size == 0:
                break
        tsp = compactify(amb, np.where(np.isnan(split), a, split))
        margin = 1e-9 * (tb - ta)
        good = ~np.isnan(split) & (tsp > ta + margin) & (tsp < tb - margin)
        tsp = np.where(good, tsp, 0.5 * (ta + tb))
        s = np.where(good, split, decompactify(amb, tsp))
        vs = evaluate(f, s, tol)
        np.minimum.at(lo, col, vs)
        np.maximum.at(hi, col, vs)
        col = np.concatenate([col, col])
        a, b = np.concatenate([a, s]), np.concatenate([s, b])
        elo, ehi = np.concatenate([elo, elo]), np.concatenate([ehi, ehi])
    outer_lo, outer_hi = lo - eps - tol, hi + eps + tol
    if col.size:
        np.minimum.at(outer_lo, col, elo)
        np.maximum.at(outer_hi, col, ehi)
    return ColumnRanges(lo, hi, outer_lo, outer_hi, int(col.size), enclosures, ulp_limited)


def _midpoint(ambient, a, b):
    ta, tb = compactify(ambient, a), compactify(ambient, b)
    return decompactify(ambient, 0.5 * (np.asarray(ta) + np.asarray(tb)))


def _bounds_many(fn: ScalarFunction, lo, hi):
    return fn.bounds_many(lo, hi)


def fixed_point(op: RBOperator, tol: float, grid_resolution: int = 4096,
                max_depth: int = DEFAULT_MAX_DEPTH) -> FractalFunction:
    """Iterate Phi from zero on a grid for the a-priori number of steps."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    k = op.predicted_iterations(tol)
    f = zero_grid(op.scheme, grid_resolution)
    for f in iterate(op, grid_resolution, k):
        pass
    res = _grid_residual(op, f)
    return FractalFunction(op, GRID, grid=f, residual=res, iterations=k,
                           max_depth=max_depth, default_tol=tol)


def _grid_residual(op: RBOperator, f: GridFunction) -> float:
    t = np.asarray(f._t)
    quarter = np.concatenate([t, t[:-1] + 0.25 * np.diff(t), t[:-1] + 0.75 * np.diff(t)])
    x = decompactify(op.scheme.ambient, quarter)
    x = x[op.scheme.X.contains(x)]
    return float(np.max(np.abs(op.apply_to(f, x) - f(x))))


def fractal_function(op: RBOperator, tol: float = 1e-10, max_depth: int = DEFAULT_MAX_DEPTH) -> FractalFunction:
    """RECURSIVE-mode fixed point (no iteration needed up front)."""
    return FractalFunction(op, RECURSIVE, max_depth=max_depth, default_tol=tol)


# -- evaluation ----------------------------------------------------------------------

def evaluate(f: FractalFunction, x, tol: float = 1e-10, exact: bool = False):
    """Value of the fixed point at ``x`` (scalar or array).

    RECURSIVE mode certifies ``|result - f(x)| <= tol`` up to floating-point
    rounding of the orbit, which expanding pre-images amplify through the
    Hoelder modulus of ``f``.  ``exact=True`` removes the rounding: the orbit
    runs in rational arithmetic when every piece map is affine, Mobius or a
    translation, and in mpmath arithmetic of growing precision otherwise.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if f.mode == GRID:
        return f.grid(x)
    if exact:
        if np.isscalar(x) or isinstance(x, Fraction):
            return _evaluate_exact(f, x, tol)
        return np.array([_evaluate_exact(f, v, tol) for v in np.asarray(x, dtype=float)])
    scalar = np.isscalar(x)
    if scalar:
        check_point(x)
    out = _evaluate_array(f, np.atleast_1d(np.asarray(x, dtype=float)), tol)
    return float(out[0]) if scalar else out


def _evaluate_array(f: FractalFunction, x: np.ndarray, tol: float) -> np.ndarray:
    op = f.operator
    V = f.value_bound
    x = x.copy()
    n = x.size
    if V == 0.0:
        op.scheme.locate_index(x)
        return np.zeros(n)
    if not op.is_affine:
        return _evaluate_general(f, x, tol)
    val = np.zeros(n)
    prod = np.ones(n)
    active = np.ones(n, dtype=bool)
    for _ in range(f.max_depth):
        ids = np.nonzero(active)[0]
        if ids.size == 0:
            break
        k, xi = op.pull(x[ids])
        for j, vm in enumerate(op.vmaps):
            m = k == j
            if not m.any():
                continue
            sel = ids[m]
            xs = xi[m]
            val[sel] += prod[sel] * vm.offset(xs)
            prod[sel] *= vm.scale(xs)
            x[sel] = xs
        active[ids] = np.abs(prod[ids]) * V > tol
    if active.any():
        i = int(np.nonzero(active)[0][0])
        raise DepthExceededError(
            f"orbit expansion did not reach tol={tol:g} within {f.max_depth} steps",
            partial=float(val[i]), bound=float(abs(prod[i]) * V))
    return val


def _evaluate_general(f: FractalFunction, x: np.ndarray, tol: float) -> np.ndarray:
    op = f.operator
    V = f.value_bound
    n = x.size
    weight = np.ones(n)
    orbit = []
    active = np.ones(n, dtype=bool)
    lips = np.array([vm.lip_y for vm in op.vmaps])
    for _ in range(f.max_depth):
        if not active.any():
            break
        k, xi = op.pull(x)
        orbit.append((k, xi, active.copy()))
        x = np.where(active, xi, x)
        weight = np.where(active, weight * lips[k], weight)
        active &= weight * V > tol
    if active.any():
        raise DepthExceededError(
            f"orbit expansion did not reach tol={tol:g} within {f.max_depth} steps",
            partial=math.nan, bound=float(np.max(weight) * V))
    y = np.zeros(n)
    for k, xi, act in reversed(orbit):
        ny = np.empty(n)
        for j, vm in enumerate(op.vmaps):
            sel = k == j
            if sel.any():
                ny[sel] = vm(xi[sel], y[sel])
        y = np.where(act, ny, y)
    return y


def _exact_point(x):
    if isinstance(x, Fraction):
        return x
    x = check_point(x)
    return Fraction(x) if math.isfinite(x) else x


def _evaluate_exact(f: FractalFunction, x, tol: float) -> float:
    op = f.operator
    V = f.value_bound
    scheme = op.scheme
    x = _exact_point(x)
    if V == 0.0:
        scheme.locate(float(x))
        return 0.0
    if not op.is_affine:
        return float(_evaluate_array(f, np.array([float(x)]), tol)[0])
    if not all(inv.exact_capable for inv in op._inverses):
        return _evaluate_hp(f, x, tol)
    val = Fraction(0)
    prod = Fraction(1)
    for _ in range(f.max_depth):
        j = scheme.flat_index(_locate_exact(scheme, x))
        inv = op._inverses[j]
        xi = _exact_point(inv.exact(x)) if inv.exact_capable else _exact_point(float(inv.rule(float(x))))
        vm = op.vmaps[j]
        off, sc = vm.offset.exact(xi), vm.scale.exact(xi)
        val = val + prod * (off if isinstance(off, Fraction) else Fraction(off))
        prod = prod * (sc if isinstance(sc, Fraction) else Fraction(sc))
        x = xi
        if abs(prod) * V <= tol:
            return float(val)
    raise DepthExceededError(
        f"orbit expansion did not reach tol={tol:g} within {f.max_depth} steps",
        partial=float(val), bound=float(abs(prod)) * V)


# working precisions (decimal digits) tried in turn by the mpmath path
HP_DIGITS = (30, 60, 120, 240)


def _hp_orbit(f: FractalFunction, x, tol: float, ctx):
    op = f.operator
    V = f.value_bound
    scheme = op.scheme
    val, prod = ctx.zero, ctx.one
    for _ in range(f.max_depth):
        j = scheme.flat_index(_locate_exact(scheme, x))
        xi = op._inverses[j].hp(x, ctx)
        vm = op.vmaps[j]
        val += prod * vm.offset.hp(xi, ctx)
        prod *= vm.scale.hp(xi, ctx)
        x = xi
        if abs(prod) * V <= tol:
            return val
    raise DepthExceededError(
        f"orbit expansion did not reach tol={tol:g} within {f.max_depth} steps",
        partial=float(val), bound=float(abs(prod)) * V)


def _evaluate_hp(f: FractalFunction, x, tol: float) -> float:
    """Orbit in mpmath arithmetic for transcendental piece maps.

    Precision grows until two successive working precisions agree within
    ``tol / 4``; the truncation share of the error is ``tol / 2``.
    """
    import mpmath

    prev = None
    for digits in HP_DIGITS:
        ctx = mpmath.MPContext()
        ctx.dps = digits
        start = ctx.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else ctx.mpf(x)
        v = _hp_orbit(f, start, tol / 2, ctx)
        if prev is not None and abs(v - prev) <= tol / 4:
            return float(v)
        prev = v
    raise PrecisionError(f"orbit at {float(x)} not resolved with {HP_DIGITS[-1]} digits")


def _locate_exact(scheme: PartitionScheme, x) -> PieceId:
    """Locate a rational or mpmath point without rounding it first.

    Comparisons against the float image ends are exact for both types.
    """
    if isinstance(x, float):
        return scheme.locate(x)
    for pc in scheme.pieces:
        img = pc.image
        if math.isinf(img.lo):
            lo_ok = True
        else:
            lo_ok = x >= img.lo if img.closed_lo else x > img.lo
        if math.isinf(img.hi):
            hi_ok = True
        else:
            hi_ok = x <= img.hi if img.closed_hi else x < img.hi
        if lo_ok and hi_ok:
            return pc.pid
    return scheme.locate(float(x))


def evaluate_via(f: FractalFunction, x, pid: PieceId, tol: float = 1e-10, exact: bool = False) -> float:
    """Evaluate through the self-referential branch of piece ``pid``.

    ``x`` must lie in the closure of that piece's image; the result is
    ``v(xi, f(xi))`` with ``xi`` the pulled-back point.
    """
    op = f.operator
    pc = op.scheme.piece(pid)
    vm = op.vmap(pid)
    inv = pc.map.inverse_map()
    if not pc.image.closure().contains(float(x), 1e-12):
        raise ValueError(f"{x} is not in the image of {pid}")
    if exact and inv.exact_capable:
        xi = _exact_point(inv.exact(_exact_point(x)))
        y = Fraction(_evaluate_exact(f, xi, tol))
        return float(vm.exact(xi, y))
    xi = float(inv.rule(float(x)))
    return float(vm(np.array([xi]), np.array([evaluate(f, xi, tol)]))[0])


def residual(op: RBOperator, f, probes: int = 1000, tol: float = 1e-10) -> float:
    """``sup |Phi f - f|`` over ``probes`` points uniform in compactified X.

    ``f`` may be a :class:`FractalFunction` (evaluated recursively at
    ``tol``) or any vectorised callable.
    """
    x = uniform_grid(op.scheme, max(int(probes) - 1, 1))
    if isinstance(f, FractalFunction):
        fn = lambda z: evaluate(f, z, tol)
    else:
        fn = f
    return float(np.max(np.abs(op.apply_to(fn, x) - np.asarray(fn(x), dtype=float))))
