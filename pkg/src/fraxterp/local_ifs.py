"""Local IFS on the graph space and its discretised set operator.

An RB operator induces maps ``h_l(x, y) = (f_l(x), g_l(x, y))`` on
``X_l x Y``; the set operator ``F(S) = union_l h_l(S cap X_l x Y)`` keeps
the graph of the fixed point invariant.  Sets are represented by occupied
cells of a rectangular window in compactified-x times y coordinates and
mapped through their cell centres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import StructuralError
from .geometry import Interval, compactify, decompactify
from .maps import Homeomorphism1D
from .parallel import pmap
from .partition import PieceId
from .rb import FractalFunction, RBOperator, VerticalMap, column_ranges


@dataclass(frozen=True)
class LocalMap:
    pid: PieceId
    domain: Interval
    f: Homeomorphism1D
    g: VerticalMap

    def __call__(self, x, y):
        return self.f.rule(x), self.g(x, y)


@dataclass(frozen=True)
class LocalIFS:
    ambient: str
    maps: tuple
    # (piece id, jump locations) for vertical maps that are not continuous in x
    discontinuities: tuple = ()

    @property
    def continuous(self) -> bool:
        return not self.discontinuities


def build_local_ifs(op: RBOperator) -> LocalIFS:
    """One map per piece, bounded pieces first."""
    maps = tuple(LocalMap(pc.pid, pc.interval, pc.map, vm)
                 for pc, vm in zip(op.scheme.pieces, op.vmaps))
    flags = tuple((lm.pid, tuple(lm.g.continuity_breaks()))
                  for lm in maps if lm.g.continuity_breaks())
    return LocalIFS(op.scheme.ambient, maps, flags)


# -- cell sets ----------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Rectangle ``[t_lo, t_hi] x [y_lo, y_hi]`` with ``t`` compactified x."""

    ambient: str
    t_lo: float
    t_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.t_lo < self.t_hi and self.y_lo < self.y_hi):
            raise StructuralError(f"empty window {self}")

    @classmethod
    def from_x(cls, ambient: str, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> "Window":
        return cls(ambient, float(compactify(ambient, x_lo)), float(compactify(ambient, x_hi)),
                   float(y_lo), float(y_hi))


@dataclass(frozen=True, eq=False)
class CellSet:
    """Occupied cells of an ``nx x ny`` grid over ``window``.

    ``occupied[i, j]`` is the cell with ``i``-th x-column and ``j``-th
    y-row (row 0 at ``y_lo``).  ``clipped`` counts mapped points that fell
    outside the window when the set was produced.
    """

    window: Window
    occupied: np.ndarray
    clipped: int = 0

    def __post_init__(self):
        occ = np.array(self.occupied, dtype=bool, copy=True)
        if occ.ndim != 2:
            raise StructuralError("occupancy must be a 2-D array")
        occ.setflags(write=False)
        object.__setattr__(self, "occupied", occ)

    @classmethod
    def empty(cls, window: Window, nx: int, ny: int) -> "CellSet":
        return cls(window, np.zeros((nx, ny), dtype=bool))

    @classmethod
    def full(cls, window: Window, nx: int, ny: int) -> "CellSet":
        return cls(window, np.ones((nx, ny), dtype=bool))

    @classmethod
    def from_indices(cls, window: Window, nx: int, ny: int, cells) -> "CellSet":
        occ = np.zeros((nx, ny), dtype=bool)
        cells = np.asarray(list(cells), dtype=np.intp).reshape(-1, 2)
        occ[cells[:, 0], cells[:, 1]] = True
        return cls(window, occ)

    @property
    def shape(self) -> tuple:
        return self.occupied.shape

    @property
    def cell_size(self) -> tuple:
        nx, ny = self.shape
        w = self.window
        return (w.t_hi - w.t_lo) / nx, (w.y_hi - w.y_lo) / ny

    @property
    def cell_diagonal(self) -> float:
        return math.hypot(*self.cell_size)

    def indices(self) -> np.ndarray:
        """Occupied ``(i, j)`` pairs in lexicographic order."""
        return np.argwhere(self.occupied)

    def count(self) -> int:
        return int(self.occupied.sum())

    def is_empty(self) -> bool:
        return not self.occupied.any()

    def centers(self):
        """``(t, y)`` centres of the occupied cells."""
        idx = self.indices()
        cw, ch = self.cell_size
        return (self.window.t_lo + (idx[:, 0] + 0.5) * cw,
                self.window.y_lo + (idx[:, 1] + 0.5) * ch)

    def compatible(self, other: "CellSet") -> bool:
        return self.window == other.window and self.shape == other.shape

    def _check(self, other: "CellSet"):
        if not self.compatible(other):
            raise StructuralError("cell sets differ in window or resolution")

    def union(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.window, self.occupied | other.occupied, self.clipped + other.clipped)

    def issubset(self, other: "CellSet") -> bool:
        self._check(other)
        return not np.any(self.occupied & ~other.occupied)

    def __eq__(self, other):
        if not isinstance(other, CellSet):
            return NotImplemented
        return self.compatible(other) and np.array_equal(self.occupied, other.occupied)

    def __hash__(self):
        return hash((self.window, self.shape, self.occupied.tobytes()))


def _cell_index(s: CellSet, t, y):
    """Cell indices of points, with a mask of points inside the window."""
    w = s.window
    nx, ny = s.shape
    cw, ch = s.cell_size
    i = np.floor((t - w.t_lo) / cw).astype(np.int64)
    j = np.floor((y - w.y_lo) / ch).astype(np.int64)
    # the closing edges belong to the last column and row
    i = np.where((t == w.t_hi), nx - 1, i)
    j = np.where((y == w.y_hi), ny - 1, j)
    ok = (i >= 0) & (i < nx) & (j >= 0) & (j < ny) & np.isfinite(y)
    return i, j, ok


def _map_image(lm: LocalMap, s: CellSet, ambient: str):
    """Target cells of one local map applied to the occupied cell centres."""
    t, y = s.centers()
    cw, _ = s.cell_size
    dlo = float(compactify(ambient, lm.domain.lo))
    dhi = float(compactify(ambient, lm.domain.hi))
    meets = (t + 0.5 * cw >= dlo) & (t - 0.5 * cw <= dhi)
    t, y = t[meets], y[meets]
    x = decompactify(ambient, np.clip(t, dlo, dhi))
    with np.errstate(all="ignore"):
        tx = compactify(ambient, lm.f.rule(x))
        ty = lm.g(x, y)
    i, j, ok = _cell_index(s, np.asarray(tx, float), np.asarray(ty, float))
    return i[ok], j[ok], int((~ok).sum())


def apply_floc(ifs: LocalIFS, s: CellSet) -> CellSet:
    """Union over maps of the images of the cells meeting each map's domain."""
    occ = np.zeros(s.shape, dtype=bool)
    clipped = 0
    if s.is_empty():
        return CellSet(s.window, occ)
    for i, j, c in pmap(lambda lm: _map_image(lm, s, ifs.ambient), ifs.maps):
        occ[i, j] = True
        clipped += c
    return CellSet(s.window, occ, clipped)


# -- Hausdorff distance --------------------------------------------------------------

@dataclass(frozen=True)
class HausdorffReport:
    distance: float
    directed_ab: float
    directed_ba: float
    witness_ab: tuple | None = None
    witness_ba: tuple | None = None
    cell_diagonal: float = math.nan
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def in_diagonals(self) -> float:
        return self.distance / self.cell_diagonal


def _directed(a: CellSet, b: CellSet):
    cw, ch = a.cell_size
    dist = ndimage.distance_transform_edt(~b.occupied, sampling=(cw, ch))
    vals = np.where(a.occupied, dist, -1.0)
    k = int(np.argmax(vals))
    i, j = np.unravel_index(k, vals.shape)
    return float(vals[i, j]), (int(i), int(j))


def hausdorff_distance(a: CellSet, b: CellSet) -> HausdorffReport:
    """Exact Hausdorff distance between the cell centres of ``a`` and ``b``."""
    a._check(b)
    diag = a.cell_diagonal
    ea, eb = a.is_empty(), b.is_empty()
    if ea and eb:
        return HausdorffReport(0.0, 0.0, 0.0, cell_diagonal=diag)
    if ea or eb:
        dab = 0.0 if ea else math.inf
        dba = 0.0 if eb else math.inf
        return HausdorffReport(math.inf, dab, dba, cell_diagonal=diag)
    dab, wab = _directed(a, b)
    dba, wba = _directed(b, a)
    return HausdorffReport(max(dab, dba), dab, dba, wab, wba, diag)


# -- attractors -------------------------------------------------------------------------

def attractor_iterate(ifs: LocalIFS, seed: CellSet, max_iters: int = 100,
                      stop_tol: float = 0.0):
    """Iterate the set operator from ``seed``.

    Stops once successive sets are within ``stop_tol`` (Hausdorff) or after
    ``max_iters`` steps; returns the last set and the distance trace.
    """
    if int(max_iters) < 1:
        raise ValueError("max_iters must be >= 1")
    cur = seed
    trace = []
    for _ in range(int(max_iters)):
        nxt = apply_floc(ifs, cur)
        rep = hausdorff_distance(cur, nxt)
        trace.append(rep)
        cur = nxt
        if rep.distance <= stop_tol:
            break
    return cur, trace


# -- graph rasters ------------------------------------------------------------------------

def rasterize_graph(f: FractalFunction, window: Window, nx: int, ny: int,
                    eps: float | None = None) -> CellSet:
    """Cells of the window meeting the graph of ``f`` (continuous ``f``).

    Each column is filled between the range extremes of ``f`` over it,
    computed to within ``eps`` (a quarter cell height by default).
    """
    if window.ambient != f.scheme.ambient:
        raise StructuralError("window and function live on different ambients")
    ch = (window.y_hi - window.y_lo) / ny
    eps = ch / 4.0 if eps is None else eps
    edges = np.linspace(window.t_lo, window.t_hi, nx + 1)
    f.tighten_bounds(eps)
    r = column_ranges(f, edges, eps)
    rows = np.arange(ny)
    row_lo = window.y_lo + rows * ch
    row_hi = row_lo + ch
    occ = (row_hi[None, :] >= r.lo[:, None]) & (row_lo[None, :] <= r.hi[:, None])
    clipped = int(np.sum((r.hi > window.y_hi) | (r.lo < window.y_lo)))
    return CellSet(window, occ, clipped)


def graph_invariance(ifs: LocalIFS, f: FractalFunction, window: Window,
                     resolution=(1024, 1024)) -> HausdorffReport:
    """Hausdorff distance between the graph raster and its image."""
    nx, ny = resolution
    G = rasterize_graph(f, window, nx, ny)
    FG = apply_floc(ifs, G)
    rep = hausdorff_distance(FG, G)
    rep.extras.update(graph_cells=G.count(), image_cells=FG.count(),
                      clipped=FG.clipped, graph_clipped=G.clipped)
    return rep


def default_window(f: FractalFunction, pad: float = 0.1) -> Window:
    """Window over all of X with the fixed point's global bounds, padded."""
    X = f.scheme.X
    L, U = f.global_bounds()
    h = (U - L) * pad
    return Window.from_x(f.scheme.ambient, X.lo, X.hi, L - h, U + h)


# -- dumps ------------------------------------------------------------------------------------

def occupancy_rows(s: CellSet) -> np.ndarray:
    """0/1 rows, top row at ``y_hi`` (image orientation)."""
    return s.occupied.T[::-1].astype(np.uint8)


def write_pgm(s: CellSet, path) -> None:
    """Plain (P2) PGM, white = occupied."""
    rows = occupancy_rows(s)
    ny, nx = rows.shape
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"P2\n{nx} {ny}\n1\n")
        for r in rows:
            fh.write(" ".join("1" if v else "0" for v in r) + "\n")


def write_occupancy_csv(s: CellSet, path) -> None:
    np.savetxt(path, occupancy_rows(s), fmt="%d", delimiter=",")
