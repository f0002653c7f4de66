"""Partitions of a 1-D domain into bounded and unbounded pieces.

A :class:`PartitionScheme` holds a compact core ``K`` covered by the images
``b_j(K_j)`` and the remainder ``X \\ K`` covered by the images ``u_i(V_i)``.
Coverage and disjointness are checked in compactified coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, StructuralError, UnlocatableError
from .geometry import (
    AMBIENTS, COMPACT_INTERVAL, COMPACT_TOL, HALF_LINE, MINUS_INF, PLUS_INF,
    REAL_LINE, Interval, ValidationReport, Violation, check_point, compactify,
    decompactify,
)
from .maps import Homeomorphism1D, verify_homeomorphism

BOUNDED = "BOUNDED"
UNBOUNDED = "UNBOUNDED"
_KIND_ORDER = {BOUNDED: 0, UNBOUNDED: 1}


class PieceId(NamedTuple):
    kind: str
    index: int  # 1-based

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.index)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return f"{self.kind}#{self.index}"


@dataclass(frozen=True)
class Piece:
    pid: PieceId
    interval: Interval
    map: Homeomorphism1D

    @property
    def image(self) -> Interval:
        return self.map.codomain


def ambient_interval(ambient: str, compactified: bool, compact: Interval | None = None) -> Interval:
    if ambient == HALF_LINE:
        return Interval(0.0, PLUS_INF, True, compactified)
    if ambient == REAL_LINE:
        return Interval(MINUS_INF, PLUS_INF, compactified, compactified)
    if ambient == COMPACT_INTERVAL:
        if compact is None or not compact.bounded:
            raise StructuralError("a compact ambient needs a bounded interval")
        return compact
    raise StructuralError(f"unknown ambient {ambient!r}")


def _piece_pairs(pairs):
    out = []
    for p in pairs:
        if isinstance(p, Piece):
            out.append((p.interval, p.map))
        else:
            iv, m = p
            out.append((iv, m))
    return out


class PartitionScheme:
    """Bounded pieces ``(K_j, b_j)``, unbounded pieces ``(V_i, u_i)`` and ``pi``.

    Structural problems (map domain differing from its piece, pieces outside
    the ambient domain, a bad permutation, ...) raise
    :class:`StructuralError` on construction.
    """

    def __init__(self, ambient: str, K: Interval | None, bounded_pieces=(),
                 unbounded_pieces=(), pi=None, compactified: bool = False,
                 domain: Interval | None = None):
        if ambient not in AMBIENTS:
            raise StructuralError(f"unknown ambient {ambient!r}")
        self.ambient = ambient
        self.K = K
        self.compactified = bool(compactified)
        bp = _piece_pairs(bounded_pieces)
        up = _piece_pairs(unbounded_pieces)
        self.bounded_pieces = tuple(
            Piece(PieceId(BOUNDED, j + 1), iv, m) for j, (iv, m) in enumerate(bp))
        self.unbounded_pieces = tuple(
            Piece(PieceId(UNBOUNDED, i + 1), iv, m) for i, (iv, m) in enumerate(up))
        n = len(self.unbounded_pieces)
        self.pi = tuple(range(1, n + 1)) if pi is None else tuple(int(v) for v in pi)
        self.X = ambient_interval(ambient, self.compactified, domain if domain is not None else K)
        self._check_structure()

    # -- structure ----------------------------------------------------------

    @property
    def pieces(self) -> tuple:
        return self.bounded_pieces + self.unbounded_pieces

    @property
    def m(self) -> int:
        return len(self.bounded_pieces)

    @property
    def n(self) -> int:
        return len(self.unbounded_pieces)

    def piece(self, pid: PieceId) -> Piece:
        group = self.bounded_pieces if pid.kind == BOUNDED else self.unbounded_pieces
        if not 1 <= pid.index <= len(group):
            raise StructuralError(f"no piece {pid}")
        return group[pid.index - 1]

    def flat_index(self, pid: PieceId) -> int:
        return pid.index - 1 + (0 if pid.kind == BOUNDED else self.m)

    def unbounded_components(self) -> int:
        if self.ambient == COMPACT_INTERVAL:
            return 0
        return 1 if self.ambient == HALF_LINE else 2

    def _check_structure(self):
        X = self.X
        if sorted(self.pi) != list(range(1, self.n + 1)):
            raise StructuralError(f"pi={self.pi} is not a permutation of 1..{self.n}")
        if self.K is None and self.m:
            raise StructuralError("bounded pieces given but K is empty")
        if self.K is not None:
            if not self.K.bounded:
                raise StructuralError(f"K={self.K} must be bounded")
            if not (self.K.closed_lo and self.K.closed_hi):
                raise StructuralError(f"K={self.K} must be closed")
            if not (X.lo <= self.K.lo and self.K.hi <= X.hi):
                raise StructuralError(f"K={self.K} not inside {X}")
            # X \ K may not have bounded components
            if self.ambient == HALF_LINE and self.K.lo != X.lo:
                raise StructuralError("on the half line K must contain 0")
            if self.ambient == COMPACT_INTERVAL and not self.K.same_as(X):
                raise StructuralError("on a compact ambient K must be the whole interval")
        if self.ambient == COMPACT_INTERVAL and self.n:
            raise StructuralError("a compact ambient has no unbounded components")
        for pc in self.pieces:
            iv, m = pc.interval, pc.map
            if not m.domain.same_as(iv):
                raise StructuralError(
                    f"{pc.pid}: map domain {m.domain} differs from declared piece {iv}")
            for end, closed in ((iv.lo, iv.closed_lo), (iv.hi, iv.closed_hi)):
                if math.isinf(end) and closed and not self.compactified:
                    raise StructuralError(f"{pc.pid}: closed end at {end} needs compactified=true")
            if not X.contains(np.array([iv.lo, iv.hi]), COMPACT_TOL).all():
                raise StructuralError(f"{pc.pid}: piece {iv} not inside {X}")
            img = pc.image
            if not X.contains(np.array([img.lo, img.hi]), COMPACT_TOL).all():
                raise StructuralError(f"{pc.pid}: image {img} not inside {X}")

    # -- locating -------------------------------------------------------------

    def locate(self, x) -> PieceId:
        """Piece whose image contains ``x``; lowest (kind, index) wins ties."""
        x = check_point(x)
        idx = int(self.locate_index(np.array([float(x)]))[0])
        return self.pieces[idx].pid

    def locate_index(self, x) -> np.ndarray:
        """Vectorised :meth:`locate` returning flat piece indices."""
        x = np.asarray(x, dtype=float)
        if np.isnan(x).any():
            raise DomainError("NaN is not a point of any domain")
        idx = np.full(x.shape, -1, dtype=np.intp)
        for k in range(len(self.pieces) - 1, -1, -1):
            idx[self.pieces[k].image.contains(x)] = k
        miss = idx < 0
        if miss.any():
            tx = compactify(self.ambient, x[miss])
            best = np.full(tx.shape, np.inf)
            choice = np.full(tx.shape, -1, dtype=np.intp)
            for k, pc in enumerate(self.pieces):
                lo, hi = compactify(self.ambient, np.array([pc.image.lo, pc.image.hi]))
                dist = np.maximum(np.maximum(lo - tx, tx - hi), 0.0)
                better = dist < best
                best = np.where(better, dist, best)
                choice = np.where(better, k, choice)
            ok = best <= COMPACT_TOL
            if not ok.all():
                bad = x[miss][~ok][0]
                if not self.X.contains(bad, COMPACT_TOL):
                    raise DomainError(f"{bad} outside ambient domain {self.X}")
                raise UnlocatableError(f"point {bad} lies in no piece image")
            idx[miss] = choice
        return idx

    def __repr__(self):
        return (f"PartitionScheme({self.ambient}, K={self.K}, m={self.m}, n={self.n}, "
                f"compactified={self.compactified})")


# -- validation ------------------------------------------------------------------

def _cover_check(ambient, target: Interval, images, label, out):
    """Sweep images over ``target`` in compactified coordinates."""
    tc = lambda v: float(compactify(ambient, v))
    back = lambda t: float(decompactify(ambient, t))
    recs = sorted(
        ((tc(iv.lo), tc(iv.hi), iv.closed_lo, iv.closed_hi, name) for name, iv in images),
        key=lambda r: (r[0], r[1]))
    t_lo, t_hi = tc(target.lo), tc(target.hi)
    for lo, hi, _, _, name in recs:
        if lo < t_lo - COMPACT_TOL or hi > t_hi + COMPACT_TOL:
            w = lo if lo < t_lo - COMPACT_TOL else hi
            out.append(Violation("image outside region", back(w),
                                 f"{name} leaves {label} {target}"))
    reach, reach_closed = t_lo, not target.closed_lo
    # ``reach`` is the right end of the covered prefix; reach_closed tells
    # whether that end point itself is already covered
    for lo, hi, clo, chi, name in recs:
        if lo > reach + COMPACT_TOL:
            out.append(Violation("cover gap", back(0.5 * (reach + lo)),
                                 f"{label} uncovered between {back(reach):.12g} and {back(lo):.12g}"))
        elif abs(lo - reach) <= COMPACT_TOL and not (reach_closed or clo):
            out.append(Violation("cover gap", back(lo), f"point of {label} uncovered"))
        elif lo < reach - COMPACT_TOL:
            ov_hi = min(reach, hi)
            out.append(Violation("interior overlap", back(0.5 * (lo + ov_hi)),
                                 f"{name} overlaps another image on ({back(lo):.12g}, {back(ov_hi):.12g})"))
        if hi > reach + COMPACT_TOL or (abs(hi - reach) <= COMPACT_TOL and chi):
            reach_closed = chi if hi > reach + COMPACT_TOL else (reach_closed or chi)
            reach = max(reach, hi)
    if reach < t_hi - COMPACT_TOL:
        out.append(Violation("cover gap", back(0.5 * (reach + t_hi)),
                             f"{label} uncovered between {back(reach):.12g} and {back(t_hi):.12g}"))
    elif target.closed_hi and not reach_closed and recs:
        out.append(Violation("cover gap", back(t_hi), f"end point of {label} uncovered"))


def validate_partition(scheme: PartitionScheme, resolution: int = 64) -> ValidationReport:
    """Check the covering conditions and the piece maps.

    Bounded images must tile ``K`` and unbounded images must tile
    ``X \\ K`` with pairwise disjoint interiors; every map is probed at
    ``resolution`` interior points.
    """
    scheme._check_structure()
    out = []
    for pc in scheme.pieces:
        rep = verify_homeomorphism(pc.map, resolution)
        out.extend(Violation(v.condition, v.witness, f"{pc.pid}: {v.description}")
                   for v in rep.violations)
    amb = scheme.ambient
    if scheme.K is not None:
        _cover_check(amb, scheme.K,
                     [(str(p.pid), p.image) for p in scheme.bounded_pieces], "K", out)
    if scheme.unbounded_components():
        # sweep all of X with K standing in as an already covered block
        imgs = [(str(p.pid), p.image) for p in scheme.unbounded_pieces]
        if scheme.K is not None:
            imgs.append(("K", scheme.K))
        _cover_check(amb, scheme.X, imgs, "X\\K", out)
    return ValidationReport(tuple(out))
