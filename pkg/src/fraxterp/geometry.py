"""Extended points, intervals and compactifying coordinates for 1-D domains.

Points of a (possibly compactified) domain are plain floats; the ends of the
half line and of the real line are ``PLUS_INF`` and ``MINUS_INF``.  NaN is
never a valid point.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, StructuralError

PLUS_INF = math.inf
MINUS_INF = -math.inf

HALF_LINE = "half_line"
REAL_LINE = "real_line"
COMPACT_INTERVAL = "compact"
AMBIENTS = (HALF_LINE, REAL_LINE, COMPACT_INTERVAL)

# absolute tolerance for comparisons in compactified coordinates
COMPACT_TOL = 1e-9


def check_point(x):
    """Return ``x`` as an extended point, rejecting NaN."""
    if isinstance(x, Fraction):
        return x
    x = float(x)
    if math.isnan(x):
        raise DomainError("NaN is not a point of any domain")
    return x


def fmt_point(x) -> str:
    if x == PLUS_INF:
        return "inf"
    if x == MINUS_INF:
        return "-inf"
    return f"{float(x):.12g}"


def _parse_endpoint(text: str) -> float:
    t = text.strip().lower().replace("∞", "inf")
    if t in ("inf", "+inf", ".inf", "infinity"):
        return PLUS_INF
    if t in ("-inf", "-.inf", "-infinity"):
        return MINUS_INF
    return float(t)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo) + 0.0, float(self.hi) + 0.0  # drop -0.0
        if math.isnan(lo) or math.isnan(hi):
            raise StructuralError("interval endpoints must not be NaN")
        if lo > hi:
            raise StructuralError(f"interval endpoints out of order: {lo} > {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse ``"[0, 1)"``-style notation."""
        m = re.fullmatch(r"\s*([\[(])\s*([^,]+),\s*([^\])]+)\s*([\])])\s*", text)
        if not m:
            raise StructuralError(f"cannot parse interval {text!r}")
        return cls(_parse_endpoint(m.group(2)), _parse_endpoint(m.group(3)),
                   m.group(1) == "[", m.group(4) == "]")

    def __str__(self):
        return (("[" if self.closed_lo else "(") + fmt_point(self.lo) + ", "
                + fmt_point(self.hi) + ("]" if self.closed_hi else ")"))

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi)

    def contains(self, x, tol: float = 0.0):
        """Vectorised membership test honouring open/closed ends."""
        if isinstance(x, Fraction) or np.isscalar(x):
            lo_ok = x >= self.lo - tol if self.closed_lo else x > self.lo - tol
            hi_ok = x <= self.hi + tol if self.closed_hi else x < self.hi + tol
            return bool(lo_ok and hi_ok)
        x = np.asarray(x, dtype=float)
        lo_ok = (x >= self.lo - tol) if self.closed_lo else (x > self.lo - tol)
        hi_ok = (x <= self.hi + tol) if self.closed_hi else (x < self.hi + tol)
        return lo_ok & hi_ok

    def same_as(self, other: "Interval", tol: float = 1e-12) -> bool:
        def close(a, b):
            if math.isinf(a) or math.isinf(b):
                return a == b
            return abs(a - b) <= tol * (1.0 + abs(a))
        return (close(self.lo, other.lo) and close(self.hi, other.hi)
                and self.closed_lo == other.closed_lo
                and self.closed_hi == other.closed_hi)

    def to_config(self) -> str:
        return str(self)


def interval(lo, hi, closed_lo=True, closed_hi=True) -> Interval:
    return Interval(lo, hi, closed_lo, closed_hi)


# -- compactifying coordinates ------------------------------------------------

def compactify(ambient: str, x):
    """Map a point of the ambient domain to compactified coordinates.

    HALF_LINE uses x/(1+x) with inf -> 1, REAL_LINE uses x/(1+|x|) with
    +-inf -> +-1; compact intervals are their own coordinates.
    """
    scalar = np.isscalar(x) or isinstance(x, Fraction)
    x = np.asarray(x, dtype=float)
    if ambient == COMPACT_INTERVAL:
        t = x.copy()
    else:
        fin = np.isfinite(x)
        xf = np.where(fin, x, 0.0)
        if ambient == HALF_LINE:
            t = np.where(fin, xf / (1.0 + xf), 1.0)
        elif ambient == REAL_LINE:
            t = np.where(fin, xf / (1.0 + np.abs(xf)), np.sign(x))
        else:
            raise StructuralError(f"unknown ambient {ambient!r}")
    return float(t) if scalar else t


def decompactify(ambient: str, t):
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=float)
    if ambient == COMPACT_INTERVAL:
        x = t.copy()
    elif ambient == HALF_LINE:
        inner = t < 1.0
        x = np.where(inner, t / (1.0 - np.where(inner, t, 0.0)), PLUS_INF)
    elif ambient == REAL_LINE:
        inner = np.abs(t) < 1.0
        tt = np.where(inner, t, 0.0)
        x = np.where(inner, tt / (1.0 - np.abs(tt)), np.where(t > 0, PLUS_INF, MINUS_INF))
    else:
        raise StructuralError(f"unknown ambient {ambient!r}")
    return float(x) if scalar else x


def local_coordinate(iv: Interval):
    """Finite chart ``(to_u, from_u, u_lo, u_hi)`` for a single interval.

    Bounded intervals are charted linearly; unbounded ends use the
    substitution x = a + u/(1-u).  Used for probing and quadrature on pieces
    whose ambient is not known.
    """
    a, b = iv.lo, iv.hi
    if iv.bounded:
        return (lambda x: np.asarray(x, float), lambda u: np.asarray(u, float), a, b)
    if math.isfinite(a):
        def to_u(x):
            x = np.asarray(x, float)
            fin = np.isfinite(x)
            d = np.where(fin, x - a, 0.0)
            return np.where(fin, d / (1.0 + d), 1.0)

        def from_u(u):
            u = np.asarray(u, float)
            inner = u < 1.0
            uu = np.where(inner, u, 0.0)
            return np.where(inner, a + uu / (1.0 - uu), PLUS_INF)
        return to_u, from_u, 0.0, 1.0
    if math.isfinite(b):
        def to_u(x):
            x = np.asarray(x, float)
            fin = np.isfinite(x)
            d = np.where(fin, b - x, 0.0)
            return np.where(fin, -d / (1.0 + d), -1.0)

        def from_u(u):
            u = np.asarray(u, float)
            inner = u > -1.0
            uu = np.where(inner, -u, 0.0)
            return np.where(inner, b - uu / (1.0 - uu), MINUS_INF)
        return to_u, from_u, -1.0, 0.0
    return (lambda x: compactify(REAL_LINE, x), lambda u: decompactify(REAL_LINE, u), -1.0, 1.0)


def interior_probes(iv: Interval, n: int) -> np.ndarray:
    """``n`` points strictly inside ``iv``, uniform in its local chart."""
    _, from_u, ulo, uhi = local_coordinate(iv)
    u = ulo + (uhi - ulo) * (np.arange(n) + 0.5) / n
    return from_u(u)


# -- validation reports --------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    condition: str
    witness: object
    description: str

    def __str__(self):
        w = fmt_point(self.witness) if isinstance(self.witness, (int, float)) else self.witness
        return f"{self.condition} at {w}: {self.description}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def conditions(self) -> set:
        return {v.condition for v in self.violations}

    def merged(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.violations + other.violations)
