"""Closed-form scalar functions used as offsets and scales.

Each function evaluates on numpy arrays (``inf``/``-inf`` give the limits
at the ends), evaluates ``Fraction`` inputs exactly where its rule is
rational, evaluates in an mpmath context through :meth:`ScalarFunction.hp`,
and returns rigorous range enclosures over intervals through
:meth:`ScalarFunction.bounds`.  Enclosures come from endpoint values,
breakpoints and critical points instead of probing.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import StructuralError
from .geometry import Interval


def _arr(x):
    return np.asarray(x, dtype=float)


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(float(v))


class ScalarFunction:
    """Base class; subclasses implement ``_eval``, ``bounds`` and friends."""

    kind = "abstract"

    def __call__(self, x):
        if isinstance(x, Fraction):
            return self.exact(x)
        scalar = np.isscalar(x)
        x = _arr(x)
        fin = np.isfinite(x)
        out = np.empty_like(x)
        if fin.all():
            out = self._eval(x)
        else:
            out[fin] = self._eval(x[fin])
            out[x == math.inf] = self.limit(1)
            out[x == -math.inf] = self.limit(-1)
        return float(out) if scalar else out

    def _eval(self, x):
        raise NotImplementedError

    def exact(self, x: Fraction):
        """Exact value at a rational point (falls back to float)."""
        return float(self(float(x)))

    def hp(self, x, ctx):
        """Value in the mpmath context ``ctx``; ends give the limits."""
        if not ctx.isfinite(x):
            return ctx.mpf(self.limit(1 if x > 0 else -1))
        return self._hp(x, ctx)

    def _hp(self, x, ctx):
        # closed forms override this; the fallback is only float accurate
        return ctx.mpf(float(self(float(x))))

    def limit(self, side: int):
        """Limit at +inf (side=1) or -inf (side=-1); nan when absent."""
        return math.nan

    def breakpoints(self) -> list:
        """Points where the rule changes or loses smoothness."""
        return []

    def bounds(self, lo: float, hi: float) -> tuple:
        """Enclosure ``(min, max)`` of the function over ``[lo, hi]``."""
        raise NotImplementedError

    def bounds_many(self, lo, hi) -> tuple:
        """Vectorised :meth:`bounds` over arrays of interval ends."""
        lo, hi = _arr(lo), _arr(hi)
        out = np.array([self.bounds(float(u), float(v)) for u, v in zip(lo.ravel(), hi.ravel())])
        out = out.reshape(-1, 2)
        return out[:, 0].reshape(lo.shape), out[:, 1].reshape(lo.shape)

    def _bounds_at(self, lo, hi, special) -> tuple:
        """Extremes among the ends and the ``special`` points inside."""
        lo, hi = _arr(lo), _arr(hi)
        vals = [self(lo), self(hi)]
        vals += [self(np.clip(np.full(lo.shape, t), lo, hi)) for t in special]
        v = np.stack(vals)
        return v.min(axis=0), v.max(axis=0)

    def sup_abs(self, iv: Interval) -> float:
        a, b = self.bounds(iv.lo, iv.hi)
        return max(abs(a), abs(b))

    def is_zero(self) -> bool:
        return False

    def jumps(self) -> list:
        """Breakpoints where left and right rules disagree."""
        return []

    def to_dict(self) -> dict:
        raise TypeError(f"{type(self).__name__} is not serialisable")

    def __repr__(self):
        try:
            return f"{type(self).__name__}({self.to_dict()})"
        except TypeError:
            return f"{type(self).__name__}()"


class Constant(ScalarFunction):
    kind = "constant"

    def __init__(self, c):
        self.c = float(c)
        if not math.isfinite(self.c):
            raise StructuralError("constant must be finite")

    def _eval(self, x):
        return np.full_like(x, self.c)

    def exact(self, x):
        return Fraction(self.c)

    def _hp(self, x, ctx):
        return ctx.mpf(self.c)

    def limit(self, side):
        return self.c

    def bounds(self, lo, hi):
        return (self.c, self.c)

    def bounds_many(self, lo, hi):
        lo = _arr(lo)
        return np.full(lo.shape, self.c), np.full(lo.shape, self.c)

    def is_zero(self):
        return self.c == 0.0

    def to_dict(self):
        return {"kind": "constant", "value": self.c}


class Polynomial(ScalarFunction):
    """Polynomial with coefficients in ascending order."""

    kind = "polynomial"

    def __init__(self, coeffs):
        c = [float(v) for v in coeffs] or [0.0]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not all(math.isfinite(v) for v in c):
            raise StructuralError("polynomial coefficients must be finite")
        self.coeffs = tuple(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _eval(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def exact(self, x):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + Fraction(c)
        return acc

    def _hp(self, x, ctx):
        return ctx.polyval([ctx.mpf(c) for c in reversed(self.coeffs)], x)

    def limit(self, side):
        if self.degree == 0:
            return self.coeffs[0]
        lead = self.coeffs[-1] * (side ** self.degree)
        return math.copysign(math.inf, lead)

    def critical_points(self) -> list:
        if self.degree < 2:
            return []
        d = np.polynomial.polynomial.polyder(self.coeffs)
        r = np.polynomial.polynomial.polyroots(d)
        return sorted(float(v.real) for v in np.atleast_1d(r) if abs(v.imag) < 1e-12)

    def bounds(self, lo, hi):
        pts = [lo, hi] + [t for t in self.critical_points() if lo < t < hi]
        vals = self(np.array(pts, dtype=float))
        return (float(np.min(vals)), float(np.max(vals)))

    def bounds_many(self, lo, hi):
        return self._bounds_at(lo, hi, self.critical_points())

    def is_zero(self):
        return self.coeffs == (0.0,)

    def to_dict(self):
        return {"kind": "polynomial", "coeffs": list(self.coeffs)}


class Hat(ScalarFunction):
    """``(height - slope*|x - center|)_+``."""

    kind = "hat"

    def __init__(self, height, center, slope=1.0):
        self.height, self.center, self.slope = float(height), float(center), float(slope)
        if self.slope <= 0 or self.height < 0:
            raise StructuralError("hat needs positive slope and nonnegative height")

    def _eval(self, x):
        return np.maximum(self.height - self.slope * np.abs(x - self.center), 0.0)

    def exact(self, x):
        v = _frac(self.height) - _frac(self.slope) * abs(x - _frac(self.center))
        return max(v, Fraction(0))

    def _hp(self, x, ctx):
        v = ctx.mpf(self.height) - ctx.mpf(self.slope) * abs(x - ctx.mpf(self.center))
        return max(v, ctx.zero)

    def limit(self, side):
        return 0.0

    def breakpoints(self):
        w = self.height / self.slope
        return [self.center - w, self.center, self.center + w]

    def bounds(self, lo, hi):
        pts = [lo, hi] + [t for t in self.breakpoints() if lo < t < hi]
        vals = self(np.array(pts, dtype=float))
        return (float(np.min(vals)), float(np.max(vals)))

    def bounds_many(self, lo, hi):
        return self._bounds_at(lo, hi, self.breakpoints())

    def to_dict(self):
        return {"kind": "hat", "height": self.height, "center": self.center, "slope": self.slope}


class RationalTail(ScalarFunction):
    """``a / x``; meant for use on a region bounded away from 0."""

    kind = "rational_tail"

    def __init__(self, a):
        self.a = float(a)

    def _eval(self, x):
        with np.errstate(divide="ignore"):
            return self.a / x

    def exact(self, x):
        return _frac(self.a) / x

    def _hp(self, x, ctx):
        return ctx.mpf(self.a) / x

    def limit(self, side):
        return 0.0

    def breakpoints(self):
        return [0.0]

    def bounds(self, lo, hi):
        if lo <= 0.0 <= hi and self.a != 0.0:
            return (-math.inf, math.inf)
        vals = self(np.array([lo, hi], dtype=float))
        return (float(np.min(vals)), float(np.max(vals)))

    def bounds_many(self, lo, hi):
        lo, hi = _arr(lo), _arr(hi)
        a, b = self._bounds_at(lo, hi, [])
        pole = (lo <= 0.0) & (hi >= 0.0) & (self.a != 0.0)
        return np.where(pole, -math.inf, a), np.where(pole, math.inf, b)

    def to_dict(self):
        return {"kind": "rational_tail", "a": self.a}


class Piecewise(ScalarFunction):
    """``pieces[0]`` below ``breakpoints[0]``, ``pieces[k]`` on ``[t_k, t_{k+1})``."""

    kind = "piecewise"

    def __init__(self, breakpoints, pieces):
        self.points = tuple(float(t) for t in breakpoints)
        self.pieces = tuple(pieces)
        if len(self.pieces) != len(self.points) + 1:
            raise StructuralError("piecewise needs one more rule than breakpoints")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise StructuralError("piecewise breakpoints must increase")

    def _eval(self, x):
        k = np.searchsorted(self.points, x, side="right")
        out = np.empty_like(x)
        for i, f in enumerate(self.pieces):
            sel = k == i
            if sel.any():
                out[sel] = f(x[sel])
        return out

    def exact(self, x):
        i = sum(1 for t in self.points if x >= _frac(t))
        return self.pieces[i].exact(x)

    def hp(self, x, ctx):
        i = sum(1 for t in self.points if x >= t)
        return self.pieces[i].hp(x, ctx)

    def limit(self, side):
        return (self.pieces[-1] if side > 0 else self.pieces[0]).limit(side)

    def breakpoints(self):
        out = set(self.points)
        edges = (-math.inf,) + self.points + (math.inf,)
        for i, f in enumerate(self.pieces):
            out.update(t for t in f.breakpoints() if edges[i] < t < edges[i + 1])
        return sorted(out)

    def bounds(self, lo, hi):
        edges = (-math.inf,) + self.points + (math.inf,)
        mins, maxs = [], []
        for i, f in enumerate(self.pieces):
            a, b = max(lo, edges[i]), min(hi, edges[i + 1])
            if a > b or (a == b and a == edges[i + 1] and i + 1 < len(self.pieces)):
                continue
            u, v = f.bounds(a, b)
            mins.append(u)
            maxs.append(v)
        return (min(mins), max(maxs))

    def bounds_many(self, lo, hi):
        lo, hi = _arr(lo), _arr(hi)
        edges = (-math.inf,) + self.points + (math.inf,)
        mn = np.full(lo.shape, math.inf)
        mx = np.full(lo.shape, -math.inf)
        last = len(self.pieces) - 1
        for i, f in enumerate(self.pieces):
            a, b = np.maximum(lo, edges[i]), np.minimum(hi, edges[i + 1])
            ok = (a <= b) & ~((a == b) & (a == edges[i + 1]) & (i < last))
            if not ok.any():
                continue
            u, v = f.bounds_many(np.where(ok, a, lo), np.where(ok, b, lo))
            mn = np.where(ok, np.minimum(mn, u), mn)
            mx = np.where(ok, np.maximum(mx, v), mx)
        return mn, mx

    def jumps(self):
        out = []
        for i, t in enumerate(self.points):
            left, right = float(self.pieces[i](t)), float(self.pieces[i + 1](t))
            if abs(left - right) > 1e-12 * (1 + abs(left)):
                out.append(t)
        return out

    def is_zero(self):
        return all(f.is_zero() for f in self.pieces)

    def to_dict(self):
        return {"kind": "piecewise", "breakpoints": list(self.points),
                "pieces": [f.to_dict() for f in self.pieces]}


class Pullback(ScalarFunction):
    """``inner o map``, where ``map`` is a monotone homeomorphism."""

    kind = "pullback"

    def __init__(self, inner: ScalarFunction, map):
        self.inner = inner
        self.map = map

    def _eval(self, x):
        return self.inner(self.map.rule(x))

    def __call__(self, x):
        # the map handles end markers itself
        if isinstance(x, Fraction):
            return self.exact(x)
        scalar = np.isscalar(x)
        out = self.inner(self.map.rule(_arr(x)))
        return float(out) if scalar else out

    def exact(self, x):
        if self.map.exact_capable:
            y = self.map.exact(x)
            if isinstance(y, Fraction):
                return self.inner.exact(y)
            return float(self.inner(y))
        return float(self(float(x)))

    def hp(self, x, ctx):
        return self.inner.hp(self.map.hp(x, ctx), ctx)

    def limit(self, side):
        return float(self(side * math.inf))

    def breakpoints(self):
        cod = self.map.codomain
        inv = self.map.inverse_map()
        pts = [t for t in self.inner.breakpoints() if cod.lo < t < cod.hi]
        return sorted(float(v) for v in inv.rule(np.array(pts, dtype=float))) if pts else []

    def bounds(self, lo, hi):
        ends = self.map.rule(np.array([lo, hi], dtype=float))
        a, b = float(np.min(ends)), float(np.max(ends))
        return self.inner.bounds(a, b)

    def bounds_many(self, lo, hi):
        ea, eb = self.map.rule(_arr(lo)), self.map.rule(_arr(hi))
        return self.inner.bounds_many(np.minimum(ea, eb), np.maximum(ea, eb))

    def jumps(self):
        cod = self.map.codomain
        inv = self.map.inverse_map()
        return [float(inv.rule(t)) for t in self.inner.jumps() if cod.lo < t < cod.hi]

    def is_zero(self):
        return self.inner.is_zero()

    def to_dict(self):
        return {"kind": "pullback", "inner": self.inner.to_dict(), "map": self.map.to_dict(),
                "map_domain": str(self.map.domain)}


class LinearCombination(ScalarFunction):
    """``sum_k c_k f_k``."""

    kind = "linear_combination"

    def __init__(self, terms):
        self.terms = tuple((float(c), f) for c, f in terms)

    def _eval(self, x):
        out = np.zeros_like(x)
        for c, f in self.terms:
            out += c * f(x)
        return out

    def exact(self, x):
        return sum((_frac(c) * _frac(f.exact(x)) for c, f in self.terms), Fraction(0))

    def hp(self, x, ctx):
        return ctx.fsum(ctx.mpf(c) * f.hp(x, ctx) for c, f in self.terms)

    def limit(self, side):
        return sum(c * f.limit(side) for c, f in self.terms)

    def breakpoints(self):
        return sorted({t for _, f in self.terms for t in f.breakpoints()})

    def bounds(self, lo, hi):
        a = b = 0.0
        for c, f in self.terms:
            u, v = f.bounds(lo, hi)
            a += min(c * u, c * v)
            b += max(c * u, c * v)
        return (a, b)

    def bounds_many(self, lo, hi):
        lo = _arr(lo)
        a, b = np.zeros(lo.shape), np.zeros(lo.shape)
        for c, f in self.terms:
            u, v = f.bounds_many(lo, hi)
            a += np.minimum(c * u, c * v)
            b += np.maximum(c * u, c * v)
        return a, b

    def jumps(self):
        return sorted({t for _, f in self.terms for t in f.jumps()})

    def is_zero(self):
        return all(c == 0.0 or f.is_zero() for c, f in self.terms)

    def to_dict(self):
        return {"kind": "linear_combination",
                "terms": [{"coef": c, "function": f.to_dict()} for c, f in self.terms]}


class Custom(ScalarFunction):
    """Arbitrary vectorised rule with a user-declared bound on ``|f|``."""

    kind = "custom"

    def __init__(self, rule, bound, limit_value=math.nan):
        self.rule = rule
        self.bound = float(bound)
        self._limit = float(limit_value)

    def _eval(self, x):
        return _arr(self.rule(x))

    def limit(self, side):
        return self._limit

    def bounds(self, lo, hi):
        return (-self.bound, self.bound)

    def bounds_many(self, lo, hi):
        lo = _arr(lo)
        return np.full(lo.shape, -self.bound), np.full(lo.shape, self.bound)


def linear_combination(terms) -> ScalarFunction:
    """Combine ``(coef, function)`` terms, folding polynomials together."""
    terms = [(float(c), f) for c, f in terms]
    if all(isinstance(f, (Constant, Polynomial)) for _, f in terms):
        n = max((len(f.coeffs) if isinstance(f, Polynomial) else 1) for _, f in terms) if terms else 1
        acc = np.zeros(n)
        for c, f in terms:
            co = f.coeffs if isinstance(f, Polynomial) else (f.c,)
            acc[:len(co)] += c * np.asarray(co)
        return Polynomial(acc)
    return LinearCombination(terms)


def from_dict(data) -> ScalarFunction:
    """Rebuild a function from :meth:`ScalarFunction.to_dict` output."""
    if isinstance(data, (int, float)):
        return Constant(data)
    kind = data.get("kind")
    if kind == "constant":
        return Constant(data["value"])
    if kind == "polynomial":
        return Polynomial(data["coeffs"])
    if kind == "hat":
        return Hat(data["height"], data["center"], data.get("slope", 1.0))
    if kind == "rational_tail":
        return RationalTail(data["a"])
    if kind == "piecewise":
        return Piecewise(data["breakpoints"], [from_dict(p) for p in data["pieces"]])
    if kind == "linear_combination":
        return LinearCombination([(t["coef"], from_dict(t["function"])) for t in data["terms"]])
    if kind == "pullback":
        from .maps import from_dict as map_from_dict
        dom = Interval.parse(data["map_domain"])
        return Pullback(from_dict(data["inner"]), map_from_dict(data["map"], dom))
    raise StructuralError(f"unknown function kind {kind!r}")
