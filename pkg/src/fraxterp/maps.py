"""Monotone homeomorphisms between 1-D intervals.

Every map carries a forward rule, an inverse (itself a map of the catalog),
and a derivative.  Rules accept numpy arrays containing the end markers
``inf``/``-inf``; images of end markers come from explicit tables rather
than IEEE arithmetic, so ``inf/inf`` style NaNs never appear.

Affine, Mobius and translation maps (and compositions of them) also accept
``fractions.Fraction`` inputs and evaluate them exactly; every map also
evaluates in an mpmath context through :meth:`Homeomorphism1D.hp`.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, StructuralError
from .geometry import (
    COMPACT_TOL, Interval, ValidationReport, Violation, check_point,
    interior_probes, local_coordinate,
)

AFFINE = "affine"
MOBIUS = "mobius"
ATAN_SCALED = "atan_scaled"
TAN_SCALED = "tan_scaled"
TRANSLATION = "translation"
COMPOSITION = "composition"
KINDS = (AFFINE, MOBIUS, ATAN_SCALED, TAN_SCALED, TRANSLATION, COMPOSITION)

FORWARD = "forward"
INVERSE = "inverse"

EXACT_KINDS = (AFFINE, MOBIUS, TRANSLATION)

_TWO_OVER_PI = 2.0 / math.pi
_HALF_PI = math.pi / 2.0

# membership slack when checking that a point lies in a (co)domain
POINT_TOL = 1e-12


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _as_array(x):
    return np.asarray(x, dtype=float)


class Homeomorphism1D:
    """Strictly monotone bijection ``domain -> codomain``.

    Construct through the helpers :func:`affine`, :func:`mobius`,
    :func:`atan_scaled`, :func:`tan_scaled`, :func:`translation` and
    :func:`compose`; the codomain is computed from the domain.
    """

    __slots__ = ("kind", "params", "domain", "codomain", "parts", "_inverse")

    def __init__(self, kind, params, domain: Interval, parts=()):
        if kind not in KINDS:
            raise StructuralError(f"unknown map kind {kind!r}")
        self.kind = kind
        self.params = tuple(float(p) for p in params)
        self.domain = domain
        self.parts = tuple(parts)
        self._inverse = None
        if any(not math.isfinite(p) for p in self.params):
            raise StructuralError(f"{kind} parameters must be finite: {self.params}")
        if kind == AFFINE and self.params[0] == 0.0:
            raise StructuralError("affine map needs a nonzero slope")
        if kind == MOBIUS:
            a, b, c, d = self.params
            if a * d - b * c == 0.0:
                raise StructuralError("mobius map is degenerate (ad - bc = 0)")
        self.codomain = self._image(domain)

    # -- descriptive helpers ------------------------------------------------

    def __repr__(self):
        if self.kind == COMPOSITION:
            return f"compose({self.parts[0]!r}, {self.parts[1]!r})"
        args = ", ".join(f"{p:g}" for p in self.params)
        return f"{self.kind}({args}) on {self.domain}"

    @property
    def increasing(self) -> bool:
        k, p = self.kind, self.params
        if k == AFFINE:
            return p[0] > 0
        if k == MOBIUS:
            return p[0] * p[3] - p[1] * p[2] > 0
        if k == COMPOSITION:
            return self.parts[0].increasing == self.parts[1].increasing
        return True

    @property
    def exact_capable(self) -> bool:
        if self.kind == COMPOSITION:
            return all(m.exact_capable for m in self.parts)
        return self.kind in EXACT_KINDS

    def poles(self) -> list:
        """Points where the rule is singular (finite x only)."""
        if self.kind == MOBIUS:
            a, b, c, d = self.params
            return [-d / c] if c != 0.0 else []
        if self.kind == TAN_SCALED:
            lo = self.domain.lo if math.isfinite(self.domain.lo) else -1e6
            hi = self.domain.hi if math.isfinite(self.domain.hi) else 1e6
            k0 = math.floor((lo - 1) / 2)
            return [2 * k + 1.0 for k in range(k0, k0 + int((hi - lo) / 2) + 3)
                    if lo - 1 <= 2 * k + 1 <= hi + 1]
        if self.kind == COMPOSITION:
            return self.parts[1].poles()
        return []

    def interior_poles(self) -> list:
        return [x for x in self.poles() if self.domain.lo < x < self.domain.hi]

    @property
    def singular(self) -> bool:
        if self.kind == COMPOSITION:
            return any(m.singular for m in self.parts)
        return bool(self.interior_poles())

    # -- raw rules (vectorised, no domain checks) -----------------------------

    def _pole_side(self, x0: float) -> int:
        if x0 == self.domain.lo:
            return 1
        if x0 == self.domain.hi:
            return -1
        return 1

    def rule(self, x):
        """Forward rule on arrays, ends handled by table."""
        k, p = self.kind, self.params
        x = _as_array(x)
        fin = np.isfinite(x)
        xf = np.where(fin, x, 0.0)
        if k == AFFINE:
            a, b = p
            return np.where(fin, a * xf + b, x * _sign(a))
        if k == TRANSLATION:
            return np.where(fin, xf + p[0], x)
        if k == ATAN_SCALED:
            return np.where(fin, _TWO_OVER_PI * np.arctan(xf), np.sign(x))
        if k == TAN_SCALED:
            # +-1 and other odd integers are poles; they map to +-inf
            r = np.rint(xf)
            at_pole = fin & (np.abs(xf - r) == 0) & (np.mod(r, 2) == 1)
            with np.errstate(all="ignore"):
                val = np.tan(_HALF_PI * xf)
            side = np.where(xf == self.domain.hi, 1.0, -1.0)
            val = np.where(at_pole, side * math.inf, val)
            return np.where(fin, val, np.nan)
        if k == MOBIUS:
            a, b, c, d = p
            den = c * xf + d
            pole = fin & (den == 0.0)
            with np.errstate(all="ignore"):
                val = (a * xf + b) / np.where(pole, 1.0, den)
            if np.any(pole):
                x0 = -d / c
                s = _sign(b * c - a * d) * self._pole_side(x0)
                val = np.where(pole, s * math.inf, val)
            if c != 0.0:
                at_end = a / c
            else:
                at_end = np.sign(x) * _sign(a / d) * math.inf
            return np.where(fin, val, at_end)
        if k == COMPOSITION:
            outer, inner = self.parts
            return outer.rule(inner.rule(x))
        raise StructuralError(k)

    def derivative(self, x):
        """Derivative of the forward rule; limits at the ends (0 or inf)."""
        k, p = self.kind, self.params
        x = _as_array(x)
        fin = np.isfinite(x)
        xf = np.where(fin, x, 0.0)
        with np.errstate(all="ignore"):
            if k == AFFINE:
                return np.full_like(x, p[0])
            if k == TRANSLATION:
                return np.ones_like(x)
            if k == ATAN_SCALED:
                return np.where(fin, _TWO_OVER_PI / (1.0 + xf * xf), 0.0)
            if k == TAN_SCALED:
                cos = np.cos(_HALF_PI * xf)
                return np.where(fin, _HALF_PI / (cos * cos), np.nan)
            if k == MOBIUS:
                a, b, c, d = p
                den = c * xf + d
                val = (a * d - b * c) / (den * den)
                val = np.where(fin & (den == 0.0), math.inf, val)
                tail = 0.0 if c != 0.0 else a / d
                return np.where(fin, val, tail)
            if k == COMPOSITION:
                outer, inner = self.parts
                return outer.derivative(inner.rule(x)) * inner.derivative(x)
        raise StructuralError(k)

    def exact(self, x):
        """Forward rule on a Fraction, exact for affine/mobius/translation."""
        if not isinstance(x, Fraction):
            return float(self.rule(x))
        k = self.kind
        if k == COMPOSITION:
            outer, inner = self.parts
            return outer.exact(inner.exact(x))
        if k not in EXACT_KINDS:
            raise TypeError(f"{k} maps have no exact rule")
        p = [Fraction(v) for v in self.params]
        if k == AFFINE:
            return p[0] * x + p[1]
        if k == TRANSLATION:
            return x + p[0]
        a, b, c, d = p
        den = c * x + d
        if den == 0:
            s = _sign(self.params[1] * self.params[2] - self.params[0] * self.params[3])
            return s * self._pole_side(float(x)) * math.inf
        return (a * x + b) / den

    def hp(self, x, ctx):
        """Forward rule in the mpmath context ``ctx`` (ends and poles via :meth:`rule`)."""
        k, p = self.kind, self.params
        if k == COMPOSITION:
            outer, inner = self.parts
            return outer.hp(inner.hp(x, ctx), ctx)
        if not ctx.isfinite(x):
            return ctx.mpf(float(self.rule(float(x))))
        if k == AFFINE:
            return ctx.mpf(p[0]) * x + ctx.mpf(p[1])
        if k == TRANSLATION:
            return x + ctx.mpf(p[0])
        if k == ATAN_SCALED:
            return 2 * ctx.atan(x) / ctx.pi
        if k == TAN_SCALED:
            if ctx.isint(x) and int(x) % 2 == 1:
                return ctx.mpf(float(self.rule(float(x))))
            return ctx.tan(ctx.pi * x / 2)
        a, b, c, d = (ctx.mpf(v) for v in p)
        den = c * x + d
        if den == 0:
            return ctx.mpf(float(self.rule(float(x))))
        return (a * x + b) / den

    # -- image / inverse ----------------------------------------------------

    def _image(self, iv: Interval) -> Interval:
        ends = self.rule(np.array([iv.lo, iv.hi]))
        lo, hi = float(ends[0]), float(ends[1])
        if math.isnan(lo) or math.isnan(hi):
            raise StructuralError(f"{self.kind} map undefined on {iv}")
        if self.increasing:
            if lo > hi:  # singular map: keep a well-formed record
                lo, hi = hi, lo
            return Interval(lo, hi, iv.closed_lo, iv.closed_hi)
        if hi > lo:
            lo, hi = hi, lo
        return Interval(hi, lo, iv.closed_hi, iv.closed_lo)

    def image(self, iv: Interval) -> Interval:
        return self._image(iv)

    def inverse_map(self) -> "Homeomorphism1D":
        if self._inverse is not None:
            return self._inverse
        k, p = self.kind, self.params
        dom = self.codomain
        if k == AFFINE:
            inv = Homeomorphism1D(AFFINE, (1.0 / p[0], -p[1] / p[0]), dom)
        elif k == TRANSLATION:
            inv = Homeomorphism1D(TRANSLATION, (-p[0],), dom)
        elif k == ATAN_SCALED:
            inv = Homeomorphism1D(TAN_SCALED, (), dom)
        elif k == TAN_SCALED:
            inv = Homeomorphism1D(ATAN_SCALED, (), dom)
        elif k == MOBIUS:
            a, b, c, d = p
            inv = Homeomorphism1D(MOBIUS, (d, -b, -c, a), dom)
        else:
            outer, inner = self.parts
            outer_inv = outer.inverse_map().with_domain(dom)
            inv = compose(inner.inverse_map().with_domain(outer_inv.codomain), outer_inv)
        inv._inverse = self
        self._inverse = inv
        return inv

    def with_domain(self, iv: Interval) -> "Homeomorphism1D":
        """Restriction of the same rule to a sub-interval ``iv``."""
        if self.kind == COMPOSITION:
            outer, inner = self.parts
            inner_r = inner.with_domain(iv)
            return compose(outer.with_domain(inner_r.codomain), inner_r)
        return Homeomorphism1D(self.kind, self.params, iv)

    # -- checked application ------------------------------------------------

    def forward(self, x):
        return apply(self, FORWARD, x)

    def inverse(self, y):
        return apply(self, INVERSE, y)

    def to_dict(self) -> dict:
        if self.kind == COMPOSITION:
            return {"kind": COMPOSITION, "outer": self.parts[0].to_dict(),
                    "inner": self.parts[1].to_dict()}
        d = {"kind": self.kind}
        if self.params:
            d["params"] = list(self.params)
        return d

    def same_rule(self, other: "Homeomorphism1D") -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == COMPOSITION:
            return all(a.same_rule(b) for a, b in zip(self.parts, other.parts))
        return self.params == other.params


# -- constructors --------------------------------------------------------------

def affine(a, b, domain: Interval) -> Homeomorphism1D:
    return Homeomorphism1D(AFFINE, (a, b), domain)


def mobius(a, b, c, d, domain: Interval) -> Homeomorphism1D:
    return Homeomorphism1D(MOBIUS, (a, b, c, d), domain)


def atan_scaled(domain: Interval) -> Homeomorphism1D:
    return Homeomorphism1D(ATAN_SCALED, (), domain)


def tan_scaled(domain: Interval) -> Homeomorphism1D:
    if domain.lo < -1.0 or domain.hi > 1.0:
        # only the principal branch is a homeomorphism onto an interval
        raise StructuralError("tan_scaled domain must lie in [-1, 1]")
    return Homeomorphism1D(TAN_SCALED, (), domain)


def translation(t, domain: Interval) -> Homeomorphism1D:
    return Homeomorphism1D(TRANSLATION, (t,), domain)


def _inside(inner: Interval, outer: Interval, tol: float = POINT_TOL) -> bool:
    def le(a, b):
        if math.isinf(a) or math.isinf(b):
            return a <= b
        return a <= b + tol * (1.0 + abs(b))

    if not (le(outer.lo, inner.lo) and le(inner.hi, outer.hi)):
        return False
    if inner.lo == outer.lo and inner.closed_lo and not outer.closed_lo:
        return False
    if inner.hi == outer.hi and inner.closed_hi and not outer.closed_hi:
        return False
    return True


def compose(outer: Homeomorphism1D, inner: Homeomorphism1D) -> Homeomorphism1D:
    """``outer o inner`` on ``inner.domain``."""
    if not _inside(inner.codomain, outer.domain):
        raise StructuralError(
            f"cannot compose: inner codomain {inner.codomain} not inside outer domain {outer.domain}")
    return Homeomorphism1D(COMPOSITION, (), inner.domain, parts=(outer, inner))


def from_dict(data: dict, domain: Interval) -> Homeomorphism1D:
    kind = data["kind"]
    if kind == COMPOSITION:
        inner = from_dict(data["inner"], domain)
        return compose(from_dict(data["outer"], inner.codomain), inner)
    params = data.get("params", [])
    builders = {AFFINE: 2, MOBIUS: 4, TRANSLATION: 1, ATAN_SCALED: 0, TAN_SCALED: 0}
    if kind not in builders:
        raise StructuralError(f"unknown map kind {kind!r}")
    if len(params) != builders[kind]:
        raise StructuralError(f"{kind} takes {builders[kind]} parameters, got {len(params)}")
    if kind == TAN_SCALED:
        return tan_scaled(domain)
    return Homeomorphism1D(kind, params, domain)


# -- application ---------------------------------------------------------------

def apply(m: Homeomorphism1D, direction: str, x):
    """Apply ``m`` (or its inverse) to an extended point or an array.

    Raises :class:`DomainError` when an input lies outside the declared
    domain (FORWARD) or codomain (INVERSE).
    """
    if direction == FORWARD:
        target, iv = m, m.domain
    elif direction == INVERSE:
        target, iv = m.inverse_map(), m.codomain
    else:
        raise ValueError(f"direction must be FORWARD or INVERSE, got {direction!r}")
    if isinstance(x, Fraction):
        if not iv.contains(x, POINT_TOL):
            raise DomainError(f"{x} outside {iv}")
        if target.exact_capable:
            return target.exact(x)
        return float(target.rule(float(x)))
    if np.isscalar(x):
        x = check_point(x)
        if not iv.contains(x, POINT_TOL * (1.0 + abs(x) if math.isfinite(x) else 1.0)):
            raise DomainError(f"{x} outside {iv}")
        return float(target.rule(x))
    arr = _as_array(x)
    if np.isnan(arr).any():
        raise DomainError("NaN is not a point of any domain")
    mask = iv.contains(arr, POINT_TOL)
    if not np.all(mask):
        bad = arr[~mask][0]
        raise DomainError(f"{bad} outside {iv}")
    return target.rule(arr)


# -- verification --------------------------------------------------------------

def verify_homeomorphism(m: Homeomorphism1D, probes: int = 64) -> ValidationReport:
    """Numerically certify monotonicity, round trips and end correspondence."""
    out = []
    for part in _leaves(m):
        for x0 in part.interior_poles():
            out.append(Violation("not monotone / singular", x0,
                                 f"{part.kind} pole inside domain {part.domain}"))
    xs = interior_probes(m.domain, max(int(probes), 2))
    ys = m.rule(xs)
    d = np.diff(ys)
    sgn = 1.0 if m.increasing else -1.0
    bad = np.nonzero(~(sgn * d > 0))[0]
    if bad.size:
        i = int(bad[0])
        out.append(Violation("not monotone / singular", float(xs[i]),
                             f"values {ys[i]:.6g} then {ys[i + 1]:.6g}"))
    if not out:
        back = m.inverse_map().rule(ys)
        err = np.abs(back - xs) / (1.0 + np.abs(xs))
        i = int(np.argmax(err))
        if err[i] > 1e-12:
            out.append(Violation("round-trip", float(xs[i]),
                                 f"inverse(forward(x)) off by {err[i]:.3g} (relative)"))
        out.extend(_end_checks(m))
    return ValidationReport(tuple(out))


def _leaves(m):
    if m.kind == COMPOSITION:
        return _leaves(m.parts[0]) + _leaves(m.parts[1])
    return [m]


def _end_checks(m: Homeomorphism1D):
    """Forward values near each end must approach the recorded image."""
    out = []
    to_u, from_u, ulo, uhi = local_coordinate(m.domain)
    cod_to, _, clo, chi = local_coordinate(m.codomain.closure())
    span = max(chi - clo, 1e-300)
    for end, u_end, inward in ((m.domain.lo, ulo, 1.0), (m.domain.hi, uhi, -1.0)):
        target = float(m.rule(end))
        approach = from_u(u_end + inward * (uhi - ulo) * np.array([1e-4, 1e-6, 1e-8]))
        vals = m.rule(approach)
        gap = np.abs(cod_to(vals) - cod_to(np.full_like(vals, target))) / span
        if not (np.all(np.isfinite(gap)) and gap[-1] <= max(1e-5, 10 * COMPACT_TOL)):
            out.append(Violation("end correspondence", end,
                                 f"image {target} not approached by nearby points"))
        expected = m.codomain.lo if (inward > 0) == m.increasing else m.codomain.hi
        if target != expected:
            out.append(Violation("end correspondence", end,
                                 f"image {target} differs from codomain end {expected}"))
    return out
