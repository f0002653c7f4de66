"""Reference computations that share no code with the package.

Each oracle re-derives a quantity from the raw formulas: grid iteration of
the fixed-point equation, orbit sums in float or 50-digit arithmetic,
brute-force Hausdorff distances and adaptive quadrature.
"""

import math

import mpmath
import numpy as np
from scipy import integrate


def _interp_t(t_grid, values, t):
    return np.interp(t, t_grid, values)


# -- fixed points by brute-force grid iteration -----------------------------------

def example1_grid_oracle(probes, n=2 ** 14, iters=200):
    """Iterate ``f <- g + s_j f(2x - k)`` on [0, 1] from zero.

    The grid holds ``n + 1`` dyadic points plus the probes; values between
    nodes come from linear interpolation.
    """
    probes = np.asarray(probes, dtype=float)
    x = np.union1d(np.linspace(0.0, 1.0, n + 1), probes)
    g = np.maximum(0.5 - np.abs(x - 0.5), 0.0)
    left = x <= 0.5
    pre = np.where(left, 2.0 * x, 2.0 * x - 1.0)
    s = np.where(left, 0.8, -0.6)
    f = np.zeros_like(x)
    for _ in range(iters):
        f = g + s * np.interp(pre, x, f)
    return np.interp(probes, x, f)


def halfline_g(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        tail = np.where(np.isfinite(x), 2.0 / np.where(x > 0, x, 1.0), 0.0)
    return np.where(x <= 2.0, np.abs(x - 0.5) - 0.5, tail)


def halfline_grid_oracle(probes, n=2 ** 14, iters=200):
    """Iterate the arctan / unit-shift equation on [0, inf] from zero.

    Nodes are uniform in ``t = x / (1 + x)`` (``t = 1`` is infinity) plus the
    probes; pre-images are ``tan(pi x / 2)`` on ``[0, 1)`` and ``x - 1``
    beyond.
    """
    probes = np.asarray(probes, dtype=float)
    with np.errstate(invalid="ignore"):
        tp = np.where(np.isfinite(probes), probes / (1.0 + probes), 1.0)
    t = np.union1d(np.linspace(0.0, 1.0, n + 1), tp)
    inner = t < 1.0
    x = np.where(inner, t / (1.0 - np.where(inner, t, 0.0)), math.inf)
    g = halfline_g(x)
    first = x < 1.0
    with np.errstate(invalid="ignore"):
        pre = np.where(first, np.tan(0.5 * math.pi * np.where(first, x, 0.0)), x - 1.0)
        tpre = np.where(np.isfinite(pre), pre / (1.0 + pre), 1.0)
    s = np.where(first, 0.75, 0.7)
    f = np.zeros_like(t)
    for _ in range(iters):
        f = g + s * np.interp(tpre, t, f)
    return np.interp(tp, t, f)


def orbit_oracle(x, g, pieces, depth=200):
    """Truncated orbit sum ``sum_d prod s * g`` following pre-images.

    ``pieces`` is a list of ``(contains, preimage, scale)`` triples tried in
    order; ``g`` is the offset written in the image variable.
    """
    val, prod = 0.0, 1.0
    for _ in range(depth):
        for contains, pre, s in pieces:
            if contains(x):
                val += prod * g(x)
                prod *= s
                x = pre(x)
                break
        else:
            raise ValueError(f"{x} in no image")
    return val


def halfline_mp_oracle(x, digits=50, depth=200):
    """Half-line fixed point at float ``x`` from a ``digits``-digit orbit sum.

    Pre-images are ``tan(pi v / 2)`` below 1 and ``v - 1`` from 1 on; the
    truncation error is below ``0.75**depth / 0.25``.
    """
    ctx = mpmath.MPContext()
    ctx.dps = digits
    v = ctx.mpf(x)
    half = ctx.mpf(1) / 2
    val, prod = ctx.zero, ctx.one
    for _ in range(depth):
        val += prod * (abs(v - half) - half if v <= 2 else 2 / v)
        if v < 1:
            prod *= ctx.mpf(3) / 4
            v = ctx.tan(ctx.pi * v / 2)
        else:
            prod *= ctx.mpf(7) / 10
            v = v - 1
    return float(val)


# -- sets -----------------------------------------------------------------------------

def brute_hausdorff(a, b):
    """Hausdorff distance of two finite point sets (rows are points)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# -- integrals --------------------------------------------------------------------------

def quad_lp(fn, lo, hi, p):
    """``int_lo^hi |fn|^p`` by adaptive quadrature (``hi`` may be inf)."""
    val, _ = integrate.quad(lambda x: abs(fn(x)) ** p, lo, hi, limit=200)
    return val
