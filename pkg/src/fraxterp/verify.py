"""Invariant checks run by ``fraxterp verify``."""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from .geometry import Interval, decompactify
from .local_ifs import (
    CellSet, Window, apply_floc, build_local_ifs, default_window, graph_invariance,
)
from .lp import QuadratureRule, lp_contractivity
from .partition import validate_partition
from .rb import convergence_ratios, evaluate, probe_points, residual
from .scenarios import PULLBACK, Scenario


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, fn) -> CheckResult:
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failed check
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(ok), detail)


def window_for(s: Scenario, window_cfg=None) -> Window:
    f = s.fixed_point()
    if window_cfg is None:
        return default_window(f)
    iv = Interval.parse(window_cfg.x)
    return Window.from_x(s.operator.scheme.ambient, iv.lo, iv.hi, window_cfg.y[0], window_cfg.y[1])


def run_checks(s: Scenario, tol: float = 1e-10, window_cfg=None, resolution: int = 256,
               p_values=(1.0, math.inf), subdivisions: int = 64, seed: int = 0) -> list:
    """Run the invariant suite on one scenario; returns :class:`CheckResult` rows."""
    op = s.operator
    f = s.fixed_point(tol)
    sch = op.scheme
    out = []

    def partition():
        rep = validate_partition(sch)
        return rep.ok, "covering and map checks" if rep.ok else "; ".join(map(str, rep.violations[:3]))
    out.append(_check("partition", partition))

    def fixed_point():
        r = residual(op, f, probes=1000, tol=tol)
        return r <= 100 * tol, f"sup |Phi f - f| = {r:.3g}"
    out.append(_check("fixed point residual", fixed_point))

    def bound():
        x = probe_points(sch, n=2003, cluster=200)
        v = float(np.max(np.abs(evaluate(f, x, tol))))
        V = op.value_bound()
        return v <= V + tol, f"max |f| = {v:.6g} <= {V:.6g}"
    out.append(_check("a-priori bound", bound))

    def rates():
        if not op.is_affine:
            return True, "skipped (general vertical maps)"
        r = convergence_ratios(op, 20)[2:]
        worst = max(r)
        return worst <= op.contraction + 0.05, f"max ratio {worst:.4f}, contraction {op.contraction:g}"
    out.append(_check("iteration rate", rates))

    def lp():
        rule = QuadratureRule(subdivisions=subdivisions)
        parts = []
        for p in p_values:
            rep = lp_contractivity(op, p, rule)
            parts.append(f"p={p:g}: {rep.criterion_value:.6g} ({'pass' if rep.passes else 'fail'})")
        at1 = lp_contractivity(op, 1.0, rule)
        total = sum(j * n for j, n in zip(at1.jacobians, at1.scale_norms))
        consistent = (math.isinf(at1.criterion_value) and not at1.passes) or \
            abs(total - at1.criterion_value) <= 1e-12 * max(1.0, total)
        return consistent, "; ".join(parts)
    out.append(_check("Lp criteria (report only)", lp))

    ifs = build_local_ifs(op)

    def floc_sets():
        w = window_for(s, window_cfg)
        rng = np.random.default_rng(seed)
        n = 64
        empty = CellSet.empty(w, n, n)
        if not apply_floc(ifs, empty).is_empty():
            return False, "image of the empty set is not empty"
        for _ in range(10):
            a = rng.random((n, n)) < 0.05
            b = a | (rng.random((n, n)) < 0.05)
            A, B = CellSet(w, a), CellSet(w, b)
            FA, FB = apply_floc(ifs, A), apply_floc(ifs, B)
            if not FA.issubset(FB):
                return False, "monotonicity violated"
            C = CellSet(w, rng.random((n, n)) < 0.05)
            if apply_floc(ifs, A.union(C)) != FA.union(apply_floc(ifs, C)):
                return False, "union property violated"
        return True, "empty set, monotonicity and union on 10 random pairs"
    out.append(_check("set operator", floc_sets))

    def graph():
        w = window_for(s, window_cfg)
        rep = graph_invariance(ifs, f, w, (resolution, resolution))
        note = "" if ifs.continuous else " (vertical maps flagged discontinuous)"
        return rep.in_diagonals <= 2.0, f"{rep.in_diagonals:.3f} cell diagonals at {resolution}^2{note}"
    out.append(_check("graph invariance", graph))

    if s.provenance == PULLBACK and s.source is not None:
        def pullback():
            src = s.source.fixed_point(tol)
            amb = sch.ambient
            # rational orbits: float rounding of j(x) is amplified by the Hoelder modulus
            x = decompactify(amb, np.linspace(0.0, 1.0, 103)[1:-1])
            d = max(abs(evaluate(f, v, tol, exact=True)
                        - evaluate(src, s.j.exact(Fraction(v)), tol, exact=True)) for v in x)
            at_inf = evaluate(f, math.inf, tol, exact=True)
            end = evaluate(src, s.j.exact(math.inf), tol, exact=True)
            ok = d <= 2 * tol and abs(at_inf - end) <= 2 * tol
            return ok, f"max |f*(x) - f(j(x))| = {d:.3g}, f*(inf) = {at_inf:g}"
        out.append(_check("pullback identity", pullback))
    return out


def format_table(rows) -> str:
    w = max(len(r.name) for r in rows)
    lines = [f"{'check'.ljust(w)}  result  detail"]
    for r in rows:
        lines.append(f"{r.name.ljust(w)}  {'PASS' if r.passed else 'FAIL':6}  {r.detail}")
    return "\n".join(lines)
