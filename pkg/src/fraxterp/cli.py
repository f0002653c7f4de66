"""Command line interface: ``fraxterp <command> ...``.

Exit status is 0 on success, 1 when a check fails and 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .algebra import Scales, evaluate_tensor, lagrange_basis, tensor
from .config import dump_config, load_config, parse_p
from .errors import ConfigError, FraxError
from .geometry import check_point
from .local_ifs import CellSet, Window, attractor_iterate, build_local_ifs, write_pgm
from .lp import QuadratureRule, lp_contractivity
from .partition import validate_partition
from .rb import evaluate, fractal_function, uniform_grid
from .scenarios import build_example1, build_halfline_global, pullback_scenario
from .verify import format_table, run_checks, window_for

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

FIGURE_INTERVALS = 4096
FIGURE_TOL = 1e-10


# -- helpers ---------------------------------------------------------------------------

def _num(v: float) -> str:
    """Fixed 12-significant-digit field; ends as ``inf``/``-inf``."""
    return f"{float(v) + 0.0:.12g}"


def write_csv(path, header, columns) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_num(v) for v in row) + "\n")


def _point(text: str) -> float:
    try:
        return check_point(float(text))
    except (ValueError, FraxError) as exc:
        raise argparse.ArgumentTypeError(f"not a point: {text!r} ({exc})") from None


def _load(path):
    s, cfg = load_config(path)
    f = fractal_function(s.operator, cfg.evaluation.tol, cfg.evaluation.max_depth)
    return s, cfg, f


def sample_points(scheme, intervals: int) -> np.ndarray:
    """Points uniform in the compactified coordinate of X (ends included)."""
    return uniform_grid(scheme, intervals)


# -- commands ----------------------------------------------------------------------------

def cmd_validate(args) -> int:
    s, cfg, _ = _load(args.config)
    rep = validate_partition(s.operator.scheme)
    if not rep.ok:
        for v in rep.violations:
            print(v)
        print("partition conditions violated")
        return EXIT_FAIL
    print(f"(P1)/(P2) satisfied, contraction {s.contraction:g}")
    return EXIT_OK


def cmd_sample(args) -> int:
    s, cfg, f = _load(args.config)
    n = args.points - 1 if args.points else cfg.evaluation.grid
    x = sample_points(s.operator.scheme, n)
    y = evaluate(f, x, cfg.evaluation.tol)
    write_csv(args.out, ("x", "f"), (x, y))
    if args.svg:
        from .plotting import plot_samples
        plot_samples(x, y, args.svg, s.name, s.operator.scheme.ambient)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    s, cfg, f = _load(args.config)
    tol = args.tol if args.tol is not None else cfg.evaluation.tol
    # the printed bound holds only without orbit rounding, so default to exact
    v = float(evaluate(f, args.x, tol, exact=not args.float))
    digits = max(1, math.ceil(-math.log10(tol)))
    print(f"{v:.{digits}f} ± {tol:g}")
    return EXIT_OK


def cmd_lpcheck(args) -> int:
    s, cfg, _ = _load(args.config)
    values = [args.p] if args.p is not None else [parse_p(p) for p in cfg.analysis.p]
    rule = QuadratureRule(cfg.analysis.quadrature,
                          args.subdivisions or cfg.analysis.subdivisions)
    ok = True
    for p in values:
        rep = lp_contractivity(s.operator, p, rule)
        print("\n".join(rep.lines()))
        ok = ok and rep.passes
    return EXIT_OK if ok else EXIT_FAIL


def _float_list(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_basis(args) -> int:
    s, cfg, _ = _load(args.config)
    op = s.operator
    sch = op.scheme
    orders = [int(v) for v in args.orders.split(",")]
    nodes = [_float_list(group) for group in args.nodes.split(";")]
    scales = Scales(tuple(vm.scale for vm in op.bounded_vmaps),
                    tuple(vm.scale for vm in op.unbounded_vmaps))
    tol = cfg.evaluation.tol
    basis = lagrange_basis(sch, scales, orders, nodes, tol)
    n = args.points - 1 if args.points else cfg.evaluation.grid
    x = sample_points(sch, n)
    header, seen = ["x"], {}
    for e in basis.elements:
        seen[e.piece] = seen.get(e.piece, 0) + 1
        header.append(f"L{e.piece + 1}_{seen[e.piece]}")
    cols = [x] + [evaluate(e.function, x, tol) for e in basis.elements]
    write_csv(args.out, header, cols)
    print(f"dimension {basis.dimension}")
    return EXIT_OK


def cmd_tensor_sample(args) -> int:
    sa, ca, fa = _load(args.config_a)
    sb, cb, fb = _load(args.config_b)
    tol = min(ca.evaluation.tol, cb.evaluation.tol)
    x = sample_points(sa.operator.scheme, args.points - 1)
    xt = sample_points(sb.operator.scheme, args.points - 1)
    X, XT = np.meshgrid(x, xt, indexing="ij")
    v, _ = evaluate_tensor(tensor(fa, fb), X.ravel(), XT.ravel(), tol)
    write_csv(args.out, ("x", "xt", "f"), (X.ravel(), XT.ravel(), v))
    return EXIT_OK


def cmd_attractor(args) -> int:
    s, cfg, f = _load(args.config)
    amb = s.operator.scheme.ambient
    if args.window:
        xlo, xhi, ylo, yhi = args.window
        w = Window.from_x(amb, xlo, xhi, ylo, yhi)
    else:
        w = window_for(s, cfg.analysis.window)
    nx, ny = args.res if args.res else cfg.analysis.resolution
    ifs = build_local_ifs(s.operator)
    seed = CellSet.full(w, nx, ny)
    A, trace = attractor_iterate(ifs, seed, args.iters)
    write_pgm(A, args.out)
    last = trace[-1].distance if trace else math.nan
    print(f"{len(trace)} iterations, {A.count()} cells, last step {last:.6g} "
          f"({last / A.cell_diagonal:.3f} cell diagonals)")
    return EXIT_OK


def cmd_verify(args) -> int:
    s, cfg, _ = _load(args.config)
    rows = run_checks(s, cfg.evaluation.tol, cfg.analysis.window, args.res,
                      tuple(parse_p(p) for p in cfg.analysis.p), cfg.analysis.subdivisions)
    print(format_table(rows))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def figure_scenarios() -> list:
    """``(stem, title, scenario)`` for the three figure datasets."""
    ex1 = build_example1()
    return [
        ("fig1_left", "hat offset on [0, 1]", ex1),
        ("fig1_right", "hat offset pulled back to [0, inf]", pullback_scenario(ex1)),
        ("fig2", "global construction on [0, inf]", build_halfline_global()),
    ]


def cmd_figures(args) -> int:
    from .plotting import plot_samples
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for stem, title, s in figure_scenarios():
        f = fractal_function(s.operator, FIGURE_TOL)
        x = sample_points(s.operator.scheme, args.intervals)
        y = evaluate(f, x, FIGURE_TOL)
        write_csv(out / f"{stem}.csv", ("x", "f"), (x, y))
        plot_samples(x, y, out / f"{stem}.svg", title, s.operator.scheme.ambient)
        if args.dump_config:
            dump_config(s, out / f"{stem}.yaml")
        print(f"wrote {stem}.csv ({len(x)} points)")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fraxterp",
                                 description="Fractal functions on intervals, half lines and the real line.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check partition conditions and contractivity")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sample", help="sample the fixed point to CSV (and SVG)")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--points", type=int, help="number of points (default grid + 1)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("evaluate", help="evaluate the fixed point at one point")
    p.add_argument("config")
    p.add_argument("--x", type=_point, required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--float", action="store_true",
                   help="float orbit; rounding may exceed tol on expanding pre-images")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("lpcheck", help="Lp contractivity criterion")
    p.add_argument("config")
    p.add_argument("--p", type=parse_p)
    p.add_argument("--subdivisions", type=int)
    p.set_defaults(func=cmd_lpcheck)

    p = sub.add_parser("basis", help="sample a fractal Lagrange basis")
    p.add_argument("config")
    p.add_argument("--orders", required=True, help="comma separated, one per piece")
    p.add_argument("--nodes", required=True, help="per-piece comma lists separated by ';'")
    p.add_argument("--out", required=True)
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("tensor-sample", help="sample a tensor product surface")
    p.add_argument("config_a")
    p.add_argument("config_b")
    p.add_argument("--out", required=True)
    p.add_argument("--points", type=int, default=65, help="points per axis")
    p.set_defaults(func=cmd_tensor_sample)

    p = sub.add_parser("attractor", help="iterate the set operator from the full window")
    p.add_argument("config")
    p.add_argument("--window", nargs=4, type=_point, metavar=("XLO", "XHI", "YLO", "YHI"))
    p.add_argument("--res", nargs=2, type=int, metavar=("NX", "NY"))
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attractor)

    p = sub.add_parser("verify", help="run the invariant checks")
    p.add_argument("config")
    p.add_argument("--res", type=int, default=256, help="graph raster resolution")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figures", help="regenerate the figure datasets")
    p.add_argument("--outdir", required=True)
    p.add_argument("--intervals", type=int, default=FIGURE_INTERVALS)
    p.add_argument("--dump-config", action="store_true")
    p.set_defaults(func=cmd_figures)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for d in exc.diagnostics:
            print(f"  {d}", file=sys.stderr)
        return EXIT_USAGE
    except (FraxError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run(command: str, arguments=()) -> int:
    """Run one command in-process; returns the exit status."""
    return main([command, *arguments])


if __name__ == "__main__":
    sys.exit(main())
