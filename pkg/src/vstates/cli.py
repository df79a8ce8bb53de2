"""Command-line interface: ``vstates <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import io as vio
from . import verification
from .closed_forms import hessian_closed
from .contour import QuadratureGrid
from .continuation import (
    DEFAULT_STEPS,
    PITCHFORK_T0,
    branch_from_eigenvalue,
    branch_transcritical,
    emit_diagram,
    no_bifurcation_scan,
    trivial_branch,
)
from .reduction import numeric_hessian
from .spectral import (
    AnnulusConfig,
    classify_point,
    degenerate_lambda,
    degenerate_radius,
    discriminant,
    eigenvalues,
)


class ConfigError(ValueError):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _validate(args) -> None:
    if getattr(args, "b", None) is not None:
        _require(0.0 < args.b < 1.0, f"--b must satisfy 0 < b < 1 (got {args.b})")
    if getattr(args, "m", None) is not None:
        _require(args.m >= 1, f"--m must be >= 1 (got {args.m})")
    if getattr(args, "modes", None) is not None:
        _require(args.modes >= 2, f"--modes must be >= 2 (got {args.modes})")
    if getattr(args, "grid", None) is not None:
        M = args.grid
        _require(M >= 8 and M & (M - 1) == 0, f"--grid must be a power of two >= 8 (got {M})")
    if getattr(args, "steps", None) is not None:
        _require(args.steps >= 1, f"--steps must be >= 1 (got {args.steps})")
    if getattr(args, "tol", None) is not None:
        _require(args.tol > 0.0, f"--tol must be > 0 (got {args.tol})")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_spectrum(args) -> int:
    lo, hi = args.lam_range if args.lam_range else (-float("inf"), float("inf"))
    _require(lo <= hi, f"--lam-range needs min <= max (got {lo} > {hi})")
    rows = []
    for n in range(1, args.nmax + 1):
        roots = eigenvalues(n, args.b)
        keep = [r if roots is not None and lo <= r <= hi else None for r in (roots or (None, None))]
        rows.append([n, discriminant(n, args.b), keep[0], keep[1]])
    _emit(vio.dump_table(["n", "discriminant", "lambda_minus", "lambda_plus"], rows, args.format, {"b": args.b}), args.out)
    return 0


def cmd_roots(args) -> int:
    rows = []
    for m in range(3, args.mmax + 1):
        b = degenerate_radius(m)
        rows.append([m, b, degenerate_lambda(b), classify_point(m, b).value])
    _emit(vio.dump_table(["m", "b_m", "lambda_m", "class"], rows, args.format), args.out)
    return 0


def cmd_verify(args) -> int:
    suites = list(verification.SUITES) if args.suite == "all" else [args.suite]
    checks: List[verification.Check] = []
    for s in suites:
        kwargs = {}
        if s in ("hessian", "vtilde", "variations") and args.m is not None:
            kwargs["points"] = ((args.m, args.b),)
        if s in ("hessian", "vtilde") and args.modes is not None:
            kwargs["N"] = args.modes
        if args.tol is not None and s in ("residues", "linearization", "hessian", "vtilde"):
            kwargs["tol"] = args.tol
        try:
            checks.extend(verification.SUITES[s](**kwargs))
        except Exception as exc:
            checks.append(verification._failed(s, "suite", exc))
    if args.out or args.format == "json":
        rows = [c.as_row() for c in checks]
        _emit(vio.dump_table(list(verification.CHECK_COLUMNS), rows, args.format), args.out)
    if not args.out:
        for c in checks:
            print(c.line(), file=sys.stderr if args.format == "json" else sys.stdout)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=sys.stderr)
    return 1 if failed else 0


def cmd_hessian(args) -> int:
    _require(args.m is not None and args.m >= 2, "--m >= 2 is required")
    cfg = AnnulusConfig.degenerate(args.m, args.b)
    grid = QuadratureGrid(args.grid) if args.grid else None
    rep = numeric_hessian(cfg, grid, args.modes or 8)
    cl = hessian_closed(cfg.m, cfg.b)
    rows = [
        ["d_lambda", rep.d_lambda, 0.0, abs(rep.d_lambda)],
        ["d_t", rep.d_t, 0.0, abs(rep.d_t)],
        ["d_ll", rep.d_ll, cl[0], rep.rel_err[0]],
        ["d_tl", rep.d_tl, cl[1], rep.rel_err[1]],
        ["d_tt", rep.d_tt, cl[2], rep.rel_err[2]],
    ]
    meta = {"m": cfg.m, "b": cfg.b, "steps": list(rep.steps)}
    _emit(vio.dump_table(["entry", "numeric", "closed", "rel_err"], rows, args.format, meta), args.out)
    return 0


def cmd_scan(args) -> int:
    _require(args.m is not None and args.m >= 3, "scan is defined only for --m >= 3")
    rep = no_bifurcation_scan(args.m, args.radius, args.points, N=args.modes or 8)
    rows = [[dl, t, f2] for dl, t, f2 in rep.samples]
    meta = {
        "m": rep.m,
        "b": rep.b,
        "radius": rep.radius,
        "grid_n": rep.grid_n,
        "c_fit": rep.c_fit,
        "c_expected": rep.c_expected,
        "excluded": rep.excluded,
        "collapsed": rep.collapsed,
        "nontrivial": rep.nontrivial,
        "unresolved": rep.unresolved,
        "passed": rep.passed,
    }
    _emit(vio.dump_table(["lambda_hat", "t", "f2"], rows, args.format, meta), args.out)
    verdict = "PASS" if rep.passed else "FAIL"
    print(f"{verdict} scan m={rep.m} c_fit={rep.c_fit:.6g} expected={rep.c_expected:.6g} nontrivial={rep.nontrivial}", file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_branch(args) -> int:
    N = args.modes or 8
    grid = QuadratureGrid(args.grid) if args.grid else None
    if args.t0 == 0.0:
        _require(args.m is not None, "--m is required")
        lam = degenerate_lambda(args.b)
        br = trivial_branch(args.m, args.b, (lam - 0.05, lam + 0.05), N=N)
    elif args.kind == "transcritical":
        br = branch_transcritical(args.b, args.which, args.steps, t0=args.t0 or 1e-3, N=N, grid=grid)
    else:
        _require(args.m is not None and args.m >= 2, "--m >= 2 is required for a pitchfork branch")
        br = branch_from_eigenvalue(args.m, args.b, args.which, t0=args.t0 or PITCHFORK_T0, steps=args.steps, N=N, grid=grid)
    fmt_name = args.format if args.format else "json"
    _emit(vio.dump_branch(br, fmt_name), args.out)
    if args.diagram:
        Path(args.diagram).write_text(vio.write_csv(vio.DIAGRAM_HEAD, emit_diagram(br)), encoding="utf-8")
    print(f"branch: {len(br)} points, termination: {br.termination.value}", file=sys.stderr)
    return 0


def cmd_diagram(args) -> int:
    br = vio.load_branch(Path(args.branch).read_text(encoding="utf-8"))
    _emit(vio.dump_table(list(vio.DIAGRAM_HEAD), emit_diagram(br), args.format or "csv"), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vstates", description="Doubly-connected V-states near the annulus.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default="csv"):
        sp.add_argument("--m", type=int)
        sp.add_argument("--b", type=float)
        sp.add_argument("--modes", type=int, help="Laurent truncation N")
        sp.add_argument("--grid", type=int, help="quadrature nodes M")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--steps", type=int)
        sp.add_argument("--out", help="output path (stdout if omitted)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        return sp

    sp = common(sub.add_parser("spectrum", help="discriminants and eigenvalues per mode"))
    sp.add_argument("--nmax", type=int, default=10)
    sp.add_argument("--lam-range", type=float, nargs=2, metavar=("MIN", "MAX"))
    sp.set_defaults(func=cmd_spectrum, b_required=True)

    sp = common(sub.add_parser("roots", help="degenerate radii b_m"))
    sp.add_argument("--mmax", type=int, default=10)
    sp.set_defaults(func=cmd_roots)

    sp = common(sub.add_parser("verify", help="oracle suites; nonzero exit on any failure"))
    sp.add_argument("--suite", choices=("all", *verification.SUITES), default="all")
    sp.set_defaults(func=cmd_verify)

    sp = common(sub.add_parser("hessian", help="numeric Hessian of the reduced function"))
    sp.set_defaults(func=cmd_hessian)

    sp = common(sub.add_parser("scan", help="no-bifurcation scan at b = b_m"))
    sp.add_argument("--radius", type=float, default=5e-3)
    sp.add_argument("--points", type=int, default=9, help="scan grid points per axis")
    sp.set_defaults(func=cmd_scan)

    sp = common(sub.add_parser("branch", help="trace a bifurcating branch"), fmt_default=None)
    sp.add_argument("--kind", choices=("pitchfork", "transcritical"), default="pitchfork")
    sp.add_argument("--which", choices=("plus", "minus"), default="plus")
    sp.add_argument("--t0", type=float, help="seed amplitude; 0 gives the trivial branch")
    sp.add_argument("--diagram", help="also write the (omega, a11, a21) CSV here")
    sp.set_defaults(func=cmd_branch, steps=DEFAULT_STEPS, b_required=True)

    sp = common(sub.add_parser("diagram", help="diagram table from a saved branch"), fmt_default=None)
    sp.add_argument("--branch", required=True, help="branch file written by `branch`")
    sp.set_defaults(func=cmd_diagram)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "b_required", False) and args.b is None:
            raise ConfigError("--b is required")
        _validate(args)
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
