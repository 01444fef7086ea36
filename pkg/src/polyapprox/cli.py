"""Command-line interface: build approximations, run sweeps, run checks.

All failures exit with the stable per-error status codes from
polyapprox.errors and print a machine-readable JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import PolyApproxError, UnknownSuite, ValidationError


def _fail(e: PolyApproxError) -> int:
    sys.stderr.write(json.dumps({"error": e.code, "message": str(e)}) + "\n")
    return e.exit_status


def cmd_build(args) -> int:
    from .experiments import run_build
    from .render import off_mesh, svg_overlay

    body_spec = None
    if args.body_file:
        with open(args.body_file) as fh:
            body_spec = json.load(fh)
    row, result, artifacts = run_build(
        args.body, args.dim, args.eps, args.method, preset=args.preset,
        seed=args.seed, body_spec=body_spec, want_artifacts=True)
    out = {
        "row": dict(zip(
            ["method", "body", "d", "eps", "eps_hat", "log_base", "preset",
             "k_cover", "t_layers", "n_samples", "f_vector",
             "total_complexity", "hausdorff", "max_collector_overlap",
             "build_ms", "seed"], row.as_list())),
        "result": result,
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(out, fh, indent=1)
    else:
        json.dump(out, sys.stdout, indent=1)
        sys.stdout.write("\n")
    if args.svg and "stratified" in artifacts:
        sc = artifacts["stratified"]
        hull = artifacts.get("hull")
        svg_overlay(args.svg, sc, None if hull is None else hull.vertices)
    if args.off and "lattice" in artifacts and artifacts["lattice"].dim == 3:
        off_mesh(args.off, artifacts["hull"].vertices, artifacts["lattice"])
    return 0


def cmd_experiment(args) -> int:
    from .experiments import csv_hash, run_experiment, write_csv
    from .render import svg_overlay

    eps_list = [float(x) for x in args.eps.split(",") if x.strip()]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows, regressions, failures = run_experiment(
        args.body, args.dim, eps_list, methods, preset=args.preset,
        seed=args.seed)
    write_csv(args.csv, rows, regressions, failures)
    if args.svg_dir and args.dim == 2:
        import os

        from .experiments import run_build

        os.makedirs(args.svg_dir, exist_ok=True)
        for e in eps_list:
            if "stratified" not in methods:
                break
            try:
                _, _, art = run_build(args.body, 2, e, "stratified",
                                      preset=args.preset, seed=args.seed,
                                      want_artifacts=True)
                svg_overlay(
                    f"{args.svg_dir}/{args.body}-eps{e:g}.svg",
                    art["stratified"], art["hull"].vertices)
            except PolyApproxError:
                pass
    print(f"wrote {args.csv} ({len(rows)} rows, {len(failures)} failures); "
          f"hash={csv_hash(args.csv)[:16]}")
    for reg in regressions:
        print(f"  slope[{reg['method']}] vs 1/eps: "
              f"{reg['slope_vs_inv_eps']:.3f}   vs 1/eps_hat: "
              f"{reg['slope_vs_inv_eps_hat']:.3f}")
    return 0


def cmd_check(args) -> int:
    from .suites import SUITES

    names = list(SUITES) if args.suite == "all" else [args.suite]
    for name in names:
        if name not in SUITES:
            raise UnknownSuite(f"unknown suite '{name}' "
                               f"(choose from {', '.join(SUITES)} or all)")
    dims = {"2": [2], "3": [3], "both": [2, 3]}[args.dim]
    bad = 0
    for name in names:
        for d in dims:
            rep = SUITES[name](d, args.samples, args.seed)
            for line in rep.lines():
                print(f"d={d} {line}")
            for note in rep.notes:
                print(f"d={d} {name}: note: {note}")
            bad += rep.total_violations
    print("PASS" if bad == 0 else f"FAIL ({bad} violations)")
    return 0 if bad == 0 else 1


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polyapprox",
        description="Convex-body approximation by low-complexity polytopes")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build one approximation")
    b.add_argument("--body", default="ball",
                   help="ball|disk|cube|square|ellipse|cylinder|random-hull")
    b.add_argument("--body-file", help="JSON body file (overrides --body)")
    b.add_argument("--dim", type=int, default=2)
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--method", default="stratified",
                   choices=["stratified", "dudley", "bronshteyn-ivanov",
                            "grid"])
    b.add_argument("--preset", default="practical",
                   choices=["practical", "paper"])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", help="result JSON path (stdout if omitted)")
    b.add_argument("--svg", help="d=2 overlay figure path")
    b.add_argument("--off", help="d=3 OFF mesh path")
    b.set_defaults(fn=cmd_build)

    e = sub.add_parser("experiment", help="eps sweep with CSV and figures")
    e.add_argument("--body", default="ball")
    e.add_argument("--dim", type=int, default=2)
    e.add_argument("--eps", required=True, help="comma-separated list")
    e.add_argument("--methods", default="stratified,dudley,bronshteyn-ivanov,grid")
    e.add_argument("--preset", default="practical",
                   choices=["practical", "paper"])
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--csv", required=True)
    e.add_argument("--svg-dir", help="d=2 overlay output directory")
    e.set_defaults(fn=cmd_experiment)

    c = sub.add_parser("check", help="run a property suite")
    c.add_argument("--suite", default="all")
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--dim", default="both", choices=["2", "3", "both"])
    c.set_defaults(fn=cmd_check)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except PolyApproxError as e:
        return _fail(e)


if __name__ == "__main__":
    sys.exit(main())