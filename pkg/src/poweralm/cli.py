"""Command line front end for benchmark sweeps.

Reads a flat key = value config file, applies flag overrides, runs the
sweep, and prints the summary table.  The process exits 0 whenever every
scheduled run executed; individual convergence failures only show up in the
summary.  The output directory can also be overridden through the
``POWERALM_OUT`` environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bench import (
    MethodSpec,
    format_summary_table,
    parse_config_text,
    parse_dims,
    parse_method_token,
    run_experiment,
    with_overrides,
)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="poweralm-bench",
        description="Run power-ALM benchmark sweeps and write CSV logs + summaries.",
    )
    ap.add_argument("--config", help="flat key = value experiment file")
    ap.add_argument("--family", help="lp | qp_eq_box | qp_ineq | l1reg")
    ap.add_argument("--mn", help="problem sizes, e.g. '50x100' or '50x100,60x120'")
    ap.add_argument("--seeds", type=int, help="number of seeds per size")
    ap.add_argument("--base-seed", type=int, help="first seed value")
    ap.add_argument("--q", help="power(s) for a power-ALM cell, e.g. '0.8' or '0.8,0.9'")
    ap.add_argument("--lambda", dest="lam", type=float, help="penalty (or initial penalty)")
    ap.add_argument("--method", help="power | classical | adaptive (comma separated)")
    ap.add_argument("--delta", type=float, help="adaptive decrease factor")
    ap.add_argument("--norm", help="euclidean | separable")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--tol-f", type=float, help="suboptimality tolerance")
    ap.add_argument("--tol-r", type=float, help="feasibility tolerance")
    ap.add_argument("--max-outer", type=int, help="outer iteration budget")
    ap.add_argument("--max-inner", type=int, help="inner iteration budget per solve")
    ap.add_argument("--timings", action="store_true", help="record wall-clock in CSVs")
    return ap


def _methods_from_flags(args, default_norm: str) -> list[MethodSpec] | None:
    if args.method is None and args.q is None and args.lam is None:
        return None
    kinds = (args.method or "power").split(",")
    qs = [float(t) for t in (args.q or "0.8").split(",")]
    lam = args.lam if args.lam is not None else 0.1
    specs = []
    for kind in kinds:
        kind = kind.strip()
        if kind == "power":
            for q in qs:
                tok = f"power q={q} lam={lam} norm={args.norm or default_norm}"
                specs.append(parse_method_token(tok, default_norm))
        elif kind == "classical":
            specs.append(parse_method_token(f"classical lam={lam}", default_norm))
        elif kind == "adaptive":
            delta = args.delta if args.delta is not None else 0.1
            specs.append(parse_method_token(f"adaptive lam0={lam} delta={delta}", default_norm))
        else:
            raise ValueError(f"unknown method {kind!r}")
    return specs


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config) as fh:
                config = parse_config_text(fh.read())
        else:
            config = parse_config_text("")
        overrides = {
            "family": args.family,
            "seeds": args.seeds,
            "base_seed": args.base_seed,
            "tol_f": args.tol_f,
            "tol_r": args.tol_r,
            "max_outer": args.max_outer,
            "max_inner": args.max_inner,
            "out_dir": os.environ.get("POWERALM_OUT") or args.out,
        }
        if args.timings:
            overrides["timings"] = True
        if args.mn:
            overrides["dims"] = parse_dims(args.mn)
        methods = _methods_from_flags(args, args.norm or "euclidean")
        if methods is not None:
            overrides["methods"] = methods
        config = with_overrides(config, **overrides)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    rows, results = run_experiment(config)
    print(format_summary_table(rows))
    failures = [r for r in results if r.status.startswith("error")]
    if failures:
        print(f"{len(failures)} run(s) raised errors; see summary", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
