"""Command-line interface.

Subcommands: rearrange, gauge-norm, apply, iterate-rearrange,
check <condition-id>, oneil, run <config>.  Verdicts are data: the exit
status is nonzero only for configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .space import DEFAULT_WINDOW, make_weight
from .gauges import GaugeSpec, gauge_norm
from .kernels import iterated_rearrangement, make_kernel, apply as kernel_apply
from .conditions import (
    gho_check,
    hardy_avg_check,
    hlp_check,
    homogeneous_check,
    kantorovich_mixed_norm,
    power_case_check,
    radial_check,
    rearranged_check,
)
from .specs import (
    SpecError,
    dump_gridfunction,
    parse_function_spec,
    parse_gauge_spec,
    parse_kernel_spec,
    parse_nfunction_spec,
    parse_weight_spec,
    save_gridfunction,
)
from .harness import oneil_compare, run_experiment

CONDITION_IDS = ("gho", "hardy-average", "rearranged", "power-sum", "radial",
                 "kantorovich", "hlp", "homogeneous")


def _window(s: str):
    try:
        lo, hi = (float(part) for part in s.split(","))
    except ValueError as exc:
        raise SpecError("window", f"expected 'lo,hi', got {s!r}") from exc
    if not (0.0 < lo < hi):
        raise SpecError("window", f"impossible window [{lo}, {hi}]")
    return lo, hi


def _add_common(sub):
    sub.add_argument("--window", type=_window, default=DEFAULT_WINDOW,
                     help="truncation window 'lo,hi' (default 1e-6,1e6)")
    sub.add_argument("--grid-n", type=int, default=1024,
                     help="kernel grid cells per axis")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="orlicz-gauge",
        description="Gauge functionals, rearrangements and boundedness "
                    "condition checks for positive integral operators")
    sp = ap.add_subparsers(dest="command", required=True)

    s = sp.add_parser("rearrange", help="nonincreasing rearrangement of a function")
    s.add_argument("--f", required=True, help="function spec or file:path=...")
    s.add_argument("--out", help="output file (two-column text); stdout otherwise")
    _add_common(s)

    s = sp.add_parser("gauge-norm", help="Luxemburg gauge of a function")
    s.add_argument("--f", required=True)
    s.add_argument("--gauge", required=True,
                   help="gauge(phi=power:p=2, u=power_weight:alpha=0)")
    _add_common(s)

    s = sp.add_parser("apply", help="apply an integral operator to a function")
    s.add_argument("--kernel", required=True)
    s.add_argument("--f", required=True)
    s.add_argument("--out")
    _add_common(s)

    s = sp.add_parser("iterate-rearrange", help="iterated rearrangement of a kernel")
    s.add_argument("--kernel", required=True)
    s.add_argument("--out", required=True, help="output .npz (edges + values)")
    _add_common(s)

    s = sp.add_parser("check", help="run a boundedness condition checker")
    s.add_argument("condition", choices=CONDITION_IDS)
    s.add_argument("--kernel")
    s.add_argument("--phi1", default="power:p=2")
    s.add_argument("--phi2", default="power:p=2")
    s.add_argument("--u1", default="power_weight:alpha=0")
    s.add_argument("--u2", default="power_weight:alpha=0")
    s.add_argument("--t", default="power_weight:alpha=0", help="weight t (gho)")
    s.add_argument("--u", default="power_weight:alpha=0", help="weight u (gho)")
    s.add_argument("--v", default="power_weight:alpha=0", help="weight v (gho)")
    s.add_argument("--w", default="power_weight:alpha=0", help="multiplier w (gho)")
    s.add_argument("--p", type=float)
    s.add_argument("--q", type=float)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--windows", type=int, default=3)
    s.add_argument("--out", help="write the report JSON here")
    _add_common(s)

    s = sp.add_parser("oneil", help="rearrangement-bound comparison table")
    s.add_argument("--k", required=True, help="radial profile function spec")
    s.add_argument("--f", required=True)
    s.add_argument("--x", default="0.1,1,10", help="comma-separated sample points")
    s.add_argument("--convention", choices=("paper", "exact"), default="paper")
    s.add_argument("--out", help="write the table CSV here")
    _add_common(s)

    s = sp.add_parser("run", help="run an experiment config (JSON)")
    s.add_argument("config")
    s.add_argument("--out", default="report", help="output prefix (default 'report')")
    return ap


def _weight_grid(spec, window, ncells=4096):
    return parse_weight_spec(spec, window, ncells).grid


def cmd_check(args) -> dict:
    window = args.window
    if args.condition == "gho":
        if not args.kernel:
            raise SpecError("kernel", "gho check needs --kernel")
        fam = parse_kernel_spec(args.kernel, window)
        K = make_kernel(fam, window, min(args.grid_n, 64))
        rep = gho_check(
            K, parse_nfunction_spec(args.phi1, "phi1"),
            parse_nfunction_spec(args.phi2, "phi2"),
            _weight_grid(args.t, window), _weight_grid(args.u, window),
            _weight_grid(args.v, window),
            parse_function_spec(args.w, window, 4096, "w")
            if ":" in args.w and not args.w.startswith("power_weight")
            else _weight_grid(args.w, window),
            window=window, n_windows=args.windows)
    elif args.condition == "hardy-average":
        rep = hardy_avg_check(parse_nfunction_spec(args.phi1, "phi1"),
                              parse_weight_spec(args.u1, window),
                              window=window, n_windows=args.windows)
    elif args.condition == "rearranged":
        if not args.kernel:
            raise SpecError("kernel", "rearranged check needs --kernel")
        fam = parse_kernel_spec(args.kernel, window)
        K = make_kernel(fam, window, min(args.grid_n, 512))
        rep = rearranged_check(
            K, parse_nfunction_spec(args.phi1, "phi1"),
            parse_nfunction_spec(args.phi2, "phi2"),
            parse_weight_spec(args.u1, window), parse_weight_spec(args.u2, window),
            window=window, n_windows=args.windows)
    elif args.condition == "power-sum":
        if not (args.kernel and args.p and args.q):
            raise SpecError("kernel", "power-sum check needs --kernel --p --q")
        fam = parse_kernel_spec(args.kernel, window)
        from .kernels import _family_profile_grid
        rep = power_case_check(_family_profile_grid(fam), args.p, args.q,
                               parse_weight_spec(args.u1, window),
                               parse_weight_spec(args.u2, window),
                               window=window, n_windows=args.windows)
    elif args.condition == "radial":
        if not (args.kernel and args.p and args.q):
            raise SpecError("kernel", "radial check needs --kernel --p --q")
        fam = parse_kernel_spec(args.kernel, window)
        lam = args.lam if args.lam is not None else fam.params.get("lam")
        rep = radial_check(fam.profile_at, args.p, args.q, lam=lam,
                           window=window, n_windows=args.windows)
    elif args.condition == "kantorovich":
        if not (args.kernel and args.p and args.q):
            raise SpecError("kernel", "kantorovich check needs --kernel --p --q")
        K = make_kernel(parse_kernel_spec(args.kernel, window), window, args.grid_n)
        rep = kantorovich_mixed_norm(K, args.p, args.q, window=window,
                                     n_windows=args.windows)
    elif args.condition == "hlp":
        if not (args.kernel and args.p):
            raise SpecError("kernel", "hlp check needs --kernel --p")
        K = make_kernel(parse_kernel_spec(args.kernel, window), window,
                        min(args.grid_n, 256))
        rep = hlp_check(K, args.p)
    elif args.condition == "homogeneous":
        if not args.kernel:
            raise SpecError("kernel", "homogeneous check needs --kernel")
        K = make_kernel(parse_kernel_spec(args.kernel, window), window,
                        min(args.grid_n, 256))
        spec1 = GaugeSpec(parse_nfunction_spec(args.phi1, "phi1"),
                          parse_weight_spec(args.u1, window))
        spec2 = GaugeSpec(parse_nfunction_spec(args.phi2, "phi2"),
                          parse_weight_spec(args.u2, window))
        rep = homogeneous_check(K, spec1, spec2)
    else:  # pragma: no cover
        raise SpecError("condition", f"unknown condition {args.condition!r}")
    return rep.to_dict()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rearrange":
            f = parse_function_spec(args.f, args.window, fieldname="f")
            from .space import rearrange as _re
            out = dump_gridfunction(_re(f))
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(out)
            else:
                sys.stdout.write(out)
        elif args.command == "gauge-norm":
            f = parse_function_spec(args.f, args.window, fieldname="f")
            spec = parse_gauge_spec(args.gauge, args.window)
            print(f"{gauge_norm(f, spec).value:.12g}")
        elif args.command == "apply":
            fam = parse_kernel_spec(args.kernel, args.window)
            K = make_kernel(fam, args.window, args.grid_n)
            f = parse_function_spec(args.f, args.window, fieldname="f")
            g = kernel_apply(K, f)
            if args.out:
                save_gridfunction(g, args.out)
            else:
                sys.stdout.write(dump_gridfunction(g))
        elif args.command == "iterate-rearrange":
            fam = parse_kernel_spec(args.kernel, args.window)
            K = make_kernel(fam, args.window, args.grid_n)
            L = iterated_rearrangement(K)
            np.savez(args.out, x_edges=L.x_edges, y_edges=L.y_edges, values=L.values)
            print(f"wrote {args.out}: {L.values.shape[0]}x{L.values.shape[1]} cells")
        elif args.command == "check":
            payload = cmd_check(args)
            text = json.dumps(payload, indent=2, sort_keys=True, default=repr)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text + "\n")
            print(f"{payload['condition_id']}: {payload['verdict']}"
                  + (f" (c* = {payload['c_star']:.6g})"
                     if isinstance(payload.get("c_star"), float) else ""))
        elif args.command == "oneil":
            fam = parse_kernel_spec(f"radial:k={args.k}", args.window)
            f = parse_function_spec(args.f, args.window, fieldname="f")
            xs = [float(s) for s in args.x.split(",")]
            rows = oneil_compare(fam.profile_at, f, xs, convention=args.convention,
                                 window=args.window, grid_n=args.grid_n)
            lines = ["x,lhs,paper_bound,oneil_bound"]
            for r in rows:
                lines.append("{x:.12g},{lhs:.12g},{paper_bound:.12g},"
                             "{oneil_bound:.12g}".format(**r))
            text = "\n".join(lines) + "\n"
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        elif args.command == "run":
            report = run_experiment(args.config, args.out)
            print(f"C_hat = {report.c_hat:.12g} (argmax {report.argmax_member}); "
                  f"windows: {[f'{c:.6g}' for c in report.per_window_c_hat]}")
            if report.condition is not None:
                print(f"checker {report.condition['condition_id']}: "
                      f"{report.condition['verdict']}; "
                      f"cross-check: {report.verdict_crosscheck}")
    except SpecError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
