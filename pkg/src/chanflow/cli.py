"""Command-line interface: scenario runs, convergence studies, check suites.

Commands:
    chanflow run <scenario.json | name> [-o DIR]
    chanflow convergence <scenario.json | name> --grids 80,160,320,640 --ref 5120 [-o DIR]
    chanflow check <suite> [--seed N]

Scenario files are JSON with keys ``cross_sections``, ``nodes``, ``links``,
``boundary_conditions`` and ``scenario`` (see README).  The output directory
defaults to ./chanflow_out or the CHANFLOW_OUTDIR environment variable.
All CSV numbers carry 17 significant digits so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .network import NetworkConfigError
from .oracle import error_norms, fine_grid_reference, project_to_coarse
from .output import collect_run
from .scenario import builtin_names, load_scenario, resolve_scenario
from .scheme import SolverError


def _fmt(x):
    return f"{x:.16e}"


def _outdir(args):
    base = args.outdir or os.environ.get("CHANFLOW_OUTDIR") or "chanflow_out"
    p = Path(base)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_run(args):
    try:
        sc = load_scenario(args.scenario)
    except NetworkConfigError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return 2
    out = _outdir(args)
    try:
        res = collect_run(sc.engine, sc.state, sc.schedule)
    except SolverError as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return 1

    with open(out / "gauges.csv", "w") as f:
        cols = ["t"]
        for lbl in res.gauge_labels:
            cols += [f"{lbl}_w", f"{lbl}_h", f"{lbl}_Q"]
        f.write(",".join(cols) + "\n")
        for t, row in zip(res.times, res.gauge_rows):
            f.write(",".join([_fmt(t)] + [_fmt(v) for v in row]) + "\n")

    for t, snap in sorted(res.snapshots.items()):
        with open(out / f"profile_{t:g}.csv", "w") as f:
            f.write("x,B,w,h,Q\n")
            for vals in zip(snap["x"], snap["bed"], snap["w"], snap["h"], snap["q"]):
                f.write(",".join(_fmt(v) for v in vals) + "\n")

    with open(out / "audit.csv", "w") as f:
        f.write("t,total_volume,boundary_influx,lateral_influx,mass_residual\n")
        for row in res.audit:
            f.write(",".join(_fmt(v) for v in row) + "\n")

    s = res.summary
    with open(out / "report.txt", "w") as f:
        f.write(f"scenario: {sc.name or args.scenario}\n")
        f.write(f"steps: {s.steps}\n")
        f.write(f"final_time: {s.final_time:.9g}\n")
        f.write(f"dt_min: {s.dt_min:.6e}\ndt_max: {s.dt_max:.6e}\n")
        f.write(f"min_depth: {s.min_depth:.6e}\n")
        f.write(f"max_junction_residual: {s.max_junction_residual:.3e}\n")
        f.write(f"drain_limited_face_steps: {s.drain_limited_faces}\n")
        f.write(f"boundary_condition_fallbacks: {s.bc_fallbacks}\n")
        f.write(f"final_mass_residual: {res.audit[-1][4]:.3e}\n")
        if s.cuj1_supercritical:
            f.write("warning: continuity-only junction model used on supercritical flow\n")
    if s.cuj1_supercritical:
        print(
            "warning: supercritical flow at a junction under the continuity-only "
            "model; consider junction_model 'cuj2'",
            file=sys.stderr,
        )
    print(out)
    return 0


def cmd_convergence(args):
    try:
        config = resolve_scenario(args.scenario)
    except NetworkConfigError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return 2
    fam = (config.get("scenario") or {}).get("family")
    if not fam or "name" not in fam or "n" not in fam:
        print("error: convergence needs a scenario with a grid family "
              "(built-in cases carry one)", file=sys.stderr)
        return 2
    grids = [int(v) for v in args.grids.split(",")]
    n_ref = int(args.ref)
    if n_ref <= max(grids):
        print(f"error: reference grid {n_ref} must be finer than every test grid",
              file=sys.stderr)
        return 2
    for n in grids:
        if n_ref % n != 0:
            print(f"error: reference grid {n_ref} does not nest grid {n}", file=sys.stderr)
            return 2
    out = _outdir(args)
    cache = out / "refcache"
    name = fam["name"]
    ref = fine_grid_reference(name, n_ref, cache_dir=cache)
    rows = []
    for n in grids:
        sol = fine_grid_reference(name, n, cache_dir=cache)
        dx = float(sol["x"][1] - sol["x"][0])
        w_ref = project_to_coarse(ref["w"], n)
        q_ref = project_to_coarse(ref["q"], n)
        l1_w, _, _ = error_norms(sol["w"], w_ref, dx)
        l1_q, _, _ = error_norms(sol["q"], q_ref, dx)
        rows.append((n, l1_w, l1_q))
    table = []
    for i, (n, l1w, l1q) in enumerate(rows):
        ow = np.log2(rows[i - 1][1] / l1w) if i else float("nan")
        oq = np.log2(rows[i - 1][2] / l1q) if i else float("nan")
        table.append((n, l1w, ow, l1q, oq))
    with open(out / "convergence.csv", "w") as f:
        f.write("N,L1_w,order_w,L1_Q,order_Q\n")
        for n, l1w, ow, l1q, oq in table:
            f.write(f"{n},{_fmt(l1w)},{ow:.3f},{_fmt(l1q)},{oq:.3f}\n")
    print(f"{'N':>6} {'L1 w':>14} {'order':>7} {'L1 Q':>14} {'order':>7}")
    for n, l1w, ow, l1q, oq in table:
        print(f"{n:>6} {l1w:>14.5e} {ow:>7.3f} {l1q:>14.5e} {oq:>7.3f}")
    return 0


def cmd_check(args):
    from . import checks

    if args.suite not in checks.SUITES:
        print(f"error: unknown suite '{args.suite}'; available: "
              f"{', '.join(sorted(checks.SUITES))}", file=sys.stderr)
        return 2
    result = checks.SUITES[args.suite](seed=args.seed)
    print(json.dumps(result, indent=1))
    return 0 if result["passed"] else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="chanflow",
        description="1D open-channel network flow simulator "
                    "(central-upwind finite volumes, wet/dry fronts, junctions)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write CSV outputs")
    p_run.add_argument("scenario", help=f"scenario file or built-in name "
                       f"({', '.join(builtin_names())})")
    p_run.add_argument("-o", "--outdir", default=None)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("convergence", help="grid-refinement error study")
    p_conv.add_argument("scenario")
    p_conv.add_argument("--grids", default="80,160,320,640")
    p_conv.add_argument("--ref", default="5120")
    p_conv.add_argument("-o", "--outdir", default=None)
    p_conv.set_defaults(func=cmd_convergence)

    p_chk = sub.add_parser("check", help="run a built-in property suite")
    p_chk.add_argument("suite")
    p_chk.add_argument("--seed", type=int, default=42)
    p_chk.set_defaults(func=cmd_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
