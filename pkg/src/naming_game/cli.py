"""Command-line front end.

Every subcommand writes one delimited table (CSV by default, JSON with
--format json) to --out or stdout, plus a JSON run manifest alongside that
echoes the resolved parameters, so any output can be regenerated
bit-identically.  Subcommands that produce figure-shaped tables accept
--plot to render a PNG next to the data.

    naming-game steady --k 2 --zb 0.05
    naming-game beak --k 3 --res 0.005 --jobs 4 --out beak3.csv --plot
    naming-game simulate --k 3 --n 10000 --init "at-m(0.6)" --sweeps 10

Exit codes: 0 success, 1 argument errors, 2 numerical/solver/IO failures.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__, plots
from .errors import NamingGameError, NumericalFailureError, SolverFailureError
from .model import ModelParams
from .simulate import init_population, simulate
from .steady import (
    beak_diagram,
    critical_alpha,
    critical_unilateral_zealot_fraction,
    cusp_zealot_fraction,
    find_steady_states,
    perturbation_experiment,
    rho_b_curve,
    self_consistency_residual,
    symmetric_gap_curve,
)
from .tables import write_table

import json


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments by default; this tool reserves 2
    # for numerical failures, so argument errors exit 1 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(sub, name, help_text, plot=False):
    q = sub.add_parser(name, help=help_text, description=help_text)
    q.add_argument("--out", help="output file (default: stdout)")
    q.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    if plot:
        q.add_argument("--plot", action="store_true", help="also render a PNG figure")
    return q


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="naming-game",
        description="Mean-field analysis and Monte Carlo simulation of the K-state naming game with zealots.",
    )
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    q = _add_common(sub, "steady", "steady states and their stability at fixed parameters")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--za", type=float, default=0.0, help="A-zealot fraction")
    q.add_argument("--zb", type=float, default=0.0, help="B-zealot fraction")
    q.add_argument("--tol", type=float, default=1e-10, help="residual tolerance for roots")

    q = _add_common(sub, "curve", "unilateral zealot fraction rho_B along the steady branch", plot=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--points", type=int, default=500, help="samples on (0.5, 1)")

    q = _add_common(sub, "critical-zealot", "maximum unilateral zealot fraction and its location")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--tol", type=float, default=1e-9, help="golden-section bracket width")

    q = _add_common(sub, "critical-alpha", "tipping point 3/(K+2) and per-side cusp fraction")
    q.add_argument("--k", type=int, required=True)

    q = _add_common(sub, "beak", "steady-state counts over the (z_A, z_B) plane", plot=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--res", type=float, default=0.005, help="grid resolution")
    q.add_argument("--max", type=float, default=0.5, help="largest zealot fraction per axis")
    q.add_argument("--jobs", type=int, default=1, help="parallel workers for grid rows")

    q = _add_common(sub, "gap", "spread of steady-state magnetizations for symmetric zealots", plot=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--res", type=float, default=0.005, help="step in z")
    q.add_argument("--jobs", type=int, default=1, help="parallel workers")

    q = _add_common(sub, "simulate", "stochastic conversation process on the complete graph", plot=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--za", type=float, default=0.0)
    q.add_argument("--zb", type=float, default=0.0)
    q.add_argument("--n", type=int, required=True, help="total agent count")
    q.add_argument("--sweeps", type=float, default=10.0, help="duration (1 sweep = N conversations)")
    q.add_argument("--record", type=float, default=0.1, help="recording cadence in sweeps")
    q.add_argument("--init", default="uniform", help="uniform | consensus-a | consensus-b | at-m(X)")
    q.add_argument("--seed", type=int, default=0)

    q = _add_common(sub, "perturb", "kick a steady state and track the distance to it", plot=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--za", type=float, default=0.0)
    q.add_argument("--zb", type=float, default=0.0)
    q.add_argument("--branch", choices=("low", "mid", "high"), required=True)
    q.add_argument("--eps", type=float, default=1e-6, help="perturbation magnitude")
    q.add_argument("--sweeps", type=float, default=80.0, help="integration horizon")
    q.add_argument("--record", type=float, default=0.1, help="output cadence in sweeps")
    q.add_argument("--seed", type=int, default=0)
    return p


def _cmd_steady(args):
    params = ModelParams(args.k, args.za, args.zb)
    ss = find_steady_states(params, tol=args.tol)
    header = ["k", "z_a", "z_b", "m", "stability", "leading_eigenvalue", "residual"]
    rows = [
        (args.k, args.za, args.zb, s.m, s.stability, s.leading_eigenvalue,
         float(self_consistency_residual(s.m, params)))
        for s in ss
    ]
    if ss.continuum:
        print("note: every geometric distribution is a fixed point (K=1, no zealots)", file=sys.stderr)
    resolved = {"k": args.k, "z_a": args.za, "z_b": args.zb, "tol": args.tol, "scan_points": 2001}
    return header, rows, resolved, {"continuum": ss.continuum}, None


def _cmd_curve(args):
    arr = rho_b_curve(args.k, args.points)
    header = ["k", "m", "rho_b"]
    rows = [(args.k, float(m), float(r)) for m, r in arr]
    resolved = {"k": args.k, "points": args.points}
    return header, rows, resolved, {}, lambda path: plots.save_curve(arr, args.k, path)


def _cmd_critical_zealot(args):
    rb, m_star = critical_unilateral_zealot_fraction(args.k, args.tol)
    header = ["k", "rho_b_star", "m_star"]
    resolved = {"k": args.k, "tol": args.tol}
    return header, [(args.k, rb, m_star)], resolved, {}, None


def _cmd_critical_alpha(args):
    header = ["k", "critical_alpha", "cusp_z"]
    rows = [(args.k, critical_alpha(args.k), cusp_zealot_fraction(args.k))]
    return header, rows, {"k": args.k}, {}, None


def _cmd_beak(args):
    grid = beak_diagram(args.k, args.res, args.max, args.jobs)
    za = grid.axes[0].values()
    zb = grid.axes[1].values()
    ns, nst = grid.tables["n_steady"], grid.tables["n_stable"]
    header = ["k", "z_a", "z_b", "n_steady", "n_stable"]
    rows = [
        (args.k, float(za[i]), float(zb[j]), int(ns[i, j]), int(nst[i, j]))
        for i in range(len(za))
        for j in range(len(zb))
    ]
    resolved = {"k": args.k, "res": args.res, "max_z": args.max, "jobs": args.jobs}
    return header, rows, resolved, {}, lambda path: plots.save_beak(grid, args.k, path)


def _cmd_gap(args):
    grid = symmetric_gap_curve(args.k, args.res, args.jobs)
    zs = grid.axes[0].values()
    gaps = grid.tables["gap"]
    header = ["k", "z", "gap"]
    rows = [(args.k, float(z), float(g)) for z, g in zip(zs, gaps)]
    resolved = {"k": args.k, "res": args.res, "jobs": args.jobs}
    return header, rows, resolved, {}, lambda path: plots.save_gap(grid, args.k, path)


def _cmd_simulate(args):
    params = ModelParams(args.k, args.za, args.zb)
    pop = init_population(params, args.n, args.init)  # also validates init early
    traj = simulate(params, args.n, args.sweeps, args.record, args.seed, args.init)
    header = ["t_sweeps", "m"]
    rows = [(float(t), float(m)) for t, m in zip(traj.times, traj.m)]
    resolved = {
        "k": args.k, "z_a": args.za, "z_b": args.zb, "n": args.n,
        "sweeps": args.sweeps, "record": args.record, "init": args.init,
        "seed": args.seed, "nz_a": pop.nz_a, "nz_b": pop.nz_b, "rng": "numpy PCG64",
    }
    return header, rows, resolved, {}, lambda path: plots.save_trajectory(traj, path)


def _cmd_perturb(args):
    params = ModelParams(args.k, args.za, args.zb)
    rec = perturbation_experiment(params, args.branch, args.eps, args.sweeps, args.seed)
    step = max(1, round(args.record / 0.01))
    idx = list(range(0, len(rec.times), step))
    if idx[-1] != len(rec.times) - 1:
        idx.append(len(rec.times) - 1)
    header = ["t_sweeps", "d"]
    rows = [(float(rec.times[i]), float(rec.d[i])) for i in idx]
    print(f"verdict: {rec.verdict}", file=sys.stderr)
    resolved = {
        "k": args.k, "z_a": args.za, "z_b": args.zb, "branch": args.branch,
        "eps": args.eps, "sweeps": args.sweeps, "record": args.record, "seed": args.seed,
    }
    return header, rows, resolved, {"verdict": rec.verdict}, lambda path: plots.save_perturbation(rec, path)


_HANDLERS = {
    "steady": _cmd_steady,
    "curve": _cmd_curve,
    "critical-zealot": _cmd_critical_zealot,
    "critical-alpha": _cmd_critical_alpha,
    "beak": _cmd_beak,
    "gap": _cmd_gap,
    "simulate": _cmd_simulate,
    "perturb": _cmd_perturb,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    t0 = time.monotonic()
    try:
        header, rows, resolved, extra, plot_fn = _HANDLERS[args.command](args)
    except (SolverFailureError, NumericalFailureError) as e:
        print(f"naming-game {args.command}: {e}", file=sys.stderr)
        return 2
    except (NamingGameError, ValueError) as e:
        print(f"naming-game {args.command}: {e}", file=sys.stderr)
        return 1

    resolved["format"] = args.format
    resolved["out"] = args.out
    try:
        if args.out:
            with open(args.out, "w", newline="") as f:
                write_table(f, header, rows, args.format)
            outputs = [args.out]
        else:
            write_table(sys.stdout, header, rows, args.format)
            outputs = ["-"]
        if getattr(args, "plot", False):
            png = (os.path.splitext(args.out)[0] if args.out else args.command) + ".png"
            plot_fn(png)
            outputs.append(png)
        manifest = {
            "version": __version__,
            "command": args.command,
            "parameters": resolved,
            **extra,
            "duration_s": time.monotonic() - t0,
            "outputs": outputs,
        }
        manifest_path = (args.out if args.out else args.command) + ".manifest.json"
        with open(manifest_path, "w") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
    except OSError as e:
        print(f"naming-game {args.command}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
