"""Command-line entry point: ``bcnoma solve | sweep | verify``.

Exit codes: 0 success, 1 usage or config error, 2 infeasible instance,
3 solver/oracle verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .channel import draw_realization
from .config import ConfigError, SystemConfig, format_config, load_config
from .solver import BASELINES, SolverConfig, solve_full, write_trace_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3

BASELINE_ALIASES = {
    "bc": "bc_noma",
    "bc_noma": "bc_noma",
    "conventional": "conventional_noma",
    "conventional_noma": "conventional_noma",
}

SWEEP_DEFAULTS = {
    "total_power_dbm": (20.0, 45.0, 6),
    "sigma_eps": (0.0, 0.01, 5),
    "rsu_radius_m": (5.0, 20.0, 4),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which would collide with "infeasible"
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _solver_cfg(args, record_trace=False) -> SolverConfig:
    return SolverConfig(
        step0=args.step0,
        schedule=args.schedule,
        max_iters=args.max_iters,
        grad_mode=args.grad_mode,
        record_trace=record_trace,
    )


def _baselines(values) -> tuple:
    if not values:
        return BASELINES
    picked = {BASELINE_ALIASES[v] for v in values}
    return tuple(b for b in BASELINES if b in picked)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _solution_dict(sol):
    if sol is None:
        return None
    return {
        "feasible": sol.feasible,
        "objective_w": sol.objective_w,
        "iterations": sol.iters_used,
        "converged": sol.converged,
        "residuals": sol.residuals,
    }


def cmd_solve(args) -> int:
    config = load_config(args.config)
    baseline = BASELINE_ALIASES[args.baseline]
    real = draw_realization(config, args.seed)
    cfg = _solver_cfg(args, record_trace=args.trace_dir is not None)
    sol_bs, sols_rsu, metrics = solve_full(real, config, cfg, baseline)

    report = {
        "seed": args.seed,
        "baseline": baseline,
        "metrics": metrics.as_dict(),
        "bs": _solution_dict(sol_bs),
        "rsu": [_solution_dict(s) for s in sols_rsu],
    }
    if args.format == "json":
        print(json.dumps(_jsonable(report), indent=2, sort_keys=True))
    else:
        _print_solve_text(report, metrics)

    if args.trace_dir is not None:
        out = Path(args.trace_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, sol in [("bs", sol_bs), ("rsu0", sols_rsu[0]), ("rsu1", sols_rsu[1])]:
            if sol is not None and sol.trace is not None:
                write_trace_csv(sol, out / f"trace_{name}.csv")
    return EXIT_OK if metrics.feasible else EXIT_INFEASIBLE


def _print_solve_text(report, metrics):
    print(f"seed {report['seed']}  baseline {report['baseline']}")
    if not metrics.feasible:
        print(f"INFEASIBLE: {metrics.failure}")
        return
    a = metrics.alloc
    print(f"alpha      {a.alpha[0]:.6e} {a.alpha[1]:.6e}")
    for m in range(2):
        print(f"beta[{m}]    {a.beta[m, 0]:.6e} {a.beta[m, 1]:.6e}   xi[{m}] {a.xi[m]:.6f}")
    print(f"BS power   {metrics.objective_bs_w:.6e} W")
    print(f"RSU power  {metrics.objective_rsu_w:.6e} W")
    print(f"total      {metrics.total_power_w:.6e} W (incl. circuit)")
    print(f"sum rate   {metrics.sum_rate_bps:.6e} bit/s")
    print(f"EE         {metrics.ee_bits_per_joule:.6e} bit/J")
    print(f"est. intf  {metrics.est_interference_w:.6e} W")
    for name, sol in [("bs", report["bs"]), ("rsu0", report["rsu"][0]), ("rsu1", report["rsu"][1])]:
        res = " ".join(f"{k}={v:+.3e}" for k, v in sol["residuals"].items())
        print(f"{name:5s} iters={sol['iterations']} converged={sol['converged']} {res}")


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    lo, hi, pts = SWEEP_DEFAULTS[args.var]
    lo = lo if args.start is None else args.start
    hi = hi if args.stop is None else args.stop
    pts = pts if args.points is None else args.points
    if pts < 1:
        raise UsageError("--points must be >= 1")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    values = tuple(float(v) for v in np.linspace(lo, hi, pts))
    baselines = _baselines(args.baseline)
    try:
        sweep = experiments.Sweep(
            variable=args.var,
            values=values,
            trials=args.trials,
            base_config=config,
            baselines=baselines,
            seed0=args.seed,
            solver_cfg=_solver_cfg(args),
        )
        for v in values:
            sweep.config_for(v)  # surface invalid sweep values as config errors
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    # fail on an unwritable path before spending the compute
    out = None
    if args.out is not None:
        try:
            out = open(args.out, "w", encoding="utf-8", newline="")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    rows = experiments.run_sweep(sweep, jobs=args.jobs)
    text = experiments.rows_to_csv(rows, args.var, baselines)
    if out is None:
        sys.stdout.write(text)
    else:
        with out:
            out.write(text)
        for row in rows:
            parts = [
                f"{b}: EE {row.stats[b]['ee_mean']:.4e} feas {row.stats[b]['feasible_fraction']:.2f}"
                for b in baselines
            ]
            print(f"{args.var}={row.value:g}  " + "  ".join(parts))
    return EXIT_OK


def cmd_verify(args) -> int:
    config = load_config(args.config)
    if args.instances < 1:
        raise UsageError("--instances must be >= 1")
    if args.n_grid_bs < 2 or args.n_grid_rsu < 2:
        raise UsageError("grid sizes must be >= 2")
    rows = experiments.verify_against_oracle(
        config,
        args.instances,
        seed0=args.seed,
        n_grid_bs=args.n_grid_bs,
        n_grid_rsu=args.n_grid_rsu,
        solver_cfg=_solver_cfg(args),
        baseline=BASELINE_ALIASES[args.baseline],
        zoom=not args.no_zoom,
    )
    print(f"{'seed':>5} {'problem':>7} {'solver_w':>14} {'oracle_w':>14} {'slack_w':>10} {'gap':>11}  ok")
    bad = 0
    for r in rows:
        ok = r.ok(args.threshold)
        bad += not ok
        print(
            f"{r.seed:5d} {r.problem:>7} {r.solver_w:14.6e} {r.oracle_w:14.6e} "
            f"{r.slack_w:10.2e} {r.gap:+11.3e}  {'yes' if ok else 'NO'}"
        )
    worst = max((abs(r.gap) for r in rows), default=0.0)
    print(f"max |gap| {worst:.3e}  threshold {args.threshold:.3g}  failures {bad}/{len(rows)}")
    return EXIT_OK if bad == 0 and rows else EXIT_VERIFY


def cmd_show_config(args) -> int:
    config = SystemConfig() if args.config is None else load_config(args.config)
    sys.stdout.write(format_config(config))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bcnoma", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(sp):
        sp.add_argument("--grad-mode", default="rederived", choices=["rederived", "as_printed"])
        sp.add_argument("--step0", type=float, default=SolverConfig.step0)
        sp.add_argument("--schedule", default="inverse_sqrt", choices=["inverse_sqrt", "constant"])
        sp.add_argument("--max-iters", type=int, default=SolverConfig.max_iters)

    s = sub.add_parser("solve", help="solve one seeded realization")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--baseline", default="bc_noma", choices=sorted(BASELINE_ALIASES))
    s.add_argument("--format", default="text", choices=["text", "json"])
    s.add_argument("--trace-dir", default=None, help="write per-iteration CSV traces here")
    solver_flags(s)
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="Monte-Carlo sweep to CSV")
    w.add_argument("--config", required=True)
    w.add_argument("--var", required=True, choices=list(experiments.SWEEP_VARIABLES))
    w.add_argument("--from", dest="start", type=float, default=None)
    w.add_argument("--to", dest="stop", type=float, default=None)
    w.add_argument("--points", type=int, default=None)
    w.add_argument("--trials", type=int, default=500)
    w.add_argument(
        "--baseline", action="append", choices=sorted(BASELINE_ALIASES), help="repeatable; default both"
    )
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out", default=None, help="CSV path (default stdout)")
    solver_flags(w)
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="compare solver against grid search")
    v.add_argument("--config", required=True)
    v.add_argument("--instances", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--n-grid-bs", type=int, default=401)
    v.add_argument("--n-grid-rsu", type=int, default=201)
    v.add_argument("--threshold", type=float, default=0.02)
    v.add_argument("--baseline", default="bc_noma", choices=sorted(BASELINE_ALIASES))
    v.add_argument("--no-zoom", action="store_true", help="single grid level, no refinement")
    solver_flags(v)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("show-config", help="print a config with every field filled in")
    c.add_argument("--config", default=None)
    c.set_defaults(func=cmd_show_config)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
