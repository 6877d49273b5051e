"""Dump per-iteration traces of both sub-problems for one realization."""

import argparse
from pathlib import Path

from bcnoma import SolverConfig, SystemConfig, draw_realization, solve_full
from bcnoma.solver import write_trace_csv

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--grad-mode", default="rederived", choices=["rederived", "as_printed"])
    ap.add_argument("--rho", type=float, default=SolverConfig.rho)
    ap.add_argument("--outdir", default=str(ROOT / "results" / "traces"))
    args = ap.parse_args()

    cfg = SolverConfig(record_trace=True, grad_mode=args.grad_mode, rho=args.rho)
    config = SystemConfig()
    sol_bs, sols_rsu, metrics = solve_full(draw_realization(config, args.seed), config, cfg)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, sol in [("bs", sol_bs), ("rsu0", sols_rsu[0]), ("rsu1", sols_rsu[1])]:
        if sol is None or sol.trace is None:
            print(f"{name}: no trace")
            continue
        write_trace_csv(sol, out / f"trace_{name}.csv")
        print(f"{name}: {sol.iters_used} iterations, converged={sol.converged}, "
              f"last iterate {sol.subgradient_objective_w:.4e} W, returned {sol.objective_w:.4e} W")
