"""Shared argument handling for the sweep scripts."""

import argparse
import time
from pathlib import Path

from bcnoma import experiments
from bcnoma.config import SystemConfig, load_config

ROOT = Path(__file__).resolve().parents[1]


def sweep_main(variable, values, default_out, description):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--config", default=str(ROOT / "configs" / "default.cfg"))
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default=str(ROOT / "results" / default_out))
    args = ap.parse_args()

    config = load_config(args.config) if args.config else SystemConfig()
    sweep = experiments.Sweep(variable, tuple(values), args.trials, config, seed0=args.seed)
    t0 = time.time()
    rows = experiments.run_sweep(sweep, jobs=args.jobs)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    experiments.write_csv(rows, args.out, variable, sweep.baselines)
    for row in rows:
        bc, conv = row.ee("bc_noma"), row.ee("conventional_noma")
        print(f"{variable}={row.value:<8g} EE bc {bc:.4e}  conv {conv:.4e}  gain {bc / conv - 1:+.3%}")
    print(f"wrote {args.out} in {time.time() - t0:.1f}s")
