"""Monte-Carlo sweeps comparing BC-NOMA against conventional NOMA."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import draw_realization
from .config import SystemConfig
from .solver import BASELINES, SolverConfig, TrialMetrics, solve_full

SWEEP_VARIABLES = ("total_power_dbm", "sigma_eps", "rsu_radius_m")
METRICS = (
    "ee_mean",
    "ee_mean_feasible",
    "sum_rate_mean_bps",
    "total_power_mean_w",
    "est_interference_mean_w",
    "feasible_fraction",
    "n_feasible",
)


def run_trial(
    config: SystemConfig,
    seed: int,
    baseline: str = "bc_noma",
    solver_cfg: SolverConfig | None = None,
) -> TrialMetrics:
    """One seeded realization solved end to end; infeasibility is recorded, not raised."""
    real = draw_realization(config, seed)
    return solve_full(real, config, solver_cfg, baseline)[2]


@dataclass(frozen=True)
class Sweep:
    variable: str
    values: tuple
    trials: int = 500
    base_config: SystemConfig = field(default_factory=SystemConfig)
    baselines: tuple = BASELINES
    seed0: int = 0
    solver_cfg: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"variable must be one of {SWEEP_VARIABLES}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("sweep needs at least one value")
        if list(values) != sorted(values):
            raise ValueError("sweep values must be sorted")
        object.__setattr__(self, "values", values)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for b in self.baselines:
            if b not in BASELINES:
                raise ValueError(f"unknown baseline {b!r}")

    def config_for(self, value: float) -> SystemConfig:
        if self.variable == "total_power_dbm":
            return self.base_config.replace(total_power_budget_dbm=value)
        if self.variable == "sigma_eps":
            return self.base_config.replace(sigma_eps_sq=value**2)
        return self.base_config.replace(rsu_radius_m=value)


@dataclass(frozen=True)
class SweepRow:
    """Aggregates at one sweep value.

    ``ee_mean`` counts an infeasible trial as zero energy efficiency (outage);
    the other means run over feasible trials only, and ``n_feasible`` says how
    many that was.
    """

    value: float
    stats: dict  # baseline -> {metric: value}

    def ee(self, baseline: str) -> float:
        return self.stats[baseline]["ee_mean"]


def _fmean(xs) -> float:
    return math.fsum(xs) / len(xs) if xs else math.nan


def aggregate(value: float, results: dict) -> SweepRow:
    """``results`` maps baseline -> list of TrialMetrics. Order-independent (fsum)."""
    stats = {}
    for baseline, trials in results.items():
        ok = [t for t in trials if t.feasible]
        stats[baseline] = {
            "ee_mean": math.fsum(t.ee_bits_per_joule for t in ok) / len(trials),
            "ee_mean_feasible": _fmean([t.ee_bits_per_joule for t in ok]),
            "sum_rate_mean_bps": _fmean([t.sum_rate_bps for t in ok]),
            "total_power_mean_w": _fmean([t.total_power_w for t in ok]),
            "est_interference_mean_w": _fmean([t.est_interference_w for t in ok]),
            "feasible_fraction": len(ok) / len(trials),
            "n_feasible": len(ok),
        }
    return SweepRow(value=value, stats=stats)


def _trial_job(args):
    config, seed, baseline, solver_cfg = args
    return run_trial(config, seed, baseline, solver_cfg)


def run_sweep(sweep: Sweep, jobs: int = 1, progress=None) -> list[SweepRow]:
    """Run every (value, baseline, trial) and aggregate per value.

    Trial ``k`` always uses seed ``seed0 + k``, so baselines and sweep points
    see the same realizations whenever the config leaves them unchanged.
    Results do not depend on ``jobs``.
    """
    tasks = [
        (sweep.config_for(v), sweep.seed0 + k, b, sweep.solver_cfg)
        for v in sweep.values
        for b in sweep.baselines
        for k in range(sweep.trials)
    ]
    if jobs > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(jobs) as pool:
            flat = pool.map(_trial_job, tasks, chunksize=max(1, len(tasks) // (8 * jobs)))
    else:
        flat = []
        for i, task in enumerate(tasks):
            flat.append(_trial_job(task))
            if progress is not None:
                progress(i + 1, len(tasks))

    rows = []
    it = iter(flat)
    for v in sweep.values:
        results = {b: [next(it) for _ in range(sweep.trials)] for b in sweep.baselines}
        rows.append(aggregate(v, results))
    return rows


def csv_header(variable: str, baselines: Sequence[str]) -> list[str]:
    return [variable] + [f"{b}_{m}" for b in baselines for m in METRICS]


def rows_to_csv(rows: list[SweepRow], variable: str, baselines: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(variable, baselines))
    for row in rows:
        line = [repr(row.value)]
        for b in baselines:
            for m in METRICS:
                v = row.stats[b][m]
                line.append(str(v) if isinstance(v, int) else repr(float(v)))
        w.writerow(line)
    return buf.getvalue()


def write_csv(rows, path, variable, baselines) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows, variable, baselines))


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]


def count_inversions(means, rel_tol: float = 0.0):
    """Consecutive increases of a series that should be non-increasing.

    Returns ``(n_inversions, largest relative increase)``.
    """
    n, worst = 0, 0.0
    for a, b in zip(means[:-1], means[1:]):
        if b > a:
            n += 1
            worst = max(worst, (b - a) / abs(a) if a else math.inf)
    return n, worst


def has_interior_maximum(means, window: int = 3) -> bool:
    """Bell shape: the moving average strictly rises at the start and strictly falls at the end."""
    means = np.asarray(means, dtype=float)
    if window > 1 and len(means) >= window:
        means = np.convolve(means, np.ones(window) / window, mode="valid")
    if len(means) < 3:
        return False
    k = int(np.argmax(means))
    return 0 < k < len(means) - 1 and means[1] > means[0] and means[-1] < means[-2]


@dataclass(frozen=True)
class GapRow:
    """Solver against grid search on one sub-problem of one realization."""

    seed: int
    problem: str  # "bs", "rsu0" or "rsu1"
    solver_w: float
    oracle_w: float
    slack_w: float

    @property
    def gap(self) -> float:
        """Signed relative difference of the solver objective from the grid minimum."""
        if not (math.isfinite(self.solver_w) and math.isfinite(self.oracle_w)):
            return 0.0 if self.solver_w == self.oracle_w else math.inf
        return (self.solver_w - self.oracle_w) / self.oracle_w

    @property
    def below_oracle(self) -> bool:
        """True when the solver beats the grid by more than its resolution allows."""
        return self.solver_w < self.oracle_w - self.slack_w

    def ok(self, threshold: float) -> bool:
        """Within ``threshold`` of the grid minimum either way, and not below its slack band."""
        return abs(self.gap) <= threshold and not self.below_oracle


def verify_against_oracle(
    config: SystemConfig,
    n_instances: int,
    seed0: int = 0,
    n_grid_bs: int = 401,
    n_grid_rsu: int = 201,
    solver_cfg: SolverConfig | None = None,
    baseline: str = "bc_noma",
    zoom: bool = True,
    max_seeds: int | None = None,
) -> list[GapRow]:
    """Compare solver and oracle on the first ``n_instances`` feasible seeds.

    A seed counts as an instance when the oracle finds all three sub-problems
    feasible. Seeds the solver and oracle disagree on are always reported
    (with an infinite gap) so a missed feasible point cannot hide.
    """
    from . import oracle
    from .solver import SolverError, solve_bs_power, solve_rsu_power

    if n_instances < 1:
        raise ValueError("n_instances must be >= 1")
    cfg = solver_cfg or SolverConfig()
    pin = 0.0 if baseline == "conventional_noma" else None
    xi_values = [0.0] if pin is not None else None
    q_other = config.q_max_w
    max_seeds = max_seeds or 20 * n_instances

    def objective(fn):
        try:
            return fn().objective_w
        except SolverError:
            return math.inf

    rows: list[GapRow] = []
    found = 0
    for seed in range(seed0, seed0 + max_seeds):
        if found >= n_instances:
            break
        real = draw_realization(config, seed)
        orc = [oracle.grid_search_bs(real, config, n_grid_bs, zoom=zoom)]
        orc += [
            oracle.grid_search_rsu(real, config, n_grid_rsu, m, zoom, xi_values, q_other)
            for m in range(2)
        ]
        sol = [objective(lambda: solve_bs_power(real, config, cfg))]
        sol += [
            objective(lambda m=m: solve_rsu_power(real, config, cfg, m, q_other, pin))
            for m in range(2)
        ]
        all_feasible = all(o.feasible for o in orc)
        names = ("bs", "rsu0", "rsu1")
        for name, o, s in zip(names, orc, sol):
            if all_feasible or math.isfinite(s) != o.feasible:
                rows.append(GapRow(seed, name, s, o.objective_w, o.slack_w))
        found += all_feasible
    return rows


def interference_vs_power(
    alloc,
    powers_dbm: Sequence[float],
    sigmas: Sequence[float],
    base_config: SystemConfig | None = None,
    real=None,
) -> np.ndarray:
    """Aggregate estimation interference (W) for a fixed allocation.

    Returns shape ``(len(sigmas), len(powers_dbm))``; only the total budget
    and the error standard deviation vary.
    """
    from .rates import estimation_interference

    base = base_config or SystemConfig()
    out = np.empty((len(sigmas), len(powers_dbm)))
    for i, s in enumerate(sigmas):
        for j, p in enumerate(powers_dbm):
            cfg = base.replace(total_power_budget_dbm=float(p), sigma_eps_sq=float(s) ** 2)
            out[i, j] = float(estimation_interference(alloc, cfg, real).total_w)
    return out


def linear_fit_r2(x, y) -> float:
    """Coefficient of determination of an ordinary least-squares line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
