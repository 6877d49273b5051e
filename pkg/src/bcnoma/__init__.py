"""Power minimization for backscatter-aided cooperative NOMA V2X networks under imperfect CSI."""

from .channel import NetworkRealization, draw_realization, make_realization
from .config import ConfigError, SystemConfig, load_config, parse_config
from .rates import PowerAllocation, evaluate
from .solver import (
    Infeasible,
    NotConverged,
    Solution,
    SolverConfig,
    SolverError,
    solve_bs_power,
    solve_full,
    solve_rsu_power,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Infeasible",
    "NetworkRealization",
    "NotConverged",
    "PowerAllocation",
    "Solution",
    "SolverConfig",
    "SolverError",
    "SystemConfig",
    "draw_realization",
    "evaluate",
    "load_config",
    "make_realization",
    "parse_config",
    "solve_bs_power",
    "solve_full",
    "solve_rsu_power",
]
