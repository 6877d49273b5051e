"""Brute-force grid search over both sub-problems.

Constraints are checked on SINRs computed by :mod:`bcnoma.rates`; nothing
here touches the solver. With ``zoom`` enabled the search repeats on a
uniform grid over a shrinking box around the incumbent, which is needed
because at default-parameter magnitudes the optimal BS coefficients are ~1e-9.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import NetworkRealization
from .config import SystemConfig
from .rates import PowerAllocation, sinr_first_slot, sinr_second_slot_rsu

ZOOM_CELLS = 4
ZOOM_REL_TOL = 1e-5
MAX_LEVELS = 16


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    objective_w: float = np.inf
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    xi: float | None = None
    slack_w: float = np.inf  # objective change across one final-level cell per axis
    levels: int = 0


def _axis(lo, hi, n):
    return np.linspace(lo, hi, n) if hi > lo else np.array([lo])


def _shrink(center, lo, hi, n, bound_lo=0.0, bound_hi=1.0):
    h = (hi - lo) / (n - 1) if n > 1 else 0.0
    return max(bound_lo, center - ZOOM_CELLS * h), min(bound_hi, center + ZOOM_CELLS * h)


def _bs_level(real, config, a1, a2):
    A1, A2 = np.meshgrid(a1, a2, indexing="ij")
    alloc = PowerAllocation(np.stack([A1, A2], axis=-1), np.zeros((2, 2)), np.zeros(2))
    gamma = sinr_first_slot(real, alloc, config)
    th = config.sinr_threshold
    p = config.p_max_w
    total = A1 + A2
    ok = (gamma[..., 0] >= th) & (gamma[..., 1] >= th)
    ok &= (p * total <= config.p_max_w) & (total <= 1.0)
    obj = np.where(ok, p * total, np.inf)
    k = int(np.argmin(obj))  # first minimum in C order = smallest grid index
    i, j = np.unravel_index(k, obj.shape)
    return obj.flat[k], a1[i], a2[j]


def grid_search_bs(
    real: NetworkRealization, config: SystemConfig, n_grid: int = 401, zoom: bool = True
) -> OracleResult:
    """Minimum of P*(alpha_1 + alpha_2) over a grid of the unit square under the first-slot constraints."""
    if n_grid < 2:
        raise ValueError("n_grid must be >= 2")
    p = config.p_max_w
    box = [(0.0, 1.0), (0.0, 1.0)]
    best = None
    levels = 0
    for _ in range(MAX_LEVELS if zoom else 1):
        a1 = _axis(*box[0], n_grid)
        a2 = _axis(*box[1], n_grid)
        obj, x1, x2 = _bs_level(real, config, a1, a2)
        levels += 1
        if np.isfinite(obj) and (best is None or obj <= best[0]):
            best = (obj, x1, x2)
        if best is None:
            return OracleResult(False, levels=levels)
        h = [(b[1] - b[0]) / (n_grid - 1) for b in box]
        slack = p * (h[0] + h[1])
        if not zoom or slack <= ZOOM_REL_TOL * best[0] or best[0] == 0.0:
            break
        box = [_shrink(best[1], *box[0], n_grid), _shrink(best[2], *box[1], n_grid)]
    return OracleResult(
        True,
        objective_w=float(best[0]),
        alpha=np.array([best[1], best[2]]),
        slack_w=float(slack),
        levels=levels,
    )


def _rsu_level(real, config, m, b1, b2, xis, q_other):
    B1, B2 = np.meshgrid(b1, b2, indexing="ij")
    q = config.q_max_w
    total = B1 + B2
    budget_ok = (q * total <= config.q_max_w) & (total <= 1.0)
    th = config.sinr_threshold
    best = (np.inf, None, None, None)
    for xi in xis:  # outer axis; earlier xi wins ties
        g1, g2 = sinr_second_slot_rsu(real, config, m, B1, B2, xi, q_other)
        ok = budget_ok & (g1 >= th) & (g2 >= th)
        obj = np.where(ok, q * total, np.inf)
        k = int(np.argmin(obj))
        if obj.flat[k] < best[0]:
            i, j = np.unravel_index(k, obj.shape)
            best = (obj.flat[k], b1[i], b2[j], xi)
    return best


def grid_search_rsu(
    real: NetworkRealization,
    config: SystemConfig,
    n_grid: int = 201,
    m: int = 0,
    zoom: bool = True,
    xi_values=None,
    q_other: float | None = None,
) -> OracleResult:
    """Minimum of Q*(beta_1 + beta_2) over a (beta_1, beta_2, xi) grid under the RSU constraints.

    Zoom levels refine the beta box only; xi stays on its uniform [0, 1] grid.

    ``xi_values`` restricts the reflection coefficient to a fixed set (e.g. [0]
    for conventional NOMA); otherwise it is gridded over [0, 1] like beta.
    ``q_other`` defaults to the full budget of the other RSU.
    """
    if n_grid < 2:
        raise ValueError("n_grid must be >= 2")
    q = config.q_max_w
    q_other = q if q_other is None else q_other
    fixed_xi = xi_values is not None
    box = [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]
    best = None
    levels = 0
    for _ in range(MAX_LEVELS if zoom else 1):
        b1 = _axis(*box[0], n_grid)
        b2 = _axis(*box[1], n_grid)
        xis = np.asarray(xi_values, dtype=float) if fixed_xi else _axis(*box[2], n_grid)
        obj, x1, x2, xi = _rsu_level(real, config, m, b1, b2, xis, q_other)
        levels += 1
        if np.isfinite(obj) and (best is None or obj <= best[0]):
            best = (obj, x1, x2, xi)
        if best is None:
            return OracleResult(False, levels=levels)
        h = [(b[1] - b[0]) / (n_grid - 1) for b in box[:2]]
        slack = q * (h[0] + h[1])
        if not zoom or slack <= ZOOM_REL_TOL * best[0] or best[0] == 0.0:
            break
        # xi keeps its full axis: its effect on the objective is small, so a
        # coarse level can tie across xi and zooming it would lock in the tie
        box = [_shrink(best[1], *box[0], n_grid), _shrink(best[2], *box[1], n_grid), box[2]]
    return OracleResult(
        True,
        objective_w=float(best[0]),
        beta=np.array([best[1], best[2]]),
        xi=float(best[3]),
        slack_w=float(slack),
        levels=levels,
    )
