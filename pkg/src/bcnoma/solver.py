"""Dual sub-gradient solution of the two decoupled power-minimization problems.

Sub-problem 1 (BS): choose alpha to minimize P*(alpha_1 + alpha_2) under the
two first-slot rate constraints and the power budgets.
Sub-problem 2 (RSU m): choose beta_m and xi_m to minimize Q*(beta_1 + beta_2)
under the second-slot rate constraints, the power budgets and 0 <= xi <= 1.

Residual names: ``rate_rsu0/1``, ``bs_power``, ``alpha_sum`` for the BS and
``rate_veh0/1``, ``rsu_power``, ``beta_sum``, ``xi_max`` for an RSU.

For fixed xi both problems are linear programs whose rate constraints have the
form ``(A0 + xi*A1) u >= b0 + xi*b1`` with non-positive off-diagonal entries.
The iteration runs on a rescaled copy (each variable divided by the power its
link needs when interference-free, each constraint by its right-hand side);
without that, default-parameter magnitudes (gains near 1e-7, noise near 1e-14 W) leave
the multipliers frozen.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .channel import NetworkRealization
from .config import SystemConfig
from .rates import (
    PowerAllocation,
    RateReport,
    cross_interference_power,
    error_variance_first_slot,
    error_variance_second_slot,
    estimation_interference,
    evaluate,
)

GRAD_MODES = ("rederived", "as_printed")
SCHEDULES = {"constant": _kernel.SCHEDULE_CONSTANT, "inverse_sqrt": _kernel.SCHEDULE_INVERSE_SQRT}
BASELINES = ("bc_noma", "conventional_noma")


class SolverError(Exception):
    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class Infeasible(SolverError):
    """No allocation meets the rate targets within the power budgets."""


class NotConverged(SolverError):
    """Iteration cap reached before the stopping rule fired (strict mode only)."""


@dataclass
class DualStateBS:
    psi1: float = 0.1
    psi2: float = 0.1
    lambda1: float = 0.1
    lambda2: float = 0.1

    def as_array(self):
        return np.array([self.psi1, self.psi2, self.lambda1, self.lambda2])


@dataclass
class DualStateRSU:
    eta1: float = 0.1
    eta2: float = 0.1
    mu: float = 0.1
    zeta_sum: float = 0.1
    upsilon: float = 0.1

    def as_array(self):
        return np.array([self.eta1, self.eta2, self.mu, self.zeta_sum, self.upsilon])


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the sub-gradient iteration.

    ``init_alpha``/``init_beta`` of None start every variable at the power its
    link needs without interference (unit value in rescaled coordinates).
    ``restore`` replaces the final iterate by the point where both rate
    constraints are tight at the final reflection coefficient, which is the
    exact minimizer for that coefficient whenever one exists.
    ``rho`` weights the augmented-Lagrangian term of the primal step (0 gives
    the plain dual sub-gradient method, whose iterates oscillate on these LPs);
    the ``as_printed`` iteration ignores it.
    """

    step0: float = 0.1
    schedule: str = "inverse_sqrt"
    max_iters: int = 20_000
    tol_obj: float = 1e-6
    tol_feas: float = 1e-6
    patience: int = 10
    init_alpha: float | None = None
    init_beta: float | None = None
    init_xi: float = 0.5
    init_multiplier: float = 0.1
    rho: float = 1.0
    grad_mode: str = "rederived"
    restore: bool = True
    record_trace: bool = False
    strict: bool = False
    max_rounds: int = 10

    def __post_init__(self):
        if not self.step0 > 0:
            raise ValueError("step0 must be > 0")
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if not (self.tol_obj > 0 and self.tol_feas > 0):
            raise ValueError("tolerances must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {tuple(SCHEDULES)}")
        if self.grad_mode not in GRAD_MODES:
            raise ValueError(f"grad_mode must be one of {GRAD_MODES}")
        if not 0.0 <= self.init_xi <= 1.0:
            raise ValueError("init_xi must lie in [0, 1]")


@dataclass
class Solution:
    alloc: PowerAllocation
    feasible: bool
    objective_w: float
    residuals: dict
    iters_used: int
    converged: bool
    subgradient_objective_w: float = math.nan
    dual: object = None
    trace: np.ndarray | None = None

    def max_violation(self) -> float:
        if not self.residuals:
            return math.inf
        return max(0.0, -min(self.residuals.values()))


@dataclass
class TrialMetrics:
    seed: int | None
    baseline: str
    feasible: bool
    alloc: PowerAllocation | None
    report: RateReport | None
    total_power_w: float
    sum_rate_bps: float
    ee_bits_per_joule: float
    est_interference_w: float
    objective_bs_w: float
    objective_rsu_w: float
    min_slack: float
    iters: int
    failure: str = ""

    def as_dict(self) -> dict:
        out = {
            "seed": self.seed,
            "baseline": self.baseline,
            "feasible": self.feasible,
            "total_power_w": self.total_power_w,
            "sum_rate_bps": self.sum_rate_bps,
            "ee_bits_per_joule": self.ee_bits_per_joule,
            "est_interference_w": self.est_interference_w,
            "objective_bs_w": self.objective_bs_w,
            "objective_rsu_w": self.objective_rsu_w,
            "min_slack": self.min_slack,
            "iters": self.iters,
            "failure": self.failure,
        }
        if self.alloc is not None:
            out["alloc"] = {
                "alpha": self.alloc.alpha.tolist(),
                "beta": self.alloc.beta.tolist(),
                "xi": self.alloc.xi.tolist(),
            }
        if self.report is not None:
            out["rates"] = self.report.as_dict()
        return out


# ---------------------------------------------------------------------------
# constraint residuals written out term by term (raw units, >= 0 is feasible)


def bs_residuals(real: NetworkRealization, alloc: PowerAllocation, config: SystemConfig) -> dict:
    p, n, th = config.p_max_w, config.noise_w, config.sinr_threshold
    s = error_variance_first_slot(real, config)
    g = real.g_bs_rsu
    a1, a2 = alloc.alpha[..., 0], alloc.alpha[..., 1]
    return {
        "rate_rsu0": g[0] * p * a1 - th * (p * s[0] * (a1 + a2) + n),
        "rate_rsu1": g[1] * p * a2 - th * (g[1] * p * a1 + p * s[1] * (a1 + a2) + n),
        "bs_power": config.p_max_w - p * (a1 + a2),
        "alpha_sum": 1.0 - (a1 + a2),
    }


def _q_other(real, alloc, config, m, q_other):
    if q_other is not None:
        return q_other
    return cross_interference_power(alloc, config)[..., m]


def rsu_residuals(
    real: NetworkRealization,
    alloc: PowerAllocation,
    config: SystemConfig,
    m: int,
    q_other: float | None = None,
) -> dict:
    q, n, th = config.q_max_w, config.noise_w, config.sinr_threshold
    s = error_variance_second_slot(real, config)[m]
    q_o = _q_other(real, alloc, config, m, q_other)
    b1, b2 = alloc.beta[..., m, 0], alloc.beta[..., m, 1]
    xi = alloc.xi[..., m]
    omega1 = xi * real.g_bd_veh[m, 0] * real.g_rsu_bd[m]
    omega2 = xi * real.g_bd_veh[m, 1] * real.g_rsu_bd[m]
    err1 = s[0] * (q * (b1 + b2) + xi)
    err2 = s[1] * (q * (b1 + b2) + xi)
    pi2 = q * b1 * (real.g_rsu_veh[m, 1] + omega2)
    return {
        "rate_veh0": q * b1 * (real.g_rsu_veh[m, 0] + omega1)
        - th * (err1 + real.g_cross[m, 0] * q_o + n),
        "rate_veh1": q * b2 * (real.g_rsu_veh[m, 1] + omega2)
        - th * (pi2 + err2 + real.g_cross[m, 1] * q_o + n),
        "rsu_power": config.q_max_w - q * (b1 + b2),
        "beta_sum": 1.0 - (b1 + b2),
        "xi_max": 1.0 - xi,
    }


def lagrangian_bs(real, alloc, dual: DualStateBS, config) -> float:
    r = bs_residuals(real, alloc, config)
    objective = config.p_max_w * alloc.alpha.sum(axis=-1)
    return (
        objective
        - dual.psi1 * r["rate_rsu0"]
        - dual.psi2 * r["rate_rsu1"]
        - dual.lambda1 * r["bs_power"]
        - dual.lambda2 * r["alpha_sum"]
    )


def lagrangian_rsu(real, alloc, dual: DualStateRSU, config, m, q_other=None) -> float:
    r = rsu_residuals(real, alloc, config, m, q_other)
    objective = config.q_max_w * alloc.beta[..., m, :].sum(axis=-1)
    return (
        objective
        - dual.eta1 * r["rate_veh0"]
        - dual.eta2 * r["rate_veh1"]
        - dual.mu * r["rsu_power"]
        - dual.zeta_sum * r["beta_sum"]
        - dual.upsilon * r["xi_max"]
    )


# ---------------------------------------------------------------------------
# coefficient form


@dataclass(frozen=True)
class _Problem:
    """Raw-unit coefficients; constraint order matches the multiplier order."""

    A0: np.ndarray  # (2, 2)
    A1: np.ndarray  # (2, 2)
    b0: np.ndarray  # (2,)
    b1: np.ndarray  # (2,)
    c: np.ndarray  # (2,)
    E: np.ndarray  # (2, 2)
    d: np.ndarray  # (2,)
    has_xi: bool

    def rate_matrix(self, xi):
        return self.A0 + xi * self.A1, self.b0 + xi * self.b1


def bs_problem(real: NetworkRealization, config: SystemConfig) -> _Problem:
    p, n, th = config.p_max_w, config.noise_w, config.sinr_threshold
    s = error_variance_first_slot(real, config)
    g = real.g_bs_rsu
    A0 = np.array(
        [
            [g[0] * p - th * p * s[0], -th * p * s[0]],
            [-th * (g[1] * p + p * s[1]), g[1] * p - th * p * s[1]],
        ]
    )
    return _Problem(
        A0=A0,
        A1=np.zeros((2, 2)),
        b0=np.array([th * n, th * n]),
        b1=np.zeros(2),
        c=np.array([p, p]),
        E=np.array([[p, p], [1.0, 1.0]]),
        d=np.array([config.p_max_w, 1.0]),
        has_xi=False,
    )


def rsu_problem(
    real: NetworkRealization, config: SystemConfig, m: int, q_other: float, has_xi: bool = True
) -> _Problem:
    q, n, th = config.q_max_w, config.noise_w, config.sinr_threshold
    s = error_variance_second_slot(real, config)[m]
    g = real.g_rsu_veh[m]
    cas = real.g_bd_veh[m] * real.g_rsu_bd[m]
    interference = real.g_cross[m] * q_other
    A0 = np.array(
        [
            [q * g[0] - th * s[0] * q, -th * s[0] * q],
            [-th * (q * g[1] + s[1] * q), q * g[1] - th * s[1] * q],
        ]
    )
    A1 = np.array([[q * cas[0], 0.0], [-th * q * cas[1], q * cas[1]]])
    return _Problem(
        A0=A0,
        A1=A1 if has_xi else np.zeros((2, 2)),
        b0=th * (interference + n),
        b1=th * s if has_xi else np.zeros(2),
        c=np.array([q, q]),
        E=np.array([[q, q], [1.0, 1.0]]),
        d=np.array([config.q_max_w, 1.0]),
        has_xi=has_xi,
    )


def _lagrangian_grad(prob: _Problem, u, xi, mult):
    A, _ = prob.rate_matrix(xi)
    grad_u = prob.c - mult[0] * A[0] - mult[1] * A[1] + mult[2] * prob.E[0] + mult[3] * prob.E[1]
    grad_xi = (
        -mult[0] * (prob.A1[0] @ u - prob.b1[0]) - mult[1] * (prob.A1[1] @ u - prob.b1[1]) + mult[4]
    )
    return grad_u, grad_xi


def grad_alpha(real, alloc, dual: DualStateBS, config, mode: str = "rederived") -> np.ndarray:
    """Gradient of the BS-problem Lagrangian with respect to (alpha_1, alpha_2).

    ``as_printed`` evaluates the alternative closed-form update rule, which
    carries extra ``lambda_2 * alpha`` cross terms; kept for comparison runs.
    """
    if mode == "as_printed":
        return _printed_alpha_star(real, alloc.alpha, dual, config)
    if mode != "rederived":
        raise ValueError(f"unknown grad mode {mode!r}")
    prob = bs_problem(real, config)
    mult = np.append(dual.as_array(), 0.0)
    return _lagrangian_grad(prob, alloc.alpha, 0.0, mult)[0]


def grad_beta_xi(
    real, alloc, dual: DualStateRSU, config, m: int, mode: str = "rederived", q_other=None
) -> np.ndarray:
    """Gradient of the RSU-m Lagrangian with respect to (beta_1, beta_2, xi)."""
    beta, xi = alloc.beta[m], float(alloc.xi[m])
    if mode == "as_printed":
        return _printed_beta_xi_star(real, beta, xi, dual, config, m)
    if mode != "rederived":
        raise ValueError(f"unknown grad mode {mode!r}")
    prob = rsu_problem(real, config, m, _q_other(real, alloc, config, m, q_other))
    gu, gxi = _lagrangian_grad(prob, beta, xi, dual.as_array())
    return np.array([gu[0], gu[1], gxi])


def _printed_alpha_star(real, alpha, dual, config):
    p, th = config.p_max_w, config.sinr_threshold
    s = error_variance_first_slot(real, config)
    g = real.g_bs_rsu
    a1, a2 = alpha
    star1 = (
        p
        + dual.lambda1 * p
        + th * dual.psi2 * (g[1] * p + p * s[1])
        + dual.psi1 * (th * p * s[0] - g[0] * p)
        + dual.lambda2 * a2
    )
    star2 = (
        p
        + dual.lambda1 * p
        + th * p * dual.psi1 * s[0]
        + dual.psi2 * (th * p * s[1] - g[1] * p)
        + dual.lambda2 * a1
    )
    return np.array([star1, star2])


def _printed_beta_xi_star(real, beta, xi, dual, config, m):
    q, th = config.q_max_w, config.sinr_threshold
    s = error_variance_second_slot(real, config)[m]
    g, gb, gr = real.g_rsu_veh[m], real.g_bd_veh[m], real.g_rsu_bd[m]
    eta_sum = dual.eta1 + dual.eta2
    star1 = q * (1 - g[0] * dual.eta1 - xi * gb[0] * gr * dual.eta1 + th * eta_sum * s[0] + dual.mu)
    star2 = q * (1 - g[1] * dual.eta2 - xi * gb[1] * gr * dual.eta2 + th * eta_sum * s[1] + dual.mu)
    star_xi = (
        -beta[0] * gb[0] * gr * dual.eta1 * q
        - beta[1] * gb[1] * gr * dual.eta2 * q
        + th * eta_sum * math.sqrt(s.mean())
        + dual.upsilon
    )
    return np.array([star1, star2, star_xi])


# ---------------------------------------------------------------------------
# minimizers


def tight_point(prob: _Problem, xi: float = 0.0):
    """Allocation with both rate constraints met with equality, or None.

    With non-positive off-diagonals this is the component-wise smallest point
    satisfying the rate constraints; it exists iff the 2x2 system has a
    non-negative solution with positive determinant.
    """
    A, b = prob.rate_matrix(xi)
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if not (det > 0 and A[0, 0] > 0 and A[1, 1] > 0):
        return None
    u = np.array([A[1, 1] * b[0] - A[0, 1] * b[1], A[0, 0] * b[1] - A[1, 0] * b[0]]) / det
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        return None
    return u


def _within_budget(prob: _Problem, u, tol=0.0) -> bool:
    lin = prob.d - prob.E @ u
    return bool(np.all(lin >= -tol * prob.d) and np.all(u <= 1.0 + tol) and np.all(u >= 0))


def _normalized_residuals(prob: _Problem, u, xi, names) -> dict:
    A, b = prob.rate_matrix(xi)
    out = {}
    for j in range(2):
        raw = A[j] @ u - b[j]
        out[names[j]] = float(raw / b[j]) if b[j] > 0 else float(raw)
    lin = prob.d - prob.E @ u
    out[names[2]] = float(lin[0] / prob.d[0])
    out[names[3]] = float(lin[1] / prob.d[1])
    if len(names) > 4:
        out[names[4]] = float(1.0 - xi)
    out["box"] = float(min(np.min(u), np.min(1.0 - u), xi, 1.0 - xi))
    return out


@dataclass
class _Scaling:
    D: np.ndarray
    rs: np.ndarray
    fs: float
    xi_scale: float


def _scaling(prob: _Problem, xi_ref: float) -> _Scaling:
    A, b = prob.rate_matrix(xi_ref)
    rs = np.where(b > 0, b, 1.0)
    D = np.ones(2)
    for k in range(2):
        if A[k, k] > 0 and b[k] > 0:
            D[k] = min(b[k] / A[k, k], 1.0)
    fs = float(prob.c @ D)
    An1 = prob.A1 * D / rs[:, None]
    sens = np.sum(np.abs(An1.sum(axis=1))) + np.sum(np.abs(prob.b1 / rs))
    xi_scale = 1.0 / sens if sens > 1e-12 else 1.0
    return _Scaling(D=D, rs=rs, fs=fs, xi_scale=xi_scale)


def _run_rederived(prob: _Problem, cfg: SolverConfig, u0, xi0):
    sc = _scaling(prob, xi0)
    D, rs = sc.D, sc.rs
    A0n = prob.A0 * D / rs[:, None]
    A1n = prob.A1 * D / rs[:, None]
    b0n = prob.b0 / rs
    b1n = prob.b1 / rs
    cn = prob.c * D / sc.fs
    En = prob.E * D / prob.d[:, None]
    dn = np.ones(2)
    ub = 1.0 / D
    z0 = np.ones(2) if u0 is None else np.minimum(np.asarray(u0, dtype=float) / D, ub)
    mult0 = np.full(5, cfg.init_multiplier)
    z, xi, mult, iters, converged, best_z, best_xi, best_obj, trace = _kernel.primal_dual(
        A0n, A1n, b0n, b1n, cn, En, dn, ub, z0, float(xi0), prob.has_xi, sc.xi_scale, mult0,
        cfg.step0, SCHEDULES[cfg.schedule], cfg.max_iters, cfg.tol_obj, cfg.tol_feas,
        cfg.patience, cfg.record_trace, cfg.rho,
    )
    # multipliers back to raw units: L_raw = fs * L_scaled
    raw_mult = mult.copy()
    raw_mult[:2] *= sc.fs / rs
    raw_mult[2:4] *= sc.fs / prob.d
    raw_mult[4] *= sc.fs / sc.xi_scale if prob.has_xi else 0.0
    best = None if not np.isfinite(best_obj) else (best_z * D, best_xi)
    if trace.size:
        trace = trace.copy()
        trace[:, 0] *= sc.fs
    return z * D, xi, raw_mult, int(iters), bool(converged), best, trace


def _run_printed_bs(real, config, cfg: SolverConfig, prob: _Problem, u0):
    p, n, th = config.p_max_w, config.noise_w, config.sinr_threshold
    s = error_variance_first_slot(real, config)
    g = real.g_bs_rsu
    alpha = np.full(2, 0.25) if u0 is None else np.asarray(u0, dtype=float).copy()
    dual = DualStateBS(*([cfg.init_multiplier] * 4))
    return _printed_loop(
        cfg,
        prob,
        alpha,
        None,
        lambda a, _xi: (_printed_alpha_star(real, a, dual, config), 0.0),
        lambda a, _xi: _update_printed_bs(dual, a, g, p, s, n, th, config),
        dual,
    )


def _update_printed_bs(dual, a, g, p, s, n, th, config):
    def up(step):
        a1, a2 = a
        # alternative updates: noise enters with a + sign outside the bracket
        dual.psi1 = max(dual.psi1 - step * (g[0] * p * a1 - th * p * s[0] * (a1 + a2) + n), 0.0)
        dual.psi2 = max(
            dual.psi2 - step * (g[1] * p * a2 - th * (g[1] * p * a1 + p * s[1] * (a1 + a2)) + n),
            0.0,
        )
        dual.lambda1 = max(dual.lambda1 - step * (config.p_max_w - p * (a1 + a2)), 0.0)
        dual.lambda2 = max(dual.lambda2 - step * (1 - (a1 + a2)), 0.0)

    return up


def _run_printed_rsu(real, config, cfg: SolverConfig, prob: _Problem, m, u0, xi0):
    beta = np.full(2, 0.25) if u0 is None else np.asarray(u0, dtype=float).copy()
    dual = DualStateRSU(*([cfg.init_multiplier] * 5))

    def star(b, xi):
        out = _printed_beta_xi_star(real, b, xi, dual, config, m)
        return out[:2], (out[2] if prob.has_xi else 0.0)

    def make_update(b, xi):
        def up(step):
            A, rhs = prob.rate_matrix(xi)
            r = A @ b - rhs
            dual.eta1 = max(dual.eta1 - step * r[0], 0.0)
            dual.eta2 = max(dual.eta2 - step * r[1], 0.0)
            dual.mu = max(dual.mu - step * (config.q_max_w - config.q_max_w * b.sum()), 0.0)
            dual.zeta_sum = max(dual.zeta_sum - step * (1 - b.sum()), 0.0)
            dual.upsilon = max(dual.upsilon - step * (1 - xi), 0.0)

        return up

    return _printed_loop(cfg, prob, beta, xi0 if prob.has_xi else 0.0, star, make_update, dual)


def _printed_loop(cfg, prob, u, xi, star, make_update, dual):
    """Plain-Python iteration driven by the alternative closed-form primal rule."""
    xi = 0.0 if xi is None else float(xi)
    best = None
    best_obj = math.inf
    rows = []
    prev = math.nan
    calm = 0
    converged = False
    iters = 0
    sched = SCHEDULES[cfg.schedule]
    for it in range(1, cfg.max_iters + 1):
        iters = it
        step = cfg.step0 / math.sqrt(it) if sched == _kernel.SCHEDULE_INVERSE_SQRT else cfg.step0
        gu, gxi = star(u, xi)
        u = np.clip(u - step * gu, 0.0, 1.0)
        if prob.has_xi:
            xi = min(max(xi - step * gxi, 0.0), 1.0)
        make_update(u, xi)(step)
        obj = float(prob.c @ u)
        res = _normalized_residuals(prob, u, xi, ["r0", "r1", "l0", "l1", "x"])
        viol = max(0.0, -min(res.values()))
        if cfg.record_trace:
            rows.append((obj, viol, step, xi))
        if viol <= cfg.tol_feas and obj < best_obj:
            best_obj, best = obj, (u.copy(), xi)
        if it > 1 and abs(obj - prev) <= cfg.tol_obj * max(abs(obj), 1e-300) and viol <= cfg.tol_feas:
            calm += 1
            if calm >= cfg.patience:
                converged = True
                break
        else:
            calm = 0
        prev = obj
    trace = np.array(rows) if rows else np.empty((0, 4))
    return u, xi, dual, iters, converged, best, trace


def _finish(prob, cfg, names, u_last, xi_last, best, candidates_xi):
    """Pick the returned point: tight point (if restoring), else best feasible iterate."""
    sub_obj = float(prob.c @ u_last)
    if cfg.restore:
        found = None
        for xi in candidates_xi:
            u = tight_point(prob, xi)
            if u is not None and _within_budget(prob, u, tol=1e-12):
                if found is None or prob.c @ u < prob.c @ found[0]:
                    found = (u, xi)
        if found is not None:
            return found[0], found[1], True, sub_obj
    if best is not None:
        u, xi = best
        return u, xi, True, sub_obj
    return u_last, xi_last, False, sub_obj


BS_NAMES = ["rate_rsu0", "rate_rsu1", "bs_power", "alpha_sum"]
RSU_NAMES = ["rate_veh0", "rate_veh1", "rsu_power", "beta_sum", "xi_max"]


def min_bs_power(real: NetworkRealization, config: SystemConfig):
    """Closed-form minimum BS allocation, or None when the first-slot targets cannot be met."""
    prob = bs_problem(real, config)
    u = tight_point(prob)
    if u is None or not _within_budget(prob, u, tol=1e-12):
        return None
    return u


def solve_bs_power(
    real: NetworkRealization, config: SystemConfig, solver_cfg: SolverConfig | None = None
) -> Solution:
    cfg = solver_cfg or SolverConfig()
    prob = bs_problem(real, config)

    def package(u, feasible, iters, converged, sub_obj, dual, trace):
        alloc = PowerAllocation(np.asarray(u, dtype=float), np.zeros((2, 2)), np.zeros(2))
        res = _normalized_residuals(prob, np.asarray(u, dtype=float), 0.0, BS_NAMES)
        return Solution(
            alloc=alloc,
            feasible=feasible,
            objective_w=float(prob.c @ u),
            residuals=res,
            iters_used=iters,
            converged=converged,
            subgradient_objective_w=sub_obj,
            dual=dual,
            trace=trace,
        )

    # sub-gradient iterations cannot certify infeasibility; the tight point can
    if min_bs_power(real, config) is None:
        sol = package(np.zeros(2), False, 0, False, math.nan, None, None)
        raise Infeasible("first-slot rate targets unattainable within P_max", sol)

    u0 = None if cfg.init_alpha is None else np.full(2, cfg.init_alpha)
    if cfg.grad_mode == "rederived":
        u, _, mult, iters, converged, best, trace = _run_rederived(prob, cfg, u0, 0.0)
        dual = DualStateBS(*mult[:4])
    else:
        u, _, dual, iters, converged, best, trace = _run_printed_bs(real, config, cfg, prob, u0)
    u_fin, _, feasible, sub_obj = _finish(prob, cfg, BS_NAMES, u, 0.0, best, [0.0])
    sol = package(u_fin, feasible, iters, converged, sub_obj, dual, trace if trace.size else None)
    sol.feasible = feasible and sol.max_violation() <= cfg.tol_feas
    if not sol.feasible:
        raise Infeasible("no feasible BS allocation found", sol)
    if cfg.strict and not converged:
        raise NotConverged(f"BS sub-problem hit max_iters={cfg.max_iters}", sol)
    return sol


def solve_rsu_power(
    real: NetworkRealization,
    config: SystemConfig,
    solver_cfg: SolverConfig | None = None,
    m: int = 0,
    q_other: float | None = None,
    pin_xi: float | None = None,
) -> Solution:
    """Minimize RSU ``m`` transmit power over its split and reflection coefficient.

    ``q_other`` is the interfering power of the other RSU; by default the full
    budget. ``pin_xi`` fixes the reflection coefficient (0 gives conventional
    NOMA without backscatter).
    """
    cfg = solver_cfg or SolverConfig()
    if q_other is None:
        q_other = config.q_max_w
    has_xi = pin_xi is None
    prob = rsu_problem(real, config, m, q_other, has_xi=has_xi)
    xi0 = cfg.init_xi if has_xi else 0.0
    if not has_xi and pin_xi != 0.0:
        # pinned non-zero coefficient: fold it into the constant coefficients
        full = rsu_problem(real, config, m, q_other, has_xi=True)
        prob = dataclasses.replace(
            full,
            A0=full.A0 + pin_xi * full.A1,
            A1=np.zeros((2, 2)),
            b0=full.b0 + pin_xi * full.b1,
            b1=np.zeros(2),
            has_xi=False,
        )
    u0 = None if cfg.init_beta is None else np.full(2, cfg.init_beta)
    if cfg.grad_mode == "rederived":
        u, xi, mult, iters, converged, best, trace = _run_rederived(prob, cfg, u0, xi0)
        dual = DualStateRSU(*mult)
    else:
        u, xi, dual, iters, converged, best, trace = _run_printed_rsu(
            real, config, cfg, prob, m, u0, xi0
        )
    candidates = [xi] if best is None else [xi, best[1]]
    if has_xi:
        # the Lagrangian is linear in xi, so the box ends are always worth a check
        candidates += [0.0, 1.0]
    u_fin, xi_fin, feasible, sub_obj = _finish(prob, cfg, RSU_NAMES, u, xi, best, candidates)
    xi_report = float(xi_fin) if has_xi else float(pin_xi)

    beta = np.zeros((2, 2))
    beta[m] = u_fin
    xi_arr = np.zeros(2)
    xi_arr[m] = xi_report
    res = _normalized_residuals(prob, np.asarray(u_fin), float(xi_fin) if has_xi else 0.0, RSU_NAMES)
    if not has_xi:
        res["xi_max"] = 1.0 - xi_report
    sol = Solution(
        alloc=PowerAllocation(np.zeros(2), beta, xi_arr),
        feasible=False,
        objective_w=float(prob.c @ u_fin),
        residuals=res,
        iters_used=iters,
        converged=converged,
        subgradient_objective_w=sub_obj,
        dual=dual,
        trace=trace if trace.size else None,
    )
    sol.feasible = feasible and sol.max_violation() <= cfg.tol_feas
    if not sol.feasible:
        raise Infeasible(f"no feasible allocation found for RSU {m}", sol)
    if cfg.strict and not converged:
        raise NotConverged(f"RSU {m} sub-problem hit max_iters={cfg.max_iters}", sol)
    return sol


def _merge(sol_bs, sols_rsu) -> PowerAllocation:
    beta = np.zeros((2, 2))
    xi = np.zeros(2)
    for m, sol in enumerate(sols_rsu):
        beta[m] = sol.alloc.beta[m]
        xi[m] = sol.alloc.xi[m]
    return PowerAllocation(sol_bs.alloc.alpha.copy(), beta, xi)


def _solve_rsus(real, config, cfg, pin_xi):
    if config.cross_interference_mode == "full_budget":
        return [solve_rsu_power(real, config, cfg, m, config.q_max_w, pin_xi) for m in range(2)]
    # allocated: block-coordinate rounds, interference from the other RSU's current power
    used = np.full(2, config.q_max_w)
    sols = [None, None]
    for _ in range(max(cfg.max_rounds, 1)):
        prev = used.copy()
        for m in range(2):
            sols[m] = solve_rsu_power(real, config, cfg, m, used[1 - m], pin_xi)
            used[m] = sols[m].objective_w
        if np.all(np.abs(used - prev) <= 1e-9 * np.maximum(prev, 1e-300)):
            break
    return sols


def solve_full(
    real: NetworkRealization,
    config: SystemConfig,
    solver_cfg: SolverConfig | None = None,
    baseline: str = "bc_noma",
):
    """Solve both sub-problems and evaluate the combined allocation.

    Never raises on infeasibility: the returned metrics carry the flag.
    Returns ``(bs_solution, [rsu0_solution, rsu1_solution], metrics)`` with
    None in place of a sub-solution that could not be produced.
    """
    if baseline not in BASELINES:
        raise ValueError(f"baseline must be one of {BASELINES}")
    cfg = solver_cfg or SolverConfig()
    pin_xi = 0.0 if baseline == "conventional_noma" else None
    sol_bs = None
    sols_rsu = [None, None]
    failure = ""
    try:
        sol_bs = solve_bs_power(real, config, cfg)
    except SolverError as exc:
        failure = f"bs: {exc}"
        sol_bs = exc.solution
    try:
        sols_rsu = _solve_rsus(real, config, cfg, pin_xi)
    except SolverError as exc:
        failure = (failure + "; " if failure else "") + f"rsu: {exc}"

    feasible = (
        not failure
        and sol_bs is not None
        and sol_bs.feasible
        and all(s is not None and s.feasible for s in sols_rsu)
    )
    iters = sum(s.iters_used for s in [sol_bs, *sols_rsu] if s is not None)
    if not feasible:
        metrics = TrialMetrics(
            seed=real.seed,
            baseline=baseline,
            feasible=False,
            alloc=None,
            report=None,
            total_power_w=math.nan,
            sum_rate_bps=math.nan,
            ee_bits_per_joule=math.nan,
            est_interference_w=math.nan,
            objective_bs_w=math.nan if sol_bs is None else sol_bs.objective_w,
            objective_rsu_w=math.nan,
            min_slack=math.nan,
            iters=iters,
            failure=failure or "infeasible",
        )
        return sol_bs, sols_rsu, metrics

    alloc = _merge(sol_bs, sols_rsu)
    report = evaluate(real, alloc, config)
    slacks = [*sol_bs.residuals.values()]
    for s in sols_rsu:
        slacks.extend(s.residuals.values())
    metrics = TrialMetrics(
        seed=real.seed,
        baseline=baseline,
        feasible=True,
        alloc=alloc,
        report=report,
        total_power_w=report.total_power_w,
        sum_rate_bps=report.sum_rate_bps,
        ee_bits_per_joule=report.ee_bits_per_joule,
        est_interference_w=float(estimation_interference(alloc, config, real).total_w),
        objective_bs_w=sol_bs.objective_w,
        objective_rsu_w=sum(s.objective_w for s in sols_rsu),
        min_slack=float(min(slacks)),
        iters=iters,
    )
    return sol_bs, sols_rsu, metrics


def write_trace_csv(solution: Solution, path) -> None:
    """Dump an iteration trace as CSV: iter, objective_w, max_residual, step, xi."""
    import csv

    if solution.trace is None:
        raise ValueError("solution has no trace; solve with record_trace=True")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "objective_w", "max_residual", "step", "xi"])
        for i, row in enumerate(solution.trace, start=1):
            w.writerow([i, *(repr(float(v)) for v in row)])
