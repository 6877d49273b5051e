"""SINR, rate, power and energy-efficiency evaluation.

Every function here is pure and broadcasts over leading batch dimensions of
the allocation arrays, which is what the grid-search oracle relies on.
Rates are normalized (bits/s/Hz); the bandwidth only enters the sum rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import NetworkRealization
from .config import SystemConfig


@dataclass(frozen=True)
class PowerAllocation:
    alpha: np.ndarray  # (..., 2) BS power split between the two RSUs
    beta: np.ndarray  # (..., 2, 2) [m, i] RSU power split between its vehicles
    xi: np.ndarray  # (..., 2) reflection coefficient of the BD near RSU m

    def __post_init__(self):
        for name in ("alpha", "beta", "xi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @classmethod
    def zeros(cls) -> "PowerAllocation":
        return cls(np.zeros(2), np.zeros((2, 2)), np.zeros(2))

    def violations(self, tol: float = 1e-12) -> list[str]:
        out = []
        for name in ("alpha", "beta", "xi"):
            arr = getattr(self, name)
            if np.any(arr < -tol) or np.any(arr > 1 + tol):
                out.append(f"{name} outside [0, 1]")
        if np.any(self.alpha.sum(axis=-1) > 1 + tol):
            out.append("sum of alpha exceeds 1")
        if np.any(self.beta.sum(axis=-1) > 1 + tol):
            out.append("sum of beta exceeds 1 for some RSU")
        return out

    def is_valid(self, tol: float = 1e-12) -> bool:
        return not self.violations(tol)


@dataclass(frozen=True)
class RateReport:
    gamma_rsu: np.ndarray  # (2,)
    gamma_veh: np.ndarray  # (2, 2)
    c_rsu: np.ndarray  # (2,) bits/s/Hz
    c_veh: np.ndarray  # (2, 2) bits/s/Hz
    e2e_rate: np.ndarray  # (2, 2) bits/s/Hz
    sum_rate_bps: float
    total_power_w: float
    ee_bits_per_joule: float

    def as_dict(self) -> dict:
        return {
            k: (v.tolist() if isinstance(v, np.ndarray) else float(v))
            for k, v in self.__dict__.items()
        }


def error_variance_first_slot(real: NetworkRealization, config: SystemConfig) -> np.ndarray:
    """Estimation-error variance on the BS->RSU links, shape (2,)."""
    if config.csi_error_model == "relative":
        return config.sigma_eps_sq * np.asarray(real.pl_bs_rsu, dtype=float)
    return np.full(2, config.sigma_eps_sq)


def error_variance_second_slot(real: NetworkRealization, config: SystemConfig) -> np.ndarray:
    """Estimation-error variance on the RSU->vehicle links, shape (2, 2)."""
    if config.csi_error_model == "relative":
        return config.sigma_eps_sq * np.asarray(real.pl_rsu_veh, dtype=float)
    return np.full((2, 2), config.sigma_eps_sq)


def sinr_first_slot(real: NetworkRealization, alloc: PowerAllocation, config: SystemConfig):
    """SINRs of RSU 0 (after SIC) and RSU 1 (treats RSU 0's signal as noise)."""
    p = config.p_max_w
    n = config.noise_w
    s = error_variance_first_slot(real, config)
    g = real.g_bs_rsu
    a1, a2 = alloc.alpha[..., 0], alloc.alpha[..., 1]
    gamma1 = g[0] * p * a1 / (p * s[0] * (a1 + a2) + n)
    gamma2 = g[1] * p * a2 / (g[1] * p * a1 + p * s[1] * (a1 + a2) + n)
    return np.stack([gamma1, gamma2], axis=-1)


def cross_interference_power(
    alloc: PowerAllocation, config: SystemConfig, mode: str | None = None
) -> np.ndarray:
    """Transmit power Q_{m'} of the *other* RSU as seen by RSU m's vehicles, (..., 2)."""
    mode = mode or config.cross_interference_mode
    q = config.q_max_w
    if mode == "full_budget":
        return np.full(alloc.beta.shape[:-1], q)
    if mode == "allocated":
        used = q * alloc.beta.sum(axis=-1)
        return used[..., ::-1]
    raise ValueError(f"unknown cross_interference_mode {mode!r}")


def sinr_second_slot_rsu(real, config, m, beta1, beta2, xi, q_other):
    """SINRs of the two vehicles served by RSU ``m``; arguments broadcast."""
    q = config.q_max_w
    n = config.noise_w
    s = error_variance_second_slot(real, config)[m]
    cascade = real.g_bd_veh[m] * real.g_rsu_bd[m]
    gain1 = real.g_rsu_veh[m, 0] + xi * cascade[0]
    gain2 = real.g_rsu_veh[m, 1] + xi * cascade[1]
    load = q * (beta1 + beta2) + xi
    gamma1 = q * beta1 * gain1 / (s[0] * load + real.g_cross[m, 0] * q_other + n)
    noma = q * beta1 * gain2
    gamma2 = q * beta2 * gain2 / (noma + s[1] * load + real.g_cross[m, 1] * q_other + n)
    return gamma1, gamma2


def sinr_second_slot(
    real: NetworkRealization,
    alloc: PowerAllocation,
    config: SystemConfig,
    cross_interference_mode: str | None = None,
):
    """Vehicle SINRs, shape (..., 2, 2) indexed [m, i]."""
    q_other = cross_interference_power(alloc, config, cross_interference_mode)
    rows = []
    for m in range(2):
        rows.append(
            np.stack(
                sinr_second_slot_rsu(
                    real,
                    config,
                    m,
                    alloc.beta[..., m, 0],
                    alloc.beta[..., m, 1],
                    alloc.xi[..., m],
                    q_other[..., m],
                ),
                axis=-1,
            )
        )
    return np.stack(rows, axis=-2)


def rate(gamma, t=0.5):
    return t * np.log2(1.0 + np.asarray(gamma, dtype=float))


def end_to_end_and_sum(rates_rsu, rates_veh, config: SystemConfig):
    """Decode-and-forward rate per vehicle and the network sum rate in bit/s."""
    rates_rsu = np.asarray(rates_rsu, dtype=float)
    rates_veh = np.asarray(rates_veh, dtype=float)
    e2e = 0.5 * np.minimum(rates_rsu[..., :, None], rates_veh)
    sum_bps = config.bandwidth_hz * e2e.sum(axis=(-1, -2))
    return e2e, sum_bps


def total_power(alloc: PowerAllocation, config: SystemConfig):
    """Transmit power of BS and RSUs plus circuit power, in watts."""
    tx = config.p_max_w * alloc.alpha.sum(axis=-1)
    tx = tx + config.q_max_w * alloc.beta.sum(axis=(-1, -2))
    return tx + config.circuit_w


def sum_rate(real, alloc, config, cross_interference_mode=None):
    c_rsu = rate(sinr_first_slot(real, alloc, config), config.t1)
    c_veh = rate(sinr_second_slot(real, alloc, config, cross_interference_mode), config.t2)
    return end_to_end_and_sum(c_rsu, c_veh, config)[1]


def energy_efficiency(real, alloc, config, cross_interference_mode=None):
    """Sum rate over total consumed power, bits/joule."""
    return sum_rate(real, alloc, config, cross_interference_mode) / total_power(alloc, config)


@dataclass(frozen=True)
class EstimationInterference:
    first_slot_w: np.ndarray  # (..., 2) per BS->RSU link
    second_slot_w: np.ndarray  # (..., 2, 2) per RSU->vehicle link
    total_w: np.ndarray | float


def estimation_interference(
    alloc: PowerAllocation, config: SystemConfig, real: NetworkRealization | None = None
) -> EstimationInterference:
    """Interference power caused by channel-estimation error on every link.

    Without a realization the error variance is taken as-is on every link
    (the absolute model), which needs no channel knowledge.
    """
    if real is None or config.csi_error_model == "absolute":
        s1 = np.full(2, config.sigma_eps_sq)
        s2 = np.full((2, 2), config.sigma_eps_sq)
    else:
        s1 = error_variance_first_slot(real, config)
        s2 = error_variance_second_slot(real, config)
    first = config.p_max_w * alloc.alpha.sum(axis=-1)[..., None] * s1
    load = config.q_max_w * alloc.beta.sum(axis=-1) + alloc.xi
    second = load[..., :, None] * s2
    total = first.sum(axis=-1) + second.sum(axis=(-1, -2))
    return EstimationInterference(first, second, total)


def evaluate(
    real: NetworkRealization,
    alloc: PowerAllocation,
    config: SystemConfig,
    cross_interference_mode: str | None = None,
) -> RateReport:
    gamma_rsu = sinr_first_slot(real, alloc, config)
    gamma_veh = sinr_second_slot(real, alloc, config, cross_interference_mode)
    c_rsu = rate(gamma_rsu, config.t1)
    c_veh = rate(gamma_veh, config.t2)
    e2e, sum_bps = end_to_end_and_sum(c_rsu, c_veh, config)
    power = total_power(alloc, config)
    return RateReport(
        gamma_rsu=gamma_rsu,
        gamma_veh=gamma_veh,
        c_rsu=c_rsu,
        c_veh=c_veh,
        e2e_rate=e2e,
        sum_rate_bps=float(sum_bps),
        total_power_w=float(power),
        ee_bits_per_joule=float(sum_bps / power),
    )
