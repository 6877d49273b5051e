"""System parameters and the flat ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

CROSS_INTERFERENCE_MODES = ("full_budget", "allocated")
CSI_ERROR_MODELS = ("absolute", "relative")


class ConfigError(ValueError):
    """Invalid parameter value or malformed config file."""


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of one simulated network (defaults are the reference scenario).

    ``sigma_eps_sq`` is the channel-estimation error variance. Under the
    ``absolute`` error model it is added as-is to every link, under the
    ``relative`` model it is a fraction of each link's large-scale gain.
    """

    total_power_budget_dbm: float = 45.0
    bs_budget_fraction: float = 0.5
    bandwidth_hz: float = 1e6
    noise_density_dbm_per_hz: float = -170.0
    sigma_eps_sq: float = 0.005 ** 2
    c_min: float = 0.5
    pathloss_exp: float = 4.0
    bs_radius_m: float = 50.0
    rsu_radius_m: float = 20.0
    circuit_power_dbm: float = 5.0
    t1: float = 0.5
    t2: float = 0.5
    num_rsus: int = 2
    vehicles_per_rsu: int = 2
    cross_interference_mode: str = "full_budget"
    csi_error_model: str = "relative"

    def __post_init__(self):
        if not 0.0 < self.bs_budget_fraction <= 1.0:
            raise ConfigError("bs_budget_fraction must lie in (0, 1]")
        if self.t1 != 0.5 or self.t2 != 0.5:
            raise ConfigError("t1 and t2 are fixed at 0.5")
        if self.sigma_eps_sq < 0:
            raise ConfigError("sigma_eps_sq must be >= 0")
        if self.pathloss_exp <= 0:
            raise ConfigError("pathloss_exp must be > 0")
        if self.c_min < 0:
            raise ConfigError("c_min must be >= 0")
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be > 0")
        if self.bs_radius_m <= 0 or self.rsu_radius_m <= 0:
            raise ConfigError("radii must be > 0")
        if self.num_rsus != 2 or self.vehicles_per_rsu != 2:
            raise ConfigError("only 2 RSUs with 2 vehicles each are supported")
        if self.cross_interference_mode not in CROSS_INTERFERENCE_MODES:
            raise ConfigError(
                f"cross_interference_mode must be one of {CROSS_INTERFERENCE_MODES}"
            )
        if self.csi_error_model not in CSI_ERROR_MODELS:
            raise ConfigError(f"csi_error_model must be one of {CSI_ERROR_MODELS}")
        for name in ("p_max_w", "q_max_w", "noise_w", "circuit_w"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"derived quantity {name} must be > 0, got {value}")

    @property
    def total_budget_w(self) -> float:
        return dbm_to_watt(self.total_power_budget_dbm)

    @property
    def p_max_w(self) -> float:
        """BS power budget (also the nominal BS transmit power P)."""
        return self.bs_budget_fraction * self.total_budget_w

    @property
    def q_max_w(self) -> float:
        """Per-RSU power budget (also the nominal RSU transmit power Q_m)."""
        return (1.0 - self.bs_budget_fraction) * self.total_budget_w / self.num_rsus

    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_density_dbm_per_hz) * self.bandwidth_hz

    @property
    def circuit_w(self) -> float:
        return dbm_to_watt(self.circuit_power_dbm)

    @property
    def sinr_threshold(self) -> float:
        """SINR needed to reach ``c_min`` bits/s/Hz, i.e. 2**c_min - 1."""
        return 2.0 ** self.c_min - 1.0

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


REQUIRED_KEYS = ("total_power_budget_dbm", "sigma_eps_sq", "c_min")


def _coerce(name: str, raw: str, kind: Any, lineno: int):
    try:
        if kind is int or kind == "int":
            return int(raw)
        if kind is float or kind == "float":
            return float(raw)
        if raw[:1] in "\"'" and raw[-1:] == raw[:1] and len(raw) >= 2:
            return raw[1:-1]
        return raw
    except ValueError:
        raise ConfigError(f"line {lineno}: field '{name}': cannot parse {raw!r}") from None


def parse_config(text: str, source: str = "<string>") -> SystemConfig:
    """Parse flat ``key = value`` text strictly.

    Blank lines and ``#`` comments are ignored. Unknown or duplicated keys are
    fatal, as is a missing required key.
    """
    types = {f.name: f.type for f in fields(SystemConfig)}
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"{source}:{lineno}: unknown field '{key}'")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate field '{key}'")
        if not raw:
            raise ConfigError(f"{source}:{lineno}: field '{key}' has no value")
        values[key] = _coerce(key, raw, types[key], lineno)
    for key in REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"{source}: missing required field '{key}'")
    return SystemConfig(**values)


def load_config(path) -> SystemConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))


def format_config(config: SystemConfig) -> str:
    lines = []
    for f in fields(SystemConfig):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {value!r}" if isinstance(value, str) else f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
