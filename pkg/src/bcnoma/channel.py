"""Topology placement and Rayleigh-faded channel power gains.

Arrays are 0-indexed: RSU ``m`` in {0, 1}, vehicle ``i`` in {0, 1}. After
sorting, index 0 is always the stronger link (the SIC-capable receiver).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig

MIN_DISTANCE_M = 1.0

# independent RNG streams derived from one integer seed
_TOPOLOGY_STREAM = 0
_FADING_STREAM = 1


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


@dataclass(frozen=True)
class Topology:
    rsu_pos: np.ndarray  # (2, 2) xy, BS at origin
    veh_pos: np.ndarray  # (2, 2, 2) [m, i, xy]
    bd_pos: np.ndarray  # (2, 2) one backscatter device per RSU
    d_bs_rsu: np.ndarray  # (2,)
    d_rsu_veh: np.ndarray  # (2, 2)
    d_bd_veh: np.ndarray  # (2, 2)
    d_rsu_bd: np.ndarray  # (2,)
    d_cross: np.ndarray  # (2, 2) other RSU -> vehicle i of RSU m


@dataclass(frozen=True)
class NetworkRealization:
    """Estimated channel power gains |h|^2 of every link.

    ``pl_*`` hold the large-scale path-loss gains of the first-slot and the
    RSU-vehicle links; the relative CSI-error model scales the estimation
    error variance by them.
    """

    g_bs_rsu: np.ndarray  # (2,)
    g_rsu_veh: np.ndarray  # (2, 2)
    g_bd_veh: np.ndarray  # (2, 2)
    g_rsu_bd: np.ndarray  # (2,)
    g_cross: np.ndarray  # (2, 2)
    pl_bs_rsu: np.ndarray = field(default_factory=lambda: np.ones(2))
    pl_rsu_veh: np.ndarray = field(default_factory=lambda: np.ones((2, 2)))
    seed: int | None = None
    topology: Topology | None = None

    def effective_gain(self, xi) -> np.ndarray:
        """Direct plus backscatter gain, shape (2, 2); ``xi`` has shape (2,)."""
        xi = np.asarray(xi, dtype=float)
        return self.g_rsu_veh + xi[:, None] * self.g_bd_veh * self.g_rsu_bd[:, None]


def pathloss_gain(d, zeta):
    """Large-scale power gain ``d**-zeta`` for distances of at least 1 m."""
    d = np.asarray(d, dtype=float)
    if np.any(d < MIN_DISTANCE_M):
        raise ValueError(f"distance below {MIN_DISTANCE_M} m reached the path-loss model")
    out = d ** (-float(zeta))
    return float(out) if out.ndim == 0 else out


def _uniform_disk(rng: np.random.Generator, shape, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(shape))
    phi = 2.0 * np.pi * rng.random(shape)
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)


def _dist(a, b) -> np.ndarray:
    return np.maximum(np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1), MIN_DISTANCE_M)


def sample_topology(config: SystemConfig, seed: int) -> Topology:
    """Uniform placement: RSUs in the BS disk, vehicles and BDs in their RSU disk.

    Positions are radius * (unit-disk draw), so two configs differing only in
    radii see the same scaled geometry for one seed.
    """
    rng = _rng(seed, _TOPOLOGY_STREAM)
    rsu = _uniform_disk(rng, (2,), config.bs_radius_m)
    veh = rsu[:, None, :] + _uniform_disk(rng, (2, 2), config.rsu_radius_m)
    bd = rsu + _uniform_disk(rng, (2,), config.rsu_radius_m)
    return Topology(
        rsu_pos=rsu,
        veh_pos=veh,
        bd_pos=bd,
        d_bs_rsu=_dist(rsu, 0.0),
        d_rsu_veh=_dist(veh, rsu[:, None, :]),
        d_bd_veh=_dist(veh, bd[:, None, :]),
        d_rsu_bd=_dist(bd, rsu),
        d_cross=_dist(veh, rsu[::-1][:, None, :]),
    )


def _permute_topology(topo: Topology, rsu_order, veh_order) -> Topology:
    m = rsu_order[:, None]
    return Topology(
        rsu_pos=topo.rsu_pos[rsu_order],
        veh_pos=topo.veh_pos[rsu_order][np.arange(2)[:, None], veh_order],
        bd_pos=topo.bd_pos[rsu_order],
        d_bs_rsu=topo.d_bs_rsu[rsu_order],
        d_rsu_veh=topo.d_rsu_veh[m, veh_order],
        d_bd_veh=topo.d_bd_veh[m, veh_order],
        d_rsu_bd=topo.d_rsu_bd[rsu_order],
        d_cross=topo.d_cross[m, veh_order],
    )


def sample_channels(topo: Topology, config: SystemConfig, seed: int) -> NetworkRealization:
    """Exponential (unit-mean) fading times path loss, then NOMA ordering.

    RSUs are relabelled so the BS-RSU gain of RSU 0 is the larger, and within
    each RSU the vehicles so that vehicle 0 has the larger RSU-vehicle gain.
    Relabelling moves every quantity attached to a node, so the multiset of
    gains is unchanged.
    """
    rng = _rng(seed, _FADING_STREAM)
    zeta = config.pathloss_exp
    pl_bs_rsu = pathloss_gain(topo.d_bs_rsu, zeta)
    pl_rsu_veh = pathloss_gain(topo.d_rsu_veh, zeta)
    g_bs_rsu = rng.exponential(size=2) * pl_bs_rsu
    g_rsu_veh = rng.exponential(size=(2, 2)) * pl_rsu_veh
    g_bd_veh = rng.exponential(size=(2, 2)) * pathloss_gain(topo.d_bd_veh, zeta)
    g_rsu_bd = rng.exponential(size=2) * pathloss_gain(topo.d_rsu_bd, zeta)
    g_cross = rng.exponential(size=(2, 2)) * pathloss_gain(topo.d_cross, zeta)

    rsu_order = np.argsort(-g_bs_rsu, kind="stable")
    m = rsu_order[:, None]
    veh_order = np.argsort(-g_rsu_veh[rsu_order], axis=1, kind="stable")

    return NetworkRealization(
        g_bs_rsu=g_bs_rsu[rsu_order],
        g_rsu_veh=g_rsu_veh[m, veh_order],
        g_bd_veh=g_bd_veh[m, veh_order],
        g_rsu_bd=g_rsu_bd[rsu_order],
        g_cross=g_cross[m, veh_order],
        pl_bs_rsu=pl_bs_rsu[rsu_order],
        pl_rsu_veh=pl_rsu_veh[m, veh_order],
        seed=int(seed),
        topology=_permute_topology(topo, rsu_order, veh_order),
    )


def draw_realization(config: SystemConfig, seed: int) -> NetworkRealization:
    """Topology and channels for one Monte-Carlo trial."""
    return sample_channels(sample_topology(config, seed), config, seed)


def make_realization(
    g_bs_rsu, g_rsu_veh, g_bd_veh=None, g_rsu_bd=None, g_cross=None, **kw
) -> NetworkRealization:
    """Hand-built realization (tests, worked examples). Missing links are zero."""
    z22 = np.zeros((2, 2))
    return NetworkRealization(
        g_bs_rsu=np.asarray(g_bs_rsu, dtype=float),
        g_rsu_veh=np.asarray(g_rsu_veh, dtype=float),
        g_bd_veh=z22 if g_bd_veh is None else np.asarray(g_bd_veh, dtype=float),
        g_rsu_bd=np.zeros(2) if g_rsu_bd is None else np.asarray(g_rsu_bd, dtype=float),
        g_cross=z22 if g_cross is None else np.asarray(g_cross, dtype=float),
        **kw,
    )
