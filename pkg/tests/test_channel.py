import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcnoma import SystemConfig, draw_realization, make_realization
from bcnoma.channel import pathloss_gain, sample_topology

seeds = st.integers(0, 2**31 - 1)


def test_pathloss():
    assert pathloss_gain(2.0, 4) == pytest.approx(1 / 16)
    assert pathloss_gain(1.0, 3) == 1.0
    np.testing.assert_allclose(pathloss_gain([1, 10], 2), [1, 1e-2])
    with pytest.raises(ValueError):
        pathloss_gain(0.5, 4)


@given(seeds)
def test_same_seed_same_realization(seed):
    c = SystemConfig()
    a, b = draw_realization(c, seed), draw_realization(c, seed)
    for name in ("g_bs_rsu", "g_rsu_veh", "g_bd_veh", "g_rsu_bd", "g_cross"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_different_seeds_differ():
    c = SystemConfig()
    assert not np.array_equal(draw_realization(c, 1).g_rsu_veh, draw_realization(c, 2).g_rsu_veh)


@given(seeds)
def test_noma_ordering_and_positivity(seed):
    r = draw_realization(SystemConfig(), seed)
    assert r.g_bs_rsu[0] >= r.g_bs_rsu[1]
    assert np.all(r.g_rsu_veh[:, 0] >= r.g_rsu_veh[:, 1])
    for name in ("g_bs_rsu", "g_rsu_veh", "g_bd_veh", "g_rsu_bd", "g_cross"):
        assert np.all(getattr(r, name) > 0)


@given(seeds)
def test_placement_inside_disks(seed):
    c = SystemConfig()
    r = draw_realization(c, seed)
    t = r.topology
    assert np.all(np.linalg.norm(t.rsu_pos, axis=-1) <= c.bs_radius_m + 1e-9)
    assert np.all(t.d_rsu_veh <= c.rsu_radius_m + 1e-9)
    assert np.all(t.d_rsu_bd <= c.rsu_radius_m + 1e-9)
    assert np.all(t.d_bs_rsu >= 1.0)
    # gains carry the path loss of the distances stored next to them
    np.testing.assert_allclose(r.pl_bs_rsu, t.d_bs_rsu ** -c.pathloss_exp)
    np.testing.assert_allclose(r.pl_rsu_veh, t.d_rsu_veh ** -c.pathloss_exp)


@given(seeds, st.floats(2.0, 40.0))
def test_radius_scales_geometry(seed, radius):
    a = sample_topology(SystemConfig(rsu_radius_m=20.0), seed)
    b = sample_topology(SystemConfig(rsu_radius_m=radius), seed)
    np.testing.assert_allclose(a.rsu_pos, b.rsu_pos)
    np.testing.assert_allclose(
        (b.veh_pos - b.rsu_pos[:, None]) * 20.0, (a.veh_pos - a.rsu_pos[:, None]) * radius, atol=1e-9
    )


def test_power_and_sigma_do_not_touch_channels():
    a = draw_realization(SystemConfig(), 7)
    b = draw_realization(SystemConfig(total_power_budget_dbm=20, sigma_eps_sq=0.0), 7)
    np.testing.assert_array_equal(a.g_rsu_veh, b.g_rsu_veh)
    np.testing.assert_array_equal(a.g_cross, b.g_cross)


def test_fading_has_unit_mean():
    c = SystemConfig()
    ratios = [draw_realization(c, s) for s in range(3000)]
    # sorting changes per-slot means, the pooled mean is unaffected
    pooled = np.concatenate([(r.g_bs_rsu / r.pl_bs_rsu) for r in ratios])
    assert pooled.mean() == pytest.approx(1.0, abs=0.06)


def test_effective_gain_and_make_realization():
    r = make_realization([1e-6, 1e-7], [[2.0, 1.0], [3.0, 1.0]], g_bd_veh=[[1, 2], [3, 4]], g_rsu_bd=[10, 20])
    np.testing.assert_allclose(r.effective_gain([0.0, 0.0]), r.g_rsu_veh)
    np.testing.assert_allclose(r.effective_gain([0.5, 1.0]), [[7.0, 11.0], [63.0, 81.0]])
    assert np.all(r.g_cross == 0)
