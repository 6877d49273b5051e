"""Hand-computed reference values, checked by direct substitution."""

import math

import numpy as np
import pytest

from bcnoma import (
    Infeasible,
    PowerAllocation,
    SystemConfig,
    draw_realization,
    make_realization,
    solve_bs_power,
    solve_full,
    solve_rsu_power,
)
from bcnoma.channel import Topology, pathloss_gain, sample_channels
from bcnoma.experiments import Sweep, count_inversions, run_sweep
from bcnoma.oracle import grid_search_bs, grid_search_rsu
from bcnoma.rates import (
    end_to_end_and_sum,
    estimation_interference,
    evaluate,
    sinr_first_slot,
    sinr_second_slot_rsu,
    total_power,
)
from bcnoma.solver import DualStateBS, DualStateRSU, grad_alpha, grad_beta_xi


def scenario(p_max_w=None, q_max_w=None, noise_w=1.0, **kw):
    """Config with round P, Q and noise; the budget is split evenly so Q = P/2."""
    total = 2 * p_max_w if p_max_w is not None else 4 * q_max_w
    return SystemConfig(
        total_power_budget_dbm=10 * math.log10(total * 1e3),
        noise_density_dbm_per_hz=10 * math.log10(noise_w * 1e3) - 60,
        bandwidth_hz=1e6,
        csi_error_model="absolute",
        **kw,
    )


def test_rsus_inside_bs_disk():
    t = draw_realization(SystemConfig(bs_radius_m=50, rsu_radius_m=20), 7).topology
    assert np.all(t.d_bs_rsu <= 50)


def test_pathloss_at_ten_metres():
    assert pathloss_gain(10, 4) == pytest.approx(1e-4)


def test_unit_mean_fading_at_one_metre():
    ones = np.ones((2, 2))
    topo = Topology(np.zeros((2, 2)), np.zeros((2, 2, 2)), np.zeros((2, 2)), np.ones(2), ones, ones, np.ones(2), ones)
    draws = []
    for seed in range(8334):  # 12 gains per draw -> 1e5 samples
        r = sample_channels(topo, SystemConfig(), seed)
        draws.append(np.concatenate([r.g_bs_rsu, r.g_rsu_veh.ravel(), r.g_bd_veh.ravel(), r.g_rsu_bd, r.g_cross.ravel()]))
    assert np.mean(draws) == pytest.approx(1.0, rel=0.02)


def test_first_slot_weak_rsu_sinr():
    c = scenario(p_max_w=10.0, sigma_eps_sq=0.01)
    real = make_realization([5.0, 1.0], np.ones((2, 2)))
    g = sinr_first_slot(real, PowerAllocation([0.3, 0.5], np.zeros((2, 2)), np.zeros(2)), c)
    assert g[1] == pytest.approx(5 / (3 + 0.08 + 1), rel=1e-9)
    assert g[1] == pytest.approx(1.2255, abs=1e-4)


def test_second_slot_weak_vehicle_sinr_with_backscatter():
    c = scenario(q_max_w=10.0, sigma_eps_sq=0.0)
    real = make_realization([1, 1], [[1.0, 0.5], [1, 1]], g_bd_veh=[[0.3, 0.2], [0, 0]], g_rsu_bd=[0.5, 0])
    assert real.effective_gain([0.4, 0.0])[0, 1] == pytest.approx(0.54)
    _, g2 = sinr_second_slot_rsu(real, c, 0, 0.3, 0.4, 0.4, 0.0)
    assert g2 == pytest.approx(2.16 / 2.62, rel=1e-9)
    assert g2 == pytest.approx(0.8244, abs=1e-4)


def test_sum_rate_by_hand():
    _, total = end_to_end_and_sum([1.0, 1.0], np.ones((2, 2)), SystemConfig(bandwidth_hz=1e6))
    assert total == pytest.approx(2e6)


def test_total_power_with_circuit():
    c = scenario(p_max_w=1.0, sigma_eps_sq=0.0)
    p = total_power(PowerAllocation([0.5, 0.5], np.zeros((2, 2)), np.zeros(2)), c)
    assert p == pytest.approx(1.00316, abs=1e-5)


def test_first_slot_error_term():
    c = scenario(p_max_w=10.0, sigma_eps_sq=0.01)
    e = estimation_interference(PowerAllocation([0.4, 0.6], np.zeros((2, 2)), np.zeros(2)), c)
    np.testing.assert_allclose(e.first_slot_w, [0.1, 0.1])


def test_reference_instance_energy_efficiency():
    c = SystemConfig()
    real = draw_realization(c, 42)
    metrics = solve_full(real, c)[2]
    bs = grid_search_bs(real, c)
    rsu = [grid_search_rsu(real, c, m=m) for m in range(2)]
    alloc = PowerAllocation(bs.alpha, np.array([r.beta for r in rsu]), np.array([r.xi for r in rsu]))
    assert metrics.ee_bits_per_joule == pytest.approx(evaluate(real, alloc, c).ee_bits_per_joule, rel=1e-4)


def test_gradient_single_rate_multiplier():
    c = SystemConfig(sigma_eps_sq=0.0)
    real = draw_realization(c, 3)
    g = grad_alpha(real, PowerAllocation([0.2, 0.1], np.zeros((2, 2)), np.zeros(2)), DualStateBS(0.7, 0, 0, 0), c)
    p = c.p_max_w
    assert g[0] == pytest.approx(p - 0.7 * real.g_bs_rsu[0] * p, rel=1e-12)


def test_binding_first_rate_constraint():
    c = SystemConfig(sigma_eps_sq=0.0)
    real = draw_realization(c, 3)
    a1 = solve_bs_power(real, c).alloc.alpha[0]
    assert real.g_bs_rsu[0] * c.p_max_w * a1 == pytest.approx(c.sinr_threshold * c.noise_w, rel=1e-6)


def test_xi_bound_multiplier_sign():
    c = SystemConfig()
    real = draw_realization(c, 3)
    alloc = PowerAllocation(np.zeros(2), [[0.2, 0.3], [0, 0]], [0.6, 0])
    g = grad_beta_xi(real, alloc, DualStateRSU(0, 0, 0, 0, 0.8), c, 0, q_other=c.q_max_w)
    # L = ... - upsilon * (1 - xi): descending it lowers xi, away from the bound
    assert g[2] == pytest.approx(0.8)


def test_backscatter_never_needs_more_power():
    c = SystemConfig()
    for seed in range(50):
        real = draw_realization(c, seed)
        for m in range(2):
            try:
                off = solve_rsu_power(real, c, m=m, pin_xi=0.0).objective_w
            except Infeasible:
                continue
            assert solve_rsu_power(real, c, m=m).objective_w <= off * (1 + 1e-12)


def test_budget_below_noise_floor_is_infeasible():
    c = SystemConfig(total_power_budget_dbm=-100.0)
    with pytest.raises(Infeasible):
        solve_bs_power(draw_realization(c, 0), c)


def test_csi_error_sweep_two_thousandths():
    rows = run_sweep(Sweep("sigma_eps", (0.0, 0.002, 0.004, 0.006, 0.008, 0.01), trials=500))
    for b in ("bc_noma", "conventional_noma"):
        n, worst = count_inversions([r.ee(b) for r in rows])
        assert n == 0 or (n == 1 and worst <= 0.01)
    assert all(r.ee("bc_noma") > r.ee("conventional_noma") for r in rows)
