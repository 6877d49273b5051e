import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcnoma import (
    Infeasible,
    NotConverged,
    PowerAllocation,
    SolverConfig,
    SystemConfig,
    draw_realization,
    make_realization,
    solve_bs_power,
    solve_full,
    solve_rsu_power,
)
from bcnoma.solver import (
    DualStateBS,
    DualStateRSU,
    bs_residuals,
    grad_alpha,
    grad_beta_xi,
    lagrangian_bs,
    lagrangian_rsu,
    min_bs_power,
    rsu_residuals,
    write_trace_csv,
)

unit = st.floats(0.0, 1.0)
mult = st.floats(0.0, 2.0)
seeds = st.integers(0, 100_000)


def fd(f, x, h=1e-6):
    out = np.empty(len(x))
    for k in range(len(x)):
        e = np.zeros(len(x))
        e[k] = h
        out[k] = (f(x + e) - f(x - e)) / (2 * h)
    return out


@given(seeds, unit, unit, st.lists(mult, min_size=4, max_size=4))
def test_grad_alpha_matches_finite_differences(seed, a1, a2, m):
    c = SystemConfig()
    real = draw_realization(c, seed)
    dual = DualStateBS(*m)
    alloc = PowerAllocation([a1, a2], np.zeros((2, 2)), np.zeros(2))
    g = grad_alpha(real, alloc, dual, c)
    num = fd(lambda a: lagrangian_bs(real, PowerAllocation(a, np.zeros((2, 2)), np.zeros(2)), dual, c), np.array([a1, a2]))
    assert np.linalg.norm(g - num) <= 1e-6 * np.linalg.norm(g)


@given(seeds, st.integers(0, 1), unit, unit, unit, st.lists(mult, min_size=5, max_size=5))
def test_grad_beta_xi_matches_finite_differences(seed, m, b1, b2, xi, mu):
    c = SystemConfig()
    real = draw_realization(c, seed)
    dual = DualStateRSU(*mu)

    def alloc_of(v):
        beta = np.zeros((2, 2))
        beta[m] = v[:2]
        x = np.zeros(2)
        x[m] = v[2]
        return PowerAllocation(np.zeros(2), beta, x)

    v0 = np.array([b1, b2, xi])
    g = grad_beta_xi(real, alloc_of(v0), dual, c, m, q_other=c.q_max_w)
    num = fd(lambda v: lagrangian_rsu(real, alloc_of(v), dual, c, m, c.q_max_w), v0)
    assert np.linalg.norm(g - num) <= 1e-6 * np.linalg.norm(g)


def test_printed_gradient_differs_from_rederived(config, realizations):
    # the alternative rule carries lambda_2 * alpha cross terms
    dual = DualStateBS(0.1, 0.1, 0.1, 0.5)
    alloc = PowerAllocation([0.2, 0.4], np.zeros((2, 2)), np.zeros(2))
    g_r = grad_alpha(realizations[0], alloc, dual, config)
    g_p = grad_alpha(realizations[0], alloc, dual, config, "as_printed")
    assert not np.allclose(g_r, g_p)
    with pytest.raises(ValueError):
        grad_alpha(realizations[0], alloc, dual, config, "other")


def no_error(**kw):
    return SystemConfig(sigma_eps_sq=0.0, **kw)


def test_bs_closed_form_without_error():
    c = no_error()
    g = np.array([2e-6, 5e-7])
    real = make_realization(g, [[1e-5, 1e-6], [1e-5, 1e-6]])
    th, p, n = c.sinr_threshold, c.p_max_w, c.noise_w
    a1 = th * n / (g[0] * p)
    a2 = th * (g[1] * p * a1 + n) / (g[1] * p)
    sol = solve_bs_power(real, c)
    np.testing.assert_allclose(sol.alloc.alpha, [a1, a2], rtol=1e-9)
    assert sol.objective_w == pytest.approx(p * (a1 + a2), rel=1e-9)
    assert sol.residuals["rate_rsu0"] == pytest.approx(0, abs=1e-9)


def test_rsu_closed_form_without_backscatter_or_cross_link():
    c = no_error()
    ga, gb = 3e-6, 1e-6
    real = make_realization([1e-5, 1e-6], [[ga, gb], [ga, gb]])
    th, q, n = c.sinr_threshold, c.q_max_w, c.noise_w
    b1 = th * n / (q * ga)
    b2 = th * (q * b1 * gb + n) / (q * gb)
    sol = solve_rsu_power(real, c, m=0, pin_xi=0.0)
    np.testing.assert_allclose(sol.alloc.beta[0], [b1, b2], rtol=1e-9)
    # a backscatter path only adds gain here (no error term), so xi goes to 1
    real_bd = make_realization([1e-5, 1e-6], [[ga, gb], [ga, gb]], g_bd_veh=[[1e-2, 1e-2]] * 2, g_rsu_bd=[1e-3, 1e-3])
    free = solve_rsu_power(real_bd, c, m=0)
    assert free.alloc.xi[0] == 1.0
    assert free.objective_w < sol.objective_w


def test_infeasible_detection():
    c = SystemConfig(c_min=12.0)
    real = draw_realization(c, 1)
    assert min_bs_power(real, c) is None
    with pytest.raises(Infeasible) as exc:
        solve_bs_power(real, c)
    assert exc.value.solution is not None and not exc.value.solution.feasible
    with pytest.raises(Infeasible):
        solve_rsu_power(real, c, m=0)
    _, _, metrics = solve_full(real, c)
    assert not metrics.feasible and metrics.failure


def test_strict_mode_reports_non_convergence(config, realizations):
    with pytest.raises(NotConverged) as exc:
        solve_bs_power(realizations[0], config, SolverConfig(max_iters=3, strict=True))
    assert exc.value.solution.feasible  # restoration still produced a usable point


@pytest.mark.parametrize("kw", [{"step0": 0}, {"max_iters": 0}, {"schedule": "fast"}, {"grad_mode": "x"}, {"init_xi": 2}, {"rho": -1}])
def test_solver_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def reevaluate(real, c, alloc, tol=1e-6):
    """Constraint check through the residual formulas, scaled to be unit-free."""
    th = c.sinr_threshold
    r = bs_residuals(real, alloc, c)
    worst = min(r["bs_power"] / c.p_max_w, r["alpha_sum"])
    scale = th * c.noise_w + c.p_max_w * real.g_bs_rsu * alloc.alpha
    worst = min(worst, r["rate_rsu0"] / scale[0], r["rate_rsu1"] / scale[1])
    for m in range(2):
        r = rsu_residuals(real, alloc, c, m, c.q_max_w)
        worst = min(worst, r["rsu_power"] / c.q_max_w, r["beta_sum"], r["xi_max"])
        scale = th * c.noise_w + c.q_max_w * real.g_rsu_veh[m] * alloc.beta[m]
        worst = min(worst, r["rate_veh0"] / scale[0], r["rate_veh1"] / scale[1])
    return worst >= -tol and alloc.is_valid(tol)


@pytest.mark.parametrize("baseline", ["bc_noma", "conventional_noma"])
def test_feasible_solutions_meet_rate_targets(config, realizations, baseline):
    n_ok = 0
    for real in realizations:
        _, _, m = solve_full(real, config, baseline=baseline)
        if not m.feasible:
            continue
        n_ok += 1
        assert reevaluate(real, config, m.alloc)
        assert np.all(m.report.c_rsu >= config.c_min * 0.5 * (1 - 1e-6))
        assert np.all(m.report.c_veh >= config.c_min * 0.5 * (1 - 1e-6))
        if baseline == "conventional_noma":
            assert np.all(m.alloc.xi == 0.0)
    assert n_ok > len(realizations) // 2


def test_backscatter_never_costs_power(config, realizations):
    for real in realizations:
        bc = solve_full(real, config, baseline="bc_noma")[2]
        conv = solve_full(real, config, baseline="conventional_noma")[2]
        if bc.feasible and conv.feasible:
            assert bc.objective_rsu_w <= conv.objective_rsu_w * (1 + 1e-12)
        assert bc.feasible or not conv.feasible


def test_power_grows_with_csi_error():
    seeds = range(120)
    levels = [0.0, 0.005, 0.01]
    totals = []
    for s in levels:
        c = SystemConfig(sigma_eps_sq=s**2)
        row = []
        for seed in seeds:
            m = solve_full(draw_realization(c, seed), c)[2]
            row.append(m.total_power_w if m.feasible else np.nan)
        totals.append(row)
    totals = np.array(totals)
    both = np.all(np.isfinite(totals), axis=0)
    assert both.sum() >= 80
    assert np.all(np.diff(totals[:, both], axis=0) >= -1e-12 * totals[:-1, both])


def test_plain_subgradient_reaches_same_answer(config, realizations):
    for real in realizations[:10]:
        a = solve_full(real, config, SolverConfig(rho=0.0))[2]
        b = solve_full(real, config)[2]
        assert a.feasible == b.feasible
        if a.feasible:
            assert a.total_power_w == pytest.approx(b.total_power_w, rel=1e-9)


def test_augmented_iterates_converge_on_their_own(config, realizations):
    sols = []
    for real in realizations[:20]:
        try:
            sols.append(solve_bs_power(real, config))
        except Infeasible:
            pass
    assert sum(s.converged for s in sols) >= 0.9 * len(sols)
    for s in sols:
        if s.converged:
            assert s.subgradient_objective_w == pytest.approx(s.objective_w, rel=0.05)


def test_printed_mode_runs(config, realizations):
    cfg = SolverConfig(grad_mode="as_printed", max_iters=500)
    _, _, m = solve_full(realizations[3], config, cfg)
    ref = solve_full(realizations[3], config)[2]
    assert m.feasible == ref.feasible
    if m.feasible:
        assert reevaluate(realizations[3], config, m.alloc)


def test_allocated_cross_interference_needs_less_power(realizations):
    full = SystemConfig()
    used = SystemConfig(cross_interference_mode="allocated")
    for real in realizations[:15]:
        a = solve_full(real, full)[2]
        b = solve_full(real, used)[2]
        if a.feasible:
            assert b.feasible and b.objective_rsu_w <= a.objective_rsu_w * (1 + 1e-9)


def test_trace_dump(tmp_path, config, realizations):
    sol = solve_bs_power(realizations[0], config, SolverConfig(record_trace=True))
    path = tmp_path / "t.csv"
    write_trace_csv(sol, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["iter", "objective_w", "max_residual", "step", "xi"]
    assert len(rows) == sol.iters_used + 1
    assert float(rows[1][3]) == pytest.approx(SolverConfig().step0)
    with pytest.raises(ValueError):
        write_trace_csv(solve_bs_power(realizations[0], config), path)


def test_reported_multipliers_are_non_negative(config, realizations):
    checked = 0
    for real in realizations[:10]:
        try:
            sol = solve_rsu_power(real, config, m=0)
        except Infeasible:
            continue
        checked += 1
        assert np.all(sol.dual.as_array() >= 0)
        assert sol.max_violation() <= SolverConfig().tol_feas
    assert checked
