import numpy as np
import pytest

from consboltz.cli_io import SolverConfig, run_solver
from consboltz.moments import compute_moments
from consboltz.scenarios import (SCENARIOS, bimodal_mixture, default_velocity_halfwidth,
                                 marginal_distribution, maxwellian, relaxation_0d,
                                 sudden_cooling_scenario, sudden_heating_scenario)
from consboltz.velocity_grid import build_grid


def test_maxwellian_moments_on_resolved_lattice():
    g = build_grid(24, 6.0)
    m = compute_moments(g, maxwellian(g, 1.0, (0, 0, 0), 1.0))
    assert abs(m.rho - 1) < 1e-6 and np.abs(m.velocity).max() < 1e-6
    assert abs(m.temperature - 1) < 1e-6


def test_maxwellian_zero_density_and_errors(grid8):
    assert np.all(maxwellian(grid8, 0.0, (0, 0, 0), 1.0) == 0)
    with pytest.raises(ValueError):
        maxwellian(grid8, 1.0, (0, 0, 0), 0.0)
    with pytest.raises(ValueError):
        maxwellian(grid8, -1.0, (0, 0, 0), 1.0)


def test_maxwellian_shift_is_lattice_translation(grid8):
    a = maxwellian(grid8, 1.0, (0, 0, 0), 1.0)
    b = maxwellian(grid8, 1.0, (grid8.dv, 0, 0), 1.0)
    np.testing.assert_allclose(b[1:], a[:-1], rtol=1e-14)


def test_marginal_of_maxwellian_is_gaussian():
    g = build_grid(24, 6.0)
    gm = marginal_distribution(g, maxwellian(g, 1.0, (0, 0, 0), 1.0))
    v = g.v_nodes
    np.testing.assert_allclose(gm, np.exp(-v**2 / 2) / np.sqrt(2 * np.pi), rtol=0, atol=1e-6)


def test_marginal_consistency_and_zero(grid8, rng):
    f = rng.random(grid8.shape)
    gm = marginal_distribution(grid8, f)
    rho = compute_moments(grid8, f).rho
    assert (gm * grid8.dv * grid8.quad_coeffs).sum() == pytest.approx(rho, rel=1e-13)
    assert np.all(marginal_distribution(grid8, np.zeros(grid8.shape)) == 0)


def test_mixture_moments():
    g = build_grid(24, 7.0)
    m = compute_moments(g, bimodal_mixture(g, 1.0, 0.5))
    assert m.rho == pytest.approx(1.0, rel=1e-8)
    assert np.abs(m.velocity).max() < 1e-8
    assert m.temperature == pytest.approx(0.5 + 1.0 / 3.0, rel=1e-8)


def test_default_halfwidth():
    assert default_velocity_halfwidth(2.0) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        default_velocity_halfwidth(0.0)


def test_scenario_definitions(grid8):
    h = sudden_heating_scenario()
    assert h.wall_left.T_before == 1.0 and h.wall_left.T_after == 2.0
    assert h.epsilon == 1.0 and h.lam == 1.0 and h.left_kind == "wall"
    assert h.spatial.n_cells == 30 and h.marginal_window == (0.0, 1.0)
    c = sudden_cooling_scenario()
    assert c.wall_left.T_after == 0.5 and c.name == "sudden_cooling"
    f0 = h.initial_field(grid8)
    assert f0.shape == (30,) + grid8.shape and np.all(f0 == f0[0])
    r = relaxation_0d()
    assert r.homogeneous and r.initial_field(grid8).shape == (1,) + grid8.shape
    assert set(SCENARIOS) == {"relaxation_0d", "sudden_heating", "sudden_cooling"}
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            sudden_heating_scenario(bad)


def short_wall_run(scenario, table, steps=20):
    cfg = SolverConfig(N=8, L=5.0, scenario=scenario, length=2.0, end_time=steps * 0.0225,
                       output_interval=0.0225)
    return run_solver(cfg, table=table)


def test_heating_trends_small_grid(table8_l1):
    rec = short_wall_run("sudden_heating", table8_l1)
    T_wall = np.array([m[0, 2] for m in rec.moments])
    assert np.all(np.diff(T_wall) > 0)
    # gas is pushed away from the heated wall
    assert rec.moments[-1][0, 1] > 0
    assert np.abs(rec.ledger_residual()[:, 0]).max() < 1e-12


def test_cooling_trends_small_grid(table8_l1):
    rec = short_wall_run("sudden_cooling", table8_l1)
    T_wall = np.array([m[0, 2] for m in rec.moments])
    assert np.all(np.diff(T_wall) < 0)
    # gas near the cooled wall moves towards it
    assert np.all(rec.moments[-1][:3, 1] < 0)
    assert np.abs(rec.ledger_residual()[:, 0]).max() < 1e-12
