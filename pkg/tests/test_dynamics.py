"""Langevin / Hamiltonian integration and the voltage observable."""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import washboard as wb
from conftest import GROUND_STATE_HALF

SQRT2 = math.sqrt(2.0)


@pytest.mark.parametrize("kwargs", [
    dict(scheme="leapfrog", n_steps=10),
    dict(scheme="overdamped", n_steps=0),
    dict(scheme="overdamped", n_steps=10, dt=-0.1),
    dict(scheme="underdamped", n_steps=10, beta_c=0.0),
    dict(scheme="overdamped", n_steps=10, beta_c=1.0),
    dict(scheme="overdamped", n_steps=10, omega_noise=-0.5),
    dict(scheme="overdamped", n_steps=10, record_stride=0),
    dict(scheme="overdamped", n_steps=10, blowup_retries=-1),
    dict(scheme="hamiltonian", n_steps=10, beta_c=1.0, omega_noise=0.1),
])
def test_config_validation(kwargs):
    with pytest.raises(wb.InvalidConfig):
        wb.SimulationConfig(**kwargs)


def test_config_accepts_valid_schemes():
    for scheme, beta in (("overdamped", 0.0), ("underdamped", 2.0),
                         ("hamiltonian", 1.0)):
        cfg = wb.SimulationConfig(scheme=scheme, n_steps=5, beta_c=beta)
        assert cfg.scheme == scheme


def test_simulate_rejects_bad_initial_state(half_potential):
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=5)
    with pytest.raises(wb.InvalidConfig):
        wb.simulate(half_potential, cfg, x0=np.zeros(4))
    cfg2 = wb.SimulationConfig(scheme="underdamped", n_steps=5, beta_c=1.0)
    with pytest.raises(wb.InvalidConfig):
        wb.simulate(half_potential, cfg2, x0=np.zeros(3), v0=np.zeros(2))


def test_overdamped_ignores_v0(half_potential):
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=5)
    with pytest.raises(wb.InvalidConfig):
        wb.simulate(half_potential, cfg, v0=np.zeros(3))


def test_noise_factor_diagonal():
    cov = np.diag([1.0, 4.0, 9.0])
    l = wb.noise_factor(cov)
    assert_allclose(l, np.diag([1.0, 2.0, 3.0]), atol=1e-14)


def test_noise_factor_full():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((4, 4))
    cov = m @ m.T
    l = wb.noise_factor(cov)
    assert_allclose(l @ l.T, cov, atol=1e-12)


def test_noise_factor_rejects_indefinite():
    with pytest.raises(wb.NotPSD):
        wb.noise_factor(np.diag([1.0, -0.5]))


def test_determinism_and_seed_variation(half_potential):
    pot = half_potential.with_params(i_x=0.3, omega_noise=0.2)
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=400, seed=42)
    a = wb.simulate(pot, cfg)
    b = wb.simulate(pot, cfg)
    assert a.seed_used == b.seed_used == 42
    assert np.array_equal(a.states, b.states)       # bitwise
    c = wb.simulate(pot, wb.SimulationConfig(scheme="overdamped",
                                             n_steps=400, seed=43))
    assert not np.array_equal(a.states, c.states)


def test_unseeded_runs_record_their_seed(half_potential):
    pot = half_potential.with_params(omega_noise=0.1)
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=20)
    t = wb.simulate(pot, cfg)
    assert t.seed_used is not None
    # replaying the recorded seed reproduces the run
    replay = wb.simulate(pot, wb.SimulationConfig(
        scheme="overdamped", n_steps=20, seed=t.seed_used))
    assert np.array_equal(t.states, replay.states)


def test_overdamped_relaxes_to_arcsin(junction_potential):
    """A driven junction below threshold settles at x = arcsin(i)."""
    i = 0.6
    pot = junction_potential.with_params(i_x=i)
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=40000, dt=1e-2)
    traj = wb.simulate(pot, cfg, x0=[0.0])
    assert_allclose(traj.states[-1, 0], math.asin(i), atol=1e-12)


def test_overdamped_descends_energy(half_potential):
    pot = half_potential.with_params(i_x=0.2)
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=3000)
    traj = wb.simulate(pot, cfg, x0=[0.5, -0.4, -1.0])
    e = wb.energy_series(pot, traj)
    assert np.all(np.diff(e) <= 1e-10)


def test_underdamped_dissipates(half_potential):
    pot = half_potential.with_params(i_x=0.2)
    cfg = wb.SimulationConfig(scheme="underdamped", n_steps=3000, beta_c=2.0)
    traj = wb.simulate(pot, cfg, x0=[0.5, -0.4, -1.0])
    e = wb.energy_series(pot, traj)        # potential + kinetic
    assert np.all(np.diff(e) <= 1e-10)
    assert traj.velocities is not None


def test_hamiltonian_conserves_energy(half_potential):
    cfg = wb.SimulationConfig(scheme="hamiltonian", n_steps=100000,
                              dt=1e-3, beta_c=1.0, record_stride=100)
    traj = wb.simulate(half_potential, cfg, x0=[0.4, -0.2, -1.2],
                       v0=[0.1, 0.0, -0.3])
    e = wb.energy_series(half_potential, traj)
    assert np.max(np.abs(e - e[0])) < 1e-6


def test_mean_voltage_synthetic():
    times = np.linspace(0.0, 10.0, 101)
    states = np.outer(times, [2.0, -1.0])
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=100, dt=0.1)
    traj = wb.Trajectory(times=times, states=states, velocities=None,
                         seed_used=0, config=cfg)
    assert_allclose(wb.mean_voltage(traj), [2.0, -1.0], atol=1e-12)
    assert_allclose(wb.mean_voltage(traj, window=0.25), [2.0, -1.0],
                    atol=1e-12)


def test_mean_voltage_requires_frames():
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=1)
    traj = wb.Trajectory(times=np.zeros(1), states=np.zeros((1, 2)),
                         velocities=None, seed_used=0, config=cfg)
    with pytest.raises(wb.EmptyTrajectory):
        wb.mean_voltage(traj)


def test_mean_voltage_window_validation(half_potential):
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=10)
    traj = wb.simulate(half_potential, cfg, x0=[0.1, 0.0, 0.0])
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(wb.InvalidConfig):
            wb.mean_voltage(traj, window=bad)


def test_energy_series_needs_velocities(half_potential):
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=10)
    traj = wb.simulate(half_potential, cfg, x0=[0.1, 0.0, 0.0])
    with pytest.raises(wb.MissingVelocities):
        wb.energy_series(half_potential, traj, include_kinetic=True)


def test_blowup_raises_without_retries(junction_potential):
    # dt / beta_c > 2 makes the damping update geometrically unstable
    pot = junction_potential.with_params(i_x=0.5)
    cfg = wb.SimulationConfig(scheme="underdamped", n_steps=1000, dt=0.1,
                              beta_c=0.02, blowup_retries=0, seed=1)
    with pytest.raises(wb.NumericalBlowup) as info:
        wb.simulate(pot, cfg, x0=[0.0])
    assert info.value.step > 0


def test_blowup_recovers_by_halving_dt(junction_potential):
    pot = junction_potential.with_params(i_x=0.5)
    cfg = wb.SimulationConfig(scheme="underdamped", n_steps=1000, dt=0.1,
                              beta_c=0.02, seed=1)
    traj = wb.simulate(pot, cfg, x0=[0.0])
    assert traj.retries_used == 2          # dt 0.1 -> 0.05 -> 0.025 stable
    # the physical duration and frame grid are preserved across retries
    assert traj.n_frames == 1001
    assert_allclose(traj.times[-1], 100.0, rtol=1e-12)
    assert_allclose(traj.times[1] - traj.times[0], 0.1, rtol=1e-12)
    assert np.all(np.isfinite(traj.states))


def test_trajectory_arrays_read_only(half_potential):
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=10)
    traj = wb.simulate(half_potential, cfg, x0=[0.1, 0.0, 0.0])
    with pytest.raises(ValueError):
        traj.states[0, 0] = 99.0
    with pytest.raises(ValueError):
        traj.times[0] = 99.0


def test_record_stride_frames(half_potential):
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=100,
                              record_stride=10)
    traj = wb.simulate(half_potential, cfg, x0=[0.1, 0.0, 0.0])
    assert traj.n_frames == 11
    assert_allclose(traj.times, np.arange(11) * 10 * cfg.dt, atol=1e-15)


def _transverse_run(i_x, i_y, omega, seed):
    pot = wb.build_potential(wb.builtin_cell("1/2"), i_x=i_x, i_y=i_y,
                             omega_noise=omega)
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=125000, dt=2e-3,
                              omega_noise=omega, seed=seed, record_stride=50)
    traj = wb.simulate(pot, cfg, x0=GROUND_STATE_HALF)
    half = traj.n_frames // 2
    y = traj.states[half:, 1]
    v = wb.mean_voltage(traj)
    return y.std(), v


@pytest.mark.slow
@pytest.mark.parametrize("seed", [101, 202, 303])
def test_transverse_motion_above_depinning(seed):
    """Running longitudinal phase with weak transverse bias and strong noise
    makes the transverse coordinate wander."""
    y_std, v = _transverse_run(0.85, 0.05, 0.3, seed)
    assert y_std >= 0.12
    assert v[0] > 0.02


@pytest.mark.slow
@pytest.mark.parametrize("seed", [101, 202, 303])
def test_transverse_motion_pinned(seed):
    """Below depinning with weak noise both coordinates stay put."""
    y_std, v = _transverse_run(0.4, 0.05, 0.05, seed)
    assert y_std <= 0.09
    assert abs(v[0]) < 1e-2
    assert abs(v[1]) < 1e-2
