import numpy as np
import pytest

from cscdyn import (
    ConfigError,
    DomainSpec,
    FieldState,
    MeanState,
    ModelParams,
    ProgenyKernel,
    build_grid,
    cfl_time_step,
    constant_field,
    fast_rhs,
    integrate_field,
    integrate_ode,
    integrate_pde,
    manifold_state,
    on_manifold_field,
    pde_rhs,
    slow_manifold_residual,
    stationarity_residual,
)


def grid_and_params(n=33, alpha=0.5, delta=0.1, sigma=1.0, d=0.5, lengths=(1.0,)):
    domain = DomainSpec(lengths, (n,) * len(lengths))
    return build_grid(domain), ModelParams(d=d, alpha=alpha, delta=delta,
                                           kernel=ProgenyKernel(sigma), domain=domain)


def random_field(grid, rng, base=0.2, spread=0.1):
    return FieldState(base + spread * rng.random(grid.n_nodes),
                      base + spread * rng.random(grid.n_nodes))


# ---------------------------------------------------------------- right-hand sides

def test_rhs_zero_at_pure_csc_state():
    grid, prm = grid_and_params()
    rhs = pde_rhs(prm, grid, constant_field(grid, 1.0, 0.0))
    assert np.abs(rhs.u).max() == 0.0
    assert np.abs(rhs.v).max() == 0.0


def test_rhs_constant_field_matches_ode_reduction():
    grid, prm = grid_and_params(n=101)
    rhs = pde_rhs(prm, grid, constant_field(grid, 0.25, 0.25))
    assert np.abs(rhs.u - 0.0125).max() < 1e-13
    assert np.abs(rhs.v - 0.1125).max() < 1e-13


def test_delta_zero_equals_fast_system(rng):
    grid, prm = grid_and_params(delta=0.0)
    s = random_field(grid, rng)
    a = pde_rhs(prm, grid, s)
    b = fast_rhs(prm, grid, s)
    assert np.abs(a.u - b.u).max() < 1e-12
    assert np.abs(a.v - b.v).max() < 1e-12


def test_fast_rhs_examples(rng):
    grid, prm = grid_and_params()
    # constant states on the slow manifold are stationary for the fast flow
    for mass in (0.55, 0.8, 1.0):
        point = manifold_state(prm, mass)
        s = constant_field(grid, point.u_bar, point.v_bar)
        rhs = fast_rhs(prm, grid, s)
        assert np.abs(rhs.u).max() < 1e-14
        assert np.abs(rhs.v).max() < 1e-14
    # the CSC component decouples from v entirely
    u = 0.2 + 0.05 * rng.random(grid.n_nodes)
    a = fast_rhs(prm, grid, FieldState(u, np.full(grid.n_nodes, 0.1)))
    b = fast_rhs(prm, grid, FieldState(u, 0.3 + 0.1 * rng.random(grid.n_nodes)))
    assert np.abs(a.u - b.u).max() == 0.0
    # u = 0, v = eps: dv/dt = eps * (alpha_growth) with k(eps) * eps integral
    eps = 1e-3
    rhs = fast_rhs(prm, grid, constant_field(grid, 0.0, eps))
    expected = eps * (0.5 - eps)
    assert np.abs(rhs.v - expected).max() < 1e-12


def test_stationarity_residuals():
    grid, prm = grid_and_params()
    for u, v in ((0.0, 0.0), (0.0, 0.5), (1.0, 0.0)):
        assert stationarity_residual(prm, grid, constant_field(grid, u, v)) < 1e-14
    # non-constant states are never stationary (no inhomogeneous steady states)
    x = grid.axes[0]
    bumped = FieldState(0.25 * (np.cos(np.pi * x) + 1.2) / 2.4,
                        np.full(grid.n_nodes, 0.2))
    assert stationarity_residual(prm, grid, bumped) > 1e-3


def test_rhs_size_mismatch():
    grid, prm = grid_and_params()
    other = build_grid(DomainSpec((1.0,), (21,)))
    s = constant_field(other, 0.1, 0.1)
    with pytest.raises(ValueError):
        pde_rhs(prm, grid, s)


# ---------------------------------------------------------------- stepping

def manual_rk4_step(prm, grid, s, dt):
    def add(a, b, c):
        return FieldState(a.u + c * b.u, a.v + c * b.v)
    k1 = pde_rhs(prm, grid, s)
    k2 = pde_rhs(prm, grid, add(s, k1, dt / 2))
    k3 = pde_rhs(prm, grid, add(s, k2, dt / 2))
    k4 = pde_rhs(prm, grid, add(s, k3, dt))
    u = s.u + dt / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u)
    v = s.v + dt / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)
    return FieldState(u, v)


@pytest.mark.parametrize("sigma,lengths", [(1.0, (1.0,)), (2.0, (1.0,)),
                                           (1.7, (1.0,)), (1.0, (1.0, 0.8))])
def test_compiled_step_matches_reference_rhs(sigma, lengths, rng):
    # one full step of the compiled path against the numpy rhs composition
    grid, prm = grid_and_params(n=17, sigma=sigma, lengths=lengths)
    s = random_field(grid, rng)
    dt = cfl_time_step(prm, grid)
    traj = integrate_pde(prm, grid, s, (0.0, dt), output_times=[dt], dt=dt)
    ref = manual_rk4_step(prm, grid, s, dt)
    assert np.abs(traj.states[-1, 0] - ref.u).max() < 1e-13
    assert np.abs(traj.states[-1, 1] - ref.v).max() < 1e-13


def test_constant_equilibrium_trajectory():
    grid, prm = grid_and_params()
    traj = integrate_pde(prm, grid, constant_field(grid, 1.0, 0.0), (0.0, 5.0),
                         output_times=np.linspace(0, 5, 6))
    assert np.abs(traj.states[:, 0] - 1.0).max() < 1e-12
    assert np.abs(traj.states[:, 1]).max() < 1e-12
    assert traj.masses == pytest.approx(np.ones(6), abs=1e-12)


def test_ode_consistency_for_constant_data():
    grid, prm = grid_and_params(n=33)
    times = np.linspace(0.0, 50.0, 101)
    pde_traj = integrate_pde(prm, grid, constant_field(grid, 0.4, 0.3), (0.0, 50.0),
                             output_times=times)
    ode_traj = integrate_ode(prm, MeanState(0.4, 0.3), (0.0, 50.0), n_snapshots=101)
    # every node follows the mean ODE when the data are spatially constant
    err = np.abs(pde_traj.states[:, :, grid.n_nodes // 2] - ode_traj.states).max()
    assert err < 1e-6


def test_pure_diffusion_conserves_both_masses(rng):
    grid, prm = grid_and_params()
    init = random_field(grid, rng)
    dt = cfl_time_step(prm, grid)
    horizon = 2000 * dt
    traj = integrate_pde(prm, grid, init, (0.0, horizon), output_times=[horizon],
                         include_reaction=False)
    for comp in (0, 1):
        before = integrate_field(grid, init.u if comp == 0 else init.v)
        after = integrate_field(grid, traj.states[-1, comp])
        assert abs(after - before) < 1e-12


def test_invariant_region_and_positivity():
    grid, prm = grid_and_params(n=41)
    x = grid.axes[0]
    init = FieldState(0.3 + 0.05 * np.cos(np.pi * x), 0.2 + 0.05 * np.cos(2 * np.pi * x))
    traj = integrate_pde(prm, grid, init, (0.0, 80.0), output_times=np.linspace(0, 80, 161))
    u = traj.states[:, 0]
    v = traj.states[:, 1]
    v_max = prm.kernel.inverse(prm.alpha)
    assert u.min() >= -1e-10 and v.min() >= -1e-10
    overshoot = max(0.0, (u - 1.0).max(), (v - v_max).max(), -u.min(), -v.min())
    assert overshoot <= 1e-8


def test_refinement_convergence_second_order():
    finals = {}
    for n in (41, 81, 161):
        grid, prm = grid_and_params(n=n)
        x = grid.axes[0]
        init = FieldState(0.3 + 0.2 * np.cos(np.pi * x), 0.2 + 0.1 * np.cos(np.pi * x))
        traj = integrate_pde(prm, grid, init, (0.0, 0.25), output_times=[0.25])
        finals[n] = traj.states[-1]
    err_coarse = np.abs(finals[41] - finals[81][:, ::2]).max()
    err_fine = np.abs(finals[81] - finals[161][:, ::2]).max()
    assert err_coarse / err_fine == pytest.approx(4.0, rel=0.25)


def test_cfl_violation_rejected():
    grid, prm = grid_and_params()
    bound = cfl_time_step(prm, grid)
    with pytest.raises(ConfigError):
        integrate_pde(prm, grid, constant_field(grid, 0.2, 0.2), (0.0, 1.0),
                      dt=2.0 * bound)


def test_output_time_validation():
    grid, prm = grid_and_params()
    s = constant_field(grid, 0.2, 0.2)
    with pytest.raises(ValueError):
        integrate_pde(prm, grid, s, (0.0, 1.0), output_times=[0.5, 0.4])
    with pytest.raises(ValueError):
        integrate_pde(prm, grid, s, (0.0, 1.0), output_times=[0.5, 2.0])


def test_snapshots_land_exactly_on_requested_times():
    grid, prm = grid_and_params(n=21)
    times = [0.1, 0.25, 0.8]
    traj = integrate_pde(prm, grid, constant_field(grid, 0.2, 0.2), (0.0, 1.0),
                         output_times=times)
    assert traj.times.tolist() == [0.0] + times


def test_two_dimensional_run_smoke(rng):
    grid, prm = grid_and_params(n=11, lengths=(1.0, 1.0))
    init = random_field(grid, rng, base=0.2, spread=0.05)
    traj = integrate_pde(prm, grid, init, (0.0, 2.0), output_times=np.linspace(0, 2, 5))
    assert np.all(np.isfinite(traj.states))
    # masses grow from a small positive state under weak treatment
    assert traj.masses[-1] > traj.masses[0]


# ---------------------------------------------------------------- initial fields

def test_on_manifold_field_mean_residual():
    grid, prm = grid_and_params(n=33)
    f = on_manifold_field(prm, grid, 0.6)
    mean = MeanState(integrate_field(grid, f.u), integrate_field(grid, f.v))
    assert abs(slow_manifold_residual(prm, mean, grid.measure)) < 1e-13

    g = on_manifold_field(prm, grid, 0.6, amplitude=1e-3, wavenumber=1)
    mean_pert = MeanState(integrate_field(grid, g.u), integrate_field(grid, g.v))
    # zero-mean perturbation leaves the mean state on the manifold
    assert abs(mean_pert.u_bar - mean.u_bar) < 1e-12
    assert abs(mean_pert.v_bar - mean.v_bar) < 1e-12
    assert g.u.std() > 1e-4 and g.v.std() > 1e-4


def test_on_manifold_field_rejects_infeasible():
    grid, prm = grid_and_params()
    with pytest.raises(ValueError):
        on_manifold_field(prm, grid, 0.2)  # below the manifold mass range
    with pytest.raises(ValueError):
        on_manifold_field(prm, grid, 0.6, amplitude=0.9)
