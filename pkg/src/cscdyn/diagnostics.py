"""Observables over trajectories and the PDE-level paradox detector."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .grids import Grid, field_gradient, integrate_field
from .model import FieldState, ModelParams, Trajectory
from .ode import _check_paradox_pair
from .paradox import ParadoxReport, detect_paradox
from .pde import integrate_pde
from .stability import _manifold_polyline, distance_to_polyline

__all__ = [
    "total_mass",
    "energy_functional",
    "invariant_region_audit",
    "paradox_check_pde",
]


def total_mass(grid: Grid, s: FieldState) -> float:
    """Total tumor mass: the domain integral of u + v."""
    return integrate_field(grid, s.u) + integrate_field(grid, s.v)


def energy_functional(grid: Grid, s: FieldState, s_dot: FieldState) -> float:
    """Gradient-correlation energy E = Int(grad(u_t).grad(u) + grad(v_t).grad(v)).

    Its decay to zero is what rules out spatially non-constant attractors;
    the integrand is not sign-definite, so no sign is asserted pointwise.
    The caller supplies s_dot (normally pde_rhs at s).
    """
    if s.u.size != s_dot.u.size or s.u.size != grid.n_nodes:
        raise ValueError("state, derivative, and grid sizes must agree")
    integrand = np.zeros(grid.n_nodes)
    for f, fdot in ((s.u, s_dot.u), (s.v, s_dot.v)):
        for g, gdot in zip(field_gradient(grid, f), field_gradient(grid, fdot)):
            integrand += gdot * g
    return integrate_field(grid, integrand)


def invariant_region_audit(trajectory: Trajectory, params: ModelParams) -> float:
    """Worst distance any snapshot strays outside R = [0,1] x [0, k^-1(alpha)].

    Zero means the run stayed inside; positive values are reported, not
    rejected (an initial state outside R simply shows up at t = 0).
    """
    if params.alpha > 1.0:
        raise ValueError(f"invariant region undefined: k(v) = alpha needs alpha <= 1, "
                         f"got {params.alpha}")
    v_max = params.kernel.inverse(params.alpha)
    u = trajectory.states[:, 0]
    v = trajectory.states[:, 1]
    worst = max(
        float((-u).max()),
        float((u - 1.0).max()),
        float((-v).max()),
        float((v - v_max).max()),
    )
    return max(worst, 0.0)


def _mean_series(grid: Grid, trajectory: Trajectory):
    omega = grid.measure
    mean_u = trajectory.states[:, 0, :] @ grid.weights / omega
    mean_v = trajectory.states[:, 1, :] @ grid.weights / omega
    return mean_u, mean_v


def _mean_residuals(params: ModelParams, grid: Grid, trajectory: Trajectory) -> np.ndarray:
    omega = grid.measure
    mean_u, mean_v = _mean_series(grid, trajectory)
    p = np.maximum(mean_u + mean_v, 0.0)
    return np.abs(params.kernel(p) * omega * p - params.alpha * mean_v)


def paradox_check_pde(params_1: ModelParams, params_2: ModelParams, grid: Grid,
                      init: FieldState, horizon: float, theta_grid=64,
                      *, settle_tol: float = 1e-4, near_manifold_tol: float = 1e-3,
                      n_snapshots: int | None = None, safety: float = 0.9,
                      workers: int = 2) -> ParadoxReport:
    """PDE version of the paradox check: two runs, mass matching, ordering.

    The initial field must have its mean state within `near_manifold_tol`
    of the slow-manifold curve of the higher death rate (the theorems
    assume dynamics starting near the attracting manifold).  The two
    integrations execute concurrently.
    """
    _check_paradox_pair(params_1, params_2)
    omega = grid.measure
    mean0 = np.array([integrate_field(grid, init.u) / omega,
                      integrate_field(grid, init.v) / omega])
    polyline = _manifold_polyline(params_1, omega, 1001)
    dist = float(distance_to_polyline(mean0, polyline)[0])
    if dist > near_manifold_tol:
        raise ValueError(f"initial mean state is {dist:.3e} from the slow manifold, "
                         f"beyond the near-manifold limit {near_manifold_tol:g}")

    n_out = int(n_snapshots) if n_snapshots else int(max(401, min(4001, round(horizon * 2) + 1)))
    times = np.linspace(0.0, horizon, n_out)

    def run(prm):
        return integrate_pde(prm, grid, init, (0.0, horizon),
                             output_times=times, safety=safety)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        traj_1, traj_2 = pool.map(run, (params_1, params_2))

    resid_1 = _mean_residuals(params_1, grid, traj_1)
    resid_2 = _mean_residuals(params_2, grid, traj_2)
    report = detect_paradox(traj_1.times, traj_1.masses, resid_1,
                            traj_2.masses, resid_2,
                            params_1.alpha, params_2.alpha,
                            theta_grid=theta_grid, settle_tol=settle_tol)
    report.trajectories = (traj_1, traj_2)
    return report
