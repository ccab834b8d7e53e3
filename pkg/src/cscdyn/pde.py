"""Method-of-lines right-hand sides and time integration of the full system.

The non-dimensional system on a box domain with zero-flux boundaries:

    u_t = d * Lap(u) + delta * k(u+v) * Int(u)
    v_t = Lap(v) + (1-delta) * k(u+v) * Int(u) - alpha * v + k(u+v) * Int(v)

where Int() is the domain integral (trapezoid quadrature on the grid) and
k is applied pointwise.  The fast subsystem is the delta = 0 limit.  Time
stepping is explicit RK4 with the step bounded by the diffusion CFL limit
safety * h^2 / (2 * ndim * max(d, 1)); snapshots land exactly on the
requested output times by shortening substeps, never by interpolation.
"""

from __future__ import annotations

import numpy as np

from . import _stepper
from .errors import ConfigError, IntegrationError
from .grids import Grid, integrate_field, neumann_laplacian_apply
from .model import FieldState, ModelParams, Trajectory
from .ode import manifold_state

__all__ = [
    "pde_rhs",
    "fast_rhs",
    "integrate_pde",
    "stationarity_residual",
    "cfl_time_step",
    "constant_field",
    "on_manifold_field",
]


def _check_field(grid: Grid, s: FieldState) -> None:
    if s.u.size != grid.n_nodes:
        raise ValueError(f"field has {s.u.size} nodes but the grid has {grid.n_nodes}")


def _pointwise_kernel(params: ModelParams, p: np.ndarray) -> np.ndarray:
    # transient roundoff can push p a hair below zero; clamp before the power
    return params.kernel(np.maximum(p, 0.0))


def pde_rhs(params: ModelParams, grid: Grid, s: FieldState) -> FieldState:
    """Time derivative of the full non-local system at a field state."""
    _check_field(grid, s)
    kk = _pointwise_kernel(params, s.p)
    int_u = integrate_field(grid, s.u)
    int_v = integrate_field(grid, s.v)
    du = params.d * neumann_laplacian_apply(grid, s.u) + params.delta * kk * int_u
    dv = (neumann_laplacian_apply(grid, s.v) + (1.0 - params.delta) * kk * int_u
          - params.alpha * s.v + kk * int_v)
    return FieldState(du, dv)


def fast_rhs(params: ModelParams, grid: Grid, s: FieldState) -> FieldState:
    """The delta = 0 subsystem: CSC diffusion decouples, CCs carry the balance."""
    _check_field(grid, s)
    p = s.p
    kk = _pointwise_kernel(params, p)
    int_p = integrate_field(grid, p)
    du = params.d * neumann_laplacian_apply(grid, s.u)
    dv = neumann_laplacian_apply(grid, s.v) - params.alpha * s.v + kk * int_p
    return FieldState(du, dv)


def stationarity_residual(params: ModelParams, grid: Grid, s: FieldState) -> float:
    """Max-norm of the right-hand side; small iff s is numerically stationary."""
    rhs = pde_rhs(params, grid, s)
    return float(max(np.abs(rhs.u).max(), np.abs(rhs.v).max()))


def cfl_time_step(params: ModelParams, grid: Grid, safety: float = 0.9) -> float:
    """Largest admissible explicit step for the diffusion part."""
    h_min = min(grid.spacing)
    return safety * h_min**2 / (2.0 * grid.domain.dimension * max(params.d, 1.0))


def integrate_pde(params: ModelParams, grid: Grid, init: FieldState, t_span,
                  *, output_times=None, dt: float | None = None, safety: float = 0.9,
                  include_reaction: bool = True) -> Trajectory:
    """Explicit RK4 run returning snapshots and total masses at output times.

    A user-supplied fixed `dt` above the diffusion bound is rejected.  With
    `include_reaction=False` every birth/death term is dropped (kernel
    forced to zero and alpha to zero), which makes both population masses
    exactly conserved discrete quantities; this is the conservation
    diagnostic, not a model regime.
    """
    _check_field(grid, init)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be increasing")

    dt_bound = cfl_time_step(params, grid, safety)
    if dt is not None:
        if dt > dt_bound * (1.0 + 1e-12):
            raise ConfigError(
                f"fixed step dt = {dt:g} violates the diffusion bound {dt_bound:g} "
                f"(safety {safety})")
        dt_bound = dt

    if output_times is None:
        times = np.linspace(t0, t1, 201)
    else:
        times = np.asarray(output_times, dtype=float)
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("output times must be strictly increasing")
        if times[0] > t0:
            times = np.concatenate([[t0], times])
        if not (abs(times[0] - t0) < 1e-12 and times[-1] <= t1 * (1 + 1e-12)):
            raise ValueError("output times must start at t_span[0] and stay within it")

    two_d = grid.domain.dimension == 2
    shape = grid.shape
    u = np.ascontiguousarray(init.u.reshape(shape) if two_d else init.u.copy())
    v = np.ascontiguousarray(init.v.reshape(shape) if two_d else init.v.copy())
    w = np.ascontiguousarray(grid.weights.reshape(shape) if two_d else grid.weights)
    inv_h2 = tuple(1.0 / h**2 for h in grid.spacing)

    n_nodes = grid.n_nodes
    states = np.empty((len(times), 2, n_nodes))
    masses = np.empty(len(times))

    def record(idx):
        uf = u.ravel()
        vf = v.ravel()
        states[idx, 0] = uf
        states[idx, 1] = vf
        masses[idx] = grid.weights @ (uf + vf)

    record(0)
    alpha_eff = params.alpha if include_reaction else 0.0
    for idx in range(1, len(times)):
        span = times[idx] - times[idx - 1]
        n_sub = max(1, int(np.ceil(span / dt_bound - 1e-12)))
        sub_dt = span / n_sub
        if two_d:
            _stepper.rk4_2d(u, v, w, inv_h2[0], inv_h2[1], sub_dt, n_sub,
                            params.d, alpha_eff, params.delta,
                            params.kernel.sigma, include_reaction)
        else:
            _stepper.rk4_1d(u, v, w, inv_h2[0], sub_dt, n_sub,
                            params.d, alpha_eff, params.delta,
                            params.kernel.sigma, include_reaction)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise IntegrationError(
                f"state became non-finite between t = {times[idx-1]:g} and {times[idx]:g}",
                last_time=float(times[idx - 1]))
        record(idx)

    return Trajectory(times=times, states=states, masses=masses)


def constant_field(grid: Grid, u_value: float, v_value: float) -> FieldState:
    return FieldState(np.full(grid.n_nodes, float(u_value)),
                      np.full(grid.n_nodes, float(v_value)))


def _axis0_mode(grid: Grid, wavenumber: int) -> np.ndarray:
    """Zero-flux-compatible cosine mode along the first axis, flattened."""
    x = grid.axes[0]
    mode = np.cos(wavenumber * np.pi * x / grid.domain.lengths[0])
    if grid.domain.dimension == 2:
        mode = np.repeat(mode[:, None], grid.shape[1], axis=1)
    return mode.ravel()


def on_manifold_field(params: ModelParams, grid: Grid, mass: float,
                      amplitude: float = 0.0, wavenumber: int = 1) -> FieldState:
    """Constant field on the slow manifold with total tumor mass `mass`.

    An optional smooth zero-mean cosine perturbation (amplitude on u at the
    given wavenumber, on v at the next one) leaves the mean state on the
    manifold while making the fields genuinely non-constant.
    """
    omega = grid.measure
    base = manifold_state(params, mass / omega, omega_measure=omega)
    u = np.full(grid.n_nodes, base.u_bar)
    v = np.full(grid.n_nodes, base.v_bar)
    if amplitude != 0.0:
        u = u + amplitude * _axis0_mode(grid, wavenumber)
        v = v + amplitude * _axis0_mode(grid, wavenumber + 1)
        if u.min() < 0.0 or v.min() < 0.0:
            raise ValueError("perturbation amplitude drives a density negative")
    return FieldState(u, v)
