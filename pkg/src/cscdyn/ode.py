"""Diffusion-free reduction: mean-density dynamics, equilibria, slow manifold.

The reduced system for mean densities (u_bar, v_bar), with p_bar their sum:

    du_bar/dt = delta * k(p_bar) * u_bar
    dv_bar/dt = (1 - delta) * k(p_bar) * u_bar - alpha * v_bar + k(p_bar) * v_bar

For small delta this is a fast/slow system.  The fast dynamics relax onto
the slow manifold { k(p) * p = alpha * v }, along which the CSC density
creeps upward, and the pure-CSC state (1, 0) is the global attractor.
All mean-level work uses the unit-measure convention |Omega| = 1 so the
reduction and the PDE residual agree; `slow_manifold_residual` exposes the
measure explicitly for the PDE side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import IntegrationError
from .kernel import ProgenyKernel
from .model import (
    EXTINCTION,
    PURE_CC,
    PURE_CSC,
    Equilibrium,
    MeanState,
    ModelParams,
    Trajectory,
)
from .paradox import ParadoxReport, detect_paradox

__all__ = [
    "ode_rhs",
    "equilibria",
    "ode_jacobian",
    "classify_ode_equilibrium",
    "classify_eigenvalues",
    "integrate_ode",
    "slow_manifold_residual",
    "SlowManifoldCurve",
    "slow_manifold_curve",
    "manifold_state",
    "paradox_check_ode",
    "STABLE_NODE",
    "UNSTABLE_NODE",
    "SADDLE",
    "STABLE_SPIRAL",
    "UNSTABLE_SPIRAL",
    "DEGENERATE",
]

STABLE_NODE = "stable node"
UNSTABLE_NODE = "unstable node"
SADDLE = "saddle"
STABLE_SPIRAL = "stable spiral"
UNSTABLE_SPIRAL = "unstable spiral"
DEGENERATE = "degenerate"


def ode_rhs(params: ModelParams, s: MeanState) -> MeanState:
    """Time derivative of the mean densities."""
    kk = params.kernel(max(s.p_bar, 0.0))
    du = params.delta * kk * s.u_bar
    dv = (1.0 - params.delta) * kk * s.u_bar - params.alpha * s.v_bar + kk * s.v_bar
    return MeanState(du, dv)


def equilibria(params: ModelParams) -> list[Equilibrium]:
    """The three constant states; the pure-CC one only exists for alpha <= 1."""
    out = [Equilibrium(EXTINCTION, MeanState(0.0, 0.0))]
    if params.alpha <= 1.0:
        v_star = params.kernel.inverse(params.alpha)
        out.append(Equilibrium(PURE_CC, MeanState(0.0, v_star)))
    else:
        out.append(Equilibrium(PURE_CC, None, exists=False))
    out.append(Equilibrium(PURE_CSC, MeanState(1.0, 0.0)))
    return out


def ode_jacobian(params: ModelParams, s: MeanState) -> np.ndarray:
    """Analytic Jacobian of `ode_rhs` at a mean state (left k' at the kink)."""
    kern = params.kernel
    u, v = s.u_bar, s.v_bar
    p = max(s.p_bar, 0.0)
    kk = kern(p)
    kp = kern.derivative(p)
    delta, alpha = params.delta, params.alpha
    return np.array([
        [delta * (kp * u + kk), delta * kp * u],
        [(1.0 - delta) * (kp * u + kk) + kp * v,
         (1.0 - delta) * kp * u + kp * v + kk - alpha],
    ])


def classify_eigenvalues(eigvals: np.ndarray, tol: float = 1e-9) -> str:
    """Planar classification with an honest `degenerate` band around Re = 0."""
    re = np.real(eigvals)
    im = np.imag(eigvals)
    if np.any(np.abs(re) < tol):
        return DEGENERATE
    if np.max(np.abs(im)) > tol:
        return STABLE_SPIRAL if re.max() < 0.0 else UNSTABLE_SPIRAL
    if re.max() < 0.0:
        return STABLE_NODE
    if re.min() > 0.0:
        return UNSTABLE_NODE
    return SADDLE


def classify_ode_equilibrium(params: ModelParams, e: Equilibrium, tol: float = 1e-9) -> str:
    if not e.exists or e.point is None:
        raise ValueError(f"equilibrium {e.label!r} does not exist for alpha = {params.alpha}")
    eigvals = np.linalg.eigvals(ode_jacobian(params, e.point))
    return classify_eigenvalues(eigvals, tol)


def integrate_ode(params: ModelParams, init: MeanState, t_span,
                  *, rtol: float = 1e-8, atol: float = 1e-10,
                  n_snapshots: int | None = None, method: str = "RK45") -> Trajectory:
    """Adaptive embedded-pair integration with dense output attached.

    Snapshots land on the solver's accepted steps unless `n_snapshots`
    requests a uniform grid.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    sigma, alpha, delta = params.kernel.sigma, params.alpha, params.delta

    def rhs(t, y):
        u, v = y
        p = u + v
        if p < 0.0:
            p = 0.0
        kk = 1.0 - p**sigma
        if kk < 0.0:
            kk = 0.0
        return (delta * kk * u, (1.0 - delta) * kk * u - alpha * v + kk * v)

    t_eval = np.linspace(t0, t1, n_snapshots) if n_snapshots else None
    sol = solve_ivp(rhs, (t0, t1), init.as_array(), method=method,
                    rtol=rtol, atol=atol, dense_output=True, t_eval=t_eval)
    if not sol.success:
        last = float(sol.t[-1]) if sol.t.size else t0
        raise IntegrationError(f"ODE integration failed: {sol.message}", last_time=last)
    states = sol.y.T
    return Trajectory(times=sol.t, states=states, masses=states.sum(axis=1), dense=sol.sol)


def slow_manifold_residual(params: ModelParams, s: MeanState, omega_measure: float = 1.0) -> float:
    """M(u, v) = k(p) * |Omega| * p - alpha * v; zero exactly on the slow manifold."""
    p = max(s.p_bar, 0.0)
    return params.kernel(p) * omega_measure * p - params.alpha * s.v_bar


@dataclass(frozen=True, eq=False)
class SlowManifoldCurve:
    """Graph samples (u, v_alpha(u)) of the slow manifold on u in [0, 1]."""

    alpha: float
    u: np.ndarray
    v: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])


def _curve_v_at(kern: ProgenyKernel, alpha: float, u: float, omega: float = 1.0) -> float:
    """Solve k(u+v)*omega*(u+v) = alpha*v for the unique v in [0, 1-u].

    The residual in v is concave and changes sign across [0, 1-u] for
    0 < u < 1, so the bracket always contains exactly one root.  (The root
    can exceed v*(alpha): for larger alpha the curve initially rises above
    the pure-CC level before descending to (1, 0).)
    """
    if u >= 1.0:
        return 0.0
    if u <= 0.0:
        return kern.inverse(alpha / omega)

    def g(v):
        p = u + v
        return kern(p) * omega * p - alpha * v

    return brentq(g, 0.0, 1.0 - u, xtol=1e-15, rtol=8.9e-16)


def slow_manifold_curve(params: ModelParams, u_grid=None, method: str = "root-find") -> SlowManifoldCurve:
    """Sample the slow-manifold graph by root-finding or by its graph ODE.

    Refuses alpha > 1: the pure-CC endpoint would not exist and the model
    analysis does not cover that regime.
    """
    alpha = params.alpha
    if alpha > 1.0:
        raise ValueError(f"slow-manifold curve needs alpha in (0, 1], got {alpha}")
    kern = params.kernel
    u_grid = np.linspace(0.0, 1.0, 101) if u_grid is None else np.asarray(u_grid, dtype=float)
    if np.any(u_grid < 0.0) or np.any(u_grid > 1.0) or np.any(np.diff(u_grid) <= 0.0):
        raise ValueError("u_grid must be increasing within [0, 1]")

    if method == "root-find":
        try:
            v = np.array([_curve_v_at(kern, alpha, u) for u in u_grid])
        except ValueError as exc:
            raise ValueError(f"curve root-finding failed: {exc}") from exc
        return SlowManifoldCurve(alpha, u_grid, v)

    if method == "graph-ode":
        v_star = kern.inverse(alpha)

        def dv_du(u, y):
            p = u + y[0]
            if p < 0.0:
                p = 0.0
            grow = kern.derivative(p) * p + kern(p)
            den = alpha - grow
            if abs(den) < 1e-12:
                raise ValueError(f"graph-ODE denominator vanishes at u = {u}")
            return [grow / den]

        span = (float(u_grid[0]), float(u_grid[-1]))
        y0 = [_curve_v_at(kern, alpha, span[0])] if span[0] > 0.0 else [v_star]
        sol = solve_ivp(dv_du, span, y0, method="DOP853", rtol=1e-12, atol=1e-13,
                        t_eval=u_grid, dense_output=False)
        if not sol.success:
            raise ValueError(f"graph-ODE integration failed: {sol.message}")
        return SlowManifoldCurve(alpha, u_grid, sol.y[0])

    raise ValueError(f"unknown method {method!r}; use 'root-find' or 'graph-ode'")


def manifold_state(params: ModelParams, p_bar: float, omega_measure: float = 1.0) -> MeanState:
    """Closed-form slow-manifold point with prescribed total density.

    On the manifold v = k(p) * |Omega| * p / alpha, so a target p pins the
    point directly.  Feasible masses span [v*(alpha), 1]: below the pure-CC
    level the CSC share would have to be negative.
    """
    alpha = params.alpha
    if not 0.0 <= p_bar <= 1.0:
        raise ValueError(f"manifold masses lie in [0, 1], got {p_bar}")
    v = params.kernel(p_bar) * omega_measure * p_bar / alpha
    u = p_bar - v
    if u < -1e-12:
        raise ValueError(
            f"no manifold point with mass {p_bar}: the curve spans masses "
            f">= {params.kernel.inverse(min(alpha / omega_measure, 1.0)):.6g}")
    return MeanState(max(u, 0.0), v)


def _check_paradox_pair(params_1: ModelParams, params_2: ModelParams) -> None:
    if not (params_1.alpha >= params_2.alpha > 0.0):
        raise ValueError("paradox check expects alpha_1 >= alpha_2 > 0")
    same = (params_1.d == params_2.d and params_1.delta == params_2.delta
            and params_1.kernel == params_2.kernel)
    if not same:
        raise ValueError("the two parameter sets may differ only in alpha")


def paradox_check_ode(params_1: ModelParams, params_2: ModelParams, init: MeanState,
                      horizon: float, theta_grid=64,
                      *, rtol: float = 1e-8, atol: float = 1e-10,
                      settle_tol: float = 1e-4) -> ParadoxReport:
    """Integrate both death rates from one initial state and compare masses.

    After both runs have settled onto their slow manifolds (residual below
    `settle_tol`), the first common settled mass defines the matching times
    (t_a, t_b); the verdict then reports whether the higher-death-rate
    tumor stays strictly larger at every sampled offset theta.
    """
    _check_paradox_pair(params_1, params_2)
    n_out = int(max(801, min(8001, round(horizon * 4) + 1)))
    trajectories = []
    masses = []
    residuals = []
    for prm in (params_1, params_2):
        traj = integrate_ode(prm, init, (0.0, horizon), rtol=rtol, atol=atol,
                             n_snapshots=n_out)
        trajectories.append(traj)
        masses.append(traj.masses)
        residuals.append(np.array([
            abs(slow_manifold_residual(prm, MeanState(*y))) for y in traj.states]))
        times = traj.times
    report = detect_paradox(times, masses[0], residuals[0], masses[1], residuals[1],
                            params_1.alpha, params_2.alpha, theta_grid=theta_grid,
                            settle_tol=settle_tol)
    report.trajectories = (trajectories[0], trajectories[1])
    return report
