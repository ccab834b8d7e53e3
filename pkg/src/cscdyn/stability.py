"""Linearized spectral analysis at constant states and along the slow manifold.

Perturbations about a constant state separate into Neumann-Laplacian modes.
At a slow-manifold point (u_M, v_M) with p_M = u_M + v_M, mode j carries
the eigenvalue pair

    lambda_1(j) = -mu_j * d
    lambda_2(j) = |Omega| * k'(p_M) * p_M - mu_j + |Omega| * k(p_M) - alpha

whose negativity for all j >= 1 makes the manifold attracting for the fast
semiflow.  Extinction is the one state whose verdict depends on the domain:
it is diffusion-stabilized exactly when both -mu_1 * d + k(0) and
-mu_1 + k(0) - alpha are negative, mu_1 the first non-zero eigenvalue.
These verdicts concern spatially non-constant perturbations; the constant
mode is the mean ODE and is classified by `classify_ode_equilibrium`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grids import DomainSpec, Grid, laplacian_matrix, neumann_eigenvalues
from .model import EXTINCTION, Equilibrium, FieldState, MeanState, ModelParams
from .ode import (
    DEGENERATE,
    SADDLE,
    STABLE_NODE,
    SlowManifoldCurve,
    _curve_v_at,
    slow_manifold_residual,
)
from .pde import integrate_pde

__all__ = [
    "StabilityReport",
    "HyperbolicityMargin",
    "mode_eigenvalues",
    "lambda2_substituted",
    "classify_pde_equilibrium",
    "normal_hyperbolicity_margin",
    "assembled_fast_linearization",
    "distance_to_polyline",
    "manifold_distance_scaling",
]


@dataclass(eq=False)
class StabilityReport:
    """Per-mode eigenvalues plus the classification they imply."""

    equilibrium: Equilibrium
    classification: str
    modes: list[tuple[int, float, float, float]]
    conditions: dict[str, float]


def mode_eigenvalues(params: ModelParams, point: MeanState, mu_j: float,
                     omega_measure: float = 1.0, *, manifold_tol: float = 1e-8):
    """Eigenvalue pair of mode mu_j at a slow-manifold point."""
    if mu_j < 0.0:
        raise ValueError("Neumann eigenvalues are nonnegative")
    resid = slow_manifold_residual(params, point, omega_measure)
    if abs(resid) >= manifold_tol:
        raise ValueError(f"point ({point.u_bar}, {point.v_bar}) is off the slow "
                         f"manifold: |M| = {abs(resid):.3e} >= {manifold_tol:g}")
    kern = params.kernel
    p = point.p_bar
    lam1 = -mu_j * params.d
    lam2 = (omega_measure * kern.derivative(p) * p - mu_j
            + omega_measure * kern(p) - params.alpha)
    return lam1, lam2


def lambda2_substituted(params: ModelParams, point: MeanState, mu_j: float,
                        omega_measure: float = 1.0) -> float:
    """lambda_2 with |Omega|*k(p) - alpha eliminated through the manifold relation.

    On the manifold |Omega| * k(p) * p = alpha * v, so
    |Omega| * k(p) - alpha = -alpha * u / p, giving

        lambda_2 = |Omega| * k'(p_M) * p_M - mu_j - alpha * u_M / p_M,

    manifestly negative: the transverse decay rate never vanishes on the
    curve.  Needs p > 0 (every curve point qualifies).
    """
    p = point.p_bar
    if p <= 0.0:
        raise ValueError("substituted form needs p > 0")
    return (omega_measure * params.kernel.derivative(p) * p - mu_j
            - params.alpha * point.u_bar / p)


def classify_pde_equilibrium(params: ModelParams, e: Equilibrium, domain: DomainSpec,
                             *, j_max: int = 10, degenerate_band: float = 1e-9) -> StabilityReport:
    """Stability of a constant state under the Neumann semiflow.

    Both non-trivial states are asymptotically stable.  Extinction is a
    stable node iff -mu_1*d + k(0) < 0 and -mu_1 + k(0) - alpha < 0, else a
    saddle; a condition inside the degenerate band is reported as such,
    never silently classified.
    """
    if not e.exists or e.point is None:
        raise ValueError(f"equilibrium {e.label!r} does not exist for alpha = {params.alpha}")
    mu = neumann_eigenvalues(domain, j_max + 1)
    k0 = params.kernel(0.0)

    if e.label == EXTINCTION:
        modes = [(j, float(mu[j]), -mu[j] * params.d + k0, -mu[j] + k0 - params.alpha)
                 for j in range(1, j_max + 1)]
        c1 = -mu[1] * params.d + k0
        c2 = -mu[1] + k0 - params.alpha
        conditions = {"-mu1*d + k0": float(c1), "-mu1 + k0 - alpha": float(c2)}
        worst = max(c1, c2)
        if abs(c1) <= degenerate_band or abs(c2) <= degenerate_band:
            classification = DEGENERATE
        elif worst < 0.0:
            classification = STABLE_NODE
        else:
            classification = SADDLE
    else:
        modes = []
        for j in range(1, j_max + 1):
            lam1, lam2 = mode_eigenvalues(params, e.point, float(mu[j]))
            modes.append((j, float(mu[j]), lam1, lam2))
        leading = max(max(lam1, lam2) for _, _, lam1, lam2 in modes)
        conditions = {"lambda1(mu1)": modes[0][2], "lambda2(mu1)": modes[0][3]}
        if abs(leading) <= degenerate_band:
            classification = DEGENERATE
        elif leading < 0.0:
            classification = STABLE_NODE
        else:
            classification = SADDLE
    return StabilityReport(e, classification, modes, conditions)


@dataclass(eq=False)
class HyperbolicityMargin:
    """Smallest transverse decay rate |Re lambda| along a manifold curve."""

    margins: np.ndarray
    infimum: float
    location: tuple[float, float]

    @property
    def positive(self) -> bool:
        return bool(self.infimum > 0.0)


def normal_hyperbolicity_margin(params: ModelParams, curve: SlowManifoldCurve,
                                domain: DomainSpec, j_max: int = 10) -> HyperbolicityMargin:
    """Per-point minimum of |Re lambda| over modes j = 1..j_max.

    Both eigenvalue branches move further left as mu_j grows, so small j
    dominates; j_max = 10 is plenty and is exposed for paranoia.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    mu = neumann_eigenvalues(domain, j_max + 1)[1:]
    margins = np.empty(curve.u.size)
    for i, (u, v) in enumerate(zip(curve.u, curve.v)):
        point = MeanState(u, v)
        worst = np.inf
        for mu_j in mu:
            lam1, lam2 = mode_eigenvalues(params, point, float(mu_j), manifold_tol=1e-6)
            worst = min(worst, abs(lam1), abs(lam2))
        margins[i] = worst
    if np.any(margins <= 0.0):
        i_bad = int(np.argmin(margins))
        raise ValueError(f"normal hyperbolicity fails at curve point "
                         f"({curve.u[i_bad]:.6g}, {curve.v[i_bad]:.6g})")
    i_min = int(np.argmin(margins))
    return HyperbolicityMargin(margins, float(margins[i_min]),
                               (float(curve.u[i_min]), float(curve.v[i_min])))


def assembled_fast_linearization(params: ModelParams, grid: Grid, point: MeanState) -> np.ndarray:
    """Dense 2n x 2n linearization of the fast system at a constant state.

    Assembled directly from the discrete Laplacian, the pointwise reaction
    coefficients, and the quadrature row of the non-local term; serves as
    the independent spectral oracle for the per-mode formula.
    """
    n = grid.n_nodes
    omega = grid.measure
    lap = laplacian_matrix(grid)
    kern = params.kernel
    p = point.p_bar
    kk = kern(p)
    local = kern.derivative(p) * omega * p          # from k'(p) dp * Int(p)
    quad_row = kk * np.outer(np.ones(n), grid.weights)  # from k(p) * Int(dp)
    eye = np.eye(n)
    a = np.zeros((2 * n, 2 * n))
    a[:n, :n] = params.d * lap
    a[n:, :n] = local * eye + quad_row
    a[n:, n:] = lap - params.alpha * eye + local * eye + quad_row
    return a


def distance_to_polyline(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to a polyline given by its vertices."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    a = vertices[:-1]
    ab = vertices[1:] - a
    denom = np.maximum((ab**2).sum(axis=1), 1e-300)
    ap = points[:, None, :] - a[None, :, :]
    t = np.clip((ap * ab[None, :, :]).sum(axis=2) / denom, 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d2 = ((points[:, None, :] - proj) ** 2).sum(axis=2)
    return np.sqrt(d2.min(axis=1))


def _manifold_polyline(params: ModelParams, omega: float, n_points: int) -> np.ndarray:
    u = np.linspace(0.0, 1.0, n_points)
    v = np.array([_curve_v_at(params.kernel, params.alpha, x, omega) for x in u])
    return np.column_stack([u, v])


def manifold_distance_scaling(params: ModelParams, deltas, grid: Grid, init: FieldState,
                              settle_time: float, horizon: float,
                              *, curve_points: int = 1001, n_snapshots: int = 401,
                              safety: float = 0.9, workers: int = 2) -> np.ndarray:
    """Sup distance of the mean state to the slow manifold after settling, per delta.

    All runs share the initial field; the returned array is expected to be
    non-increasing as delta decreases (the perturbed invariant manifold
    hugs the unperturbed one ever closer).
    """
    deltas = [float(x) for x in deltas]
    if any(x < 0.0 for x in deltas) or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be nonnegative and strictly decreasing")
    if not 0.0 <= settle_time < horizon:
        raise ValueError("need 0 <= settle_time < horizon")
    omega = grid.measure
    polyline = _manifold_polyline(params, omega, curve_points)
    times = np.linspace(0.0, horizon, n_snapshots)

    def sup_distance(delta: float) -> float:
        traj = integrate_pde(params.with_delta(delta), grid, init, (0.0, horizon),
                             output_times=times, safety=safety)
        mean_u = traj.states[:, 0, :] @ grid.weights / omega
        mean_v = traj.states[:, 1, :] @ grid.weights / omega
        settled = traj.times >= settle_time
        dists = distance_to_polyline(np.column_stack([mean_u, mean_v])[settled], polyline)
        return float(dists.max())

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return np.array(list(pool.map(sup_distance, deltas)))
