"""Shared model types: parameters, states, equilibria, trajectories.

Non-dimensional parameters of the two-population model:
  d      ratio of CSC to CC diffusivity,
  alpha  CC death rate over the common proliferation rate (treatment strength),
  delta  fraction of symmetric CSC divisions,
plus the progeny kernel exponent sigma (inside `kernel`) and the spatial
domain.  The ODE reduction works in mean densities (u_bar, v_bar); the PDE
works in nodal fields (u, v).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .grids import DomainSpec
from .kernel import ProgenyKernel

__all__ = [
    "ModelParams",
    "MeanState",
    "FieldState",
    "Equilibrium",
    "Trajectory",
    "EXTINCTION",
    "PURE_CC",
    "PURE_CSC",
]

# Equilibrium labels
EXTINCTION = "extinction"    # (0, 0)
PURE_CC = "pure-cc"          # (0, v*(alpha)), exists only while k(v) = alpha is solvable
PURE_CSC = "pure-csc"        # (1, 0)


@dataclass(frozen=True)
class ModelParams:
    d: float = 1.0
    alpha: float = 0.5
    delta: float = 0.1
    kernel: ProgenyKernel = field(default_factory=ProgenyKernel)
    domain: DomainSpec = field(default_factory=DomainSpec)

    def __post_init__(self):
        if not np.isfinite(self.d) or self.d <= 0.0:
            raise ValueError(f"d must be positive and finite, got {self.d}")
        if not np.isfinite(self.alpha) or self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if not np.isfinite(self.delta) or not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")

    def with_alpha(self, alpha: float) -> "ModelParams":
        return replace(self, alpha=alpha)

    def with_delta(self, delta: float) -> "ModelParams":
        return replace(self, delta=delta)


@dataclass(frozen=True)
class MeanState:
    """Mean CSC/CC densities for the diffusion-free reduction."""

    u_bar: float
    v_bar: float

    def __post_init__(self):
        if not (np.isfinite(self.u_bar) and np.isfinite(self.v_bar)):
            raise ValueError("mean state components must be finite")

    @property
    def p_bar(self) -> float:
        return self.u_bar + self.v_bar

    def as_array(self) -> np.ndarray:
        return np.array([self.u_bar, self.v_bar])


@dataclass(frozen=True, eq=False)
class FieldState:
    """Nodal CSC/CC densities on a grid (flattened, row-major)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        v = np.asarray(self.v, dtype=float).ravel()
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        if u.shape != v.shape:
            raise ValueError(f"u and v must have matching sizes, got {u.size} and {v.size}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("field values must be finite")

    @property
    def p(self) -> np.ndarray:
        return self.u + self.v


@dataclass(frozen=True)
class Equilibrium:
    label: str
    point: Optional[MeanState]
    exists: bool = True


@dataclass(eq=False)
class Trajectory:
    """Time-stamped orbit: states are (nt, 2) mean states or (nt, 2, n) fields.

    `masses` holds the total tumor mass at each snapshot.  For ODE orbits a
    dense interpolant (time -> state array) may be attached.
    """

    times: np.ndarray
    states: np.ndarray
    masses: np.ndarray
    dense: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("snapshot times must be strictly increasing")
        if not np.all(np.isfinite(self.masses)):
            raise ValueError("masses must be finite")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]
