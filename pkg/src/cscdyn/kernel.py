"""Progeny-contribution kernel: the saturation factor multiplying birth terms.

The kernel family is k(p) = max(1 - p**sigma, 0) with exponent sigma >= 1.
It is 1 at zero total density, strictly decreasing on [0, 1), and exactly
zero at or above total density 1, which is what shuts growth off once the
tissue is full.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ProgenyKernel"]


def _validated_density(p):
    """Return p as float or ndarray, rejecting negative or non-finite values."""
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("total density must be finite")
    if np.any(arr < 0.0):
        raise ValueError("total density must be >= 0 (negative values usually "
                         "mean the calling solver lost positivity)")
    return arr


@dataclass(frozen=True)
class ProgenyKernel:
    """Kernel k(p) = max(1 - p**sigma, 0), sigma >= 1.

    Works elementwise on arrays; scalar in, scalar out.
    """

    sigma: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 1.0:
            raise ValueError(f"sigma must be finite and >= 1, got {self.sigma}")

    def __call__(self, p):
        arr = _validated_density(p)
        val = np.maximum(1.0 - arr ** self.sigma, 0.0)
        return float(val) if np.isscalar(p) or np.ndim(p) == 0 else val

    def derivative(self, p):
        """One-sided-consistent derivative k'(p).

        -sigma * p**(sigma-1) below the cutoff, 0 above it.  At the kink
        p = 1 the left-sided value -sigma is returned: the dynamics of
        interest live in p <= 1 and the linearizations at the pure-CSC
        state evaluate k' exactly there.
        """
        arr = _validated_density(p)
        below = arr <= 1.0
        val = np.where(below, -self.sigma * np.where(below, arr, 0.0) ** (self.sigma - 1.0), 0.0)
        return float(val) if np.isscalar(p) or np.ndim(p) == 0 else val

    def inverse(self, a):
        """Density p in [0, 1] at which k(p) equals the rate a.

        Only rates in (0, 1] are attainable: k maps [0, 1] onto [0, 1].
        For a > 1 there is no solution (a death rate above the maximum
        proliferation rate; the pure-CC equilibrium does not exist) and a
        ValueError is raised.  a = 1 returns 0, the boundary case where
        the pure-CC state merges with extinction.
        """
        a = float(a)
        if not np.isfinite(a) or a <= 0.0:
            raise ValueError(f"target rate must be finite and > 0, got {a}")
        if a > 1.0:
            raise ValueError(f"k(p) = {a} has no solution: the kernel range is [0, 1]")
        return (1.0 - a) ** (1.0 / self.sigma)
