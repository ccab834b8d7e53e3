"""Mass matching and verdict logic shared by the ODE and PDE paradox checks.

A paradox verdict means: the two tumors (same initial state, death rates
alpha_1 > alpha_2) reached equal total mass at times t_a and t_b after both
had settled onto their slow manifolds, and from that matched instant the
higher-death-rate tumor stayed strictly larger at every sampled offset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

__all__ = ["ParadoxReport", "detect_paradox",
           "VERDICT_PARADOX", "VERDICT_NO_MATCH", "VERDICT_REFUTED", "VERDICT_AMBIGUOUS"]

VERDICT_PARADOX = "paradox"
VERDICT_NO_MATCH = "no-match"
VERDICT_REFUTED = "refuted"
VERDICT_AMBIGUOUS = "ambiguous"


@dataclass(eq=False)
class ParadoxReport:
    alpha_1: float
    alpha_2: float
    verdict: str
    t_a: float = np.nan
    t_b: float = np.nan
    matched_mass: float = np.nan
    theta_window: float = 0.0
    thetas: np.ndarray = field(default_factory=lambda: np.empty(0))
    mass_gaps: np.ndarray = field(default_factory=lambda: np.empty(0))
    note: str = ""
    trajectories: tuple | None = None  # attached by the checkers, not serialized

    def as_dict(self) -> dict:
        return {
            "alpha_1": self.alpha_1,
            "alpha_2": self.alpha_2,
            "verdict": self.verdict,
            "t_a": self.t_a,
            "t_b": self.t_b,
            "matched_mass": self.matched_mass,
            "theta_window": self.theta_window,
            "thetas": list(map(float, self.thetas)),
            "mass_gaps": list(map(float, self.mass_gaps)),
            "note": self.note,
        }


def _settle_time(times, residuals, tol: float):
    """First time the manifold residual drops below tol, by interpolation.

    Interpolating keeps the settle instant (and hence the matched mass)
    independent of the snapshot spacing.
    """
    if residuals[0] < tol:
        return float(times[0])
    below = np.flatnonzero(residuals < tol)
    if below.size == 0:
        return None
    k = int(below[0])
    interp = PchipInterpolator(times, residuals)
    return float(brentq(lambda t: float(interp(t)) - tol, times[k - 1], times[k],
                        xtol=1e-12, rtol=8.9e-16))


def _first_reach(times, masses, interp, t_start: float, target: float):
    """First time >= t_start at which the mass curve reaches `target`.

    Returns (time, locally_monotone) or (None, True) if never reached.
    """
    if float(interp(t_start)) >= target - 1e-13:
        return float(t_start), True
    start = int(np.searchsorted(times, t_start))
    later = np.flatnonzero(masses[start:] >= target)
    if later.size == 0:
        return None, True
    k = start + int(later[0])
    t_hit = brentq(lambda t: float(interp(t)) - target, times[k - 1], times[k],
                   xtol=1e-12, rtol=8.9e-16)
    window = masses[max(k - 2, 0):min(k + 2, len(masses))]
    monotone = bool(np.all(np.diff(window) >= -1e-12))
    return float(t_hit), monotone


def detect_paradox(times, masses_1, residuals_1, masses_2, residuals_2,
                   alpha_1: float, alpha_2: float, theta_grid=64,
                   settle_tol: float = 1e-4, strict_margin: float = 1e-10,
                   reversal_margin: float = 1e-8) -> ParadoxReport:
    """Match settled masses between two runs and test the strict ordering.

    The matching target is the first mass both settled trajectories can
    reach: the larger of the two settle-time masses.  Only this first
    matching pair is examined.  Ordering must hold by `strict_margin` at
    every sampled theta for a paradox verdict; a reversal beyond
    `reversal_margin` refutes; anything in between is reported ambiguous.
    """
    times = np.asarray(times, dtype=float)
    horizon = times[-1]

    ts1 = _settle_time(times, np.asarray(residuals_1), settle_tol)
    ts2 = _settle_time(times, np.asarray(residuals_2), settle_tol)
    if ts1 is None or ts2 is None:
        lagging = "first" if ts1 is None else "second"
        return ParadoxReport(alpha_1, alpha_2, VERDICT_NO_MATCH,
                             note=f"the {lagging} run never settled onto its slow "
                                  f"manifold within the horizon")

    f1 = PchipInterpolator(times, masses_1)
    f2 = PchipInterpolator(times, masses_2)
    m_star = max(float(f1(ts1)), float(f2(ts2)))

    t_a, mono_a = _first_reach(times, masses_1, f1, ts1, m_star)
    t_b, mono_b = _first_reach(times, masses_2, f2, ts2, m_star)
    if t_a is None or t_b is None:
        return ParadoxReport(alpha_1, alpha_2, VERDICT_NO_MATCH,
                             note=f"masses never matched at {m_star:.6g} within the horizon")

    theta_max = horizon - max(t_a, t_b)
    if theta_max <= 0.0:
        return ParadoxReport(alpha_1, alpha_2, VERDICT_NO_MATCH, t_a=t_a, t_b=t_b,
                             matched_mass=m_star,
                             note="masses matched only at the end of the horizon")

    if np.isscalar(theta_grid):
        thetas = theta_max * np.geomspace(1e-3, 1.0, int(theta_grid))
    else:
        thetas = np.asarray(theta_grid, dtype=float)
        if thetas.size == 0 or np.any(thetas <= 0.0) or np.any(thetas > theta_max):
            raise ValueError(f"explicit theta grid must lie in (0, {theta_max:.6g}]")

    gaps = f1(t_a + thetas) - f2(t_b + thetas)
    strict = gaps > strict_margin

    note = ""
    if not (mono_a and mono_b):
        verdict = VERDICT_AMBIGUOUS
        note = "total mass was not monotone near the matching time"
    elif bool(np.all(strict)):
        verdict = VERDICT_PARADOX
    elif bool(np.any(gaps < -reversal_margin)):
        verdict = VERDICT_REFUTED
    else:
        verdict = VERDICT_AMBIGUOUS
        note = "ordering within solver precision of equality at some offsets"

    if verdict == VERDICT_PARADOX:
        window = float(thetas[-1])
    else:
        ahead = np.flatnonzero(~strict)
        window = float(thetas[ahead[0] - 1]) if ahead.size and ahead[0] > 0 else 0.0

    return ParadoxReport(alpha_1, alpha_2, verdict, t_a=t_a, t_b=t_b,
                         matched_mass=float(m_star), theta_window=window,
                         thetas=thetas, mass_gaps=np.asarray(gaps), note=note)
