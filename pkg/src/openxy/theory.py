"""Closed-form infinite-chain predictions used as fit references.

The quasi-particle dispersion of the bulk chain is
``eps(phi) = sqrt((cos phi - h)^2 + gamma^2 sin^2 phi)``.  Its band
structure changes character at the critical field ``h_c = 1 - gamma^2``:

- ``h < h_c``: the band minimum sits at ``phi* = arccos(h / h_c)``
  and long-range magnetic correlations appear in the driven chain;
- ``h > h_c``: the minimum moves to phi = 0, correlations decay with
  localization length ``xi = 1 / (4 arccosh(h / h_c))``.

Near the transition, ``phi* ~ sqrt(2 (h_c - h)/h_c)`` from below and
``1/xi ~ 4 sqrt(2 (h - h_c)/h_c)`` from above; both helpers are
reported for scaling fits.  The exact lines gamma = 0 and h = 0 are
not part of the long-range phase and are flagged accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["TheoryPoint", "dispersion", "theory_point"]

CRITICAL_TOL = 1e-12


def dispersion(gamma: float, h: float, phi: float) -> float:
    """Quasi-particle dispersion eps(phi) of the infinite chain."""
    return math.hypot(math.cos(phi) - h, gamma * math.sin(phi))


@dataclass(frozen=True)
class TheoryPoint:
    """Phase-diagram data at one (gamma, h).

    Parameters
    ----------
    h_c : float
        Critical field ``1 - gamma**2``, clamped at zero.
    phi_star : float
        Band-minimum momentum in [0, pi]; zero for h >= h_c.
    xi : float
        Localization length for h > h_c, ``math.inf`` otherwise.
    regime : str
        One of "LRMC", "critical", "short-range".
    phi_star_approx : float
        Leading critical scaling of phi_star (NaN for h > h_c).
    xi_inv_approx : float
        Leading critical scaling of 1/xi (NaN for h < h_c).
    extrapolated : bool
        True when gamma > 1, outside the mapped phase diagram.
    """

    gamma: float
    h: float
    h_c: float
    phi_star: float
    xi: float
    regime: str
    phi_star_approx: float
    xi_inv_approx: float
    extrapolated: bool


def theory_point(gamma: float, h: float) -> TheoryPoint:
    """Evaluate h_c, phi*, xi, and the regime label at one point.

    Parameters
    ----------
    gamma : float
        Anisotropy, >= 0.  Values above 1 are allowed but flagged
        extrapolated (h_c clamps at 0 there).
    h : float
        Magnetic field, >= 0.
    """
    if gamma < 0.0:
        raise ValueError(f"negative gamma: {gamma}")
    if h < 0.0:
        raise ValueError(f"negative h: {h}")
    h_c = max(0.0, 1.0 - gamma * gamma)

    if h < h_c:
        phi_star = math.acos(h / h_c)
        xi = math.inf
    else:
        phi_star = 0.0
        if h > h_c:
            ratio = h / h_c if h_c > 0.0 else math.inf
            xi = 0.0 if math.isinf(ratio) else 1.0 / (4.0 * math.acosh(ratio))
        else:
            xi = math.inf

    if abs(h - h_c) <= CRITICAL_TOL:
        regime = "critical"
    elif h < h_c:
        regime = "LRMC"
    else:
        regime = "short-range"
    # exact boundary lines carry no long-range order
    if regime == "LRMC" and (gamma == 0.0 or h == 0.0):
        regime = "short-range"

    if h_c > 0.0 and h <= h_c:
        phi_star_approx = math.sqrt(2.0 * (h_c - h) / h_c)
    else:
        phi_star_approx = math.nan
    if h_c > 0.0 and h >= h_c:
        xi_inv_approx = 4.0 * math.sqrt(2.0 * (h - h_c) / h_c)
    else:
        xi_inv_approx = math.nan

    return TheoryPoint(gamma=gamma, h=h, h_c=h_c, phi_star=phi_star, xi=xi,
                       regime=regime, phi_star_approx=phi_star_approx,
                       xi_inv_approx=xi_inv_approx, extrapolated=gamma > 1.0)
