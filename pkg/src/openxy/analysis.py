"""Least-squares fits that turn raw observables into scalar claims.

Three fit kinds share one result type: power laws ``y ~ A x^-p``
(fit in log-log coordinates), exponential decays ``y ~ A e^-x/xi``
(fit in lin-log coordinates), and straight lines.  Decay fits drop
points with |y| below 1e-14, the round-off floor of the four-point
products feeding them.  Exponent uncertainties come from a jackknife
over points and are reported, not asserted.

`collapse_check` scores finite-size data collapse: profiles from
different sizes are rescaled to (r/n, n^nu C(r)) and compared by mean
squared log-deviation on their common support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FitResult",
    "CollapseResult",
    "fit_power",
    "fit_exponential",
    "fit_linear",
    "collapse_check",
]

DECAY_FLOOR = 1e-14


@dataclass(frozen=True)
class FitResult:
    """Outcome of one least-squares fit.

    Parameters
    ----------
    kind : str
        "power", "exponential", or "linear".
    params : tuple of float
        (amplitude, p) for power laws ``y ~ A x^-p``;
        (amplitude, rate) for exponentials ``y ~ A e^-rate*x``;
        (intercept, slope) for lines.
    r_squared : float
        Coefficient of determination in the fit coordinates.
    window : tuple of float
        (lo, hi) of the abscissa actually used.
    npoints : int
        Number of points fitted.
    stderr : float
        Jackknife standard error of the second parameter.
    """

    kind: str
    params: tuple
    r_squared: float
    window: tuple
    npoints: int
    stderr: float

    @property
    def exponent(self) -> float:
        """Decay exponent p of a power-law fit."""
        if self.kind != "power":
            raise AttributeError(f"no exponent on a {self.kind} fit")
        return self.params[1]

    @property
    def xi_fit(self) -> float:
        """Decay length 1/rate of an exponential fit."""
        if self.kind != "exponential":
            raise AttributeError(f"no decay length on a {self.kind} fit")
        return 1.0 / self.params[1]

    @property
    def slope(self) -> float:
        if self.kind != "linear":
            raise AttributeError(f"no slope on a {self.kind} fit")
        return self.params[1]

    @property
    def intercept(self) -> float:
        if self.kind != "linear":
            raise AttributeError(f"no intercept on a {self.kind} fit")
        return self.params[0]


def _line_fit(u: np.ndarray, v: np.ndarray) -> tuple[float, float, float]:
    """OLS of v on u; returns (intercept, slope, r_squared)."""
    if float(np.ptp(u)) == 0.0:
        raise ValueError("degenerate abscissa: all x equal")
    slope, intercept = np.polyfit(u, v, 1)
    resid = v - (intercept + slope * u)
    sstot = float(np.sum((v - v.mean()) ** 2))
    ssres = float(np.sum(resid ** 2))
    r2 = 1.0 if sstot == 0.0 else 1.0 - ssres / sstot
    return float(intercept), float(slope), float(min(max(r2, 0.0), 1.0))


def _jackknife_slope(u: np.ndarray, v: np.ndarray) -> float:
    k = u.size
    if k < 3:
        return 0.0
    slopes = np.empty(k)
    for i in range(k):
        m = np.arange(k) != i
        slopes[i] = np.polyfit(u[m], v[m], 1)[0]
    return float(np.sqrt((k - 1) / k * np.sum((slopes - slopes.mean()) ** 2)))


def _decay_points(xs, ys, window) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    keep = np.abs(y) >= DECAY_FLOOR
    if window is not None:
        lo, hi = window
        keep &= (x >= lo) & (x <= hi)
    x, y = x[keep], y[keep]
    if x.size < 3:
        raise ValueError(
            f"empty window: {x.size} usable points, need at least 3")
    if np.any(y <= 0.0):
        raise ValueError("nonpositive data in fit window")
    return x, y


def fit_power(xs, ys, window=None) -> FitResult:
    """Fit ``y ~ A x^-p`` by least squares on (log x, log y).

    Parameters
    ----------
    window : (float, float), optional
        Abscissa range to fit over; all points by default.  Points
        with |y| below 1e-14 are dropped before anything else.
    """
    x, y = _decay_points(xs, ys, window)
    if np.any(x <= 0.0):
        raise ValueError("nonpositive data in fit window")
    u, v = np.log(x), np.log(y)
    intercept, slope, r2 = _line_fit(u, v)
    return FitResult(kind="power", params=(float(np.exp(intercept)), -slope),
                     r_squared=r2, window=(float(x.min()), float(x.max())),
                     npoints=int(x.size), stderr=_jackknife_slope(u, v))


def fit_exponential(xs, ys, window=None) -> FitResult:
    """Fit ``y ~ A e^-x/xi`` by least squares on (x, log y).

    The decay length is ``xi_fit = 1/rate`` with rate the negated
    slope of the lin-log line.
    """
    x, y = _decay_points(xs, ys, window)
    u, v = x, np.log(y)
    intercept, slope, r2 = _line_fit(u, v)
    return FitResult(kind="exponential", params=(float(np.exp(intercept)), -slope),
                     r_squared=r2, window=(float(x.min()), float(x.max())),
                     npoints=int(x.size), stderr=_jackknife_slope(u, v))


def fit_linear(xs, ys) -> FitResult:
    """Ordinary least squares line; params are (intercept, slope)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 3:
        raise ValueError(f"empty window: {x.size} points, need at least 3")
    intercept, slope, r2 = _line_fit(x, y)
    return FitResult(kind="linear", params=(intercept, slope), r_squared=r2,
                     window=(float(x.min()), float(x.max())),
                     npoints=int(x.size), stderr=_jackknife_slope(x, y))


@dataclass(frozen=True)
class CollapseResult:
    """Collapse quality at one nu, and the best nu over a grid if given."""

    mismatch: float
    best_nu: float | None
    best_mismatch: float | None


def collapse_check(profiles, nu: float, nu_grid=None,
                   npoints: int = 64) -> CollapseResult:
    """Score the finite-size collapse of correlation profiles.

    Each (n, profile) entry is rescaled to ``x = r/n`` and
    ``y = n^nu C(r)``; the score is the mean squared deviation of
    log|y| between curves, interpolated on their common x support.

    Parameters
    ----------
    profiles : list of (int, list of (r, C))
        At least two sizes.
    nu : float
        Rescaling exponent to score.
    nu_grid : sequence of float, optional
        When given, also report the grid value minimizing the score.

    Raises
    ------
    ValueError
        "no common support" when the rescaled abscissas do not overlap.
    """
    if len(profiles) < 2:
        raise ValueError(f"need at least 2 profiles, got {len(profiles)}")
    curves = []
    for n, prof in profiles:
        r = np.asarray([p[0] for p in prof], dtype=float)
        c = np.asarray([p[1] for p in prof], dtype=float)
        keep = np.abs(c) >= DECAY_FLOOR
        r, c = r[keep], c[keep]
        if r.size < 2:
            raise ValueError("no common support: profile too sparse")
        order = np.argsort(r)
        curves.append((float(n), np.log(r[order] / n), c[order]))

    lo = max(lx.min() for _, lx, _ in curves)
    hi = min(lx.max() for _, lx, _ in curves)
    if hi <= lo:
        raise ValueError("no common support between rescaled profiles")
    grid = np.linspace(lo, hi, npoints)

    def score(exponent: float) -> float:
        logy = [np.interp(grid, lx, exponent * np.log(n) + np.log(np.abs(c)))
                for n, lx, c in curves]
        total, count = 0.0, 0
        for i in range(len(logy)):
            for j in range(i + 1, len(logy)):
                total += float(np.mean((logy[i] - logy[j]) ** 2))
                count += 1
        return total / count

    best_nu = best_mis = None
    if nu_grid is not None:
        scores = [(score(g), float(g)) for g in nu_grid]
        best_mis, best_nu = min(scores)
    return CollapseResult(mismatch=score(nu), best_nu=best_nu,
                          best_mismatch=best_mis)
