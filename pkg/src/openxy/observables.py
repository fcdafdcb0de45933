"""Steady-state expectation values from a normal-mode basis.

Everything here reduces to the two-point table G, the matrix of
contractions ``G_{jk} = <1|c_j c_k|NESS>`` over Majorana labels
j, k in 1..2n.  The physical correlation is ``tr(w_j w_k rho) =
delta_{jk} + G_{jk}``; higher moments follow from Wick's theorem as
Pfaffians of (delta + G) restricted to the requested labels.

Component addressing.  The structure matrix packs four map components
per site, in the order (left w_{2s-1}, left w_{2s}, right w_{2s-1},
right w_{2s}) for site s.  The left/right map components of Majorana
label j therefore sit at rows ``4*((j-1)//2) + (j-1)%2`` and two
below it (1-based j).  The two-point formula contracts even-indexed
eigenvectors against odd-indexed ones at exactly those rows; getting
this addressing wrong produces O(1) errors against the dense oracle.

Spin observables in terms of G (1-based site labels l, m):

- ``<sigma^z_m> = -i G_{2m-1,2m}``
- connected correlator ``C_{l,m} = G_{2l-1,2m-1} G_{2l,2m}
  - G_{2l-1,2m} G_{2l,2m-1}`` for l != m, diagonal set to zero.

The correlator sign is fixed by the Wick expansion of
``tr(sigma^z_l sigma^z_m rho) - <sigma^z_l><sigma^z_m>`` and is
cross-checked against the dense oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .spectral import NormalModeBasis

__all__ = [
    "ObservablesError",
    "TwoPointTable",
    "CorrelationMatrix",
    "two_point_table",
    "magnetization",
    "spin_spin_matrix",
    "majorana_moment",
    "distance_profile",
    "residual_correlator",
]


class ObservablesError(RuntimeError):
    """Structural property of an observable failed its tolerance."""


def component_rows(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows of the left/right map components per Majorana label.

    Returns two int arrays of length 2n; entry j (0-based label) is the
    row carrying the left (resp. right) multiplication component of
    Majorana ``w_{j+1}`` in the 4n-component site-packed layout.
    """
    j = np.arange(2 * n)
    left = 4 * (j // 2) + (j % 2)
    return left, left + 2


@dataclass(frozen=True)
class TwoPointTable:
    """Two-point contractions G over Majorana labels.

    Parameters
    ----------
    g : ndarray
        2n x 2n complex matrix, ``G_{jk}`` at (0-based) ``[j-1, k-1]``,
        projected onto the exact structure (purely imaginary and
        antisymmetric off the diagonal, zero diagonal).
    re_residual, anti_residual : float
        Raw deviations from that structure before projection; they
        measure round-off amplification in the eigenbasis.
    warnings : tuple of str
        Ill-conditioned pair flags from the basis, plus a note when a
        raw residual exceeds the reporting tolerance.
    """

    g: np.ndarray
    re_residual: float = 0.0
    anti_residual: float = 0.0
    warnings: tuple = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return self.g.shape[0] // 2


@dataclass(frozen=True)
class CorrelationMatrix:
    """Connected sigma^z correlator C_{l,m}, diagonal zero by convention."""

    c: np.ndarray

    @property
    def n(self) -> int:
        return self.c.shape[0]


def two_point_table(basis: NormalModeBasis, *, atol: float = 1e-9,
                    guard_tol: float = 1e-6) -> TwoPointTable:
    """Contract the eigenvector basis into the two-point table G.

    ``G_{jk} = (1/2) sum_m (v_{2m,Lj} v_{2m-1,Lk} - v_{2m,Rj} v_{2m-1,Rk}
    - i v_{2m,Rj} v_{2m-1,Lk} - i v_{2m,Lj} v_{2m-1,Rk})`` where Lj/Rj
    are the left/right map rows of label j (see `component_rows`).

    In exact arithmetic the off-diagonal of G is purely imaginary and
    antisymmetric and the diagonal vanishes; the raw contraction is
    projected onto that structure after measuring its deviation.

    Parameters
    ----------
    basis : NormalModeBasis
        Paired, bilinearly normalized eigenvectors.
    atol : float
        Reporting tolerance: raw deviations above it are attached as
        warnings (round-off grows near criticality at large n).
    guard_tol : float
        Hard limit; raw deviations above it indicate a defective
        basis and raise instead.

    Raises
    ------
    ObservablesError
        If a raw structural deviation exceeds `guard_tol`.
    """
    n = basis.n
    odd = basis.odd  # columns v_1, v_3, ...
    even = basis.even  # columns v_2, v_4, ...
    rl, rr = component_rows(n)
    el, er = even[rl, :], even[rr, :]
    ol, or_ = odd[rl, :], odd[rr, :]
    g = 0.5 * (el @ ol.T - er @ or_.T - 1j * (er @ ol.T) - 1j * (el @ or_.T))

    off = ~np.eye(2 * n, dtype=bool)
    diag_mag = float(np.max(np.abs(np.diagonal(g))))
    re_resid = max(float(np.max(np.abs(g.real[off]))), diag_mag)
    anti_resid = float(np.max(np.abs((g + g.T)[off])))
    if re_resid > guard_tol or anti_resid > guard_tol:
        raise ObservablesError(
            f"structure residuals (re {re_resid:.3e}, antisym {anti_resid:.3e}) "
            f"exceed {guard_tol:.1e}; the basis is not usable")

    warnings = [
        f"ill-conditioned pair {k}: bilinear product below threshold"
        for k in basis.ill_conditioned
    ]
    if re_resid > atol or anti_resid > atol:
        warnings.append(
            f"structure residuals (re {re_resid:.3e}, antisym {anti_resid:.3e}) "
            f"above reporting tolerance {atol:.1e}")

    g = 0.5j * (g.imag - g.imag.T)
    return TwoPointTable(g=g, re_residual=re_resid, anti_residual=anti_resid,
                         warnings=tuple(warnings))


def magnetization(table: TwoPointTable, *, atol: float = 1e-9) -> list[float]:
    """Site-resolved ``<sigma^z_m> = -i G_{2m-1,2m}``.

    Returns a list of n reals; raises ObservablesError if any value has
    imaginary residual above `atol` or leaves [-1, 1] by more than it.
    """
    g = table.g
    vals = -1j * np.diagonal(g[0::2, 1::2])
    imag = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    if imag > atol:
        raise ObservablesError(
            f"magnetization imaginary residual {imag:.3e} exceeds {atol:.1e}")
    out = vals.real
    if out.size and float(np.max(np.abs(out))) > 1.0 + atol:
        raise ObservablesError("magnetization outside [-1, 1]")
    return [float(v) for v in out]


def spin_spin_matrix(table: TwoPointTable, *, rtol: float = 1e-9) -> CorrelationMatrix:
    """Wick-factorized connected sigma^z-sigma^z correlator.

    For l != m, ``C_{l,m} = G_{2l-1,2m-1} G_{2l,2m} - G_{2l-1,2m} G_{2l,2m-1}``;
    the diagonal is set to zero (the defining product formula is stated
    for distinct sites only).  The result must be real within `rtol`
    (relative to the largest magnitude); imaginary parts are discarded
    after the check and the symmetric average is stored, making the
    l <-> m symmetry exact.
    """
    g = table.g
    goo = g[0::2, 0::2]
    gee = g[1::2, 1::2]
    goe = g[0::2, 1::2]
    geo = g[1::2, 0::2]
    c = goo * gee - goe * geo
    scale = max(float(np.max(np.abs(c))), 1.0)
    imag = float(np.max(np.abs(c.imag)))
    if imag > rtol * scale:
        raise ObservablesError(
            f"correlator imaginary residual {imag:.3e} exceeds {rtol:.1e} (rel)")
    out = c.real.copy()
    np.fill_diagonal(out, 0.0)
    sym = float(np.max(np.abs(out - out.T)))
    if sym > rtol * scale:
        raise ObservablesError(
            f"correlator symmetry residual {sym:.3e} exceeds {rtol:.1e} (rel)")
    out = (out + out.T) / 2.0
    return CorrelationMatrix(c=out)


def _pfaffian_recursive(a: np.ndarray) -> complex:
    m = a.shape[0]
    if m == 0:
        return 1.0 + 0.0j
    if m == 2:
        return complex(a[0, 1])
    total = 0.0 + 0.0j
    rest = np.arange(1, m)
    for idx in range(1, m):
        keep = rest[rest != idx]
        minor = a[np.ix_(keep, keep)]
        term = a[0, idx] * _pfaffian_recursive(minor)
        total += term if idx % 2 == 1 else -term
    return total


def _pfaffian_parlett_reid(a: np.ndarray) -> complex:
    a = a.astype(complex, copy=True)
    m = a.shape[0]
    pf = 1.0 + 0.0j
    for k in range(0, m - 1, 2):
        piv = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if a[piv, k] == 0.0:
            return 0.0 + 0.0j
        if piv != k + 1:
            a[[k + 1, piv], :] = a[[piv, k + 1], :]
            a[:, [k + 1, piv]] = a[:, [piv, k + 1]]
            pf = -pf
        pf *= a[k, k + 1]
        if k + 2 < m:
            # congruence with E = I - sum_i t_i e_{k+2+i} e_{k+1}^T zeroes
            # row k and column k past the pivot; det(E) = 1
            t = a[k, k + 2:] / a[k, k + 1]
            u = a[k + 1, k + 2:]
            a[k + 2:, k + 2:] += np.outer(u, t) - np.outer(t, u)
    return pf


def pfaffian(a: np.ndarray) -> complex:
    """Pfaffian of an even-dimensional antisymmetric matrix.

    Recursive first-row expansion up to 8x8, Parlett-Reid elimination
    with partial pivoting above.
    """
    m = a.shape[0]
    if m % 2:
        return 0.0 + 0.0j
    if m <= 8:
        return _pfaffian_recursive(a)
    return _pfaffian_parlett_reid(a)


def majorana_moment(table: TwoPointTable, labels: Sequence[int]) -> complex:
    """Full 2k-point Majorana moment ``tr(w_{j_1} ... w_{j_2k} rho)``.

    Parameters
    ----------
    labels : sequence of int
        Distinct 1-based Majorana labels, even count, at most 12.

    Returns
    -------
    complex
        Pfaffian of the antisymmetric matrix with (a, b) entry
        ``tr(w_{j_a} w_{j_b} rho) = G_{j_a j_b}`` for a < b (the
        delta term vanishes off-diagonal for distinct labels).
    """
    labels = list(labels)
    if len(labels) % 2:
        raise ValueError(f"odd order: {len(labels)} labels")
    if len(set(labels)) != len(labels):
        raise ValueError(f"repeated label in {labels}")
    if len(labels) > 12:
        raise ValueError(f"order {len(labels)} above the cap of 12")
    if not labels:
        return 1.0 + 0.0j
    dim = table.g.shape[0]
    for j in labels:
        if not 1 <= j <= dim:
            raise ValueError(f"label {j} outside 1..{dim}")
    idx = np.array(labels) - 1
    sub = table.g[np.ix_(idx, idx)]
    m = np.triu(sub, k=1)
    m = m - m.T
    return complex(pfaffian(m))


def distance_profile(cmat: CorrelationMatrix, band: float = 0.08) -> list[tuple[int, float]]:
    """Distance-averaged correlator over a centered band of site pairs.

    ``C(r)`` is the mean of ``C_{l,m}`` over pairs with ``|l - m| = r``
    and ``|l + m - n| <= band*n`` (1-based site labels, which keeps the
    average to pairs straddling the middle of the chain).  Distances
    with no admissible pair are omitted.

    Parameters
    ----------
    band : float
        Fraction of n setting the half-width of the center band;
        must lie in (0, 1).
    """
    if not 0.0 < band < 1.0:
        raise ValueError(f"band must be in (0, 1), got {band}")
    n = cmat.n
    c = cmat.c
    sums: dict[int, list[float]] = {}
    for l in range(1, n + 1):
        for m in range(l + 1, n + 1):
            if abs(l + m - n) <= band * n:
                sums.setdefault(m - l, []).append(c[l - 1, m - 1])
    return [(r, float(np.mean(sums[r]))) for r in sorted(sums)]


def residual_correlator(cmat: CorrelationMatrix) -> float:
    """Mean of C_{l,m} over all pairs separated by more than n/2.

    A scalar order-parameter proxy: it stays finite where correlations
    do not decay with distance and vanishes where they do.
    """
    n = cmat.n
    if n < 4:
        raise ValueError(f"n < 4: residual correlator needs n >= 4, got {n}")
    l, m = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    mask = np.abs(l - m) > n / 2
    return float(np.mean(cmat.c[mask]))
