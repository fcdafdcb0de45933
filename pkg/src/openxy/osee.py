"""Operator-space entanglement entropy of the steady state.

The vectorized steady state is Gaussian in the Majorana maps, so its
half-chain Schmidt spectrum follows from a 4n x 4n correlation matrix
rather than from the 4^n state vector.  The construction:

- split the paired eigenvectors into odd columns V_o and even columns
  V_e (both 4n x 2n),
- solve ``K = -(V_o | -V_o*)^{-1} (V_e | -V_e*)`` where (X | Y) is
  side-by-side column concatenation into 4n x 4n,
- with the upper-right 2n x 2n block K12, form ``Q = V_o K12`` and
  ``T = V_o^T V_o*``, then ``D = Q* T Q^T``.

Restricting D to the leading 4*cut x 4*cut block (the map components
of sites 1..cut in the site-packed layout) gives eigenvalues in pairs
(mu, 1 - mu); writing mu = 1/2 +- eta, the entropy in bits is
``S = -sum (1/2+eta) log2(1/2+eta) + (1/2-eta) log2(1/2-eta)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import zgecon
from scipy.special import xlogy

from .model import ChainSpec, build_structure_matrix
from .spectral import NormalModeBasis, diagonalize

__all__ = ["OseeError", "OseeResult", "OseeScaling", "osee", "osee_scaling"]

LN2 = float(np.log(2.0))


class OseeError(RuntimeError):
    """Numerical failure in the entanglement-spectrum construction."""


@dataclass(frozen=True)
class OseeResult:
    """Half-block entanglement data for one bipartition.

    Parameters
    ----------
    eta : tuple of float
        One nonnegative eta per (mu, 1-mu) pair; 2*cut values, each
        at most 1/2 up to round-off.
    entropy : float
        Operator-space entanglement entropy in bits.
    cut : int
        Bipartition after this many sites.
    cond_k : float
        1-norm condition estimate of the concatenated basis matrix
        inverted for K.
    pair_residual : float
        Worst deviation of an eigenvalue pair sum from 1 before the
        pairs were symmetrized; grows with cond_k near criticality.
    warnings : tuple of str
        Notes about residuals above the soft tolerance.
    """

    eta: tuple
    entropy: float
    cut: int
    cond_k: float
    pair_residual: float = 0.0
    warnings: tuple = ()


def osee(basis: NormalModeBasis, cut: int, *, complement: bool = False) -> OseeResult:
    """Entanglement entropy of the vectorized steady state across a cut.

    Parameters
    ----------
    basis : NormalModeBasis
        Paired, bilinearly normalized eigenvectors.
    cut : int
        Number of sites in the left part, 1 <= cut < n.
    complement : bool
        Use the trailing (complementary) block of D instead of the
        leading one; for a pure vectorized state both give the same
        entropy, which the test suite exercises.

    Raises
    ------
    OseeError
        "singular basis concatenation" when the (V_o | -V_o*) matrix
        has condition estimate above 1e12; "eta out of range" when an
        eta exceeds 1/2 + 1e-6; also when the (mu, 1-mu) pairing or
        the trace identity breaks beyond 1e-3, which indicates a
        defective basis rather than accumulated round-off.  Residuals
        between 1e-6 and the guard are recorded as warnings and the
        pairs symmetrized; near the critical point at n of a few
        hundred the round-off alone reaches a few 1e-6.
    """
    n = basis.n
    if not 1 <= cut < n:
        raise ValueError(f"cut must be in 1..{n - 1}, got {cut}")
    vo = basis.odd
    ve = basis.even
    m = np.hstack([vo, -vo.conj()])
    rhs = np.hstack([ve, -ve.conj()])

    lu, piv = lu_factor(m)
    anorm = float(np.linalg.norm(m, 1))
    rcond, info = zgecon(lu, anorm)
    if info != 0:
        raise OseeError(f"condition estimate failed: info={info}")
    cond_k = float(1.0 / rcond) if rcond > 0.0 else float("inf")
    if cond_k > 1e12:
        raise OseeError(
            f"singular basis concatenation: condition estimate {cond_k:.3e}")

    k = -lu_solve((lu, piv), rhs)
    k12 = k[: 2 * n, 2 * n:]
    q = vo @ k12
    t = vo.T @ vo.conj()
    d = q.conj() @ t @ q.T

    w = 4 * cut
    block = d[:w, :w] if not complement else d[w:, w:]
    herm = float(np.max(np.abs(block - block.conj().T)))
    if herm > 1e-8:
        raise OseeError(f"block hermiticity residual {herm:.3e} exceeds 1e-8")
    mu = np.sort(np.linalg.eigvalsh((block + block.conj().T) / 2.0))

    npair = mu.size // 2
    pair_resid = float(np.max(np.abs(mu[:npair] + mu[::-1][:npair] - 1.0)))
    if pair_resid > 1e-3:
        raise OseeError(
            f"eigenvalue pairing residual {pair_resid:.3e} exceeds 1e-3")
    trace_dev = float(abs(mu.sum() - npair))
    if trace_dev > 1e-3:
        raise OseeError(f"trace identity residual {trace_dev:.3e} exceeds 1e-3")
    warnings = []
    if pair_resid > 1e-6 or trace_dev > 1e-6:
        warnings.append(
            f"pair/trace residuals ({pair_resid:.3e}, {trace_dev:.3e}) above "
            f"1e-6; pairs symmetrized (condition estimate {cond_k:.3e})")
    # restore the exact pair structure before reading off eta
    mu[:npair] = (mu[:npair] + 1.0 - mu[::-1][:npair]) / 2.0

    eta = np.abs(mu[:npair] - 0.5)
    if eta.size and float(np.max(eta)) > 0.5 + 1e-6:
        raise OseeError(f"eta out of range: max {float(np.max(eta)):.9f}")
    eta = np.minimum(eta, 0.5)
    p = 0.5 + eta
    q_ = 0.5 - eta
    entropy = float(-(xlogy(p, p) + xlogy(q_, q_)).sum() / LN2)
    return OseeResult(eta=tuple(float(e) for e in eta), entropy=max(entropy, 0.0),
                      cut=cut, cond_k=cond_k, pair_residual=pair_resid,
                      warnings=tuple(warnings))


@dataclass(frozen=True)
class OseeScaling:
    """Entropy versus size, with the linear fit over the larger sizes."""

    points: tuple
    slope: float
    intercept: float
    fit_npoints: int


def osee_scaling(specs) -> OseeScaling:
    """Half-chain entropy for a family of sizes plus its growth rate.

    Parameters
    ----------
    specs : sequence of ChainSpec
        At least four specs with strictly increasing even n; each is
        solved at the symmetric cut n/2.

    Returns
    -------
    OseeScaling
        (n, S) points and the least-squares slope/intercept of S vs n
        over the largest half of the sizes (at least three points).
    """
    specs = list(specs)
    if len(specs) < 4:
        raise ValueError(f"need at least 4 sizes, got {len(specs)}")
    sizes = [s.n for s in specs]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    if any(s.n % 2 for s in specs):
        raise ValueError("symmetric cut needs even n")

    points = []
    for spec in specs:
        basis = diagonalize(build_structure_matrix(spec))
        points.append((spec.n, osee(basis, spec.n // 2).entropy))

    from .analysis import fit_linear

    m = max(3, (len(points) + 1) // 2)
    tail = points[-m:]
    fit = fit_linear([p[0] for p in tail], [p[1] for p in tail])
    return OseeScaling(points=tuple(points), slope=fit.params[1],
                       intercept=fit.params[0], fit_npoints=m)
