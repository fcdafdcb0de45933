"""Rapidity spectrum and normal-mode basis of the structure matrix.

The antisymmetric structure matrix A has eigenvalues in +-beta pairs
("rapidities").  This module pairs them, fixes the sign branch, and
normalizes the eigenvectors under the *bilinear* form x . y = x^T y
(plain transpose, no conjugation), which is the pairing in which an
antisymmetric matrix's eigenvectors are canonically orthogonal:

    v_p^T v_q = 0   whenever beta_p + beta_q != 0,

a consequence of v_p^T (A + A^T) v_q = 0.  Each +-pair is rescaled so
that v(+beta_j)^T v(-beta_j) = 1.  Within numerically degenerate
eigenvalue clusters the cross products v(+beta_a)^T v(-beta_b) need not
vanish for a != b, so those clusters are re-bi-orthogonalized with a
two-sided modified Gram-Schmidt pass before normalization.

Column layout of the returned basis: column 2j holds the +beta_j vector
and column 2j+1 the -beta_j vector (0-based j), pairs sorted by
(Im beta, Re beta) of the + branch.  Everything downstream (two-point
table, entanglement entropy) indexes into this layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .model import ChainSpec, StructureMatrix


class SpectralError(RuntimeError):
    """Eigendecomposition failed a structural post-condition."""


class PairingError(SpectralError):
    """Eigenvalues could not be matched into +-beta pairs."""


class BilinearDegeneracyError(SpectralError):
    """A degenerate cluster's bilinear Gram matrix is numerically singular."""


def spectral_norm_estimate(a: np.ndarray, iters: int = 60, rtol: float = 1e-6) -> float:
    """Largest singular value via power iteration with a fixed start vector.

    Deterministic (no RNG); falls back to the sqrt(norm1 * norminf)
    upper bound if the iteration fails to grow a direction.
    """
    dim = a.shape[0]
    if dim == 0:
        return 0.0
    x = np.linspace(1.0, 2.0, dim)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        z = a.conj().T @ (a @ x)
        nrm = np.linalg.norm(z)
        if nrm == 0.0:
            break
        new_est = float(np.sqrt(nrm))
        x = z / nrm
        if abs(new_est - est) <= rtol * new_est:
            return new_est
        est = new_est
    if est > 0.0:
        return est
    bound = np.sqrt(
        np.linalg.norm(a, 1) * np.linalg.norm(a, np.inf)
    )
    return float(bound)


@dataclass(frozen=True)
class NormalModeBasis:
    """Paired, bilinearly normalized eigensystem of a structure matrix.

    Attributes
    ----------
    spec : ChainSpec
    beta : numpy.ndarray
        (2n,) rapidities, the + branch of each pair (Re beta >= 0 up to
        roundoff; purely imaginary pairs use Im beta >= 0).
    vectors : numpy.ndarray
        (4n, 4n) complex; column 2j is the +beta_j eigenvector, column
        2j+1 the -beta_j one, normalized to v_+^T v_- = 1.
    residuals : numpy.ndarray
        (4n,) per-column 2-norm eigen-residuals of unit-norm vectors.
    norm_scale : float
        Spectral-norm estimate of A used for all tolerance scaling.
    ill_conditioned : tuple
        Pair indices whose bilinear product |v_+^T v_-| fell below the
        conditioning floor before rescaling.
    """

    spec: ChainSpec
    beta: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    norm_scale: float
    ill_conditioned: tuple = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def odd(self) -> np.ndarray:
        """(4n, 2n) matrix whose columns are the +beta eigenvectors."""
        return self.vectors[:, 0::2]

    @property
    def even(self) -> np.ndarray:
        """(4n, 2n) matrix whose columns are the -beta eigenvectors."""
        return self.vectors[:, 1::2]


def _hyperbolic_basis(block: np.ndarray, tol: float) -> np.ndarray:
    """Bilinear-canonical basis for a (near-)zero rapidity subspace.

    For beta ~ 0 the + and - eigenvectors span one degenerate subspace;
    the returned columns come in consecutive (u+, u-) pairs satisfying
    u+^T u- = 1 and all other plain-transpose products 0.  Built
    greedily: bilinear-normalize two directions a, b (a.a = b.b = 1,
    a.b = 0), then u+- = (a +- i b)/sqrt(2); fall back to direct cross
    pairing when every self-product is tiny.

    Raises
    ------
    BilinearDegeneracyError
        If the symmetric Gram matrix of the subspace is numerically
        singular (a genuinely defective zero mode).
    """
    work = [block[:, k].copy() for k in range(block.shape[1])]
    out: list[np.ndarray] = []
    while work:
        selfs = np.array([w @ w for w in work])
        i = int(np.argmax(np.abs(selfs)))
        if np.abs(selfs[i]) > tol:
            a = work.pop(i) / np.sqrt(selfs[i])
            work = [w - a * (a @ w) for w in work]
            if not work:
                raise BilinearDegeneracyError(
                    "bilinear degeneracy: odd-dimensional zero-mode pool"
                )
            selfs2 = np.array([w @ w for w in work])
            j = int(np.argmax(np.abs(selfs2)))
            if np.abs(selfs2[j]) <= tol:
                raise BilinearDegeneracyError(
                    "bilinear degeneracy: zero-mode Gram matrix is singular"
                )
            b = work.pop(j) / np.sqrt(selfs2[j])
            work = [w - b * (b @ w) for w in work]
            up = (a + 1j * b) / np.sqrt(2.0)
            um = (a - 1j * b) / np.sqrt(2.0)
        else:
            # all self-products vanish: pair directions directly
            best = (0, 1)
            best_val = 0.0
            for ii in range(len(work)):
                for jj in range(ii + 1, len(work)):
                    val = abs(work[ii] @ work[jj])
                    if val > best_val:
                        best, best_val = (ii, jj), val
            if best_val <= tol:
                raise BilinearDegeneracyError(
                    "bilinear degeneracy: zero-mode Gram matrix is singular"
                )
            ii, jj = best
            up = work[ii]
            um = work[jj] / (work[ii] @ work[jj])
            work = [
                w - um * (up @ w) - up * (um @ w)
                for k, w in enumerate(work)
                if k not in (ii, jj)
            ]
        out.extend((up, um))
    return np.column_stack(out)


def _pair_indices(vals: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Greedy matching of eigenvalues into (plus, minus) index pairs.

    Walks the eigenvalues sorted by (Im, Re) and pairs each unmatched
    one with the remaining value minimizing |beta + beta'|.
    """
    m = len(vals)
    order = np.lexsort((vals.real, vals.imag))
    unmatched = np.ones(m, dtype=bool)
    pairs = []
    for i in order:
        if not unmatched[i]:
            continue
        unmatched[i] = False
        cand = np.where(unmatched)[0]
        if len(cand) == 0:
            raise PairingError("pairing failure: odd number of eigenvalues left")
        costs = np.abs(vals[cand] + vals[i])
        j = int(cand[np.argmin(costs)])
        if costs.min() > tol:
            raise PairingError(
                f"pairing failure: best match for eigenvalue {vals[i]} "
                f"misses -beta by {costs.min():.3e} (tol {tol:.3e})"
            )
        unmatched[j] = False
        # sign branch: larger real part is "+"; for purely imaginary
        # pairs (both |Re| <= 1e-12) take the one with Im >= 0
        if abs(vals[i].real) <= 1e-12 and abs(vals[j].real) <= 1e-12:
            plus, minus = (i, j) if vals[i].imag >= vals[j].imag else (j, i)
        else:
            plus, minus = (i, j) if vals[i].real >= vals[j].real else (j, i)
        pairs.append((plus, minus))
    return pairs


def diagonalize(
    sm: StructureMatrix,
    *,
    resid_tol: float = 1e-9,
    pair_tol: float = 1e-6,
    cluster_tol: float = 1e-8,
    illcond_tol: float = 1e-10,
) -> NormalModeBasis:
    """Full dense eigendecomposition of the structure matrix.

    Parameters
    ----------
    sm : StructureMatrix
    resid_tol, pair_tol, cluster_tol, illcond_tol : float
        Relative tolerances (scaled by the spectral norm of A) for the
        eigen-residual bound, the +-beta matching, degenerate-cluster
        detection, and the bilinear-conditioning floor.

    Raises
    ------
    PairingError
        If eigenvalues cannot be matched into +-pairs at ``pair_tol``.
    BilinearDegeneracyError
        If a degenerate cluster's Gram matrix has conditioning worse
        than 1e10, or a pair's bilinear product vanishes identically.
    SpectralError
        If any eigen-residual exceeds ``resid_tol`` times |A|_2.
    """
    a = sm.a
    anorm = spectral_norm_estimate(a)
    scale = max(anorm, np.finfo(float).tiny)
    vals, vecs = sla.eig(a)

    pairs = _pair_indices(vals, tol=pair_tol * scale)
    beta = np.array([vals[p] for p, _ in pairs])
    order = np.lexsort((beta.real, beta.imag))
    pairs = [pairs[k] for k in order]
    beta = beta[order]

    npair = len(pairs)
    v = np.empty_like(vecs)
    for k, (p, mns) in enumerate(pairs):
        v[:, 2 * k] = vecs[:, p]
        v[:, 2 * k + 1] = vecs[:, mns]

    # near-zero rapidities: + and - vectors span one subspace, where the
    # plain pair product can vanish identically; rebuild those columns
    # in a bilinear-canonical (hyperbolic) basis
    zero_pool = [k for k in range(npair) if abs(beta[k]) <= cluster_tol * scale]
    prenormalized = np.zeros(npair, dtype=bool)
    if zero_pool:
        cols = [c for k in zero_pool for c in (2 * k, 2 * k + 1)]
        v[:, cols] = _hyperbolic_basis(v[:, cols], tol=illcond_tol)
        prenormalized[zero_pool] = True

    # degenerate clusters: consecutive + rapidities closer than the
    # cluster tolerance, found on the (Im, Re)-sorted order; the zero
    # pool is already handled
    clusters = []
    start = 0
    for k in range(1, npair + 1):
        if k == npair or abs(beta[k] - beta[k - 1]) > cluster_tol * scale:
            if k - start > 1 and not prenormalized[start:k].any():
                clusters.append(list(range(start, k)))
            start = k

    for cluster in clusters:
        gram = np.array(
            [[v[:, 2 * ka] @ v[:, 2 * kb + 1] for kb in cluster] for ka in cluster]
        )
        u, s, vh = sla.svd(gram)
        if s[0] == 0.0 or s[-1] / s[0] < 1e-10:
            raise BilinearDegeneracyError(
                f"bilinear degeneracy: Gram matrix of a {len(cluster)}-fold "
                f"cluster at beta ~ {beta[cluster[0]]:.6g} is singular"
            )
        # one-shot congruence: with gram = U S V^H the rescaled bases
        # P conj(U) S^{-1/2} and M V S^{-1/2} have pairwise products
        # exactly delta_ab.  A sequential Gram-Schmidt cannot do this:
        # flat-band points (gamma = 1, h = 0) produce well-conditioned
        # cluster Grams whose diagonal is identically zero, so every
        # candidate pivot vanishes.
        root = np.sqrt(s)[None, :]
        cp = [2 * k for k in cluster]
        cm = [2 * k + 1 for k in cluster]
        v[:, cp] = v[:, cp] @ (u.conj() / root)
        v[:, cm] = v[:, cm] @ (vh.conj().T / root)

    ill = []
    for k in range(npair):
        d = v[:, 2 * k] @ v[:, 2 * k + 1]
        if abs(d) < illcond_tol:
            ill.append(k)
            if d == 0.0:
                raise BilinearDegeneracyError(
                    f"bilinear degeneracy: vanishing pair product at beta "
                    f"~ {beta[k]:.6g}"
                )
        root = np.sqrt(d)
        v[:, 2 * k] /= root
        v[:, 2 * k + 1] /= root

    lam = np.empty(2 * npair, dtype=complex)
    lam[0::2] = beta
    lam[1::2] = -beta
    # residuals on unit-2-norm columns against the stored +-beta values
    resid_mat = a @ v - v * lam[None, :]
    col_norms = np.linalg.norm(v, axis=0)
    residuals = np.linalg.norm(resid_mat, axis=0) / np.maximum(col_norms, 1e-300)
    if np.max(residuals) > resid_tol * scale:
        raise SpectralError(
            f"eigen residual {np.max(residuals):.3e} exceeds "
            f"{resid_tol:.1e} * |A|_2 = {resid_tol * scale:.3e}"
        )

    return NormalModeBasis(
        spec=sm.spec,
        beta=beta,
        vectors=v,
        residuals=residuals,
        norm_scale=anorm,
        ill_conditioned=tuple(ill),
    )


def bilinear_gram(basis: NormalModeBasis) -> np.ndarray:
    """Full bilinear Gram matrix V^T V of the stored eigenvector columns.

    For a well-conditioned basis it equals the checkerboard pairing
    matrix: 2x2 blocks [[0, 1], [1, 0]] down the pair diagonal, zeros
    elsewhere.
    """
    return basis.vectors.T @ basis.vectors


@dataclass(frozen=True)
class GapReport:
    """Spectral gap of the relaxation dynamics.

    Attributes
    ----------
    delta : float
        2 * min_j Re beta_j, the slowest relaxation rate, clamped at 0
        (roundoff can push a vanishing gap a hair negative).
    min_rapidity_index : int
        Pair index attaining the minimum.
    unique : bool
        True when the gap clears 1e-10: the steady state is unique on
        numerical evidence.
    degenerate_minimum : bool
        True if another pair's Re beta lies within 1e-10 of the
        minimum (the slowest mode is not isolated).
    """

    delta: float
    min_rapidity_index: int
    unique: bool
    degenerate_minimum: bool


def relaxation_gap(basis: NormalModeBasis) -> GapReport:
    """Relaxation gap Delta = 2 min_j Re beta_j from a normal-mode basis."""
    re = basis.beta.real
    j = int(np.argmin(re))
    delta = max(0.0, 2.0 * float(re[j]))
    others = np.delete(re, j)
    degenerate = bool(others.size and np.min(np.abs(others - re[j])) < 1e-10)
    return GapReport(
        delta=delta,
        min_rapidity_index=j,
        unique=delta > 1e-10,
        degenerate_minimum=degenerate,
    )
