"""Brute-force superoperator reference implementation for small chains.

Everything in this module works directly with dense 2^n x 2^n spin
matrices and the full 4^n x 4^n master-equation generator, with no
free-fermion structure assumed anywhere.  It is deliberately slow and
memory-hungry; its only job is to provide an independent answer that
the spectral pipeline must reproduce on chains small enough to afford
it (n <= 5 in practice, hard cap n = 6).

Vectorization is row-major throughout: a density matrix rho maps to
vec(rho) with component rho[i, j] at index i * 2^n + j, so that
vec(X rho Y) = (X (x) Y^T) vec(rho).

The generator acts as

    d rho / dt = -i [H, rho]
                 + sum_mu ( 2 L_mu rho L_mu^+ - {L_mu^+ L_mu, rho} )

with jump operators L_1 = sqrt(gl1) s-_1, L_2 = sqrt(gl2) s+_1 on the
first site and L_3 = sqrt(gr1) s-_n, L_4 = sqrt(gr2) s+_n on the last.

The module also exposes the Hermitian adjoint-fermion maps a_p acting
on operator space and an entrywise reconstruction of the quadratic-form
structure matrix from the generator, which pins every sign and ordering
convention used by :mod:`openxy.model`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .model import ChainSpec, ID2, SMINUS, SPLUS, SX, SY, SZ, validate_spec

HARD_CAP = 6


class OracleSizeError(ValueError):
    """Chain too long for the dense superoperator treatment."""


class OracleError(RuntimeError):
    """Structural failure inside the oracle (degenerate steady state, ...)."""


def _check_size(n: int) -> None:
    if n > HARD_CAP:
        raise OracleSizeError(f"n too large for oracle: {n} > {HARD_CAP}")


def site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Embed a single-site operator at 0-based ``site`` in an n-site chain."""
    left = np.eye(2**site, dtype=complex)
    right = np.eye(2 ** (n - site - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


def majorana_operators(n: int) -> list[np.ndarray]:
    """Jordan-Wigner Majorana operators w_1, ..., w_2n as dense matrices.

    w_{2m-1} = sz^(m-1) sx_m and w_{2m} = sz^(m-1) sy_m (1-based m);
    the returned list is 0-indexed, ws[2m-2] and ws[2m-1].
    """
    ws = []
    for m in range(n):
        string = np.eye(1, dtype=complex)
        for _ in range(m):
            string = np.kron(string, SZ)
        for op in (SX, SY):
            tail = np.eye(2 ** (n - m - 1), dtype=complex)
            ws.append(np.kron(np.kron(string, op), tail))
    return ws


def hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense XY Hamiltonian with uniform transverse field."""
    n = spec.n
    dim = 2**n
    ham = np.zeros((dim, dim), dtype=complex)
    for m in range(n - 1):
        ham += (1.0 + spec.gamma) / 2.0 * (
            site_operator(SX, m, n) @ site_operator(SX, m + 1, n)
        )
        ham += (1.0 - spec.gamma) / 2.0 * (
            site_operator(SY, m, n) @ site_operator(SY, m + 1, n)
        )
    for m in range(n):
        ham += spec.h * site_operator(SZ, m, n)
    return ham


def jump_operators(spec: ChainSpec) -> list[np.ndarray]:
    """The four bath jump operators (lowering/raising at each edge)."""
    n = spec.n
    return [
        np.sqrt(spec.gl1) * site_operator(SMINUS, 0, n),
        np.sqrt(spec.gl2) * site_operator(SPLUS, 0, n),
        np.sqrt(spec.gr1) * site_operator(SMINUS, n - 1, n),
        np.sqrt(spec.gr2) * site_operator(SPLUS, n - 1, n),
    ]


@dataclass(frozen=True)
class DenseLiouvillean:
    """Dense master-equation generator on operator space."""

    spec: ChainSpec
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.spec.n


def build_liouvillean(spec: ChainSpec) -> DenseLiouvillean:
    """Assemble the dense 4^n x 4^n generator for a chain spec.

    All-zero rates are allowed here (relaxed validation): the resulting
    purely unitary generator is still a well-defined matrix, and
    :func:`steady_state` reports its degenerate kernel explicitly.
    """
    validate_spec(spec, require_dissipation=False)
    _check_size(spec.n)
    dim = 2**spec.n
    eye = np.eye(dim, dtype=complex)
    ham = hamiltonian(spec)
    lio = -1.0j * (np.kron(ham, eye) - np.kron(eye, ham.T))
    for jump in jump_operators(spec):
        jdj = jump.conj().T @ jump
        lio += 2.0 * np.kron(jump, jump.conj())
        lio -= np.kron(jdj, eye)
        lio -= np.kron(eye, jdj.T)
    return DenseLiouvillean(spec=spec, matrix=lio)


def liouvillean_spectrum(lio: DenseLiouvillean) -> np.ndarray:
    """All 4^n eigenvalues of the generator."""
    return sla.eigvals(lio.matrix)


def sector_spectra(lio: DenseLiouvillean) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of the generator restricted to each parity sector.

    The generator commutes with conjugation by the global parity
    P = sz x ... x sz, so operator space splits into even and odd
    blocks that evolve independently.  The quadratic normal-mode
    description holds on the even block, where the steady state
    lives; a bath on the last site dresses the odd block with a
    Jordan-Wigner string and shifts its spectrum.

    Returns
    -------
    (even, odd) : tuple of numpy.ndarray
        Generator eigenvalues in the even and odd sector.

    Raises
    ------
    OracleError
        "parity mixing" if the generator fails to commute with the
        parity superoperator.
    """
    pmap = parity_map(lio.spec.n)
    mixing = np.max(np.abs(lio.matrix @ pmap - pmap @ lio.matrix))
    scale = max(np.max(np.abs(lio.matrix)), 1.0)
    if mixing > 1e-10 * scale:
        raise OracleError(f"parity mixing: commutator norm {mixing:.3e}")
    pvals, pvecs = np.linalg.eigh(pmap)
    out = []
    for sign in (1.0, -1.0):
        cols = pvecs[:, np.abs(pvals - sign) < 1e-8]
        block = cols.conj().T @ lio.matrix @ cols
        out.append(np.sort_complex(sla.eigvals(block)))
    return out[0], out[1]


@dataclass(frozen=True)
class ExactNess:
    """Steady-state density matrix found by dense diagonalization.

    Attributes
    ----------
    spec : ChainSpec
    rho : numpy.ndarray
        Hermitian, trace-one (2^n, 2^n) array.
    residual : float
        2-norm of the generator applied to the final vectorized state.
    """

    spec: ChainSpec
    rho: np.ndarray
    residual: float

    @property
    def n(self) -> int:
        return self.spec.n


def steady_state(lio: DenseLiouvillean, zero_tol: float = 1e-10) -> ExactNess:
    """Kernel vector of the generator, reshaped and normalized to a state.

    Raises
    ------
    OracleError
        "degenerate steady space" if the second-smallest |eigenvalue|
        of the generator is within ``zero_tol`` of zero (non-unique
        steady state), or if the kernel vector is traceless.
    """
    vals, vecs = sla.eig(lio.matrix)
    order = np.argsort(np.abs(vals))
    if len(order) > 1 and np.abs(vals[order[1]]) < zero_tol:
        n_zero = int(np.count_nonzero(np.abs(vals) < zero_tol))
        raise OracleError(
            f"degenerate steady space: {n_zero} eigenvalues within {zero_tol} of zero"
        )
    idx = order[0]
    dim = 2**lio.n
    rho = vecs[:, idx].reshape(dim, dim)
    rho = (rho + rho.conj().T) / 2.0
    trace = np.trace(rho)
    if abs(trace) < 1e-12:
        raise OracleError("steady-state candidate has vanishing trace")
    rho = rho / trace
    residual = float(np.linalg.norm(lio.matrix @ rho.reshape(-1)))
    return ExactNess(spec=lio.spec, rho=rho, residual=residual)


def two_point_exact(ness: ExactNess) -> np.ndarray:
    """Majorana two-point table T[j, k] = tr(w_j w_k rho), shape (2n, 2n).

    The diagonal is identically 1 (w_j^2 = 1); subtract the identity to
    compare with the spectral-method connected table.
    """
    ws = majorana_operators(ness.n)
    table = np.empty((2 * ness.n, 2 * ness.n), dtype=complex)
    # precomputing w_k rho keeps this at 2n products of dense matrices
    prods = [w @ ness.rho for w in ws]
    for j, wj in enumerate(ws):
        for k, wk_rho in enumerate(prods):
            table[j, k] = np.einsum("ij,ji->", wj, wk_rho)
    return table


def sigma_z_profile_exact(ness: ExactNess) -> np.ndarray:
    """Site-resolved magnetization tr(sz_m rho), shape (n,), real."""
    n = ness.n
    out = np.empty(n)
    for m in range(n):
        val = np.trace(site_operator(SZ, m, n) @ ness.rho)
        out[m] = val.real
    return out


def zz_connected_exact(ness: ExactNess) -> np.ndarray:
    """Connected correlator tr(sz_l sz_m rho) - tr(sz_l rho) tr(sz_m rho).

    Shape (n, n), real, diagonal set to zero by convention.
    """
    n = ness.n
    zs = [site_operator(SZ, m, n) for m in range(n)]
    means = np.array([np.trace(z @ ness.rho).real for z in zs])
    corr = np.zeros((n, n))
    for l in range(n):
        for m in range(n):
            if l == m:
                continue
            val = np.trace(zs[l] @ zs[m] @ ness.rho).real
            corr[l, m] = val - means[l] * means[m]
    return corr


def moment_exact(ness: ExactNess, labels: list[int]) -> complex:
    """Ordered Majorana moment tr(w_{j_1} ... w_{j_2k} rho), 1-based labels."""
    ws = majorana_operators(ness.n)
    prod = np.eye(2**ness.n, dtype=complex)
    for j in labels:
        prod = prod @ ws[j - 1]
    return complex(np.trace(prod @ ness.rho))


def exact_osee(ness: ExactNess, cut: int) -> float:
    """Operator-space entanglement entropy of rho across a site cut.

    Expands rho over ordered Majorana products
    P_alpha = w_1^a1 w_2^a2 ... w_2n^a2n (a_i in {0, 1}, a_1 slowest
    index), normalizes the coefficient vector to unit 2-norm, reshapes
    it to (4^cut, 4^(n-cut)) and returns the Schmidt entropy
    -sum sigma^2 log2 sigma^2 of its singular values.
    """
    n = ness.n
    if not 1 <= cut < n:
        raise ValueError(f"cut must be in [1, n-1], got {cut}")
    ws = majorana_operators(n)
    rho_flat = ness.rho.reshape(-1)
    psi = np.empty(4**n, dtype=complex)
    for alpha in range(4**n):
        prod = np.eye(2**n, dtype=complex)
        for bit in range(2 * n):
            # bit 0 of the index is a_1: first Majorana varies slowest
            if (alpha >> (2 * n - 1 - bit)) & 1:
                prod = prod @ ws[bit]
        psi[alpha] = np.vdot(prod.reshape(-1), rho_flat)
    psi /= np.linalg.norm(psi)
    sv = sla.svdvals(psi.reshape(4**cut, 4 ** (n - cut)))
    sq = sv[sv > 1e-12] ** 2
    return float(-np.sum(sq * np.log2(sq)))


def parity_map(n: int) -> np.ndarray:
    """Superoperator of rho -> P rho P with P = sz^(x n)."""
    par = np.eye(1, dtype=complex)
    for _ in range(n):
        par = np.kron(par, SZ)
    return np.kron(par, par)


def hermitian_maps(n: int) -> list[np.ndarray]:
    """Hermitian adjoint-fermion maps a_1, ..., a_4n on operator space.

    The left-multiplication map of a Majorana and its parity-dressed
    right-multiplication partner,

        aL_j rho = w_j rho / sqrt(2)
        aR_j rho = -i rho' w_j / sqrt(2),   rho' := P rho P,

    satisfy {a_p, a_q} = delta_pq together.  The returned list uses the
    *structure-matrix packing*: per site l the four consecutive entries
    are (aL of w_{2l-1}, aL of w_{2l}, aR of w_{2l-1}, aR of w_{2l}),
    which is the basis the quadratic-form blocks of
    :func:`openxy.model.build_structure_matrix` are written in.  (The
    interleaved labeling a_{2j-1} = (c_j + c_j^+)/sqrt2,
    a_{2j} = i(c_j - c_j^+)/sqrt2 maps to this packing by swapping the
    middle two entries of each site group.)  Intended for n <= 3: each
    map is a dense 4^n x 4^n matrix.
    """
    _check_size(n)
    ws = majorana_operators(n)
    eye = np.eye(2**n, dtype=complex)
    parity = parity_map(n)
    left = [np.kron(w, eye) / np.sqrt(2.0) for w in ws]
    right = [-1.0j * (np.kron(eye, w.T) @ parity) / np.sqrt(2.0) for w in ws]
    maps = []
    for s in range(n):
        maps.extend((left[2 * s], left[2 * s + 1], right[2 * s], right[2 * s + 1]))
    return maps


def even_projector(n: int) -> np.ndarray:
    """Projector onto the even-parity sector of operator space."""
    return (np.eye(4**n, dtype=complex) + parity_map(n)) / 2.0


def extract_structure_matrix(lio: DenseLiouvillean) -> np.ndarray:
    """Read the quadratic-form matrix back off the dense generator.

    The generator equals sum_pq A_pq a_p a_q + const only on the even
    parity sector (density matrices live there; the dissipator acquires
    a parity sign on the odd sector).  This solves the least-squares
    problem  L P_even = [ sum_{p<q} A_pq (a_p a_q - a_q a_p) + c ] P_even
    for the antisymmetric coefficients; the fit is exact (residual at
    round-off) and the solution unique, which pins every sign and
    ordering convention of the structure matrix at once.
    """
    n = lio.n
    maps = hermitian_maps(n)
    proj = even_projector(n)
    cols = []
    idx_pairs = []
    for p in range(4 * n):
        for q in range(p + 1, 4 * n):
            op = (maps[p] @ maps[q] - maps[q] @ maps[p]) @ proj
            cols.append(op.reshape(-1))
            idx_pairs.append((p, q))
    cols.append(proj.reshape(-1))
    basis_mat = np.array(cols).T
    target = (lio.matrix @ proj).reshape(-1)
    coef, _, rank, _ = np.linalg.lstsq(basis_mat, target, rcond=None)
    if rank < basis_mat.shape[1]:
        raise OracleError("quadratic-form extraction is rank-deficient")
    a = np.zeros((4 * n, 4 * n), dtype=complex)
    for (p, q), c in zip(idx_pairs, coef[:-1]):
        a[p, q] = c
        a[q, p] = -c
    return a


def quadratic_residual(lio: DenseLiouvillean, a: np.ndarray) -> float:
    """Max-abs even-sector residual of (L - sum A_pq a_p a_q - c) P_even.

    The constant c is fixed by the even-sector trace.
    """
    n = lio.n
    maps = hermitian_maps(n)
    proj = even_projector(n)
    quad = np.zeros_like(lio.matrix)
    for p in range(4 * n):
        for q in range(4 * n):
            if a[p, q] != 0.0:
                quad += a[p, q] * (maps[p] @ maps[q])
    rest = (lio.matrix - quad) @ proj
    # trace of P_even is half the superoperator dimension
    const = np.trace(rest) / np.trace(proj)
    rest -= const * proj
    return float(np.max(np.abs(rest)))
