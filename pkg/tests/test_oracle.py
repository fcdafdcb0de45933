"""Dense-Liouvillean reference implementation: internal consistency.

Everything here runs at n <= 4, where operator space is at most 256
dimensional and brute-force linear algebra is authoritative.
"""

from itertools import product

import numpy as np
import pytest
import scipy.linalg as sla

from openxy import oracle
from openxy.model import ChainSpec, build_structure_matrix
from openxy.spectral import diagonalize

from conftest import fig_spec, multiset_distance, random_spec

# single-ended chain with one fully polarizing bath; closed-form check case
SPEC0 = ChainSpec(n=2, gamma=1.0, h=0.0, gl1=1.0, gl2=0.0, gr1=0.0, gr2=0.0)


def subset_sums(beta, parity=None):
    """Generator eigenvalues -2 sum_j nu_j beta_j over occupations nu."""
    out = []
    for nu in product((0, 1), repeat=len(beta)):
        if parity is not None and sum(nu) % 2 != parity:
            continue
        out.append(-2.0 * sum(n * b for n, b in zip(nu, beta)))
    return np.array(out)


class TestBuildLiouvillean:
    def test_size_cap(self):
        with pytest.raises(oracle.OracleSizeError):
            oracle.build_liouvillean(fig_spec(7, 0.5))

    def test_majorana_algebra(self):
        ws = oracle.majorana_operators(2)
        assert len(ws) == 4
        eye = np.eye(4)
        for j, wj in enumerate(ws):
            assert np.allclose(wj, wj.conj().T, atol=1e-14)
            for k, wk in enumerate(ws):
                anti = wj @ wk + wk @ wj
                want = 2.0 * eye if j == k else np.zeros((4, 4))
                assert np.allclose(anti, want, atol=1e-14)

    def test_hamiltonian_hermitian(self):
        ham = oracle.hamiltonian(fig_spec(3, 0.7))
        assert np.max(np.abs(ham - ham.conj().T)) < 1e-14

    def test_trace_preservation(self):
        lio = oracle.build_liouvillean(fig_spec(3, 0.4))
        left = np.eye(8, dtype=complex).reshape(-1) @ lio.matrix
        assert np.linalg.norm(left) <= 1e-10 * np.abs(lio.matrix).max()

    def test_complete_positivity_spot_check(self):
        rng = np.random.default_rng(3)
        lio = oracle.build_liouvillean(random_spec(rng, 2))
        for _ in range(5):
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = m @ m.conj().T
            rho /= np.trace(rho)
            for t in (0.1, 1.0, 10.0):
                evolved = (sla.expm(t * lio.matrix) @ rho.reshape(-1)).reshape(4, 4)
                assert abs(np.trace(evolved) - 1.0) <= 1e-8
                assert np.linalg.eigvalsh((evolved + evolved.conj().T) / 2).min() >= -1e-6


class TestSteadyState:
    def test_residual_and_state_invariants(self, oracle_ness):
        ness = oracle_ness(fig_spec(3, 0.3))
        lio = oracle.build_liouvillean(fig_spec(3, 0.3))
        assert ness.residual <= 1e-10 * np.abs(lio.matrix).max()
        assert abs(np.trace(ness.rho) - 1.0) <= 1e-12
        assert np.max(np.abs(ness.rho - ness.rho.conj().T)) <= 1e-14
        assert np.linalg.eigvalsh(ness.rho).min() >= -1e-8

    def test_equal_rates_give_identity(self, oracle_ness):
        spec = ChainSpec(n=3, gamma=0.5, h=0.9, gl1=0.4, gl2=0.4,
                         gr1=0.2, gr2=0.2)
        ness = oracle_ness(spec)
        assert np.max(np.abs(ness.rho - np.eye(8) / 8.0)) <= 1e-9

    def test_zero_rates_degenerate(self):
        spec = ChainSpec(n=3, gamma=0.5, h=0.5, gl1=0.0, gl2=0.0,
                         gr1=0.0, gr2=0.0)
        lio = oracle.build_liouvillean(spec)
        with pytest.raises(oracle.OracleError, match="degenerate steady space"):
            oracle.steady_state(lio)

    def test_two_point_structure(self, oracle_ness):
        # <w_j w_k> = delta_jk + i Im part: off-diagonal antisymmetric
        # and purely imaginary for a Hermitian state
        table = oracle.two_point_exact(oracle_ness(fig_spec(3, 0.9)))
        dev = table - np.eye(6)
        assert np.max(np.abs(dev + dev.T)) <= 1e-10
        assert np.max(np.abs(dev.real)) <= 1e-10


class TestSpectralConsistency:
    def test_single_ended_full_spectrum(self):
        # one dissipative end: subset sums of rapidities enumerate the
        # whole generator spectrum
        rng = np.random.default_rng(31)
        specs = [SPEC0] + [random_spec(rng, n, single_ended=True) for n in (2, 3)]
        for spec in specs:
            basis = diagonalize(build_structure_matrix(spec))
            want = subset_sums(basis.beta)
            got = oracle.liouvillean_spectrum(oracle.build_liouvillean(spec))
            assert multiset_distance(got, want) <= 1e-7

    def test_both_ends_even_sector(self):
        # a bath on the last site dresses the odd parity sector with a
        # string; only the even sector follows the quadratic form
        rng = np.random.default_rng(37)
        for n in (2, 3):
            spec = random_spec(rng, n)
            basis = diagonalize(build_structure_matrix(spec))
            even, odd = oracle.sector_spectra(oracle.build_liouvillean(spec))
            assert even.size == odd.size == 4**n // 2
            want = subset_sums(basis.beta, parity=0)
            assert multiset_distance(even, want) <= 1e-7


class TestExactOsee:
    def test_identity_state_zero(self, oracle_ness):
        spec = ChainSpec(n=3, gamma=0.5, h=0.9, gl1=0.4, gl2=0.4,
                         gr1=0.2, gr2=0.2)
        assert oracle.exact_osee(oracle_ness(spec), 1) <= 1e-9

    def test_normalization_independent(self, oracle_ness):
        ness = oracle_ness(fig_spec(3, 0.3))
        scaled = oracle.ExactNess(spec=ness.spec, rho=2.5 * ness.rho,
                                  residual=ness.residual)
        s0 = oracle.exact_osee(ness, 1)
        s1 = oracle.exact_osee(scaled, 1)
        assert s0 == pytest.approx(s1, abs=1e-10)
        assert s0 >= 0.0

    def test_cut_validation(self, oracle_ness):
        with pytest.raises(ValueError, match="cut must be in"):
            oracle.exact_osee(oracle_ness(fig_spec(3, 0.3)), 3)


class TestQuadraticForm:
    def test_structure_matrix_reproduces_generator(self):
        # the even-sector quadratic form over the packed hermitian maps
        # must rebuild the dense generator up to a constant
        rng = np.random.default_rng(43)
        for n in (2, 3):
            spec = random_spec(rng, n)
            lio = oracle.build_liouvillean(spec)
            a = build_structure_matrix(spec).a
            scale = np.abs(lio.matrix).max()
            assert oracle.quadratic_residual(lio, a) <= 1e-9 * scale

    def test_parity_projector_idempotent(self):
        proj = oracle.even_projector(2)
        assert np.max(np.abs(proj @ proj - proj)) <= 1e-14
        par = oracle.parity_map(2)
        assert np.max(np.abs(par @ par - np.eye(16))) <= 1e-14
