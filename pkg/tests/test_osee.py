"""Entanglement entropy of the vectorized steady state."""

import numpy as np
import pytest

from openxy import oracle
from openxy.model import ChainSpec, build_structure_matrix
from openxy.osee import OseeError, osee, osee_scaling
from openxy.spectral import diagonalize

from conftest import FIG_RATES, cached_basis, cached_ness, fig_spec, random_spec

# equal rates on each end drive the chain to the identity state, whose
# vectorization is a product over sites: S = 0 and every eta = 1/2
EQUAL_RATE = ChainSpec(n=6, gamma=0.5, h=0.9, gl1=0.4, gl2=0.4, gr1=0.2, gr2=0.2)


class TestOsee:
    def test_cut_validation(self):
        basis = cached_basis(EQUAL_RATE)
        with pytest.raises(ValueError, match="cut must be in"):
            osee(basis, 0)
        with pytest.raises(ValueError, match="cut must be in"):
            osee(basis, 6)

    def test_identity_state_zero_entropy(self):
        basis = cached_basis(EQUAL_RATE)
        for cut in (1, 3, 5):
            res = osee(basis, cut)
            assert res.entropy <= 1e-7
            assert np.all(np.asarray(res.eta) >= 0.5 - 1e-7)

    def test_matches_oracle_fig_rates(self):
        spec = fig_spec(4, 0.3)
        basis = cached_basis(spec)
        ness = cached_ness(spec)
        for cut in (1, 2, 3):
            got = osee(basis, cut).entropy
            want = oracle.exact_osee(ness, cut)
            assert got == pytest.approx(want, abs=1e-6)

    def test_matches_oracle_random_specs(self):
        rng = np.random.default_rng(57)
        worst = 0.0
        for _ in range(10):
            spec = random_spec(rng, 4)
            basis = diagonalize(build_structure_matrix(spec))
            ness = oracle.steady_state(oracle.build_liouvillean(spec))
            got = osee(basis, 2).entropy
            want = oracle.exact_osee(ness, 2)
            worst = max(worst, abs(got - want))
        assert worst <= 1e-5

    def test_complement_block_same_entropy(self):
        # the vectorized state is pure, so both sides of any cut carry
        # the same Schmidt spectrum
        spec = fig_spec(8, 0.6)
        basis = cached_basis(spec)
        for cut in (2, 3, 4):
            left = osee(basis, cut)
            right = osee(basis, cut, complement=True)
            assert left.entropy == pytest.approx(right.entropy, abs=1e-6)

    def test_eta_range_and_count(self):
        rng = np.random.default_rng(70)
        for _ in range(4):
            spec = random_spec(rng, 5)
            basis = diagonalize(build_structure_matrix(spec))
            res = osee(basis, 2)
            eta = np.asarray(res.eta)
            assert eta.shape == (2 * res.cut,)
            assert np.all(eta >= 0.0)
            assert np.all(eta <= 0.5 + 1e-7)

    def test_entropy_consistent_with_eta(self):
        spec = fig_spec(8, 0.9)
        res = osee(cached_basis(spec), 4)
        eta = np.asarray(res.eta)
        p, q = 0.5 + eta, 0.5 - eta
        terms = np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0)
        assert res.entropy == pytest.approx(max(-terms.sum(), 0.0), abs=1e-9)

    def test_clean_residuals_away_from_criticality(self):
        res = osee(cached_basis(fig_spec(8, 0.9)), 4)
        assert res.pair_residual < 1e-10
        assert res.warnings == ()
        assert np.isfinite(res.cond_k) and res.cond_k >= 1.0


class TestOseeScaling:
    def test_needs_four_sizes(self):
        specs = [fig_spec(n, 0.9) for n in (4, 6, 8)]
        with pytest.raises(ValueError, match="at least 4 sizes"):
            osee_scaling(specs)

    def test_sizes_must_increase(self):
        specs = [fig_spec(n, 0.9) for n in (4, 8, 6, 10)]
        with pytest.raises(ValueError, match="strictly increasing"):
            osee_scaling(specs)

    def test_even_sizes_only(self):
        specs = [fig_spec(n, 0.9) for n in (4, 6, 7, 10)]
        with pytest.raises(ValueError, match="even n"):
            osee_scaling(specs)

    def test_flat_for_identity_state(self):
        specs = [
            ChainSpec(n=n, gamma=0.5, h=0.9, gl1=0.4, gl2=0.4, gr1=0.2, gr2=0.2)
            for n in (8, 12, 16, 20)
        ]
        scaling = osee_scaling(specs)
        assert len(scaling.points) == 4
        assert scaling.fit_npoints == 3
        assert abs(scaling.slope) <= 1e-8
        assert all(s <= 1e-7 for _, s in scaling.points)
