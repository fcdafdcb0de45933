"""Rapidity pairing, bilinear normalization, and the relaxation gap."""

import numpy as np
import pytest

from openxy.model import ChainSpec, build_structure_matrix
from openxy.spectral import (BilinearDegeneracyError, PairingError,
                             SpectralError, bilinear_gram, diagonalize,
                             relaxation_gap, spectral_norm_estimate)
from openxy.theory import dispersion

from conftest import fig_spec, multiset_distance, random_spec


class TestDiagonalize:
    def test_basis_invariants_random_specs(self, solver):
        rng = np.random.default_rng(23)
        for _ in range(10):
            spec = random_spec(rng, int(rng.integers(2, 9)))
            basis = solver(spec)
            a = build_structure_matrix(spec).a
            scale = basis.norm_scale
            # eigen residuals for both members of every pair
            for j, beta in enumerate(basis.beta):
                vp = basis.vectors[:, 2 * j]
                vm = basis.vectors[:, 2 * j + 1]
                assert np.linalg.norm(a @ vp - beta * vp) <= 1e-9 * scale * np.linalg.norm(vp)
                assert np.linalg.norm(a @ vm + beta * vm) <= 1e-9 * scale * np.linalg.norm(vm)
            # no decaying mode may grow
            assert np.min(basis.beta.real) >= -1e-12
            # bilinear pair normalization and cross orthogonality
            gram = bilinear_gram(basis)
            want = np.zeros_like(gram)
            for j in range(2 * spec.n):
                want[2 * j, 2 * j + 1] = want[2 * j + 1, 2 * j] = 1.0
            assert np.max(np.abs(gram - want)) < 1e-8

    def test_spectrum_closed_under_negation(self, solver):
        spec = fig_spec(6, 0.9)
        eig = np.linalg.eigvals(build_structure_matrix(spec).a)
        assert multiset_distance(eig, -eig) < 1e-10

    def test_trace_zero(self, solver):
        spec = fig_spec(7, 0.3)
        basis = solver(spec)
        full = np.concatenate([basis.beta, -basis.beta])
        assert abs(full.sum()) <= 1e-9 * basis.norm_scale

    def test_eigenvalues_match_unpaired_solve(self, solver):
        spec = fig_spec(5, 0.75)
        basis = solver(spec)
        eig = np.linalg.eigvals(build_structure_matrix(spec).a)
        paired = np.concatenate([basis.beta, -basis.beta])
        assert multiset_distance(eig, paired) < 1e-9 * basis.norm_scale

    def test_completeness(self, solver):
        basis = solver(fig_spec(8, 0.6))
        cond = np.linalg.cond(basis.vectors)
        assert np.isfinite(cond)
        assert cond < 1e8

    def test_reconstruction_from_pairs(self, solver):
        # A = V diag(+-beta) V^{-1} must reproduce the input matrix
        spec = fig_spec(4, 0.9)
        basis = solver(spec)
        a = build_structure_matrix(spec).a
        lam = np.empty(4 * spec.n, dtype=complex)
        lam[0::2] = basis.beta
        lam[1::2] = -basis.beta
        rebuilt = basis.vectors @ np.diag(lam) @ np.linalg.inv(basis.vectors)
        assert np.max(np.abs(rebuilt - a)) < 1e-8 * basis.norm_scale

    def test_generator_spectrum_reconstruction_small(self):
        # subset sums of rapidities against the dense generator at n=2
        from itertools import product

        from openxy import oracle

        spec = ChainSpec(n=2, gamma=1.0, h=0.0, gl1=1.0, gl2=0.0,
                         gr1=0.0, gr2=0.0)
        basis = diagonalize(build_structure_matrix(spec))
        full = oracle.liouvillean_spectrum(oracle.build_liouvillean(spec))
        rebuilt = [-2.0 * sum(nu * b for nu, b in zip(bits, basis.beta))
                   for bits in product((0, 1), repeat=2 * spec.n)]
        assert multiset_distance(full, rebuilt) < 1e-8

    def test_zero_field_ising_pairing(self, solver):
        # gamma=1, h=0 has doubly degenerate rapidities; pairing and
        # normalization must still produce a usable basis
        spec = ChainSpec(n=4, gamma=1.0, h=0.0, gl1=0.6, gl2=0.2,
                         gr1=0.4, gr2=0.3)
        basis = solver(spec)
        gram = bilinear_gram(basis)
        want = np.zeros_like(gram)
        for j in range(2 * spec.n):
            want[2 * j, 2 * j + 1] = want[2 * j + 1, 2 * j] = 1.0
        assert np.max(np.abs(gram - want)) < 1e-8

    def test_flat_band_giant_cluster(self, solver):
        # the flat band at gamma=1, h=0 piles most rapidities onto a
        # single exactly degenerate cluster at beta = i whose raw Gram
        # diagonal vanishes identically; the congruence must still
        # deliver a normalized basis at machine precision
        spec = fig_spec(80, 0.0, gamma=1.0)
        basis = solver(spec)
        cluster = np.sum(np.abs(basis.beta - 1.0j) < 1e-6)
        assert cluster > spec.n
        gram = bilinear_gram(basis)
        want = np.zeros_like(gram)
        for j in range(2 * spec.n):
            want[2 * j, 2 * j + 1] = want[2 * j + 1, 2 * j] = 1.0
        assert np.max(np.abs(gram - want)) < 1e-10
        assert np.max(basis.residuals) < 1e-12 * basis.norm_scale

    @pytest.mark.slow
    def test_bulk_rapidity_bands(self, solver):
        # imaginary parts of the bulk rapidities trace the infinite-chain
        # quasi-particle dispersion; the baths additionally bind a couple
        # of overdamped modes with purely real, size-independent rapidity
        spec = fig_spec(640, 0.9)
        basis = solver(spec)
        phi = np.linspace(-np.pi, np.pi, 20001)
        eps = np.array([dispersion(0.5, 0.9, p) for p in phi])
        gaps = np.array([np.min(np.abs(abs(b.imag) - eps)) for b in basis.beta])
        off = basis.beta[gaps > 0.01]
        assert len(off) <= 4
        assert np.all(np.abs(off.imag) < 1e-8)


class TestRelaxationGap:
    def test_definition(self, solver):
        basis = solver(fig_spec(6, 0.9))
        report = relaxation_gap(basis)
        k = int(np.argmin(basis.beta.real))
        assert report.delta == pytest.approx(2.0 * basis.beta.real[k])
        assert report.min_rapidity_index == k
        assert report.delta >= 0.0
        assert report.unique == (report.delta > 1e-10)

    def test_gap_shrinks_with_size(self, solver):
        deltas = [relaxation_gap(solver(fig_spec(n, 0.9))).delta
                  for n in (8, 16, 32)]
        assert deltas[0] > deltas[1] > deltas[2] > 0.0


class TestErrors:
    def test_error_hierarchy(self):
        assert issubclass(PairingError, SpectralError)
        assert issubclass(BilinearDegeneracyError, SpectralError)

    def test_norm_estimate_positive(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(12, 12))
        est = spectral_norm_estimate(m)
        exact = np.linalg.norm(m, 2)
        assert est == pytest.approx(exact, rel=1e-4)
