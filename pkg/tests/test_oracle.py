"""Exact 1-D oscillator reflection/Wigner oracles."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasefold.oracle import (
    EigenBasis1D,
    TruncationError,
    autocorrelation_closed,
    convolution_identity_check,
    correlation_identity_check,
    cross_wigner,
    lorentzian,
    reflection_matrix,
    reflection_matrix_element,
    smoothed_dos,
    spectral_wigner_exact,
    transition_probability_exact,
    transition_probability_row,
    wigner,
)

BASIS = EigenBasis1D(omega=1.0, hbar=1.0, max_index=80)


def test_ground_state_wigner_gaussian():
    # W_00 = exp(-(p^2+q^2)/hbar)/(pi hbar)
    for x in ((0.0, 0.0), (0.5, -0.3), (1.2, 0.8)):
        expected = math.exp(-(x[0] ** 2 + x[1] ** 2)) / math.pi
        assert_allclose(wigner(BASIS, 0, x), expected, rtol=1e-12)


def test_wigner_closed_vs_quadrature():
    pts = [(0.0, 0.0), (0.7, 0.1), (-0.4, 1.1), (1.5, -1.5)]
    for k in range(4):
        for x in pts:
            closed = wigner(BASIS, k, x, method="closed")
            quad = wigner(BASIS, k, x, method="quadrature")
            assert_allclose(closed, quad, rtol=0, atol=1e-10)


def test_cross_wigner_closed_vs_quadrature():
    pts = [(0.2, 0.3), (-0.8, 0.5), (1.1, -0.2)]
    for k, l in ((1, 0), (2, 1), (3, 3), (5, 2)):
        for x in pts:
            closed = cross_wigner(BASIS, k, l, x, method="closed")
            quad = cross_wigner(BASIS, k, l, x, method="quadrature")
            assert abs(closed - quad) < 1e-10


def test_reflection_element_parity_at_origin():
    # the reflection through the origin is the parity operator
    for k in range(6):
        val = reflection_matrix_element(BASIS, k, k, (0.0, 0.0))
        assert_allclose(val, (-1.0) ** k, rtol=0, atol=1e-12)
    off = reflection_matrix_element(BASIS, 3, 1, (0.0, 0.0))
    assert abs(off) < 1e-12


def test_reflection_element_hermitian_symmetry():
    x = (0.6, -0.9)
    for k, l in ((0, 1), (2, 4), (3, 2)):
        a = reflection_matrix_element(BASIS, k, l, x)
        b = reflection_matrix_element(BASIS, l, k, x)
        assert abs(a - np.conj(b)) < 1e-11


def test_reflection_element_bounded():
    rng = np.random.default_rng(20)
    for _ in range(10):
        x = tuple(rng.uniform(-2, 2, size=2))
        k = int(rng.integers(0, 8))
        l = int(rng.integers(0, 8))
        assert abs(reflection_matrix_element(BASIS, k, l, x)) <= 1.0 + 1e-12


def test_reflection_matrix_unitary_block():
    x = (0.4, 0.2)
    kmax = 6
    rho = reflection_matrix(BASIS, kmax, x)
    assert rho.shape == (kmax + 1, kmax + 1)
    assert_allclose(rho, rho.conj().T, rtol=0, atol=1e-11)
    # rows of the full (infinite) matrix are unit vectors; the truncated
    # block row sums stay <= 1
    sums = np.sum(np.abs(rho) ** 2, axis=1)
    assert np.all(sums <= 1.0 + 1e-10)
    assert sums[0] > 0.9  # ground-state row converges fastest


def test_transition_probability_row_sums_to_one():
    # classically allowed point for k = 0 and small hbar margin
    x = (0.3, 0.4)
    row = transition_probability_row(BASIS, 0, 40, x)
    assert row.shape == (41,)
    assert np.all(row >= -1e-15)
    assert_allclose(np.sum(row), 1.0, rtol=0, atol=1e-9)


def test_transition_probability_matches_element():
    x = (0.5, -0.1)
    p = transition_probability_exact(BASIS, 2, 3, x)
    rho = reflection_matrix_element(BASIS, 2, 3, x)
    assert_allclose(p, abs(rho) ** 2, rtol=1e-12)


def test_moyal_normalization_factor():
    # standard cross-Wigner carries 1/(pi hbar); the reflection expectation
    # itself is bounded by 1
    x = (0.2, 0.2)
    w = cross_wigner(BASIS, 1, 1, x)
    rho = reflection_matrix_element(BASIS, 1, 1, x)
    assert_allclose(w, rho / (math.pi * BASIS.hbar), rtol=1e-12)


def test_autocorrelation_closed_identity():
    for k in (0, 1, 4):
        for xi in ((0.0, 0.0), (0.5, 0.5), (1.5, -0.4)):
            res = correlation_identity_check(BASIS, k, xi)
            assert res < 1e-8
            s = (xi[0] ** 2 + xi[1] ** 2) / 2.0
            # closed value: exp(-s) L_k(s)^2
            lk = np.polynomial.laguerre.lagval(s, np.eye(k + 1)[k])
            assert_allclose(autocorrelation_closed(BASIS, k, xi),
                            math.exp(-s) * lk ** 2, rtol=1e-12)


def test_convolution_identity_small_block():
    for k, l in ((0, 0), (1, 0), (2, 2)):
        assert convolution_identity_check(BASIS, k, l, (0.4, -0.2)) < 1e-8


def test_smoothed_dos_is_lorentzian_sum():
    basis = EigenBasis1D(omega=1.0, hbar=1.0, max_index=30)
    energy, eps = 3.2, 0.4
    expected = sum(lorentzian(energy - basis.eigenenergy(k), eps)
                   for k in range(31))
    assert_allclose(smoothed_dos(basis, energy, eps), expected, rtol=1e-12)


def test_spectral_exact_truncation_guard():
    basis = EigenBasis1D(omega=1.0, hbar=1.0, max_index=12)
    # scan energy far above the top of the truncated spectrum
    with pytest.raises(TruncationError):
        spectral_wigner_exact(basis, 14.0, 0.5, (0.0, 1.0))


def test_spectral_exact_parity_series():
    # at the origin the eigensum collapses to sum_k 2 (-1)^k lorentzian;
    # the loose tail tolerance keeps both sides the same truncated sum
    basis = EigenBasis1D(omega=1.0, hbar=1.0, max_index=400)
    energy, eps = 1.7, 0.3
    val = spectral_wigner_exact(basis, energy, eps, (0.0, 0.0), tail_tol=1e-4)
    series = sum(2.0 * (-1.0) ** k
                 * lorentzian(energy - basis.eigenenergy(k), eps)
                 for k in range(401))
    assert_allclose(val, series, rtol=1e-10)


def test_convolution_identity_small_hbar():
    # small hbar drives the product grid against its point-count cap; the
    # identity must survive (GridCoverageError would flag an uncovered tail)
    basis = EigenBasis1D(omega=1.0, hbar=0.002, max_index=80)
    assert convolution_identity_check(basis, 40, 40, (0.0, 0.3)) < 1e-8
