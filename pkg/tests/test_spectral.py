"""Semiclassical spectral Wigner forms and the Airy width field."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasefold._kernels import airy_ai
from phasefold.core import quartic_model, spherical_model
from phasefold.oracle import EigenBasis1D, spectral_wigner_exact
from phasefold.spectral import (
    WidthDomainError,
    airy_lorentzian_smoothed,
    airy_spectral_smoothed,
    airy_spectral_wigner,
    airy_width,
    classical_spectral_wigner,
    regime_report,
)

MODEL = spherical_model(1.0)


def test_airy_width_closed_form():
    # for H = omega r^2 / 2 the curvature v.Hess v equals 2 omega^2 H, so
    # gamma = (hbar^2 omega^2 2H)^(1/3) / 2
    omega, hbar = 1.3, 0.05
    model = spherical_model(omega)
    x = np.array([0.7, -1.1])
    h = model.value(x)
    expected = 0.5 * (hbar * hbar * omega * omega * 2.0 * h) ** (1.0 / 3.0)
    assert_allclose(airy_width(model, x, hbar=hbar), expected, rtol=1e-12)


def test_airy_width_hbar_scaling_is_exact():
    x = np.array([0.4, 0.9])
    g1 = airy_width(MODEL, x, hbar=0.01)
    g2 = airy_width(MODEL, x, hbar=0.02)
    assert_allclose(g2 / g1, 2.0 ** (2.0 / 3.0), rtol=1e-14)


def test_airy_width_rejects_concave_shell():
    # strong negative quartic coupling makes the position Hessian negative;
    # the velocity needs a position component to see it
    model = quartic_model((1.0,), coupling=-0.5)
    with pytest.raises(WidthDomainError):
        airy_width(model, np.array([5.0, 2.0]), hbar=0.01)


def test_airy_spectral_zero_argument_on_shell():
    # the Airy argument vanishes exactly on the energy shell
    hbar, energy = 0.02, 1.5
    r = math.sqrt(2.0 * energy)
    x = np.array([0.0, r])
    gamma = airy_width(MODEL, x, hbar=hbar)
    val = airy_spectral_wigner(MODEL, energy, x, hbar=hbar)
    assert_allclose(val, airy_ai(0.0) / gamma, rtol=1e-12)


def test_airy_lorentzian_against_dense_trapezoid():
    # in-domain widths (the panel grid resolves kernels down to ~0.1)
    t = np.arange(-120.0, 15.0, 5e-4)
    ai = airy_ai(t)
    for width in (0.15, 0.4, 1.2):
        for z in (-3.0, 0.0, 2.0):
            kern = (width / math.pi) / ((z - t) ** 2 + width * width)
            ref = np.trapezoid(kern * ai, t)
            got = float(airy_lorentzian_smoothed(np.array([z]), width)[0])
            assert_allclose(got, ref, rtol=0, atol=5e-5)


def test_airy_lorentzian_damps_oscillations():
    # widening the window suppresses the deep-left fringes
    z = np.linspace(-25.0, -15.0, 101)
    amp = [float(np.max(np.abs(airy_lorentzian_smoothed(z, w))))
           for w in (0.2, 1.0, 3.0)]
    assert amp[0] > amp[1] > amp[2]


def test_airy_smoothed_grouping_matches_pointwise():
    # the width-grouped batch path must agree with one-point calls
    hbar, energy, eps = 0.05, 2.0, 0.1
    radii = np.linspace(1.2, 2.4, 9)
    x = np.stack([np.zeros_like(radii), radii], axis=-1)
    batch = airy_spectral_smoothed(MODEL, energy, x, eps, hbar=hbar)
    single = np.array([
        float(airy_spectral_smoothed(MODEL, energy, xi, eps, hbar=hbar))
        for xi in x])
    assert_allclose(batch, single, rtol=1e-3)


def test_classical_form_normalized_in_energy():
    x = np.array([0.3, 1.1])
    smear = 0.07
    h = MODEL.value(x)
    energies = np.linspace(h - 8 * smear, h + 8 * smear, 4001)
    vals = np.array([classical_spectral_wigner(MODEL, e, x, smear)
                     for e in energies])
    assert_allclose(np.trapezoid(vals, energies), 1.0, rtol=1e-6)
    assert energies[np.argmax(vals)] == pytest.approx(h, abs=smear / 10)
    with pytest.raises(ValueError):
        classical_spectral_wigner(MODEL, 1.0, x, 0.0)


def test_exact_eigensum_matches_airy_near_shell():
    # light version of the full radial-scan comparison
    hbar, energy = 0.05, 20.0
    eps = 3.0 * hbar
    basis = EigenBasis1D(omega=1.0, hbar=hbar, max_index=14000)
    r = math.sqrt(2.0 * energy)
    pairs = []
    for frac in (0.97, 1.0, 1.03):
        x = (0.0, frac * r)
        exact = float(spectral_wigner_exact(basis, energy, eps, x))
        airy = float(airy_spectral_smoothed(MODEL, energy, x, eps, hbar=hbar))
        pairs.append((exact, airy))
    peak = max(abs(e) for e, _ in pairs)
    for exact, airy in pairs:
        assert abs(exact - airy) < 0.05 * peak


def test_regime_report_window():
    rep = regime_report(1.0, eps=0.15, gamma=0.5, hbar=0.05)
    assert rep["inside_window"]
    assert rep["eps_over_orbit_scale"] > 1.0
    assert rep["gamma_over_eps"] > 1.0
    # eps below the orbit scale leaves the window
    assert not regime_report(1.0, eps=0.001, gamma=0.5,
                             hbar=0.05)["inside_window"]
