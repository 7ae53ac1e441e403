"""Kernel-level tests: special functions against mpmath, numba vs numpy twins."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

import mpmath as mp

from phasefold import _kernels as K
from phasefold.core import spherical_model
from phasefold.transition import TransitionQuery, _mc_setup


# ---------------------------------------------------------------------------
# Airy Ai
# ---------------------------------------------------------------------------


def test_airy_known_values():
    # Ai(0) = 3^(-2/3)/Gamma(2/3) and Ai'(0) via the first Maclaurin terms
    assert_allclose(K.airy_ai(0.0), 0.3550280538878172, rtol=0, atol=1e-15)
    # first negative zero of Ai is at z = -2.33810741045976...
    assert abs(K.airy_ai(-2.33810741045976704)) < 1e-12


def test_airy_against_mpmath_dense():
    z = np.linspace(-10.0, 10.0, 401)
    ours = K.airy_ai(z)
    ref = np.array([float(mp.airyai(zz)) for zz in z])
    assert_allclose(ours, ref, rtol=0, atol=1e-10)


def test_airy_seam_accuracy():
    # both sides of the series/asymptotic handover stay inside the
    # advertised 1e-10 absolute accuracy
    for seam in (7.5, -7.5):
        for z in (seam - 1e-9, seam, seam + 1e-9):
            assert abs(K.airy_ai(z) - float(mp.airyai(z))) < 1e-10


def test_airy_ode_residual():
    # Ai'' = z Ai, via central differences; restricted to points where the
    # function value dominates the finite-difference noise floor
    h = 1e-3
    for z in (-5.3, -1.0, 0.0, 0.7, 3.2):
        d2 = (K.airy_ai(z + h) - 2.0 * K.airy_ai(z) + K.airy_ai(z - h)) / h**2
        assert abs(d2 - z * K.airy_ai(z)) < 2e-6


def test_airy_far_tails():
    # decays right, oscillates bounded left; asymptotic branch accuracy
    for z in (12.0, 25.0, 80.0):
        assert_allclose(K.airy_ai(z), float(mp.airyai(z)), rtol=1e-12)
    for z in (-12.0, -40.0, -150.0):
        assert_allclose(K.airy_ai(z), float(mp.airyai(z)), rtol=0, atol=1e-12)


def test_airy_twins_agree():
    # the flavours sum the series in different orders, so they agree to the
    # shared accuracy contract rather than to the last bit
    z = np.linspace(-30.0, 15.0, 907)
    assert_allclose(K.airy_ai_numba(z), K.airy_ai_numpy(z), rtol=0, atol=2e-10)


def test_airy_scalar_and_shape():
    out = K.airy_ai(1.0)
    assert np.isscalar(out) or out.ndim == 0
    grid = K.airy_ai(np.zeros((3, 4)))
    assert grid.shape == (3, 4)


# ---------------------------------------------------------------------------
# Scaled Laguerre sums
# ---------------------------------------------------------------------------


def _laguerre_oracle(coeffs, u_values):
    out = []
    for uv in u_values:
        with mp.workdps(60):
            e = mp.e ** (-mp.mpf(uv) / 2)
            s = mp.mpf(0)
            for k, c in enumerate(coeffs):
                if c != 0.0:
                    s += mp.mpf(c) * e * mp.laguerre(k, 0, mp.mpf(uv))
            out.append(float(s))
    return np.array(out)


def test_laguerre_sum_moderate():
    rng = np.random.default_rng(11)
    coeffs = rng.normal(size=41)
    u = np.array([0.0, 1e-4, 0.3, 2.0, 9.0, 33.0, 80.0])
    ref = _laguerre_oracle(coeffs, u)
    assert_allclose(K.laguerre_sum(coeffs, u), ref, rtol=0, atol=2e-13)


def test_laguerre_sum_large_u_regression():
    # the seed exp(-u/2) underflows for u > ~1400; the scaled recurrence
    # must keep working far beyond (high index, deep classically allowed u)
    idx = [0, 3, 450, 2000, 9000, 13999]
    coeffs = np.zeros(14001)
    for j, i in enumerate(idx):
        coeffs[i] = (-1.0) ** j * (1.0 + 0.5 * j)
    u = np.array([500.0, 1450.0, 1600.0, 2800.0, 3500.0])
    ref = _laguerre_oracle(coeffs, u)
    got = K.laguerre_sum(coeffs, u)
    assert_allclose(got, ref, rtol=0, atol=1e-12 * np.max(np.abs(ref)))
    # and the old failure mode was exact zeros
    assert np.all(got != 0.0)


def test_laguerre_sum_twins_agree():
    rng = np.random.default_rng(12)
    coeffs = rng.normal(size=1200)
    u = np.concatenate([np.linspace(0.0, 40.0, 37), [900.0, 1700.0, 3100.0]])
    a = K.laguerre_sum_numba(coeffs, u)
    b = K.laguerre_sum_numpy(coeffs, u)
    assert_allclose(a, b, rtol=0, atol=1e-15 * np.max(np.abs(a)))


def test_laguerre_sum_single_term():
    # sum with only c_0 is exp(-u/2) itself
    u = np.array([0.0, 1.0, 10.0])
    assert_allclose(K.laguerre_sum(np.array([2.5]), u),
                    2.5 * np.exp(-0.5 * u), rtol=1e-15)


# ---------------------------------------------------------------------------
# Chebyshev-weighted Airy window integrals
# ---------------------------------------------------------------------------


def _edge_profile_oracle(v_lo, v_hi, shift, g0, n=20001):
    """Dense Gauss-Chebyshev evaluation of the same window integrals."""
    theta = (np.arange(n) + 0.5) * math.pi / n
    out = np.empty(len(v_lo))
    for i, (lo, hi) in enumerate(zip(v_lo, v_hi)):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        v = mid + half * np.cos(theta)
        out[i] = math.pi / n * float(np.sum(K.airy_ai_numpy((v - shift) / g0)))
    return out


def test_edge_profile_against_dense_quadrature():
    g0 = 0.13
    shift = 0.4
    v_lo = np.array([-1.0, -0.3, 0.2, 1.1])
    v_hi = np.array([-0.2, 0.45, 1.05, 2.6])
    ref = _edge_profile_oracle(v_lo, v_hi, shift, g0)
    got = K.edge_profile(v_lo, v_hi, shift, g0, nodes_per_panel=12)
    assert_allclose(got, ref, rtol=1e-7, atol=1e-11)


def test_edge_profile_twins_agree():
    v_lo = np.linspace(-2.0, 1.0, 9)
    v_hi = v_lo + np.linspace(0.4, 1.3, 9)
    a = K.edge_profile_numba(v_lo, v_hi, 0.15, 0.21)
    b = K.edge_profile_numpy(v_lo, v_hi, 0.15, 0.21)
    assert_allclose(a, b, rtol=1e-6, atol=1e-10)


# ---------------------------------------------------------------------------
# Airy-product row sums
# ---------------------------------------------------------------------------


def test_airy_rows_twins_agree():
    qnodes = np.linspace(-3.0, 3.0, 41)
    pnodes, pweights = np.polynomial.legendre.leggauss(64)
    pnodes = 2.5 * pnodes
    pweights = 2.5 * pweights
    for exact in (0, 1):
        a = K.airy_rows_numba(qnodes, pnodes, pweights, 1.0, 2.0, 2.0, 1.9,
                              0.2, 0.05 ** (2.0 / 3.0), exact, excl_sq=0.01)
        b = K.airy_rows_numpy(qnodes, pnodes, pweights, 1.0, 2.0, 2.0, 1.9,
                              0.2, 0.05 ** (2.0 / 3.0), exact, excl_sq=0.01)
        assert_allclose(a, b, rtol=1e-6, atol=1e-9 * np.max(np.abs(b)))


# ---------------------------------------------------------------------------
# Monte-Carlo Newton projection
# ---------------------------------------------------------------------------


def _mc_inputs(samples=256, seed=5):
    model = spherical_model(1.0, 2)
    query = TransitionQuery(model, (0.0, 0.0, 0.0, 1.0), 2.0, 2.0, 1.0)
    chart, geom = _mc_setup(query)
    rim = math.sqrt(geom.y_m_sq)
    rng = np.random.default_rng(seed)
    ys = rng.uniform(-1.4 * rim, 1.4 * rim, size=(samples, 2))
    p_seed = np.sqrt(np.clip(geom.y_m_sq - np.sum(ys * ys, axis=1), 0.0, None)
                     + (0.05 * rim) ** 2)
    seeds = np.empty((samples, 2, 2))
    seeds[:, 0, 0] = p_seed
    seeds[:, 1, 0] = -p_seed
    seeds[:, :, 1] = geom.q_s
    args = (ys, seeds, chart, np.asarray(query.centre, dtype=float),
            np.asarray(model.omegas), model.coupling,
            np.asarray(model.centre), 2.0, 2.0, 4e-12, 1e-9, 60)
    return args, geom


def test_mc_weights_twins_agree():
    args, _ = _mc_inputs()
    wa, sa = K.mc_weights_numba(*args)
    wb, sb = K.mc_weights_numpy(*args)
    assert np.array_equal(sa, sb)
    assert_allclose(wa, wb, rtol=1e-10)


def test_mc_weights_inside_points_converge():
    args, geom = _mc_inputs(samples=512, seed=7)
    ys = args[0]
    weights, status = K.mc_weights(*args)
    inside = np.sum(ys * ys, axis=1) < 0.9 * geom.y_m_sq
    assert np.all(status[inside] > 0)
    # converged interior weights are 2/(fibre Jacobian magnitude), both roots
    assert np.all(weights[inside] > 0.0)


# ---------------------------------------------------------------------------
# Backend dispatch
# ---------------------------------------------------------------------------


def test_numpy_fallback_subprocess():
    """PHASEFOLD_DISABLE_NUMBA=1 must select the numpy twins and agree."""
    code = (
        "from phasefold import _kernels as K\n"
        "import numpy as np\n"
        "assert K.BACKEND == 'numpy'\n"
        "print(repr(float(K.airy_ai(0.7))))\n"
    )
    env = dict(os.environ, PHASEFOLD_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env)
    assert out.returncode == 0, out.stderr
    assert_allclose(float(out.stdout.strip()), float(K.airy_ai(0.7)),
                    rtol=0, atol=5e-16)


@pytest.mark.skipif(not K.HAS_NUMBA, reason="numba unavailable in this run")
def test_default_backend_is_numba():
    assert K.BACKEND == "numba"
