"""Centre-section geometry of a reflected shell pair."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasefold.core import harmonic_model, quartic_model, spherical_model
from phasefold.section import (
    build_section,
    normalized_velocity_skew,
    section_frame,
    section_momentum,
    section_point_check,
    section_sum_residual,
    spherical_normal_form,
    spherical_section_point,
)


def test_reference_geometry():
    # omega = q_tilde = 1, both energies 2: the crossing sits on the section
    # plane with the shells' radii sqrt(2 E / omega) = 2 and Q_c = 2
    geom = build_section(1.0, 1.0, 2.0, 2.0)
    assert geom.q_s == 0.0
    assert geom.sigma == 0.0
    assert_allclose(geom.y_m_sq, 3.0, rtol=0, atol=1e-15)
    assert_allclose(geom.p_s, math.sqrt(3.0), rtol=1e-15)
    assert_allclose(geom.q_c, 2.0, rtol=1e-15)


def test_unequal_energies_shift_the_plane():
    geom = build_section(1.0, 1.0, 2.5, 1.5)
    # Q_s = (E+ - E-)/(2 omega q_tilde)
    assert_allclose(geom.q_s, 0.5)
    assert_allclose(geom.y_m_sq, 4.0 - 0.25 - 1.0)


def test_disjoint_shells_have_negative_rim():
    geom = build_section(1.0, 5.0, 0.5, 0.5)
    assert geom.y_m_sq < 0.0
    assert np.isnan(geom.p_s)
    assert section_momentum(geom, 0.0) == ()


def test_section_momentum_pair_and_rim():
    geom = build_section(1.0, 1.0, 2.0, 2.0)
    p, m = section_momentum(geom, 1.0)
    assert_allclose(p, math.sqrt(2.0))
    assert m == -p
    assert section_momentum(geom, geom.y_m_sq) == (0.0, -0.0)
    with pytest.raises(ValueError):
        section_momentum(geom, -0.1)


def test_sum_identity_random_geometries():
    rng = np.random.default_rng(10)
    for _ in range(200):
        omega = rng.uniform(0.5, 2.0)
        e_plus = rng.uniform(0.5, 3.0)
        e_minus = rng.uniform(0.5, 3.0)
        r_in = abs(math.sqrt(2 * e_plus / omega) - math.sqrt(2 * e_minus / omega)) / 2
        r_out = (math.sqrt(2 * e_plus / omega) + math.sqrt(2 * e_minus / omega)) / 2
        qt = r_in + rng.uniform(0.05, 0.95) * (r_out - r_in)
        geom = build_section(omega, qt, e_plus, e_minus)
        if geom.y_m_sq <= 0:
            continue
        y_sq = rng.uniform(0.0, geom.y_m_sq)
        for p in section_momentum(geom, y_sq):
            assert abs(section_sum_residual(geom, p, y_sq)) < 1e-12


def test_rim_closes_at_caustic_offset():
    geom = build_section(1.3, 0.0 + build_section(1.3, 1.0, 2.0, 1.0).q_c,
                         2.0, 1.0)
    assert abs(geom.y_m_sq) < 1e-10


def test_normal_form_geometric_mean():
    model = harmonic_model((1.0, 4.0))
    nf = spherical_normal_form(model)
    assert_allclose(nf.omega, 2.0)
    assert_allclose(nf.forward_factors, (math.sqrt(0.5), math.sqrt(2.0)))
    # scaling preserves the Hamiltonian value
    rng = np.random.default_rng(11)
    spherical = spherical_model(nf.omega, 2)
    for x in rng.normal(size=(10, 4)):
        assert_allclose(spherical.value(nf.to_spherical(x)), model.value(x),
                        rtol=1e-12)
        assert_allclose(nf.from_spherical(nf.to_spherical(x)), x, rtol=1e-12)


def test_normal_form_quartic_uses_quadratic_part():
    # the quartic term vanishes to second order at the centre, so the scaling
    # comes from the harmonic frequencies alone
    model = quartic_model((1.0,), coupling=-10.0)
    assert spherical_normal_form(model).omega == 1.0
    with pytest.raises(TypeError):
        spherical_normal_form("not a model")


def test_section_frame_is_orthonormal_and_aligned():
    rng = np.random.default_rng(12)
    for n2 in (2, 4, 6, 8):
        d = rng.normal(size=n2)
        frame = section_frame(d)
        assert frame.shape == (n2, n2)
        assert_allclose(frame.T @ frame, np.eye(n2), rtol=0, atol=1e-12)
        # last column points along the displacement argument
        assert_allclose(frame[:, -1], d / np.linalg.norm(d), rtol=0, atol=1e-12)


def test_spherical_section_point_sits_on_both_shells():
    # with the centre displaced along the last position axis, the chart
    # layout (Y_p, P, Y_q, Q) coincides with ambient coordinates
    omega, e_plus, e_minus = 1.0, 2.0, 1.4
    rng = np.random.default_rng(13)
    for ndof in (1, 2, 3):
        model = spherical_model(omega, ndof)
        geom = build_section(omega, 1.1, e_plus, e_minus)
        centre = np.zeros(2 * ndof)
        centre[-1] = 1.1
        ys = [None]
        if ndof > 1:
            y = rng.normal(size=2 * (ndof - 1))
            y *= 0.6 * math.sqrt(geom.y_m_sq) / np.linalg.norm(y)
            ys.append(y)
        for y in ys:
            for sign in (1.0, -1.0):
                X = spherical_section_point(geom, ndof, y=y, sign=sign)
                rp, rm = section_point_check(model, centre, X,
                                             e_plus, e_minus)
                assert abs(rp) < 1e-12 and abs(rm) < 1e-12


def test_velocity_skew_vanishes_at_tangency():
    model = spherical_model(1.0, 1)
    # tangency: the two shells touch where q_tilde equals q_c
    geom = build_section(1.0, 1.0, 2.0, 1.0)
    centre = np.array([0.0, geom.q_c])
    r_plus = math.sqrt(2 * 2.0 / 1.0)
    X_tangent = np.array([0.0, r_plus - geom.q_c])
    rp, rm = section_point_check(model, centre, X_tangent, 2.0, 1.0)
    assert abs(rp) < 1e-12 and abs(rm) < 1e-12
    assert normalized_velocity_skew(model, centre, X_tangent) < 1e-12
    # away from tangency the skew is order one
    geom2 = build_section(1.0, 1.0, 2.0, 2.0)
    X_cross = np.array([geom2.p_s, geom2.q_s])
    assert normalized_velocity_skew(model, (0.0, 1.0), X_cross) > 0.5
