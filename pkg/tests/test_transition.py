"""Reflection transition densities: bracket sums, closed forms, Monte Carlo."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasefold.core import quartic_model, spherical_model
from phasefold.section import build_section, section_point_check
from phasefold.transition import (
    CausticTangencyError,
    TransitionQuery,
    _intersections_1d_spherical,
    collect_section_samples,
    scaling_exponent_fit,
    sphere_area_constant,
    transition_density_1d,
    transition_density_delta_extrapolated,
    transition_density_mc,
    transition_density_smeared,
    transition_density_spherical,
)


def _query_1d(hbar, e_plus=2.0, e_minus=2.0, q_tilde=1.0, omega=1.0):
    model = spherical_model(omega, 1)
    return TransitionQuery(model, (0.0, q_tilde), e_plus, e_minus, hbar)


def test_1d_reference_value():
    # omega = q_tilde = 1, E = E' = 2: two crossings at P = ±sqrt(3), each
    # with bracket magnitude 2 sqrt(3), so the sum is 1/(2 pi sqrt(3) hbar)
    for hbar in (0.01, 1e-3):
        expected = 1.0 / (2.0 * math.pi * math.sqrt(3.0) * hbar)
        assert_allclose(transition_density_1d(_query_1d(hbar)), expected,
                        rtol=1e-12)


def test_1d_intersections_satisfy_both_shells():
    # regression: with unequal energies the crossing must sit on the correct
    # side of the section chart (both shell constraints at once)
    model = spherical_model(1.0, 1)
    for e_plus, e_minus, qt in ((2.0, 1.4, 1.1), (1.5, 2.5, 0.9),
                                (3.0, 1.0, 1.3)):
        q = TransitionQuery(model, (0.0, qt), e_plus, e_minus, 0.01)
        points, geom = _intersections_1d_spherical(q)
        assert len(points) == 2
        for X in points:
            rp, rm = section_point_check(model, (0.0, qt), X,
                                         e_plus, e_minus)
            assert abs(rp) < 1e-12 and abs(rm) < 1e-12


def test_1d_disjoint_and_tangent():
    # shells too far apart: zero; grazing contact: explicit failure
    assert transition_density_1d(_query_1d(0.01, q_tilde=5.0)) == 0.0
    q_c = build_section(1.0, 1.0, 2.0, 1.0).q_c
    with pytest.raises(CausticTangencyError):
        transition_density_1d(
            _query_1d(0.01, e_minus=1.0, q_tilde=q_c * (1.0 - 1e-12)))
    with pytest.raises(CausticTangencyError):
        transition_density_1d(_query_1d(0.01, q_tilde=0.0))


def test_1d_general_route_matches_spherical():
    # zero-coupling quartic query goes through the angular root finder when
    # forced, so compare a *small* coupling against the analytic route
    q0 = _query_1d(0.01, e_plus=2.0, e_minus=1.5, q_tilde=0.8)
    base = transition_density_1d(q0)
    model = quartic_model((1.0,), coupling=1e-12)
    q1 = TransitionQuery(model, (0.0, 0.8), 2.0, 1.5, 0.01)
    assert_allclose(transition_density_1d(q1), base, rtol=1e-6)


def test_smeared_oracle_converges_to_bracket_sum():
    q = _query_1d(0.01, e_plus=2.0, e_minus=1.5, q_tilde=0.9)
    exact = transition_density_1d(q)
    smeared = transition_density_smeared(q, 0.02)
    coarse_gap = abs(smeared - exact) / exact
    extrap = transition_density_delta_extrapolated(q, width0=0.04)
    assert abs(extrap - exact) / exact < 1e-6
    assert abs(extrap - exact) / exact < coarse_gap


def test_sphere_area_constants():
    assert_allclose(sphere_area_constant(1), 2.0 * math.pi)
    assert_allclose(sphere_area_constant(2), 4.0 * math.pi)
    assert_allclose(sphere_area_constant(3), 2.0 * math.pi ** 2)
    with pytest.raises(ValueError):
        sphere_area_constant(0)


def test_spherical_closed_printed_forms():
    # the generic formula must reproduce the hand-written N = 2 and N = 3
    # expressions P_2 = Y_M/(2 pi (hbar w)^2 Qt) and
    # P_3 = (4 pi^2/3) Y_M^3 / ((2 pi hbar)^3 w^2 Qt)
    geom = build_section(1.0, 1.0, 2.0, 2.0)
    y_m = math.sqrt(geom.y_m_sq)
    hbar = 1.0
    p2 = transition_density_spherical(geom, 2, hbar)
    assert_allclose(p2, y_m / (2.0 * math.pi * hbar ** 2), rtol=1e-14)
    assert_allclose(p2, math.sqrt(3.0) / (2.0 * math.pi), rtol=1e-14)
    p3 = transition_density_spherical(geom, 3, hbar)
    expected3 = (4.0 * math.pi ** 2 / 3.0) * y_m ** 3 \
        / ((2.0 * math.pi * hbar) ** 3)
    assert_allclose(p3, expected3, rtol=1e-14)


def test_spherical_closed_guards():
    geom = build_section(1.0, 5.0, 0.5, 0.5)  # disjoint
    assert transition_density_spherical(geom, 2, 1.0) == 0.0
    good = build_section(1.0, 1.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        transition_density_spherical(good, 1, 1.0)
    with pytest.raises(ValueError):
        transition_density_spherical(good, 2, 0.0)


def test_mc_matches_closed_equal_energies():
    model = spherical_model(1.0, 2)
    query = TransitionQuery(model, (0.0, 0.0, 0.0, 1.0), 2.0, 2.0, 1.0)
    closed = transition_density_spherical(build_section(1.0, 1.0, 2.0, 2.0),
                                          2, 1.0)
    value, err = transition_density_mc(query, 10 ** 5, seed=31)
    assert abs(value - closed) < 3.0 * err
    assert abs(value - closed) / closed < 0.02


def test_mc_matches_closed_unequal_energies():
    # exercises the off-plane crossing (regression for the chart side)
    model = spherical_model(1.0, 2)
    query = TransitionQuery(model, (0.0, 0.0, 0.0, 1.1), 2.0, 1.4, 1.0)
    closed = transition_density_spherical(build_section(1.0, 1.1, 2.0, 1.4),
                                          2, 1.0)
    value, err = transition_density_mc(query, 2 * 10 ** 5, seed=32)
    assert abs(value - closed) < 3.0 * err
    assert abs(value - closed) / closed < 0.02


def test_mc_stderr_shrinks_with_samples():
    model = spherical_model(1.0, 2)
    query = TransitionQuery(model, (0.0, 0.0, 0.0, 1.0), 2.0, 2.0, 1.0)
    _, e1 = transition_density_mc(query, 10 ** 4, seed=33)
    _, e2 = transition_density_mc(query, 16 * 10 ** 4, seed=33)
    # 16x the samples -> ~4x smaller error bar
    assert e2 < e1 / 2.5
    assert e2 > e1 / 6.5


def test_mc_is_deterministic_per_seed():
    model = spherical_model(1.0, 3)
    query = TransitionQuery(model, (0.0,) * 5 + (1.0,), 2.0, 2.0, 1.0)
    a = transition_density_mc(query, 2 * 10 ** 4, seed=7)
    b = transition_density_mc(query, 2 * 10 ** 4, seed=7)
    assert a == b
    c = transition_density_mc(query, 2 * 10 ** 4, seed=8)
    assert a != c


def test_mc_disjoint_shells():
    model = spherical_model(1.0, 2)
    query = TransitionQuery(model, (0.0, 0.0, 0.0, 6.0), 1.0, 1.0, 1.0)
    assert transition_density_mc(query, 10 ** 4, seed=1) == (0.0, 0.0)


def test_mc_quartic_model_runs_and_projects():
    # non-spherical foil: weights must come from converged projections onto
    # the true coupled shells
    model = quartic_model((1.0, 1.0), coupling=0.05)
    query = TransitionQuery(model, (0.0, 0.0, 0.0, 1.0), 2.0, 2.0, 1.0)
    samples = collect_section_samples(query, 2000, seed=3)
    ok = [s for s in samples if s.jacobian_ok]
    assert len(ok) > 100
    for s in ok[:50]:
        rp, rm = section_point_check(model, query.centre,
                                     s.point - np.asarray(query.centre),
                                     2.0, 2.0)
        assert abs(rp) < 1e-9 and abs(rm) < 1e-9


def test_scaling_exponent_near_caustic():
    scan = 2.0 - np.geomspace(1e-4, 1e-2, 8)
    slope = scaling_exponent_fit(1.0, 2, 1.0, 2.0, 2.0, scan)
    assert abs(slope - 1.0) < 0.02


def test_query_displacement_and_validation():
    model = spherical_model(1.0, 2)
    q = TransitionQuery(model, (0.0, 0.5, 0.0, 1.0), 2.0, 2.0, 1.0)
    assert_allclose(q.displacement, [0.0, 0.5, 0.0, 1.0])
    with pytest.raises(ValueError):
        transition_density_mc(q, 100, seed=0)  # too few for batching
    with pytest.raises(ValueError):
        transition_density_mc(
            TransitionQuery(spherical_model(1.0, 1), (0.0, 1.0),
                            2.0, 2.0, 1.0), 10 ** 4, seed=0)
