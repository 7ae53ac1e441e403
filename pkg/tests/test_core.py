"""Symplectic primitives, model Hamiltonians, and the reflection frame."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasefold.core import (
    HamiltonianModel,
    ReflectionFrame,
    apply_j,
    finite_difference_gradient,
    finite_difference_hessian,
    harmonic_model,
    join_pq,
    ndof_of,
    poisson_bracket,
    quartic_model,
    reflect,
    spherical_model,
    skew_product,
    split_pq,
)


def test_apply_j_convention():
    # J(p, q) = (-q, p), plane by plane
    assert_allclose(apply_j([1.0, 0.0]), [0.0, 1.0])
    assert_allclose(apply_j([0.0, 1.0]), [-1.0, 0.0])
    assert_allclose(apply_j([1.0, 2.0, 3.0, 4.0]), [-3.0, -4.0, 1.0, 2.0])


def test_apply_j_squares_to_minus_one():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(20, 6))
    assert_allclose(apply_j(apply_j(x)), -x, rtol=0, atol=0)


def test_skew_product_orientation_and_antisymmetry():
    assert skew_product([1.0, 0.0], [0.0, 1.0]) == 1.0
    rng = np.random.default_rng(1)
    a = rng.normal(size=(15, 4))
    b = rng.normal(size=(15, 4))
    assert_allclose(skew_product(a, b), -skew_product(b, a), atol=1e-14)
    assert_allclose(skew_product(a, a), 0.0, atol=1e-14)


def test_reflect_is_involutive():
    c = np.array([0.3, -1.2])
    x = np.array([2.0, 0.5])
    assert_allclose(reflect(c, reflect(c, x)), x)
    assert_allclose(reflect(c, c), c)


def test_split_join_roundtrip():
    x = np.arange(8.0).reshape(2, 4)
    p, q = split_pq(x)
    assert p.shape == q.shape == (2, 2)
    assert_allclose(join_pq(p, q), x)


def test_ndof_of_rejects_odd():
    with pytest.raises(ValueError):
        ndof_of(np.zeros(5))


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


def test_harmonic_value_gradient_hessian():
    model = harmonic_model((1.0, 3.0), centre=(0.5, 0.0, 0.0, -1.0))
    rng = np.random.default_rng(2)
    for x in rng.normal(size=(8, 4)):
        assert_allclose(model.gradient(x),
                        finite_difference_gradient(model.value, x),
                        rtol=0, atol=1e-6)
        assert_allclose(model.hessian(x),
                        finite_difference_hessian(model.value, x),
                        rtol=0, atol=1e-5)


def test_quartic_value_gradient_hessian():
    model = quartic_model((1.0, 2.0), coupling=0.7, centre=None)
    rng = np.random.default_rng(3)
    for x in rng.normal(size=(8, 4)):
        assert_allclose(model.gradient(x),
                        finite_difference_gradient(model.value, x),
                        rtol=0, atol=2e-6)
        assert_allclose(model.hessian(x),
                        finite_difference_hessian(model.value, x),
                        rtol=0, atol=2e-4)
    # quartic term acts only on positions
    assert_allclose(model.value([1.0, 1.0, 0.0, 0.0]), 1.5)
    assert_allclose(model.value([0.0, 0.0, 1.0, 1.0]), 1.5 + 0.7 * 4.0)


def test_spherical_model_energy():
    model = spherical_model(2.0, ndof=3)
    x = np.zeros(6)
    x[0] = 1.0  # one unit of momentum
    assert_allclose(model.value(x), 1.0)
    assert model.ndof == 3


def test_model_validation():
    with pytest.raises(ValueError):
        HamiltonianModel("exotic", omegas=(1.0,))
    with pytest.raises(ValueError):
        harmonic_model((1.0, -2.0))
    with pytest.raises(ValueError):
        harmonic_model((1.0,), centre=(0.0, 0.0, 0.0))


def test_velocity_is_j_gradient():
    model = quartic_model((1.0,), coupling=0.3)
    x = np.array([0.7, -0.2])
    assert_allclose(model.velocity(x), apply_j(model.gradient(x)))


def test_value_broadcasts():
    model = harmonic_model((1.0, 2.0))
    pts = np.random.default_rng(4).normal(size=(5, 7, 4))
    vals = model.value(pts)
    assert vals.shape == (5, 7)
    assert_allclose(vals[2, 3], model.value(pts[2, 3]))


# ---------------------------------------------------------------------------
# Reflection frame and the branch bracket
# ---------------------------------------------------------------------------


def test_frame_residual_and_flip_symmetry():
    model = harmonic_model((1.0, 2.0))
    frame = ReflectionFrame(model, (0.1, 0.2, 0.3, 0.4), 2.0, 1.5)
    X = np.array([0.5, -0.3, 0.2, 0.9])
    res = frame.residual(X)
    assert_allclose(res[0], model.value(np.add(frame.centre, X)) - 2.0)
    assert_allclose(res[1], model.value(np.subtract(frame.centre, X)) - 1.5)
    # swapping X -> -X swaps the roles of the branches
    flipped = ReflectionFrame(model, frame.centre, 1.5, 2.0)
    assert_allclose(frame.residual(X), flipped.residual(-X)[..., ::-1])


def test_poisson_bracket_against_finite_differences():
    model = quartic_model((1.0, 1.7), coupling=0.2)
    frame = ReflectionFrame(model, (0.0, 0.1, 1.0, -0.4), 2.0, 1.1)
    rng = np.random.default_rng(5)
    for X in rng.normal(size=(6, 4)):
        gp = finite_difference_gradient(frame.hplus, X)
        gm = finite_difference_gradient(frame.hminus, X)
        expected = skew_product(gp, gm)
        assert_allclose(poisson_bracket(frame, X), expected, rtol=0, atol=5e-5)


def test_finite_difference_gradient_quadratic_exact():
    # central differences are exact on quadratics up to roundoff
    def f(x):
        return 3.0 * x[0] ** 2 - 2.0 * x[0] * x[1] + x[1] ** 2

    g = finite_difference_gradient(f, np.array([1.0, 2.0]))
    assert_allclose(g, [6.0 - 4.0, -2.0 + 4.0], rtol=1e-7)
