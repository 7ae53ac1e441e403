"""Symplectic phase-space primitives and reference Hamiltonian models.

Phase-space points are flat arrays ``x = (p_1, ..., p_N, q_1, ..., q_N)`` of
even length 2N.  All routines broadcast over leading axes, so ``x`` may be a
stack of points of shape ``(..., 2N)``.

Conventions
-----------
* ``J(p, q) = (-q, p)`` plane by plane, so the symplectic form is
  ``skew_product(a, b) = (J a) . b`` with ``skew_product((1, 0), (0, 1)) = +1``.
* Hamiltonian flow: ``xdot = J grad H``.
* Poisson bracket: ``{f, g} = (J grad f) . grad g``.
"""

from dataclasses import dataclass, field

import numpy as np


def ndof_of(x):
    """Number of degrees of freedom N for a phase-space array of shape (..., 2N)."""
    n2 = np.shape(x)[-1]
    if n2 % 2:
        raise ValueError("phase-space arrays must have even final axis, got %d" % n2)
    return n2 // 2


def split_pq(x):
    """Split ``(..., 2N)`` into momentum and position blocks ``(..., N)`` each."""
    x = np.asarray(x, dtype=float)
    n = ndof_of(x)
    return x[..., :n], x[..., n:]


def join_pq(p, q):
    """Inverse of :func:`split_pq`."""
    return np.concatenate([np.asarray(p, dtype=float), np.asarray(q, dtype=float)], axis=-1)


def apply_j(x):
    """Apply the symplectic matrix: ``J (p, q) = (-q, p)``."""
    p, q = split_pq(x)
    return join_pq(-q, p)


def skew_product(a, b):
    """Symplectic skew product ``(J a) . b``, broadcasting over leading axes."""
    return np.sum(apply_j(a) * np.asarray(b, dtype=float), axis=-1)


def reflect(centre, x):
    """Reflect ``x`` through ``centre``: returns ``2*centre - x``."""
    return 2.0 * np.asarray(centre, dtype=float) - np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# Hamiltonian models
# ---------------------------------------------------------------------------

_KINDS = ("harmonic", "spherical", "quartic")


@dataclass(frozen=True)
class HamiltonianModel:
    """Analytic Hamiltonian with exact gradient and Hessian.

    ``H(x) = sum_n omega_n (p_n^2 + q_n^2) / 2 + coupling * (sum_n q_n^2)^2``
    with all coordinates measured relative to ``centre``.

    Use the factory helpers :func:`harmonic_model`, :func:`spherical_model`
    and :func:`quartic_model` instead of the raw constructor.
    """

    kind: str
    omegas: tuple
    coupling: float = 0.0
    centre: tuple = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("unknown model kind %r" % (self.kind,))
        omegas = tuple(float(w) for w in np.atleast_1d(self.omegas))
        if any(w <= 0.0 for w in omegas):
            raise ValueError("harmonic frequencies must be positive")
        object.__setattr__(self, "omegas", omegas)
        centre = self.centre
        if centre is None:
            centre = (0.0,) * (2 * len(omegas))
        centre = tuple(float(c) for c in np.atleast_1d(centre))
        if len(centre) != 2 * len(omegas):
            raise ValueError("centre must have length 2N = %d" % (2 * len(omegas)))
        object.__setattr__(self, "centre", centre)
        object.__setattr__(self, "coupling", float(self.coupling))

    @property
    def ndof(self):
        return len(self.omegas)

    def _rel(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 2 * self.ndof:
            raise ValueError(
                "expected phase-space points of length %d, got %d"
                % (2 * self.ndof, x.shape[-1])
            )
        return x - np.asarray(self.centre)

    def value(self, x):
        """Hamiltonian value, broadcasting over leading axes of ``x``."""
        dx = self._rel(x)
        w = np.asarray(self.omegas)
        p, q = split_pq(dx)
        h = 0.5 * np.sum(w * (p * p + q * q), axis=-1)
        if self.coupling:
            h = h + self.coupling * np.sum(q * q, axis=-1) ** 2
        return h

    def gradient(self, x):
        """Exact gradient of H, shape ``(..., 2N)``."""
        dx = self._rel(x)
        w = np.asarray(self.omegas)
        p, q = split_pq(dx)
        gp = w * p
        gq = w * q
        if self.coupling:
            s = np.sum(q * q, axis=-1, keepdims=True)
            gq = gq + 4.0 * self.coupling * s * q
        return join_pq(gp, gq)

    def hessian(self, x):
        """Exact Hessian of H, shape ``(..., 2N, 2N)``; always symmetric."""
        dx = self._rel(x)
        n = self.ndof
        w = np.asarray(self.omegas)
        p, q = split_pq(dx)
        base = np.zeros(dx.shape[:-1] + (2 * n, 2 * n))
        idx = np.arange(2 * n)
        base[..., idx, idx] = np.concatenate([w, w])
        if self.coupling:
            s = np.sum(q * q, axis=-1)[..., None, None]
            qq = q[..., :, None] * q[..., None, :]
            eye = np.eye(n)
            base[..., n:, n:] += 4.0 * self.coupling * s * eye + 8.0 * self.coupling * qq
        return base

    def velocity(self, x):
        """Hamiltonian velocity ``J grad H`` at ``x``."""
        return apply_j(self.gradient(x))


def harmonic_model(omegas, centre=None):
    """Anisotropic harmonic Hamiltonian ``sum_n omega_n (p_n^2 + q_n^2) / 2``."""
    return HamiltonianModel("harmonic", omegas=np.atleast_1d(omegas), centre=centre)


def spherical_model(omega, ndof=1, centre=None):
    """Isotropic (spherical) harmonic Hamiltonian with common frequency ``omega``."""
    return HamiltonianModel("spherical", omegas=(float(omega),) * ndof, centre=centre)


def quartic_model(omegas, coupling, centre=None):
    """Harmonic Hamiltonian plus an isotropic quartic term ``coupling * (sum q^2)^2``."""
    return HamiltonianModel(
        "quartic", omegas=np.atleast_1d(omegas), coupling=coupling, centre=centre
    )


def poisson_bracket(frame, X):
    """Poisson bracket ``{H_+, H_-}`` of the two branch Hamiltonians of a
    :class:`ReflectionFrame`, evaluated at half-chord ``X``."""
    return frame.bracket(X)


# ---------------------------------------------------------------------------
# Reflection frame
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReflectionFrame:
    """The pair of shifted shells seen from a reflection centre.

    For a centre ``x`` the two branches are ``H_+(X) = H(x + X)`` and
    ``H_-(X) = H(x - X)``; a chord midpoint ``x`` reflects the endpoint
    ``x + X`` onto ``x - X``.  The frame evaluates both branches, their
    gradients with respect to the half-chord ``X``, the branch Poisson
    bracket, and the physical shell velocities at the two endpoints.
    """

    model: HamiltonianModel
    centre: tuple
    energy_plus: float
    energy_minus: float

    def __post_init__(self):
        centre = tuple(float(c) for c in np.atleast_1d(self.centre))
        if len(centre) != 2 * self.model.ndof:
            raise ValueError("centre must have length 2N = %d" % (2 * self.model.ndof,))
        object.__setattr__(self, "centre", centre)
        object.__setattr__(self, "energy_plus", float(self.energy_plus))
        object.__setattr__(self, "energy_minus", float(self.energy_minus))

    def _ends(self, X):
        X = np.asarray(X, dtype=float)
        c = np.asarray(self.centre)
        return c + X, c - X

    def hplus(self, X):
        return self.model.value(self._ends(X)[0])

    def hminus(self, X):
        return self.model.value(self._ends(X)[1])

    def residual(self, X):
        """Energy residuals ``(H_+ - E_+, H_- - E_-)`` stacked on the last axis."""
        xp, xm = self._ends(X)
        return np.stack(
            [self.model.value(xp) - self.energy_plus,
             self.model.value(xm) - self.energy_minus],
            axis=-1,
        )

    def grad_plus(self, X):
        """Gradient of ``H_+`` with respect to ``X``."""
        return self.model.gradient(self._ends(X)[0])

    def grad_minus(self, X):
        """Gradient of ``H_-`` with respect to ``X`` (note the chain-rule sign)."""
        return -self.model.gradient(self._ends(X)[1])

    def bracket(self, X):
        """Branch Poisson bracket ``{H_+, H_-}`` in the X variables.

        Equals the symplectic skew of the two shell velocities at the
        reflected endpoints, so it vanishes exactly where the velocities
        are parallel (chord tangency).
        """
        return skew_product(self.grad_plus(X), self.grad_minus(X))

    def velocities(self, X):
        """Physical velocities ``J grad H`` at the endpoints ``x + X`` and ``x - X``."""
        xp, xm = self._ends(X)
        return self.model.velocity(xp), self.model.velocity(xm)

    def velocity_alignment(self, X):
        """Normalized measure of velocity parallelism at the two endpoints.

        Returns ``sqrt(|v+|^2 |v-|^2 - (v+ . v-)^2) / (|v+| |v-|)``, the sine
        of the angle between the endpoint velocities; values below ~1e-10
        flag a tangency (caustic) configuration.
        """
        vp, vm = self.velocities(X)
        n2p = np.sum(vp * vp, axis=-1)
        n2m = np.sum(vm * vm, axis=-1)
        dot = np.sum(vp * vm, axis=-1)
        gram = np.clip(n2p * n2m - dot * dot, 0.0, None)
        return np.sqrt(gram) / np.sqrt(n2p * n2m)


# ---------------------------------------------------------------------------
# Finite-difference validators
# ---------------------------------------------------------------------------


def finite_difference_gradient(f, x, step=None):
    """Central-difference gradient of a scalar function of a flat point."""
    x = np.asarray(x, dtype=float)
    if step is None:
        step = np.cbrt(np.finfo(float).eps) * max(1.0, np.max(np.abs(x)))
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def finite_difference_hessian(f, x, step=None):
    """Central-difference Hessian of a scalar function of a flat point."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if step is None:
        step = np.sqrt(np.sqrt(np.finfo(float).eps)) * max(1.0, np.max(np.abs(x)))
    h = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = step
            ej[j] = step
            val = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * step * step)
            h[i, j] = val
            h[j, i] = val
    return h
