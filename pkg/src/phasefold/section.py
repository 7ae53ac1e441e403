"""Geometry of the centre section between a pair of reflected energy shells.

For a reflection centre displaced by ``Q_tilde`` from the shell centre (after
scaling to spherical symmetry), the section ``{H(x+X)=E} ∩ {H(x-X)=E'}`` is
characterized by a handful of scalars: the section-plane coordinate ``Q_s``,
the relative energy split ``sigma``, the squared transverse radius
``Y_M_sq``, the reference momentum ``P_s`` and the caustic offset ``Q_c``
where the shells touch.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import HamiltonianModel, ReflectionFrame, skew_product


@dataclass(frozen=True)
class NormalForm:
    """Volume-preserving scaling taking a positive harmonic model to
    spherical symmetry with the geometric-mean frequency.

    ``forward_factors[n]`` multiplies both coordinates of plane n on the way
    into spherical coordinates; the inverse map divides.  The map preserves
    the Hamiltonian value but is not symplectic plane by plane, so scaled
    coordinates must never be propagated dynamically.
    """

    omega: float
    centre: tuple
    forward_factors: tuple

    @property
    def ndof(self):
        return len(self.forward_factors)

    def _stack(self):
        f = np.asarray(self.forward_factors)
        return np.concatenate([f, f])

    def to_spherical(self, x):
        """Map phase points into the spherical frame (centre at the origin)."""
        return (np.asarray(x, dtype=float) - np.asarray(self.centre)) * self._stack()

    def from_spherical(self, y):
        """Inverse of :meth:`to_spherical`."""
        return np.asarray(y, dtype=float) / self._stack() + np.asarray(self.centre)


def spherical_normal_form(model):
    """Scale an anisotropic harmonic model to spherical symmetry.

    Returns a :class:`NormalForm` with ``omega`` the geometric mean of the
    mode frequencies.  For the quartic-perturbed model the scaling is built
    from its quadratic part.  Raises ``ValueError`` if the Hessian at the
    model centre is not positive definite.
    """
    if not isinstance(model, HamiltonianModel):
        raise TypeError("expected a HamiltonianModel")
    hess = model.hessian(np.asarray(model.centre))
    eigs = np.linalg.eigvalsh(hess)
    if np.min(eigs) <= 0.0:
        raise ValueError("model Hessian is not positive definite at its centre")
    omegas = np.asarray(model.omegas)
    omega_bar = float(np.exp(np.mean(np.log(omegas))))
    factors = tuple(np.sqrt(omegas / omega_bar))
    return NormalForm(omega=omega_bar, centre=tuple(model.centre),
                      forward_factors=factors)


@dataclass(frozen=True)
class SectionGeometry:
    """Scalars of the spherical centre section (all in the scaled frame)."""

    omega: float
    q_tilde: float
    energy_plus: float
    energy_minus: float
    q_s: float
    sigma: float
    y_m_sq: float
    p_s: float
    q_c: float

    @property
    def exists(self):
        """True when the shells intersect (nonnegative transverse radius)."""
        return self.y_m_sq >= 0.0


def build_section(omega, q_tilde, energy_plus, energy_minus):
    """Construct the section scalars for given frequency, offset and energies.

    ``y_m_sq`` may come out negative: that reports a missing intersection
    (reflection centre beyond the caustic) rather than an error.  ``q_c`` is
    the offset at which the two shells touch externally; it is computed from
    the tangency of circles with radii ``sqrt(2E/omega)``, which also zeroes
    ``y_m_sq`` (two routes to the same caustic).
    """
    if omega <= 0 or q_tilde <= 0:
        raise ValueError("omega and q_tilde must be positive")
    if energy_plus <= 0 or energy_minus <= 0:
        raise ValueError("energies must be positive")
    e_sum = energy_plus + energy_minus
    e_diff = energy_plus - energy_minus
    q_s = e_diff / (2.0 * omega * q_tilde)
    sigma = e_diff / (0.5 * e_sum)
    y_m_sq = e_sum / omega - q_s * q_s - q_tilde * q_tilde
    p_s = math.sqrt(y_m_sq) if y_m_sq >= 0.0 else float("nan")
    q_c = 0.5 * (math.sqrt(2.0 * energy_plus / omega)
                 + math.sqrt(2.0 * energy_minus / omega))
    return SectionGeometry(omega=float(omega), q_tilde=float(q_tilde),
                           energy_plus=float(energy_plus),
                           energy_minus=float(energy_minus),
                           q_s=q_s, sigma=sigma, y_m_sq=y_m_sq, p_s=p_s, q_c=q_c)


def section_momentum(geom, y_sq):
    """Momentum pair ``±sqrt(y_m_sq - y_sq)`` at transverse radius ``sqrt(y_sq)``.

    Returns an empty tuple beyond the section rim (``y_sq > y_m_sq``); at the
    rim itself the double root ``(0, 0)``.
    """
    if y_sq < 0:
        raise ValueError("y_sq must be nonnegative")
    p_sq = geom.y_m_sq - y_sq
    if p_sq < 0.0:
        return ()
    p = math.sqrt(p_sq)
    return (p, -p)


def section_point_check(model, centre, X, energy_plus, energy_minus):
    """Shell residuals ``(H(x+X) - E, H(x-X) - E')`` for any model."""
    frame = ReflectionFrame(model, centre, energy_plus, energy_minus)
    res = frame.residual(X)
    return res[..., 0], res[..., 1]


def section_sum_residual(geom, p, y_sq):
    """Residual of the on-section identity
    ``Q_s^2 + Q_tilde^2 + P^2 + Y^2 = (E + E')/omega``."""
    lhs = geom.q_s ** 2 + geom.q_tilde ** 2 + p * p + y_sq
    return lhs - (geom.energy_plus + geom.energy_minus) / geom.omega


# ---------------------------------------------------------------------------
# Orthosymplectic (Y, P, Q) frame
# ---------------------------------------------------------------------------


def section_frame(displacement):
    """Orthosymplectic chart columns adapted to a centre displacement.

    Returns a ``(2N, 2N)`` orthogonal symplectic matrix whose last column
    (the Q direction) is the unit vector along ``displacement``, whose
    second-to-last column is the conjugate P direction, and whose first
    ``2N-2`` columns span the transverse Y planes.  Constructed as a unitary
    (complex Householder) on the complex structure ``z_n = q_n + i p_n``, so
    orthogonality and symplecticity hold simultaneously.
    """
    d = np.asarray(displacement, dtype=float)
    n2 = d.size
    if n2 % 2:
        raise ValueError("displacement must have even length")
    n = n2 // 2
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise ValueError("displacement must be nonzero")
    zeta = d[n:] + 1j * d[:n]  # q + i p per plane
    target = np.zeros(n, dtype=complex)
    target[-1] = 1.0
    # unitary U with U zeta = |zeta| e_N
    phase = zeta[-1] / abs(zeta[-1]) if zeta[-1] != 0.0 else 1.0
    v = zeta + phase * norm * target
    denom = np.real(np.vdot(v, v))
    if denom < 1e-30 * norm * norm:
        u = np.eye(n, dtype=complex)
    else:
        u = np.eye(n, dtype=complex) - 2.0 * np.outer(v, np.conj(v)) / denom
    u[-1, :] *= -np.conj(phase)
    # real 2N x 2N representation acting on (p, q) stacks
    a, b = np.real(u), np.imag(u)
    rot = np.block([[a, b], [-b, a]])
    # columns of the chart are preimages of the canonical axes
    chart = rot.T
    # order columns: Y planes (p_1, q_1, ..., p_{N-1}, q_{N-1}), then P, then Q
    cols = []
    for j in range(n - 1):
        cols.append(chart[:, j])          # p_j axis preimage
        cols.append(chart[:, n + j])      # q_j axis preimage
    cols.append(chart[:, n - 1])          # P axis
    cols.append(chart[:, 2 * n - 1])      # Q axis
    return np.stack(cols, axis=1)


def normalized_velocity_skew(model, centre, X):
    """``|skew(v+, v-)| / (|v+| |v-|)`` for the endpoint shell velocities.

    Vanishes at chord tangency; values below ~1e-10 flag the caustic where
    the (P, Q) frame construction degenerates.
    """
    frame = ReflectionFrame(model, centre, 0.0, 0.0)
    vp, vm = frame.velocities(X)
    num = np.abs(skew_product(vp, vm))
    den = np.sqrt(np.sum(vp * vp, axis=-1) * np.sum(vm * vm, axis=-1))
    return num / den


def spherical_section_point(geom, ndof, y=None, sign=1.0):
    """A point of the spherical section in canonical chart coordinates.

    Returns the ``2N`` vector ``X = (Y_p, P, Y_q, Q_s)`` with the transverse
    part ``y`` (length ``2(N-1)``, ordered p-parts then q-parts, default 0)
    and ``P = sign * sqrt(y_m_sq - |y|^2)``.  The chart assumes the centre
    displacement lies along the last position axis.
    """
    if y is None:
        y = np.zeros(2 * (ndof - 1))
    y = np.asarray(y, dtype=float)
    if y.size != 2 * (ndof - 1):
        raise ValueError("transverse part must have length 2(N-1)")
    roots = section_momentum(geom, float(np.sum(y * y)))
    if not roots:
        raise ValueError("transverse radius outside the section rim")
    p = roots[0] if sign > 0 else roots[1]
    x = np.zeros(2 * ndof)
    x[:ndof - 1] = y[:ndof - 1]
    x[ndof - 1] = p
    x[ndof:2 * ndof - 1] = y[ndof - 1:]
    x[2 * ndof - 1] = geom.q_s
    return x
