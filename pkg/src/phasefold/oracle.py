"""Exact quantum reference for the 1-D oscillator.

Eigenfunctions, reflection matrix elements, cross-Wigner (Moyal) functions,
transition probabilities under phase-space reflections, the Lorentzian-
smoothed spectral Wigner function, and the convolution/correlation identities
that tie them together.

Normalization map (the factor-2 trap)
-------------------------------------
Let ``rho_kl(x) = <k| R_x |l>`` be the matrix element of the unitary
reflection through the phase point ``x``.  Three related objects appear in
the literature and all three are exposed here explicitly:

* ``reflection_matrix_element`` returns ``rho_kl`` itself: dimensionless,
  ``|rho_kl| <= 1``, with the parity anchor ``rho_kk(origin) = (-1)^k``.
* ``cross_wigner`` returns the standard-normalized cross-Wigner function
  ``W_kl = rho_kl / (pi hbar)^N``, the one whose diagonal integrates to 1
  and for which ``P_kl = (2 pi hbar)^N ∫ d^{2N}X W_k(x+X) W_l(x-X)`` holds
  exactly.
* ``MoyalEntry.value`` stores the reflection-expectation normalization
  ``rho_kl / (2 pi hbar)^N``, for which ``probability = (2 pi hbar)^{2N}
  |value|^2`` holds exactly.

The transition probability is unambiguous: ``P_kl = |rho_kl|^2``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import laguerre_sum
from .config import resolve_hbar
from .quadrature import oscillatory_edges, panel_nodes


class QuadratureConvergenceError(RuntimeError):
    """Raised when panel refinement fails to stabilize a matrix element."""

    def __init__(self, residual, message=None):
        self.residual = residual
        super().__init__(message or "quadrature did not converge (residual %.3e)" % residual)


class GridCoverageError(RuntimeError):
    """Raised when an integration grid fails to cover the integrand support."""


class TruncationError(RuntimeError):
    """Raised when a spectral sum's truncation tail exceeds the tolerance."""


@dataclass(frozen=True)
class EigenBasis1D:
    """Eigenbasis of the 1-D oscillator ``H = (omega/2)(p^2 + q^2)``.

    Energies are ``E_k = hbar*omega*(k + 1/2)``.  For this (spherical) form
    of the Hamiltonian the position scale is ``sqrt(hbar)`` independent of
    omega: ``psi_k(q) = hbar^(-1/4) phi_k(q/sqrt(hbar))`` with ``phi_k`` the
    standard normalized Hermite functions.
    """

    omega: float = 1.0
    hbar: float = 1.0
    max_index: int = 200

    def __post_init__(self):
        if self.omega <= 0 or self.hbar <= 0:
            raise ValueError("omega and hbar must be positive")
        if self.max_index < 0:
            raise ValueError("max_index must be nonnegative")

    def eigenenergy(self, k):
        """E_k = hbar*omega*(k + 1/2); accepts arrays of indices."""
        return self.hbar * self.omega * (np.asarray(k) + 0.5)

    def turning_point(self, k):
        """Classical turning point sqrt(hbar*(2k+1)) of state k."""
        return np.sqrt(self.hbar * (2.0 * np.asarray(k) + 1.0))

    def _check_index(self, k):
        k = int(k)
        if not 0 <= k <= self.max_index:
            raise ValueError("state index %d outside [0, %d]" % (k, self.max_index))
        return k

    def eigenfunction(self, k, q):
        """Normalized eigenfunction psi_k(q), vectorized over q."""
        k = self._check_index(k)
        return self.eigenfunction_table(k, q)[k]

    def eigenfunction_table(self, kmax, q):
        """All psi_k(q) for k = 0..kmax, shape ``(kmax+1,) + q.shape``.

        Stable upward recurrence on normalized Hermite functions:
        phi_{k+1} = sqrt(2/(k+1)) u phi_k - sqrt(k/(k+1)) phi_{k-1}.
        """
        kmax = self._check_index(kmax)
        q = np.asarray(q, dtype=float)
        u = q / math.sqrt(self.hbar)
        out = np.empty((kmax + 1,) + u.shape)
        out[0] = math.pi ** -0.25 * np.exp(-0.5 * u * u)
        if kmax >= 1:
            out[1] = math.sqrt(2.0) * u * out[0]
        for k in range(1, kmax):
            out[k + 1] = (math.sqrt(2.0 / (k + 1)) * u * out[k]
                          - math.sqrt(k / (k + 1.0)) * out[k - 1])
        return out * self.hbar ** -0.25


def _phase_point(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError("oracle phase points are 2-component (p, q)")
    return x[..., 0], x[..., 1]


# ---------------------------------------------------------------------------
# Reflection matrix elements by quadrature
# ---------------------------------------------------------------------------


def _reflection_quadrature(basis, kmax, p, q, refine):
    """Integration nodes for <k|R_x|l>, k,l <= kmax, at centre (p, q).

    Window: eigenfunction supports overlap only for |xi| <= |q| + turning
    point; padded by 6 ground-state widths.  Panel density follows the total
    phase scale of the oscillatory factor exp(-2 i p xi / hbar) and the
    fastest eigenfunction oscillation.
    """
    hbar = basis.hbar
    span = abs(q) + float(basis.turning_point(kmax)) + 6.0 * math.sqrt(hbar)
    p_turn = float(basis.turning_point(kmax))
    phase_scale = 2.0 * (abs(p) + p_turn) / hbar
    edges = oscillatory_edges(-span, span, phase_scale,
                              min_panels=int(8 * refine),
                              points_per_period=3.0 * refine)
    return panel_nodes(edges, 10)


def reflection_matrix(basis, kmax, x, rtol=1e-10):
    """Matrix of reflection elements ``rho_kl = <k|R_x|l>`` for k,l <= kmax.

    Evaluated as ``∫ dxi psi_k(q-xi) psi_l(q+xi) exp(-2 i p xi / hbar)`` on
    panel quadrature, with one refinement pass as a convergence check.

    Raises
    ------
    QuadratureConvergenceError
        If refinement shifts any entry by more than the tolerance.
    """
    kmax = basis._check_index(kmax)
    p, q = _phase_point(x)
    p = float(p)
    q = float(q)

    def evaluate(refine):
        xi, w = _reflection_quadrature(basis, kmax, p, q, refine)
        table_m = basis.eigenfunction_table(kmax, q - xi)
        table_p = basis.eigenfunction_table(kmax, q + xi)
        weight = w * np.exp(-2j * p * xi / basis.hbar)
        return (table_m * weight) @ table_p.T

    coarse = evaluate(1.0)
    fine = evaluate(1.5)
    scale = max(np.max(np.abs(fine)), 1e-30)
    residual = np.max(np.abs(fine - coarse))
    if residual > 200.0 * rtol * scale + 1e-13:
        finest = evaluate(2.5)
        residual = np.max(np.abs(finest - fine))
        if residual > 200.0 * rtol * max(np.max(np.abs(finest)), 1e-30) + 1e-13:
            raise QuadratureConvergenceError(residual)
        return finest
    return fine


def reflection_matrix_element(basis, k, l, x, method="quadrature"):
    """Single reflection matrix element ``<k| R_x |l>`` (complex, |.| <= 1)."""
    k = basis._check_index(k)
    l = basis._check_index(l)
    if method == "closed":
        return _reflection_element_closed(basis, k, l, x)
    if method != "quadrature":
        raise ValueError("method must be 'quadrature' or 'closed'")
    return complex(reflection_matrix(basis, max(k, l), x)[k, l])


def _reflection_element_closed(basis, k, l, x):
    """Closed Laguerre form of <k|R_x|l> (dual route to the quadrature).

    For k >= l:  rho_kl = (-1)^l sqrt(l!/k!) (2 alpha)^(k-l) e^(-u/2)
    L_l^(k-l)(u),  alpha = (q + i p)/sqrt(2 hbar),  u = 2(p^2+q^2)/hbar.
    """
    p, q = _phase_point(x)
    hbar = basis.hbar
    if k < l:
        return np.conj(_reflection_element_closed(basis, l, k, x))
    alpha2 = 2.0 * (q + 1j * p) / math.sqrt(2.0 * hbar)
    u = 2.0 * (p * p + q * q) / hbar
    a = k - l
    # prefactor sqrt(l!/k!) (2 alpha)^(k-l), built stably factor by factor
    pref = np.ones_like(alpha2)
    for j in range(l + 1, k + 1):
        pref = pref * alpha2 / math.sqrt(j)
    # scaled generalized Laguerre e^{-u/2} L_l^{(a)}(u) by upward recurrence
    gm1 = np.exp(-0.5 * u)
    g = (1.0 + a - u) * gm1
    if l == 0:
        lag = gm1
    elif l == 1:
        lag = g
    else:
        for n in range(1, l):
            gp1 = ((2 * n + 1 + a - u) * g - (n + a) * gm1) / (n + 1)
            gm1 = g
            g = gp1
        lag = g
    return (-1.0) ** l * pref * lag


def cross_wigner(basis, k, l, x, method="quadrature"):
    """Standard-normalized cross-Wigner function ``W_kl(x)`` (complex).

    ``W_kl = <k|R_x|l> / (pi hbar)``: the diagonal is the ordinary Wigner
    function with ``∫ W_kk dx = 1`` and ``W_00(x) = exp(-(p^2+q^2)/hbar) /
    (pi hbar)``.  ``method='closed'`` uses the Laguerre closed form (fast
    path for grids); the default integrates the reflection kernel.
    """
    rho = reflection_matrix_element(basis, k, l, x, method=method)
    return rho / (math.pi * basis.hbar)


def wigner(basis, k, x, method="closed"):
    """Diagonal Wigner function W_k(x) (real), closed form by default."""
    return np.real(cross_wigner(basis, k, k, x, method=method))


def transition_probability_exact(basis, k, l, x, method="quadrature"):
    """Probability ``P_kl(x) = |<k|R_x|l>|^2`` of the reflection-driven
    k -> l transition; in [0, 1], sums to 1 over l."""
    rho = reflection_matrix_element(basis, k, l, x, method=method)
    return float(np.abs(rho) ** 2) if np.isscalar(rho) or np.ndim(rho) == 0 \
        else np.abs(rho) ** 2


def transition_probability_row(basis, k, lmax, x):
    """All P_kl for l = 0..lmax at once (single quadrature pass)."""
    row = reflection_matrix(basis, max(k, lmax), x)[k, :lmax + 1]
    return np.abs(row) ** 2


@dataclass(frozen=True)
class MoyalEntry:
    """One entry of the Moyal matrix at a reflection centre.

    ``value`` is the cross-Wigner function in reflection-expectation
    normalization, ``value = <k|R_x|l> / (2 pi hbar)^N``, so that
    ``probability = (2 pi hbar)^{2N} |value|^2`` holds exactly;
    ``value`` is half the standard-normalized ``cross_wigner`` result.
    """

    k: int
    l: int
    x: tuple
    value: complex
    probability: float

    @classmethod
    def compute(cls, basis, k, l, x, method="quadrature"):
        rho = reflection_matrix_element(basis, k, l, x, method=method)
        value = rho / (2.0 * math.pi * basis.hbar)
        return cls(k=int(k), l=int(l), x=tuple(np.asarray(x, dtype=float)),
                   value=complex(value), probability=float(abs(rho) ** 2))


# ---------------------------------------------------------------------------
# Convolution identity
# ---------------------------------------------------------------------------


def _wigner_product_grid(basis, k, l, x):
    """Uniform grid covering the support of W_k(x+X) W_l(x-X) in X."""
    hbar = basis.hbar
    kmax = max(k, l)
    diameter = 2.0 * float(basis.turning_point(kmax)) + 4.0 * math.sqrt(hbar)
    # quarter-fringe spacing: the fastest Wigner fringes have wavelength
    # ~ pi*hbar / diameter in phase space
    spacing = hbar / (4.0 * diameter)
    # the product envelope exp(-2(X^2+x^2)/hbar) is centred at X = 0;
    # the polynomial factors reach out to the turning circles around ±x
    p, q = _phase_point(x)
    span = float(basis.turning_point(kmax)) / math.sqrt(2.0) \
        + math.hypot(p, q) + 6.0 * math.sqrt(hbar)
    n = int(math.ceil(2.0 * span / spacing))
    n = min(max(n, 32), 1200)
    axis = np.linspace(-span, span, n)
    return axis, axis[1] - axis[0]


def convolution_identity_check(basis, k, l, x):
    """Residual of ``P_kl(x) = (2 pi hbar) ∫ d^2X W_k(x+X) W_l(x-X)``.

    The left side is the exact transition probability (quadrature matrix
    element); the right side integrates the product of closed-form diagonal
    Wigner functions on a uniform grid.  Returns ``|LHS - RHS|``.

    Raises
    ------
    GridCoverageError
        If the integrand has not decayed at the grid boundary.
    """
    k = basis._check_index(k)
    l = basis._check_index(l)
    x = np.asarray(x, dtype=float)
    lhs = transition_probability_exact(basis, k, l, x)

    axis, step = _wigner_product_grid(basis, k, l, x)
    pg = axis[:, None]
    qg = axis[None, :]
    xp = np.stack(np.broadcast_arrays(x[0] + pg, x[1] + qg), axis=-1)
    xm = np.stack(np.broadcast_arrays(x[0] - pg, x[1] - qg), axis=-1)
    wk = np.real(_reflection_element_closed(basis, k, k, xp)) / (math.pi * basis.hbar)
    wl = np.real(_reflection_element_closed(basis, l, l, xm)) / (math.pi * basis.hbar)
    product = wk * wl
    interior = np.max(np.abs(product))
    boundary = max(np.max(np.abs(product[0])), np.max(np.abs(product[-1])),
                   np.max(np.abs(product[:, 0])), np.max(np.abs(product[:, -1])))
    if boundary > 1e-12 * max(interior, 1e-300):
        raise GridCoverageError(
            "convolution grid boundary not converged: %.3e vs interior %.3e"
            % (boundary, interior))
    rhs = 2.0 * math.pi * basis.hbar * float(np.sum(product)) * step * step
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Spectral Wigner function (exact Lorentzian-smoothed eigensum)
# ---------------------------------------------------------------------------


def lorentzian(delta, eps):
    """Nascent delta ``(eps/pi) / (delta^2 + eps^2)``; integrates to 1."""
    return (eps / math.pi) / (np.asarray(delta) ** 2 + eps * eps)


def smoothed_dos(basis, energy, eps):
    """Lorentzian-smoothed density of states ``sum_k delta_eps(E - E_k)``."""
    ks = np.arange(basis.max_index + 1)
    return np.sum(lorentzian(np.asarray(energy)[..., None] - basis.eigenenergy(ks), eps),
                  axis=-1)


def spectral_wigner_exact(basis, energy, eps, x, tail_tol=1e-8):
    """Exact spectral Wigner function ``(2 pi hbar) sum_k delta_eps(E-E_k) W_k(x)``.

    Vectorized over phase points.  Uses the scaled-Laguerre representation
    of the diagonal Wigner functions, so the cost is one recurrence sweep to
    ``max_index`` per point.

    Raises
    ------
    TruncationError
        If the estimated contribution beyond ``max_index`` exceeds
        ``tail_tol``.  The estimate combines the Lorentzian weight at the
        truncation edge with the decaying envelope ``(k u)^{-1/4}`` of the
        oscillating Wigner tail (phase cancellation between consecutive
        terms suppresses the raw Lorentzian tail).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p, q = _phase_point(x)
    u = 2.0 * (np.asarray(p) ** 2 + np.asarray(q) ** 2) / basis.hbar

    kmax = basis.max_index
    e_top = float(basis.eigenenergy(kmax))
    gap = abs(e_top - energy)
    if gap < 3.0 * basis.hbar * basis.omega:
        raise TruncationError("max_index places the truncation edge on resonance")
    tail = 3.0 * float(lorentzian(gap, eps)) \
        * ((kmax + 1.0) * max(np.min(u), 0.5)) ** -0.25
    if tail > tail_tol:
        raise TruncationError(
            "truncation tail estimate %.3e exceeds tolerance %.3e; "
            "increase max_index" % (tail, tail_tol))

    ks = np.arange(kmax + 1)
    coeffs = 2.0 * lorentzian(energy - basis.eigenenergy(ks), eps) * (-1.0) ** ks
    return laguerre_sum(coeffs, u)


# ---------------------------------------------------------------------------
# Correlation identity
# ---------------------------------------------------------------------------


def autocorrelation_closed(basis, k, xi):
    """Closed form of ``C(xi) = (2 pi hbar) ∫ dx W_k(x) W_k(x+xi)``.

    Equals ``exp(-s) L_k(s)^2`` with ``s = |xi|^2 / (2 hbar)`` (squared
    modulus of the displacement matrix element).
    """
    xi = np.asarray(xi, dtype=float)
    s = np.sum(xi * xi, axis=-1) / (2.0 * basis.hbar)
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0
    half = laguerre_sum(coeffs, s)  # e^{-s/2} L_k(s)
    return half * half


def correlation_identity_check(basis, k, xi):
    """Residual of the reciprocity identity for the Wigner autocorrelation.

    Computes ``C(xi) = (2 pi hbar) ∫ dx W_k(x) W_k(x + xi)`` by direct grid
    quadrature and compares with its own symplectic Fourier transform,
    ``C(xi) = (1/2 pi hbar) ∫ d^2 eta exp(i (xi ∧ eta)/hbar) C(eta)``
    (the correlation is self-reciprocal).  Returns the absolute difference.
    """
    k = basis._check_index(k)
    xi = np.asarray(xi, dtype=float)
    hbar = basis.hbar

    # direct side on a uniform grid (trapezoid == Riemann after decay)
    turn = float(basis.turning_point(k))
    span = turn + float(np.max(np.abs(xi))) + 6.0 * math.sqrt(hbar)
    diameter = 2.0 * turn + 4.0 * math.sqrt(hbar)
    n = min(max(int(math.ceil(8.0 * span * diameter / hbar)), 32), 1200)
    axis = np.linspace(-span, span, n)
    step = axis[1] - axis[0]
    pg, qg = axis[:, None], axis[None, :]
    base = np.stack(np.broadcast_arrays(pg, qg), axis=-1)
    wk = np.real(_reflection_element_closed(basis, k, k, base)) / (math.pi * hbar)
    shifted = np.stack(np.broadcast_arrays(pg + xi[0], qg + xi[1]), axis=-1)
    wk_shift = np.real(_reflection_element_closed(basis, k, k, shifted)) / (math.pi * hbar)
    direct = 2.0 * math.pi * hbar * float(np.sum(wk * wk_shift)) * step * step

    # Fourier side using the closed autocorrelation on an eta grid
    span_eta = math.sqrt(2.0 * hbar) * (2.0 * math.sqrt(2.0 * k + 1.0) + 6.0)
    fringe = math.pi * hbar / max(float(np.max(np.abs(xi))), 1e-12)
    step_eta = min(fringe / 4.0, math.sqrt(hbar) / 4.0)
    m = min(max(int(math.ceil(2.0 * span_eta / step_eta)), 32), 2400)
    eta = np.linspace(-span_eta, span_eta, m)
    ep, eq = eta[:, None], eta[None, :]
    c_eta = autocorrelation_closed(
        basis, k, np.stack(np.broadcast_arrays(ep, eq), axis=-1))
    # skew product xi ∧ eta = (J xi) . eta = -xi_q eta_p + xi_p eta_q
    phase = np.exp(1j * (-xi[1] * ep + xi[0] * eq) / hbar)
    d_eta = eta[1] - eta[0]
    fourier = float(np.real(np.sum(c_eta * phase))) * d_eta * d_eta / (2.0 * math.pi * hbar)

    return abs(direct - fourier)
