"""Semiclassical spectral Wigner functions.

The classical microcanonical (nascent-delta) form, the Airy form with its
phase-space width field gamma(x), and helpers to compare both against the
exact Lorentzian-smoothed eigensum of :mod:`phasefold.oracle`.
"""

import math

import numpy as np

from ._kernels import airy_ai  # noqa: F401  (re-exported public special function)
from .config import resolve_hbar
from .quadrature import panel_nodes


class WidthDomainError(ValueError):
    """Raised where the Airy width is undefined (non-convex shell point)."""


def airy_width(model, x, hbar=None):
    """Airy width field ``gamma(x) = (hbar^2 v . Hess(H) v)^{1/3} / 2``.

    ``v`` is the Hamiltonian velocity at ``x``; the cubed combination
    ``v . Hess v`` equals the skew product of velocity and acceleration
    (shell curvature), so gamma is positive on convex shells and scales
    exactly as ``hbar^{2/3}``.
    """
    hbar = resolve_hbar(hbar)
    v = model.velocity(x)
    hess = model.hessian(x)
    curv = np.einsum("...i,...ij,...j->...", v, hess, v)
    if np.any(curv <= 0.0):
        raise WidthDomainError(
            "velocity-Hessian curvature is non-positive; Airy width undefined")
    return 0.5 * np.cbrt(hbar * hbar * curv)


def classical_spectral_wigner(model, energy, x, smear):
    """Classical microcanonical form: Gaussian nascent delta in H(x) - E.

    Normalized in the energy argument: integrating over E at fixed x gives 1.
    Exact-delta semantics are reserved for the analytic section integrals of
    the transition-density routines.
    """
    if smear <= 0:
        raise ValueError("smear must be positive")
    h = model.value(x)
    arg = (h - energy) / smear
    return np.exp(-0.5 * arg * arg) / (smear * math.sqrt(2.0 * math.pi))


def airy_spectral_wigner(model, energy, x, hbar=None):
    """Airy form ``Ai[(H(x)-E)/gamma(x)] / gamma(x)`` of the spectral Wigner
    function; its zero-argument locus is exactly the energy shell."""
    gamma = airy_width(model, x, hbar=hbar)
    h = model.value(x)
    return airy_ai((h - energy) / gamma) / gamma


# ---------------------------------------------------------------------------
# Lorentzian-smoothed Airy (for comparisons at finite energy resolution)
# ---------------------------------------------------------------------------


def _airy_fringe_edges(t_lo, t_hi):
    """Panel edges resolving a quarter of the local Airy fringe on [t_lo, t_hi]."""
    edges = [t_lo]
    t = t_lo
    while t < t_hi:
        t += math.pi / (4.0 * math.sqrt(abs(t) + 1.0))
        edges.append(min(t, t_hi))
    if edges[-1] < t_hi:
        edges.append(t_hi)
    return np.asarray(edges)


def airy_lorentzian_smoothed(z, width, tail=80.0):
    """Airy function convolved with a Lorentzian of half-width ``width``.

    Computes ``∫ dt Ai(t) (width/pi) / ((z-t)^2 + width^2)`` on a shared
    fringe-resolved panel grid; the truncated oscillatory tail beyond
    ``-tail`` is bounded by ~``width * tail^{-9/4}`` and ignored.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    z = np.asarray(z, dtype=float)
    t_lo = -max(tail, float(np.max(np.abs(z))) + 20.0)
    t_hi = 12.0 + 3.0 * width
    t, w = panel_nodes(_airy_fringe_edges(t_lo, t_hi), 8)
    ai_w = airy_ai(t) * w
    kern = (width / math.pi) / ((z[..., None] - t) ** 2 + width * width)
    return kern @ ai_w


def airy_spectral_smoothed(model, energy, x, eps, hbar=None):
    """Airy spectral Wigner convolved with the Lorentzian energy window eps.

    This is the object to compare against the exact eigensum at resolution
    eps: the bare Airy form corresponds to the eps -> 0 limit.
    """
    gamma = airy_width(model, x, hbar=hbar)
    h = model.value(x)
    gamma = np.broadcast_to(gamma, np.shape(h)).reshape(-1)
    args = ((np.asarray(h) - energy).reshape(-1)) / gamma
    out = np.empty_like(args)
    # group points of (nearly) common width so each group shares one kernel
    order = np.argsort(gamma)
    start = 0
    while start < order.size:
        g0 = gamma[order[start]]
        stop = start
        while stop < order.size and gamma[order[stop]] <= g0 * 1.001:
            stop += 1
        idx = order[start:stop]
        out[idx] = airy_lorentzian_smoothed(args[idx], eps / g0)
        start = stop
    return (out / gamma).reshape(np.shape(h))


def regime_report(omega, eps, gamma, hbar=None):
    """Ratios locating (eps, gamma) in the semiclassical window.

    The Airy form is valid when ``hbar/tau_1 << eps << gamma`` with
    ``tau_1 = 2 pi / omega`` the shortest orbit period: returns both ratios
    and the window verdict.
    """
    hbar = resolve_hbar(hbar)
    orbit_scale = hbar * omega / (2.0 * math.pi)
    lower = eps / orbit_scale
    upper = float(np.min(np.asarray(gamma))) / eps
    return {
        "eps_over_orbit_scale": lower,
        "gamma_over_eps": upper,
        "inside_window": bool(lower > 1.0 and upper > 1.0),
    }
