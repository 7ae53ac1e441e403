"""Classical transition probability density between two reflected shells.

The density at reflection centre ``x`` is the phase-space integral
``(1/(2πħ)^N) ∫ d^{2N}X δ(H(x+X) - E) δ(H(x-X) - E')``.  For one degree of
freedom the shells are curves meeting in isolated points and the integral
collapses to a sum of inverse Poisson brackets; for N ≥ 2 it becomes a
surface integral over the codimension-2 section, with closed forms in the
spherical case and a Monte Carlo estimator for distorted shells.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import mc_weights
from .core import HamiltonianModel, ReflectionFrame
from .quadrature import panel_nodes
from .section import build_section, section_frame, spherical_normal_form


class CausticTangencyError(Exception):
    """The shells are tangent: the classical density diverges here.

    The bracket-sum formula breaks down; the Airy-resolved density in the
    caustic module is the applicable replacement.
    """


@dataclass(frozen=True)
class TransitionQuery:
    """Inputs of a transition-density evaluation at one reflection centre."""

    model: HamiltonianModel
    centre: tuple
    energy_plus: float
    energy_minus: float
    hbar: float

    def __post_init__(self):
        centre = tuple(float(c) for c in np.atleast_1d(self.centre))
        if len(centre) != 2 * self.model.ndof:
            raise ValueError("centre must have length 2N = %d" % (2 * self.model.ndof,))
        object.__setattr__(self, "centre", centre)
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.energy_plus <= 0 or self.energy_minus <= 0:
            raise ValueError("energies must be positive")

    @property
    def displacement(self):
        """Vector from the reflection centre to the model centre."""
        return np.asarray(self.model.centre) - np.asarray(self.centre)

    def frame(self):
        return ReflectionFrame(self.model, self.centre,
                               self.energy_plus, self.energy_minus)


def _caustic_threshold(omega, q_tilde, e_sum):
    # dimensionally consistent relative scale for "the bracket is zero"
    return 1e-8 * omega * omega * q_tilde * math.sqrt(e_sum / omega)


# ---------------------------------------------------------------------------
# One degree of freedom: bracket sum over curve intersections
# ---------------------------------------------------------------------------


def _intersections_1d_spherical(q):
    """Analytic intersection points for an uncoupled 1-D model.

    Works in the rotated chart whose Q axis runs along the centre
    displacement; returns points in original phase-plane coordinates.
    """
    omega = q.model.omegas[0]
    d = q.displacement
    q_tilde = float(np.linalg.norm(d))
    geom = build_section(omega, q_tilde, q.energy_plus, q.energy_minus)
    if geom.y_m_sq < 0.0:
        return [], geom
    p_s = math.sqrt(geom.y_m_sq)
    # section chart: Q axis away from the model centre (centre at Q=-q_tilde),
    # so the crossing sits at +q_s
    u_q = -d / q_tilde
    u_p = np.array([-u_q[1], u_q[0]])  # conjugate direction, skew(u_p,u_q)=-1
    base = geom.q_s * u_q
    return [base + p_s * u_p, base - p_s * u_p], geom


def _intersections_1d_general(q, n_theta=720):
    """Root bracketing of the curve intersection for a coupled 1-D model.

    Parametrizes the ``H(x+X) = E`` curve by angle about its centre (radius
    by Newton from the spherical guess) and brackets sign changes of
    ``H(x-X) - E'`` along it.
    """
    model = q.model
    omega = model.omegas[0]
    d = q.displacement

    def radius_on_plus_shell(theta):
        # radial Newton from the model centre: H is increasing along the ray
        u = np.array([math.sin(theta), math.cos(theta)])
        r = math.sqrt(2.0 * q.energy_plus / omega)
        for _ in range(80):
            pt = np.asarray(model.centre) + r * u
            val = float(model.value(pt)) - q.energy_plus
            slope = float(np.dot(model.gradient(pt), u))
            if slope <= 0.0:
                raise CausticTangencyError(
                    "radial parametrization of the energy curve failed")
            step = val / slope
            r -= step
            if abs(step) < 1e-14 * max(1.0, r):
                break
        return r

    def point(theta):
        # the half-chord X of the point at angle theta on the H(x+X)=E curve
        u = np.array([math.sin(theta), math.cos(theta)])
        return d + radius_on_plus_shell(theta) * u

    def g(theta):
        return float(model.value(np.asarray(q.centre) - point(theta))) \
            - q.energy_minus

    thetas = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    vals = np.array([g(t) for t in thetas])
    roots = []
    for i in range(n_theta):
        a, b = thetas[i], thetas[(i + 1) % n_theta] + (0.0 if i + 1 < n_theta else 2.0 * math.pi)
        fa, fb = vals[i], vals[(i + 1) % n_theta]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            lo, hi, flo = a, b, fa
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = g(mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    if not roots:
        e_scale = q.energy_plus + q.energy_minus
        if np.min(np.abs(vals)) < 1e-9 * e_scale:
            raise CausticTangencyError(
                "shells graze without crossing; the bracket sum is singular")
        return []
    return [point(t) for t in roots]


def transition_density_1d(q):
    """Classical transition density for one degree of freedom.

    Returns ``(1/2πħ) Σ_j |{H₊, H₋}(X_j)|^{-1}`` over the intersection
    points of the two shifted energy curves.  Disjoint shells give 0;
    tangent shells raise :class:`CausticTangencyError`.
    """
    if q.model.ndof != 1:
        raise ValueError("transition_density_1d requires a 1-D model")
    omega = q.model.omegas[0]
    q_tilde = float(np.linalg.norm(q.displacement))
    if q_tilde == 0.0:
        raise CausticTangencyError("reflection centre coincides with the shell centre")
    if q.model.coupling == 0.0:
        points, _geom = _intersections_1d_spherical(q)
    else:
        points = _intersections_1d_general(q)
    if not points:
        return 0.0
    frame = q.frame()
    threshold = _caustic_threshold(omega, q_tilde,
                                   q.energy_plus + q.energy_minus)
    total = 0.0
    for X in points:
        pb = float(frame.bracket(np.asarray(X)))
        if abs(pb) < threshold:
            raise CausticTangencyError(
                "shell tangency at an intersection point (bracket %.3e)" % pb)
        total += 1.0 / abs(pb)
    return total / (2.0 * math.pi * q.hbar)


# ---------------------------------------------------------------------------
# Nascent-delta quadrature oracle (brute force for the 1-D bracket sum)
# ---------------------------------------------------------------------------


def transition_density_smeared(q, width, nodes_per_panel=12):
    """Brute-force 1-D density with the energy deltas widened to Gaussians.

    Quadrature of ``(1/2πħ) ∫ dX g_s(H₊-E) g_s(H₋-E')`` with normal kernels
    of energy width ``width``; exact as ``width → 0``.  Integrates over
    boxes around the analytic intersection patches (uncoupled model), sized
    so the Gaussian tails are below 1e-12 of the peak.
    """
    if q.model.ndof != 1 or q.model.coupling != 0.0:
        raise ValueError("the smeared oracle handles uncoupled 1-D models")
    points, geom = _intersections_1d_spherical(q)
    if not points:
        return 0.0
    omega = q.model.omegas[0]
    frame = q.frame()
    grad_scale = math.sqrt(2.0 * omega * min(q.energy_plus, q.energy_minus))
    half = 16.0 * width / grad_scale
    norm = 1.0 / (width * math.sqrt(2.0 * math.pi))

    total = 0.0
    for X0 in points:
        n_panels = 24
        ex = np.linspace(X0[0] - half, X0[0] + half, n_panels + 1)
        ey = np.linspace(X0[1] - half, X0[1] + half, n_panels + 1)
        xs, wxs = panel_nodes(ex, nodes_per_panel)
        ys, wys = panel_nodes(ey, nodes_per_panel)
        grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
        res = frame.residual(grid)
        vals = np.exp(-0.5 * (res[..., 0] / width) ** 2) * \
            np.exp(-0.5 * (res[..., 1] / width) ** 2) * norm * norm
        total += float(wxs @ vals @ wys)
    return total / (2.0 * math.pi * q.hbar)


def transition_density_delta_extrapolated(q, width0=None, levels=3):
    """Richardson extrapolation of the smeared oracle to zero width.

    The smearing error is even in the width, so halving it ``levels`` times
    and eliminating successive powers of ``width²`` converges fast; three
    levels leave a residual well under 0.5% in the transversal regime.
    """
    if width0 is None:
        width0 = 0.05 * min(q.energy_plus, q.energy_minus)
    vals = [transition_density_smeared(q, width0 / 2.0 ** k)
            for k in range(levels)]
    table = list(vals)
    for m in range(1, levels):
        factor = 4.0 ** m
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0)
                 for i in range(len(table) - 1)]
    return table[0]


# ---------------------------------------------------------------------------
# Spherical closed forms, N >= 2
# ---------------------------------------------------------------------------


def sphere_area_constant(n):
    """Surface area constant of the n-sphere: ``C_n = 2 π^{(n+1)/2} / Γ((n+1)/2)``.

    The area of the n-dimensional sphere of radius R is ``C_n R^n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return 2.0 * math.pi ** (0.5 * (n + 1)) / math.gamma(0.5 * (n + 1))


def transition_density_spherical(geom, ndof, hbar):
    """Closed-form section integral for the isotropic model, any N ≥ 2.

    Marginalizing the two energy deltas over the section plane and
    integrating the transverse sphere by parts gives

        P = (C_{2N-2}/2) |Y_M|^{2N-3} / ((2πħ)^N ω² Q̃),

    which reduces to ``|Y_M| / (2π (ħω)² Q̃)`` at N=2 and carries the
    general ``|Y_M|^{2N-3}`` caustic exponent.  Returns 0 when the shells
    do not intersect.
    """
    if ndof < 2:
        raise ValueError("use transition_density_1d for one degree of freedom")
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    if geom.y_m_sq <= 0.0:
        return 0.0
    y_m = math.sqrt(geom.y_m_sq)
    c = sphere_area_constant(2 * ndof - 2)
    return (0.5 * c * y_m ** (2 * ndof - 3)
            / ((2.0 * math.pi * hbar) ** ndof * geom.omega ** 2 * geom.q_tilde))


def scaling_exponent_fit(omega, ndof, hbar, energy_plus, energy_minus,
                         q_tilde_scan):
    """Log-log slope of the closed-form density against |Y_M| near the caustic.

    Fits ``log P`` versus ``log |Y_M|`` over a scan of reflection offsets
    approaching the caustic; the isotropic model gives slope ``2N - 3``.
    Raises ``ValueError`` with fewer than 4 usable scan points.
    """
    logs_y, logs_p = [], []
    for q_tilde in q_tilde_scan:
        geom = build_section(omega, q_tilde, energy_plus, energy_minus)
        if geom.y_m_sq <= 0.0:
            continue
        p = transition_density_spherical(geom, ndof, hbar)
        if p <= 0.0:
            continue
        logs_y.append(0.5 * math.log(geom.y_m_sq))
        logs_p.append(math.log(p))
    if len(logs_y) < 4:
        raise ValueError("need at least 4 scan points inside the caustic")
    slope = np.polyfit(logs_y, logs_p, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# Monte Carlo section integrator (general shells, N >= 2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SectionSample:
    """One Monte Carlo sample projected onto the section manifold."""

    point: np.ndarray
    weight: float
    jacobian_ok: bool


def _mc_setup(q):
    """Shared geometry for the Monte Carlo estimator.

    Returns the orthonormal chart (Y columns first, then P and Q) and the
    spherical-estimate section used for seeding.
    """
    nform = spherical_normal_form(q.model)
    d = q.displacement
    # scaled displacement: per-plane factors apply to both p and q components
    f = np.concatenate([nform.forward_factors, nform.forward_factors])
    q_tilde = float(np.linalg.norm(d * f))
    if q_tilde == 0.0:
        raise ValueError("reflection centre coincides with the model centre")
    geom = build_section(nform.omega, q_tilde, q.energy_plus, q.energy_minus)
    # chart Q axis away from the model centre, where the q_s seed is valid
    chart = section_frame(-d)
    return chart, geom


def _ball_draws(rng, samples, dim, radius):
    """Uniform draws from the ``dim``-ball: Gaussian direction, power-law radius."""
    ys = rng.normal(size=(samples, dim))
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    r = radius * rng.uniform(size=samples) ** (1.0 / dim)
    return ys * r[:, None]


def transition_density_mc(q, samples, seed):
    """Monte Carlo section integral for N ≥ 2 shells of any supported model.

    Draws transverse points Y uniformly from the ball of 1.5× the spherical
    rim estimate (a bounding box would spend nearly all draws outside the
    section in higher dimensions), Newton-projects each onto the two-shell
    intersection within its (P, Q) fibre, and weights converged roots by the
    inverse absolute fibre Jacobian — exactly the marginalization of the
    defining double-delta integral, so no surface-measure regularization is
    needed.

    Returns ``(value, stderr)`` with the standard error from 100 fixed-order
    sample batches.  Raises ``RuntimeError`` when more than 20% of the
    samples predicted to lie inside the section fail to project.
    """
    model = q.model
    n = model.ndof
    if n < 2:
        raise ValueError("transition_density_mc requires N >= 2")
    if samples < 1000:
        raise ValueError("too few samples for a batched error estimate")
    chart, geom = _mc_setup(q)
    if geom.y_m_sq <= 0.0:
        return 0.0, 0.0
    rim = math.sqrt(geom.y_m_sq)
    radius = 1.5 * rim
    dim = 2 * n - 2

    rng = np.random.Generator(np.random.Philox(key=seed))
    ys = _ball_draws(rng, samples, dim, radius)

    # seeds from the spherical estimate, with a momentum floor so the
    # Newton Jacobian starts non-singular near the rim
    y_sq = np.sum(ys * ys, axis=1)
    p_est_sq = np.clip(geom.y_m_sq - y_sq, 0.0, None)
    p_floor = 0.05 * rim
    p_seed = np.sqrt(p_est_sq + p_floor * p_floor)
    seeds = np.empty((samples, 2, 2))
    seeds[:, 0, 0] = p_seed
    seeds[:, 1, 0] = -p_seed
    seeds[:, 0, 1] = geom.q_s
    seeds[:, 1, 1] = geom.q_s

    ftol = 1e-12 * (q.energy_plus + q.energy_minus)
    dedup_tol = 1e-6 * rim
    weights, status = mc_weights(
        ys, seeds, chart, np.asarray(q.centre, dtype=float),
        np.asarray(model.omegas, dtype=float), model.coupling,
        np.asarray(model.centre, dtype=float), q.energy_plus, q.energy_minus,
        ftol, dedup_tol, 60,
    )

    predicted_inside = y_sq <= 0.96 * geom.y_m_sq
    n_inside = int(np.count_nonzero(predicted_inside))
    if n_inside:
        failures = np.count_nonzero(status[predicted_inside] == 0)
        if failures > 0.2 * n_inside:
            raise RuntimeError(
                "Newton projection failed on %.0f%% of interior samples; "
                "section too distorted for the spherical seed"
                % (100.0 * failures / n_inside))

    volume = sphere_area_constant(dim - 1) / dim * radius ** dim
    scale = volume / (2.0 * math.pi * q.hbar) ** n
    value = scale * float(np.mean(weights))

    n_batches = 100
    batch = samples // n_batches
    trimmed = weights[: batch * n_batches].reshape(n_batches, batch)
    means = trimmed.mean(axis=1)
    stderr = scale * float(np.std(means, ddof=1) / math.sqrt(n_batches))
    return value, stderr


def collect_section_samples(q, samples, seed):
    """Small-scale variant of the MC estimator returning per-sample records.

    Intended for inspection and tests; returns a list of
    :class:`SectionSample` with the projected ambient points of the
    converged first root of each draw.
    """
    if samples > 10000:
        raise ValueError("sample collection is for small diagnostics runs")
    model = q.model
    n = model.ndof
    chart, geom = _mc_setup(q)
    if geom.y_m_sq <= 0.0:
        return []
    rim = math.sqrt(geom.y_m_sq)
    dim = 2 * n - 2
    rng = np.random.Generator(np.random.Philox(key=seed))
    ys = _ball_draws(rng, samples, dim, 1.5 * rim)
    y_sq = np.sum(ys * ys, axis=1)
    p_seed = np.sqrt(np.clip(geom.y_m_sq - y_sq, 0.0, None)
                     + (0.05 * rim) ** 2)
    seeds = np.empty((samples, 2, 2))
    seeds[:, 0, 0] = p_seed
    seeds[:, 1, 0] = -p_seed
    seeds[:, :, 1] = geom.q_s
    ftol = 1e-12 * (q.energy_plus + q.energy_minus)
    weights, status = mc_weights(
        ys, seeds, chart, np.asarray(q.centre, dtype=float),
        np.asarray(model.omegas, dtype=float), model.coupling,
        np.asarray(model.centre, dtype=float), q.energy_plus, q.energy_minus,
        ftol, 1e-6 * rim, 60,
    )
    out = []
    for i in range(samples):
        X = chart[:, :dim] @ ys[i]
        out.append(SectionSample(point=np.asarray(q.centre) + X,
                                 weight=float(weights[i]),
                                 jacobian_ok=bool(status[i] > 0)))
    return out
