"""Acceptance suite: one self-contained check per shipped guarantee.

Each criterion function returns ``(passed, detail)`` and draws from its own
fixed Philox stream, so the suite is deterministic and order-independent.
:func:`run_all` times the criteria, prints one PASS/FAIL line each, and
returns the results for CSV emission.  Tolerances are hard acceptance
bounds, not estimates: a FAIL here means a shipped guarantee is broken.
"""

import math
import os
import tempfile
import time

import numpy as np

from .caustic import (
    CausticFrame1D,
    _frames_for_arguments,
    abramochkin_check,
    calibrate_kappa,
    fringe_averaged_density,
    transition_density_airy_closed,
    transition_density_airy_quadrature,
)
from .core import (
    apply_j,
    finite_difference_gradient,
    harmonic_model,
    spherical_model,
)
from .oracle import (
    EigenBasis1D,
    _reflection_element_closed,
    _wigner_product_grid,
    reflection_matrix,
    spectral_wigner_exact,
    transition_probability_row,
)
from .polygons import (
    _loop_area,
    closure_residual,
    open_polygon_side,
    symplectic_area,
    tangency_residual,
    trajectory_polygon_centres,
    vertices_from_even_centres,
)
from .section import build_section, section_momentum, section_sum_residual
from .spectral import airy_spectral_smoothed, airy_width
from .transition import (
    TransitionQuery,
    scaling_exponent_fit,
    transition_density_1d,
    transition_density_delta_extrapolated,
    transition_density_mc,
    transition_density_spherical,
)

_SEED = 20260817


def _rng(offset):
    return np.random.Generator(np.random.Philox(key=_SEED + offset))


# ---------------------------------------------------------------------------
# 1. Convolution identity of the reflection probabilities
# ---------------------------------------------------------------------------


def check_wigner_convolution():
    """P_kl from the quadrature matrix element vs the Wigner convolution.

    25 random phase points, k,l <= 5: the diagonal convolution (the squared
    spectral identity) must match to 1e-6 absolute, the off-diagonal
    convolution to 1e-5.  The left side is the quadrature matrix element,
    the right side a shared-grid convolution of closed-form diagonal Wigner
    functions, so the two routes are independent.
    """
    basis = EigenBasis1D(omega=1.0, hbar=1.0, max_index=60)
    hbar = basis.hbar
    kmax = 5
    points = _rng(0).uniform(-2.0, 2.0, size=(25, 2))
    worst_diag = 0.0
    worst_off = 0.0
    for p, q in points:
        x = np.array([p, q])
        prob = np.abs(reflection_matrix(basis, kmax, x)) ** 2
        axis, step = _wigner_product_grid(basis, kmax, kmax, x)
        pg, qg = axis[:, None], axis[None, :]
        xp = np.stack(np.broadcast_arrays(x[0] + pg, x[1] + qg), axis=-1)
        xm = np.stack(np.broadcast_arrays(x[0] - pg, x[1] - qg), axis=-1)
        w_plus = [np.real(_reflection_element_closed(basis, k, k, xp))
                  / (math.pi * hbar) for k in range(kmax + 1)]
        w_minus = [np.real(_reflection_element_closed(basis, l, l, xm))
                   / (math.pi * hbar) for l in range(kmax + 1)]
        slowest = np.abs(w_plus[kmax] * w_minus[kmax])
        boundary = max(float(np.max(slowest[0])), float(np.max(slowest[-1])),
                       float(np.max(slowest[:, 0])), float(np.max(slowest[:, -1])))
        if boundary > 1e-12 * float(np.max(slowest)):
            return False, "convolution grid boundary not converged (%.3e)" % boundary
        for k in range(kmax + 1):
            for l in range(kmax + 1):
                rhs = (2.0 * math.pi * hbar * step * step
                       * float(np.sum(w_plus[k] * w_minus[l])))
                residual = abs(float(prob[k, l]) - rhs)
                if k == l:
                    worst_diag = max(worst_diag, residual)
                else:
                    worst_off = max(worst_off, residual)
    passed = worst_diag < 1e-6 and worst_off < 1e-5
    detail = ("diagonal residual %.2e (tol 1e-06); off-diagonal %.2e "
              "(tol 1e-05); 25 points, k,l <= 5" % (worst_diag, worst_off))
    return passed, detail


# ---------------------------------------------------------------------------
# 2. Probability sum rule
# ---------------------------------------------------------------------------


def check_transition_row_sum():
    """Sum over final states of the ground-state reflection probabilities.

    At 10 random classically allowed points the truncated sum over l <= 60
    must land in [0.999, 1 + 1e-8]: unitarity from above, a negligible
    truncation tail from below.
    """
    basis = EigenBasis1D(omega=1.0, hbar=1.0, max_index=60)
    rng = _rng(2)
    radius = 0.95 * float(basis.turning_point(0))
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=10))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=10)
    lo, hi = float("inf"), float("-inf")
    for rr, th in zip(r, theta):
        x = np.array([rr * math.sin(th), rr * math.cos(th)])
        total = float(np.sum(transition_probability_row(basis, 0, 60, x)))
        lo = min(lo, total)
        hi = max(hi, total)
    passed = lo >= 0.999 and hi <= 1.0 + 1e-8
    detail = ("row sums in [%.12f, %.12f] over 10 allowed points "
              "(need [0.999, 1+1e-8])" % (lo, hi))
    return passed, detail


# ---------------------------------------------------------------------------
# 3. Airy form of the spectral Wigner function vs the exact eigensum
# ---------------------------------------------------------------------------


def check_spectral_airy_match():
    """Smoothed Airy form against the exact eigensum on a radial scan.

    hbar = 0.05, energy 20, Lorentzian resolution eps = 3*hbar*omega.  The
    RMS deviation over radii [0.45, 1.12] of the shell radius must stay
    below 10% of the exact peak, and the width field must scale as
    hbar^(2/3) to 1e-3 in the fitted exponent.
    """
    hbar, omega, energy = 0.05, 1.0, 20.0
    eps = 3.0 * hbar * omega
    basis = EigenBasis1D(omega=omega, hbar=hbar, max_index=14000)
    model = spherical_model(omega)
    r_turn = math.sqrt(2.0 * energy / omega)
    radii = np.linspace(0.45, 1.12, 61) * r_turn
    x = np.stack([np.zeros_like(radii), radii], axis=-1)
    exact = spectral_wigner_exact(basis, energy, eps, x)
    smoothed = airy_spectral_smoothed(model, energy, x, eps, hbar=hbar)
    peak = float(np.max(np.abs(exact)))
    rms = float(np.sqrt(np.mean((exact - smoothed) ** 2)))

    hbars = np.geomspace(1e-3, 1e-1, 7)
    x0 = np.array([0.0, 0.8 * r_turn])
    gammas = [float(airy_width(model, x0, hbar=h)) for h in hbars]
    slope = float(np.polyfit(np.log(hbars), np.log(gammas), 1)[0])

    passed = rms < 0.1 * peak and abs(slope - 2.0 / 3.0) < 1e-3
    detail = ("rms %.3e vs peak %.3e (tol 10%%); width exponent %.6f "
              "(need 2/3 +- 1e-3)" % (rms, peak, slope))
    return passed, detail


# ---------------------------------------------------------------------------
# 4. Section-geometry identities
# ---------------------------------------------------------------------------


def check_section_identities():
    """On-section sum identity and the geometric caustic offset.

    1000 random geometries: points built from the section scalars satisfy
    Q_s^2 + Q_tilde^2 + P^2 + Y^2 = (E+E')/omega to 1e-12, and rebuilding
    the section at the tangency offset q_c zeroes the transverse radius to
    1e-10.
    """
    rng = _rng(3)
    worst_sum = 0.0
    worst_caustic = 0.0
    count = 0
    while count < 1000:
        omega = rng.uniform(0.5, 2.0)
        e_plus = rng.uniform(0.5, 3.0)
        e_minus = rng.uniform(0.5, 3.0)
        q_outer = 0.5 * (math.sqrt(2.0 * e_plus / omega)
                         + math.sqrt(2.0 * e_minus / omega))
        q_inner = abs(math.sqrt(2.0 * e_plus / omega)
                      - math.sqrt(2.0 * e_minus / omega)) / 2.0
        q_tilde = q_inner + rng.uniform(0.02, 0.98) * (q_outer - q_inner)
        geom = build_section(omega, q_tilde, e_plus, e_minus)
        if geom.y_m_sq <= 0.0:
            continue
        y_sq = rng.uniform(0.0, 1.0) * geom.y_m_sq
        p = section_momentum(geom, y_sq)[0]
        worst_sum = max(worst_sum, abs(section_sum_residual(geom, p, y_sq)))
        at_caustic = build_section(omega, geom.q_c, e_plus, e_minus)
        worst_caustic = max(worst_caustic, abs(at_caustic.y_m_sq))
        count += 1
    passed = worst_sum < 1e-12 and worst_caustic <= 1e-10
    detail = ("sum identity residual %.2e (tol 1e-12); y_m_sq at q_c %.2e "
              "(tol 1e-10); 1000 geometries" % (worst_sum, worst_caustic))
    return passed, detail


# ---------------------------------------------------------------------------
# 5. Spherical closed forms vs Monte Carlo, and the caustic exponent
# ---------------------------------------------------------------------------


def check_spherical_monte_carlo():
    """Closed-form section densities against the Monte Carlo estimator.

    N = 2 and N = 3 at a million samples must agree within 1% and within 3
    standard errors; the log-log slope of density against transverse radius
    approaching the caustic must fit 2N-3 within 2% for N = 2, 3, 4.
    """
    parts = []
    passed = True
    for ndof, offset in ((2, 10), (3, 11)):
        model = spherical_model(1.0, ndof)
        centre = (0.0,) * (2 * ndof - 1) + (1.0,)
        query = TransitionQuery(model, centre, 2.0, 2.0, 1.0)
        geom = build_section(1.0, 1.0, 2.0, 2.0)
        closed = transition_density_spherical(geom, ndof, 1.0)
        mc, err = transition_density_mc(query, 10 ** 6, _SEED + offset)
        rel = abs(mc - closed) / closed
        sig = abs(mc - closed) / err if err > 0.0 else float("inf")
        passed = passed and rel <= 0.01 and sig <= 3.0
        parts.append("N=%d rel %.2e sig %.1f" % (ndof, rel, sig))
    scan = 2.0 - np.geomspace(1e-4, 1e-2, 8)
    for ndof in (2, 3, 4):
        slope = scaling_exponent_fit(1.0, ndof, 1.0, 2.0, 2.0, scan)
        target = 2 * ndof - 3
        rel = abs(slope - target) / target
        passed = passed and rel <= 0.02
        parts.append("N=%d slope %.4f/%d" % (ndof, slope, target))
    detail = "; ".join(parts) + " (tol 1%/3sig, exponent 2%)"
    return passed, detail


# ---------------------------------------------------------------------------
# 6. 1-D bracket sum vs nascent-delta quadrature
# ---------------------------------------------------------------------------


def check_smeared_delta_bridge():
    """Richardson-extrapolated Gaussian smearing against the bracket sum.

    Three transversal geometries; the extrapolated quadrature must match
    the analytic intersection sum to 0.5%.
    """
    cases = ((1.0, 2.0, 2.0, 1.0), (1.0, 2.0, 1.5, 0.8), (1.3, 2.5, 1.8, 1.1))
    worst = 0.0
    for omega, e_plus, e_minus, q_tilde in cases:
        query = TransitionQuery(spherical_model(omega), (0.0, q_tilde),
                                e_plus, e_minus, 1.0)
        bracket = transition_density_1d(query)
        smeared = transition_density_delta_extrapolated(query)
        worst = max(worst, abs(smeared - bracket) / bracket)
    passed = worst <= 0.005
    detail = "worst relative gap %.2e over 3 geometries (tol 5e-3)" % worst
    return passed, detail


# ---------------------------------------------------------------------------
# 7. Airy caustic: identity, closed form, calibration, bridge, peak scaling
# ---------------------------------------------------------------------------


def check_caustic_airy():
    """The full caustic chain on circular shells (omega = 1, E = E' = 2).

    Product identity residual < 1e-6 on 9 parameter triples; the closed
    Ai^2 form with calibrated width constant within 5% of the direct
    quadrature (peak-normalized) over closed-form arguments |z| <= 3 at
    hbar = 0.01; the width constant flat to 1% across hbar = 0.003..0.03;
    the fringe-averaged density within 3% of the classical bracket sum at
    hbar = 1e-3; and the peak height scaling as hbar^(-4/3) to 0.05 in the
    fitted exponent.
    """
    parts = []
    passed = True

    worst_id = 0.0
    for a in (0.7, 1.0, 1.6):
        for b, c in ((-1.5, 0.6), (0.0, 0.0), (1.1, -0.8)):
            worst_id = max(worst_id, abs(abramochkin_check(a, b, c)))
    passed = passed and worst_id < 1e-6
    parts.append("identity %.1e" % worst_id)

    base = CausticFrame1D(omega=1.0, hbar=0.01, q_tilde=2.0,
                          energy_plus=2.0, energy_minus=2.0)
    kappa = calibrate_kappa(base)
    frames = _frames_for_arguments(base, np.linspace(-3.0, 3.0, 13))
    quads = np.array([transition_density_airy_quadrature(f, check=False)
                      for f in frames])
    closed = np.array([transition_density_airy_closed(f, kappa)
                       for f in frames])
    worst_closed = float(np.max(np.abs(closed - quads))) / float(np.max(np.abs(quads)))
    passed = passed and worst_closed <= 0.05
    parts.append("closed-vs-quad %.1f%% of peak" % (100.0 * worst_closed))

    kappas = [kappa]
    for hb in (0.003, 0.03):
        kappas.append(calibrate_kappa(CausticFrame1D(
            omega=1.0, hbar=hb, q_tilde=2.0, energy_plus=2.0, energy_minus=2.0)))
    spread = (max(kappas) - min(kappas)) / float(np.mean(kappas))
    passed = passed and spread <= 0.01
    parts.append("kappa %.4f spread %.2e" % (kappas[0], spread))

    deep = CausticFrame1D(omega=1.0, hbar=1e-3, q_tilde=1.6,
                          energy_plus=2.0, energy_minus=2.0)
    classical = transition_density_1d(TransitionQuery(
        spherical_model(1.0), (0.0, 1.6), 2.0, 2.0, 1e-3))
    bridge = fringe_averaged_density(deep, window_fringes=3.0,
                                     points_per_fringe=2.0, fringe_stride=2.0)
    bridge_rel = abs(bridge - classical) / classical
    passed = passed and bridge_rel <= 0.03
    parts.append("bridge %.2e" % bridge_rel)

    hbs = (0.003, 0.01, 0.03)
    peaks = [transition_density_airy_quadrature(
        CausticFrame1D(omega=1.0, hbar=hb, q_tilde=2.0,
                       energy_plus=2.0, energy_minus=2.0), check=False)
        for hb in hbs]
    peak_slope = float(np.polyfit(np.log(hbs), np.log(peaks), 1)[0])
    passed = passed and abs(peak_slope + 4.0 / 3.0) <= 0.05
    parts.append("peak slope %.4f" % peak_slope)

    return passed, "; ".join(parts)


# ---------------------------------------------------------------------------
# 8. Polygon calculus
# ---------------------------------------------------------------------------


def check_polygon_calculus():
    """Area invariance, side formula, even closure, trajectory tangency.

    100 random odd polygons: translation / point-reflection invariance to
    1e-10; the open-side formula against the finite-difference area
    gradient to 1e-8; even-chain area independent of the free vertex to
    1e-10.  On 10 oscillator arcs the side-vs-velocity residual must shrink
    with order 2.0 +- 0.1 in the step size.
    """
    rng = _rng(8)
    worst_inv = 0.0
    worst_fd = 0.0
    worst_spread = 0.0
    for _ in range(100):
        ndof = int(rng.integers(1, 4))
        sides = 2 * int(rng.integers(1, 8)) + 1
        centres = rng.normal(size=(sides, 2 * ndof))
        area = float(symplectic_area(centres))
        shift = rng.normal(size=2 * ndof)
        worst_inv = max(worst_inv, abs(float(symplectic_area(centres + shift)) - area))
        mirror = rng.normal(size=2 * ndof)
        worst_inv = max(worst_inv, abs(float(symplectic_area(2.0 * mirror - centres)) - area))

        j = int(rng.integers(0, sides))

        def area_at(cj):
            pts = centres.copy()
            pts[j] = cj
            return float(symplectic_area(pts))

        grad = finite_difference_gradient(area_at, centres[j].copy())
        side = open_polygon_side(centres, j)
        worst_fd = max(worst_fd, float(np.max(np.abs(side + apply_j(grad)))))

        even = rng.normal(size=(sides + 1, 2 * ndof))
        even[-1] -= 0.5 * closure_residual(even[:2], even[2:])
        areas = [float(_loop_area(vertices_from_even_centres(even, first), per_plane=False))
                 for first in (even[0], even[0] + rng.normal(size=2 * ndof),
                               rng.normal(size=2 * ndof))]
        worst_spread = max(worst_spread, max(areas) - min(areas))

    orders = []
    t_span, steps = 0.1, 8
    for _ in range(10):
        model = harmonic_model(rng.uniform(0.5, 2.0, size=2))
        x0 = rng.normal(size=4)
        x0 *= (1.0 + rng.uniform()) / max(float(np.linalg.norm(x0)), 1e-9)
        res = []
        for k_steps in (steps, 2 * steps, 4 * steps):
            chain = trajectory_polygon_centres(model, x0, t_span, k_steps)
            res.append(tangency_residual(model, t_span, k_steps, chain))
        orders.append(float(np.polyfit(
            np.log([t_span / k for k in (steps, 2 * steps, 4 * steps)]),
            np.log(res), 1)[0]))
    order_lo, order_hi = min(orders), max(orders)

    passed = (worst_inv < 1e-10 and worst_fd < 1e-8 and worst_spread < 1e-10
              and order_lo >= 1.9 and order_hi <= 2.1)
    detail = ("invariance %.1e; side-vs-gradient %.1e; closure spread %.1e; "
              "tangency order [%.3f, %.3f] (need 2.0 +- 0.1)"
              % (worst_inv, worst_fd, worst_spread, order_lo, order_hi))
    return passed, detail


# ---------------------------------------------------------------------------
# 9. CSV determinism
# ---------------------------------------------------------------------------


def check_csv_reproducibility():
    """Every CSV subcommand rerun with the same seed is byte-identical.

    Small scans of all five CSV-emitting subcommands are run twice into
    separate files and compared byte for byte.
    """
    from . import cli

    scans = (
        ("wigner", ["--set", "q_count=5", "--set", "p_count=5",
                    "--set", "k=1", "--set", "l=3", "--set", "k_max=12"]),
        ("spectral", ["--set", "q_count=6"]),
        ("transition", ["--set", "samples=20000", "--set", "q_tilde_count=6",
                        "--set", "seed=777"]),
        ("caustic", ["--set", "hbar=0.03", "--set", "q_tilde=1.0,1.9,2.2"]),
        ("polygon", ["--set", "trials=10", "--set", "seed=42"]),
    )
    mismatched = []
    failed = []
    with tempfile.TemporaryDirectory(prefix="phasefold-acceptance-") as tmp:
        for name, extra in scans:
            blobs = []
            for run in (0, 1):
                path = os.path.join(tmp, "%s-%d.csv" % (name, run))
                code = cli.main([name, "--output", path] + extra)
                if code != 0:
                    failed.append("%s exit %d" % (name, code))
                    break
                with open(path, "rb") as fh:
                    blobs.append(fh.read())
            if len(blobs) == 2 and blobs[0] != blobs[1]:
                mismatched.append(name)
    passed = not mismatched and not failed
    if passed:
        detail = "5 subcommands rerun byte-identical"
    else:
        detail = "mismatched: %s; failed: %s" % (
            ",".join(mismatched) or "none", ",".join(failed) or "none")
    return passed, detail


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


CRITERIA = (
    ("wigner-convolution", check_wigner_convolution),
    ("transition-row-sum", check_transition_row_sum),
    ("spectral-airy-match", check_spectral_airy_match),
    ("section-identities", check_section_identities),
    ("spherical-monte-carlo", check_spherical_monte_carlo),
    ("smeared-delta-bridge", check_smeared_delta_bridge),
    ("caustic-airy", check_caustic_airy),
    ("polygon-calculus", check_polygon_calculus),
    ("csv-reproducibility", check_csv_reproducibility),
)


def run_all(printer=print):
    """Run every criterion; print one PASS/FAIL line each; return the results.

    Returns a list of ``(name, passed, detail)`` triples in suite order.  An
    exception inside a criterion is reported as a failure, never raised.
    """
    results = []
    for name, fn in CRITERIA:
        start = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, "error: %s" % exc
        elapsed = time.perf_counter() - start
        if printer is not None:
            printer("%s %s: %s [%.1f s]"
                    % ("PASS" if passed else "FAIL", name, detail, elapsed))
        results.append((name, passed, detail))
    return results
