"""Numerical hot-path kernels with numba acceleration and numpy fallbacks.

Every kernel exists in two functionally identical flavours:

* a numba ``@njit`` implementation used when numba imports cleanly, and
* a vectorized pure-numpy implementation.

The active backend is chosen once at import time; setting the environment
variable ``PHASEFOLD_DISABLE_NUMBA=1`` forces the numpy path.  The test suite
runs both flavours against each other, and ``benchmarks/bench_kernels.py``
compares their throughput.

Kernels deliberately avoid cross-iteration floating-point reductions inside
parallel loops: partial results are written per row and summed by the caller
with ``numpy.sum`` so that repeated runs are bit-identical regardless of the
thread count.
"""

import math

import numpy as np

from .config import numba_disabled

try:
    if numba_disabled():
        raise ImportError("numba disabled by PHASEFOLD_DISABLE_NUMBA")
    import numba
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via subprocess in tests
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # decorator stub so the module below can be written once
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

    prange = range

BACKEND = "numba" if HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Airy function Ai
# ---------------------------------------------------------------------------
#
# |z| <= 7.5: Maclaurin pair f, g with term recurrences; beyond: optimally
# truncated asymptotic expansions in zeta = (2/3)|z|^{3/2}.  At the seam the
# truncation floor of the asymptotic series is ~exp(-2 zeta) ~ 1e-12 of the
# local amplitude and the Maclaurin roundoff stays below ~5e-11, so the
# absolute error is < 1e-10 everywhere on the real line.

_AI0 = 0.3550280538878172  # Ai(0)  = 3^(-2/3) / Gamma(2/3)
_AIP0 = 0.2588194037928068  # -Ai'(0) = 3^(-1/3) / Gamma(1/3)
_SEAM = 7.5
_N_MACLAURIN = 80
_N_ASYMPTOTIC = 25


def _asymptotic_u_coeffs(n):
    u = np.empty(n)
    u[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
    return u


_U_COEF = _asymptotic_u_coeffs(_N_ASYMPTOTIC)
_SQRT_PI = math.sqrt(math.pi)
_QUARTER_PI = 0.25 * math.pi


@njit(cache=True)
def _airy_scalar(z, ucoef):
    az = abs(z)
    if az <= _SEAM:
        z3 = z * z * z
        t = 1.0
        f = 1.0
        s = z
        g = z
        for k in range(_N_MACLAURIN):
            t = t * z3 / ((3 * k + 2) * (3 * k + 3))
            f += t
            s = s * z3 / ((3 * k + 3) * (3 * k + 4))
            g += s
            if abs(t) < 1e-18 and abs(s) < 1e-18:
                break
        return _AI0 * f - _AIP0 * g

    zeta = (2.0 / 3.0) * az * math.sqrt(az)
    if z > 0.0:
        total = 0.0
        prev = 1e308
        term = 1.0
        sign = 1.0
        for k in range(ucoef.size):
            term = ucoef[k] / zeta ** k
            if term >= prev:
                break
            total += sign * term
            prev = term
            sign = -sign
        return 0.5 * math.exp(-zeta) * total / (_SQRT_PI * az ** 0.25)

    se = 0.0
    so = 0.0
    prev = 1e308
    for j in range(ucoef.size):
        term = ucoef[j] / zeta ** j
        if term >= prev:
            break
        if j % 2 == 0:
            if (j // 2) % 2 == 0:
                se += term
            else:
                se -= term
        else:
            if ((j - 1) // 2) % 2 == 0:
                so += term
            else:
                so -= term
        prev = term
    phase = zeta + _QUARTER_PI
    return (math.sin(phase) * se - math.cos(phase) * so) / (_SQRT_PI * az ** 0.25)


@njit(parallel=True, cache=True)
def _airy_array_nb(z, out, ucoef):
    for i in prange(z.size):
        out[i] = _airy_scalar(z[i], ucoef)


def _airy_array_np(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    az = np.abs(z)

    small = az <= _SEAM
    if np.any(small):
        zs = z[small]
        z3 = zs ** 3
        t = np.ones_like(zs)
        f = np.ones_like(zs)
        s = zs.copy()
        g = zs.copy()
        for k in range(_N_MACLAURIN):
            t = t * z3 / ((3 * k + 2) * (3 * k + 3))
            f += t
            s = s * z3 / ((3 * k + 3) * (3 * k + 4))
            g += s
        out[small] = _AI0 * f - _AIP0 * g

    pos = z > _SEAM
    if np.any(pos):
        zp = z[pos]
        zeta = (2.0 / 3.0) * zp ** 1.5
        total = np.zeros_like(zp)
        prev = np.full_like(zp, 1e308)
        frozen = np.zeros_like(zp, dtype=bool)
        sign = 1.0
        for k in range(_U_COEF.size):
            term = _U_COEF[k] / zeta ** k
            frozen |= term >= prev
            total += np.where(frozen, 0.0, sign * term)
            prev = np.where(frozen, prev, term)
            sign = -sign
        out[pos] = 0.5 * np.exp(-zeta) * total / (_SQRT_PI * zp ** 0.25)

    neg = z < -_SEAM
    if np.any(neg):
        zn = -z[neg]
        zeta = (2.0 / 3.0) * zn ** 1.5
        se = np.zeros_like(zn)
        so = np.zeros_like(zn)
        prev = np.full_like(zn, 1e308)
        frozen = np.zeros_like(zn, dtype=bool)
        for j in range(_U_COEF.size):
            term = _U_COEF[j] / zeta ** j
            frozen |= term >= prev
            live = np.where(frozen, 0.0, term)
            if j % 2 == 0:
                se += live if (j // 2) % 2 == 0 else -live
            else:
                so += live if ((j - 1) // 2) % 2 == 0 else -live
            prev = np.where(frozen, prev, term)
        phase = zeta + _QUARTER_PI
        out[neg] = (np.sin(phase) * se - np.cos(phase) * so) / (_SQRT_PI * zn ** 0.25)

    return out


def airy_ai_numpy(z):
    """Airy function Ai on the real line, pure-numpy implementation."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        return float(_airy_array_np(z.reshape(1))[0])
    return _airy_array_np(z)


def airy_ai_numba(z):
    """Airy function Ai on the real line, numba implementation."""
    z = np.asarray(z, dtype=float)
    flat = np.ascontiguousarray(z.reshape(-1))
    out = np.empty_like(flat)
    _airy_array_nb(flat, out, _U_COEF)
    if z.ndim == 0:
        return float(out[0])
    return out.reshape(z.shape)


airy_ai = airy_ai_numba if HAS_NUMBA else airy_ai_numpy


# ---------------------------------------------------------------------------
# Scaled Laguerre sums:  sum_k c_k exp(-u/2) L_k(u)
# ---------------------------------------------------------------------------
#
# The scaled polynomials l_k(u) = exp(-u/2) L_k(u) obey the plain Laguerre
# three-term recurrence (the exponential scaling commutes with it) and stay
# O(1) once k is past the turning index.  Seeding the recurrence with
# exp(-u/2) directly underflows for u beyond ~1400, so the recurrence runs
# on mantissas seeded at 1 while the exponent -u/2 rides in a separate log
# offset; whenever a mantissa outgrows 1e280 both are rescaled and the
# offset absorbs the factor.  Term contributions are mantissa * exp(offset),
# which is a genuine zero until the offset comes back into float range.

_LAG_RESCALE = 1e280
_LAG_INV_RESCALE = 1e-280
_LAG_LOG_RESCALE = math.log(_LAG_RESCALE)


@njit(parallel=True, cache=True)
def _laguerre_sum_nb(coeffs, u, out):
    kmax = coeffs.size - 1
    for i in prange(u.size):
        ui = u[i]
        shift = -0.5 * ui
        scale = math.exp(shift)
        lm1 = 1.0
        acc = coeffs[0] * lm1 * scale
        if kmax >= 1:
            l = 1.0 - ui
            acc += coeffs[1] * l * scale
            for k in range(1, kmax):
                lp1 = ((2 * k + 1 - ui) * l - k * lm1) / (k + 1)
                lm1 = l
                l = lp1
                if abs(l) > _LAG_RESCALE:
                    l *= _LAG_INV_RESCALE
                    lm1 *= _LAG_INV_RESCALE
                    shift += _LAG_LOG_RESCALE
                    scale = math.exp(shift)
                acc += coeffs[k + 1] * l * scale
        out[i] = acc


def laguerre_sum_numpy(coeffs, u):
    """Evaluate ``sum_k coeffs[k] exp(-u/2) L_k(u)`` elementwise (numpy)."""
    coeffs = np.asarray(coeffs, dtype=float)
    u = np.asarray(u, dtype=float)
    shape = u.shape
    uf = u.reshape(-1)
    shift = -0.5 * uf
    scale = np.exp(shift)
    lm1 = np.ones_like(uf)
    acc = coeffs[0] * lm1 * scale
    if coeffs.size > 1:
        l = 1.0 - uf
        acc = acc + coeffs[1] * l * scale
        for k in range(1, coeffs.size - 1):
            lp1 = ((2 * k + 1 - uf) * l - k * lm1) / (k + 1)
            lm1 = l
            l = lp1
            big = np.abs(l) > _LAG_RESCALE
            if big.any():
                l[big] *= _LAG_INV_RESCALE
                lm1[big] *= _LAG_INV_RESCALE
                shift[big] += _LAG_LOG_RESCALE
                scale[big] = np.exp(shift[big])
            acc = acc + coeffs[k + 1] * l * scale
    return acc.reshape(shape)


def laguerre_sum_numba(coeffs, u):
    """Evaluate ``sum_k coeffs[k] exp(-u/2) L_k(u)`` elementwise (numba)."""
    coeffs = np.ascontiguousarray(coeffs, dtype=float)
    u = np.asarray(u, dtype=float)
    flat = np.ascontiguousarray(u.reshape(-1))
    out = np.empty_like(flat)
    _laguerre_sum_nb(coeffs, flat, out)
    return out.reshape(u.shape)


laguerre_sum = laguerre_sum_numba if HAS_NUMBA else laguerre_sum_numpy


# ---------------------------------------------------------------------------
# Monte-Carlo section projection: per-sample 2x2 Newton in the (P, Q) plane
# ---------------------------------------------------------------------------
#
# The Hamiltonian family is hard-coded (harmonic + isotropic quartic in q)
# because the kernel must run inside numba.  ``chart`` has orthonormal
# symplectic columns: the first d = 2N-2 span the transverse Y directions,
# the last two are the P and Q directions.  For each sample the kernel
# Newton-projects the two seeds onto the intersection
# ``H(xc + X) = E, H(xc - X) = E'`` at fixed Y and accumulates
# ``sum_roots 1/|det d(H+,H-)/d(P,Q)|``.


@njit(cache=True)
def _ham_value_grad(xabs, omegas, lam, mcentre, grad):
    n = omegas.size
    h = 0.0
    s = 0.0
    for i in range(n):
        dp = xabs[i] - mcentre[i]
        dq = xabs[n + i] - mcentre[n + i]
        h += 0.5 * omegas[i] * (dp * dp + dq * dq)
        s += dq * dq
        grad[i] = omegas[i] * dp
        grad[n + i] = omegas[i] * dq
    if lam != 0.0:
        h += lam * s * s
        for i in range(n):
            grad[n + i] += 4.0 * lam * s * (xabs[n + i] - mcentre[n + i])
    return h


@njit(parallel=True, cache=True)
def _mc_weights_nb(ys, seeds, chart, xc, omegas, lam, mcentre, e_plus, e_minus,
                   ftol, dedup_tol, maxit, weights, status):
    m = ys.shape[0]
    d = ys.shape[1]
    nd2 = chart.shape[0]
    for i in prange(m):
        xbase = np.zeros(nd2)
        for a in range(nd2):
            acc = 0.0
            for b in range(d):
                acc += chart[a, b] * ys[i, b]
            xbase[a] = acc
        root_p = np.empty(2)
        root_q = np.empty(2)
        root_det = np.empty(2)
        root_ok = np.zeros(2, dtype=np.int64)
        xp = np.empty(nd2)
        xm = np.empty(nd2)
        gp = np.empty(nd2)
        gm = np.empty(nd2)
        for r in range(2):
            pval = seeds[i, r, 0]
            qval = seeds[i, r, 1]
            detfin = 0.0
            ok = 0
            for it in range(maxit):
                for a in range(nd2):
                    xa = xbase[a] + pval * chart[a, d] + qval * chart[a, d + 1]
                    xp[a] = xc[a] + xa
                    xm[a] = xc[a] - xa
                f1 = _ham_value_grad(xp, omegas, lam, mcentre, gp) - e_plus
                f2 = _ham_value_grad(xm, omegas, lam, mcentre, gm) - e_minus
                j11 = 0.0
                j12 = 0.0
                j21 = 0.0
                j22 = 0.0
                for a in range(nd2):
                    j11 += gp[a] * chart[a, d]
                    j12 += gp[a] * chart[a, d + 1]
                    j21 -= gm[a] * chart[a, d]
                    j22 -= gm[a] * chart[a, d + 1]
                det = j11 * j22 - j12 * j21
                if abs(f1) + abs(f2) < ftol:
                    detfin = det
                    ok = 1
                    break
                if det == 0.0:
                    break
                pval -= (j22 * f1 - j12 * f2) / det
                qval -= (j11 * f2 - j21 * f1) / det
            root_p[r] = pval
            root_q[r] = qval
            root_det[r] = detfin
            root_ok[r] = ok
        w = 0.0
        st = 0
        if root_ok[0] == 1 and root_ok[1] == 1:
            dist = abs(root_p[0] - root_p[1]) + abs(root_q[0] - root_q[1])
            if dist < dedup_tol:
                if abs(root_det[0]) > 0.0:
                    w = 1.0 / abs(root_det[0])
                st = 3
            else:
                w = 1.0 / abs(root_det[0]) + 1.0 / abs(root_det[1])
                st = 2
        elif root_ok[0] == 1:
            w = 1.0 / abs(root_det[0])
            st = 1
        elif root_ok[1] == 1:
            w = 1.0 / abs(root_det[1])
            st = 1
        weights[i] = w
        status[i] = st


def mc_weights_numpy(ys, seeds, chart, xc, omegas, lam, mcentre, e_plus, e_minus,
                     ftol, dedup_tol, maxit):
    """Vectorized numpy twin of the Monte-Carlo Newton projection kernel.

    Returns ``(weights, status)`` where status counts distinct converged
    roots per sample (3 marks a merged pair, counted once).
    """
    ys = np.asarray(ys, dtype=float)
    seeds = np.asarray(seeds, dtype=float)
    m, d = ys.shape
    nd2 = chart.shape[0]
    n = omegas.size
    xbase = ys @ chart[:, :d].T  # (m, 2N)
    cp = chart[:, d]
    cq = chart[:, d + 1]

    def ham_vg(xabs):
        dx = xabs - mcentre
        p, q = dx[..., :n], dx[..., n:]
        h = 0.5 * np.sum(omegas * (p * p + q * q), axis=-1)
        grad = np.concatenate([omegas * p, omegas * q], axis=-1)
        if lam != 0.0:
            s = np.sum(q * q, axis=-1)
            h = h + lam * s * s
            grad[..., n:] += 4.0 * lam * s[..., None] * q
        return h, grad

    root_p = np.empty((m, 2))
    root_q = np.empty((m, 2))
    root_det = np.zeros((m, 2))
    root_ok = np.zeros((m, 2), dtype=bool)
    for r in range(2):
        pval = seeds[:, r, 0].copy()
        qval = seeds[:, r, 1].copy()
        detfin = np.zeros(m)
        ok = np.zeros(m, dtype=bool)
        active = np.ones(m, dtype=bool)
        for _ in range(maxit):
            if not np.any(active):
                break
            x = xbase + pval[:, None] * cp + qval[:, None] * cq
            h1, g1 = ham_vg(xc + x)
            h2, g2 = ham_vg(xc - x)
            f1 = h1 - e_plus
            f2 = h2 - e_minus
            j11 = g1 @ cp
            j12 = g1 @ cq
            j21 = -(g2 @ cp)
            j22 = -(g2 @ cq)
            det = j11 * j22 - j12 * j21
            conv = active & (np.abs(f1) + np.abs(f2) < ftol)
            detfin[conv] = det[conv]
            ok[conv] = True
            active &= ~conv
            step = active & (det != 0.0)
            active &= step
            safe = np.where(det == 0.0, 1.0, det)
            dp = (j22 * f1 - j12 * f2) / safe
            dq = (j11 * f2 - j21 * f1) / safe
            pval = np.where(step, pval - dp, pval)
            qval = np.where(step, qval - dq, qval)
        root_p[:, r] = pval
        root_q[:, r] = qval
        root_det[:, r] = detfin
        root_ok[:, r] = ok

    weights = np.zeros(m)
    status = np.zeros(m, dtype=np.int64)
    both = root_ok[:, 0] & root_ok[:, 1]
    dist = np.abs(root_p[:, 0] - root_p[:, 1]) + np.abs(root_q[:, 0] - root_q[:, 1])
    merged = both & (dist < dedup_tol)
    distinct = both & ~merged
    only0 = root_ok[:, 0] & ~root_ok[:, 1]
    only1 = root_ok[:, 1] & ~root_ok[:, 0]
    with np.errstate(divide="ignore"):
        inv0 = np.where(root_det[:, 0] != 0.0, 1.0 / np.abs(root_det[:, 0]), 0.0)
        inv1 = np.where(root_det[:, 1] != 0.0, 1.0 / np.abs(root_det[:, 1]), 0.0)
    weights[distinct] = inv0[distinct] + inv1[distinct]
    weights[merged] = inv0[merged]
    weights[only0] = inv0[only0]
    weights[only1] = inv1[only1]
    status[distinct] = 2
    status[merged] = 3
    status[only0 | only1] = 1
    return weights, status


def mc_weights_numba(ys, seeds, chart, xc, omegas, lam, mcentre, e_plus, e_minus,
                     ftol, dedup_tol, maxit):
    """Numba twin of :func:`mc_weights_numpy`."""
    ys = np.ascontiguousarray(ys, dtype=float)
    seeds = np.ascontiguousarray(seeds, dtype=float)
    m = ys.shape[0]
    weights = np.empty(m)
    status = np.empty(m, dtype=np.int64)
    _mc_weights_nb(
        ys, seeds, np.ascontiguousarray(chart, dtype=float),
        np.ascontiguousarray(xc, dtype=float),
        np.ascontiguousarray(omegas, dtype=float), float(lam),
        np.ascontiguousarray(mcentre, dtype=float), float(e_plus), float(e_minus),
        float(ftol), float(dedup_tol), int(maxit), weights, status,
    )
    return weights, status


mc_weights = mc_weights_numba if HAS_NUMBA else mc_weights_numpy


# ---------------------------------------------------------------------------
# Airy-product tensor quadrature rows
# ---------------------------------------------------------------------------
#
# Row sums of  w_P(j) * Ai(z+)/g+ * Ai(z-)/g-  over the P nodes for each Q
# node, with H± = (omega/2) ((Q ± Qt)^2 + P^2) and either point-exact Airy
# widths or the frozen central width g0.  The caller combines row sums with
# the Q weights via numpy so the final reduction is bit-stable.


@njit(parallel=True, cache=True)
def _airy_rows_nb(qnodes, pnodes, pweights, omega, qt, e_plus, e_minus,
                  g0, hb23, exact, excl_sq, ucoef, rows):
    nq = qnodes.size
    npn = pnodes.size
    for i in prange(nq):
        q = qnodes[i]
        acc = 0.0
        for j in range(npn):
            p = pnodes[j]
            rp2 = (q + qt) * (q + qt) + p * p
            rm2 = (q - qt) * (q - qt) + p * p
            if rp2 < excl_sq or rm2 < excl_sq:
                continue
            hp = 0.5 * omega * rp2
            hm = 0.5 * omega * rm2
            if exact == 1:
                gp = 0.5 * hb23 * (omega * omega * 2.0 * hp) ** (1.0 / 3.0)
                gm = 0.5 * hb23 * (omega * omega * 2.0 * hm) ** (1.0 / 3.0)
            else:
                gp = g0
                gm = g0
            val = (_airy_scalar((hp - e_plus) / gp, ucoef) / gp) * \
                  (_airy_scalar((hm - e_minus) / gm, ucoef) / gm)
            acc += pweights[j] * val
        rows[i] = acc


def airy_rows_numpy(qnodes, pnodes, pweights, omega, qt, e_plus, e_minus,
                    g0, hb23, exact, excl_sq=0.0):
    """Pure-numpy twin of the Airy-product row-sum kernel."""
    qnodes = np.asarray(qnodes, dtype=float)
    pnodes = np.asarray(pnodes, dtype=float)
    pweights = np.asarray(pweights, dtype=float)
    rows = np.empty(qnodes.size)
    block = max(1, int(4e6 // max(1, pnodes.size)))
    for start in range(0, qnodes.size, block):
        q = qnodes[start:start + block, None]
        p = pnodes[None, :]
        rp2 = (q + qt) ** 2 + p * p
        rm2 = (q - qt) ** 2 + p * p
        hp = 0.5 * omega * rp2
        hm = 0.5 * omega * rm2
        if exact:
            gp = 0.5 * hb23 * (2.0 * omega * omega * hp) ** (1.0 / 3.0)
            gm = 0.5 * hb23 * (2.0 * omega * omega * hm) ** (1.0 / 3.0)
        else:
            gp = g0
            gm = g0
        with np.errstate(divide="ignore", invalid="ignore"):
            val = airy_ai_numpy((hp - e_plus) / gp) / gp * \
                airy_ai_numpy((hm - e_minus) / gm) / gm
        if excl_sq > 0.0:
            val = np.where((rp2 < excl_sq) | (rm2 < excl_sq), 0.0, val)
        rows[start:start + block] = val @ pweights
    return rows


def airy_rows_numba(qnodes, pnodes, pweights, omega, qt, e_plus, e_minus,
                    g0, hb23, exact, excl_sq=0.0):
    """Numba twin of :func:`airy_rows_numpy`."""
    qnodes = np.ascontiguousarray(qnodes, dtype=float)
    rows = np.empty(qnodes.size)
    _airy_rows_nb(
        qnodes, np.ascontiguousarray(pnodes, dtype=float),
        np.ascontiguousarray(pweights, dtype=float), float(omega), float(qt),
        float(e_plus), float(e_minus), float(g0), float(hb23),
        1 if exact else 0, float(excl_sq), _U_COEF, rows,
    )
    return rows


airy_rows = airy_rows_numba if HAS_NUMBA else airy_rows_numpy


# ---------------------------------------------------------------------------
# Chebyshev-weighted Airy edge profile
# ---------------------------------------------------------------------------
#
# J = ∫_{v_lo}^{v_hi} Ai((v - shift)/g0) dv / sqrt((v - v_lo)(v_hi - v))
# for per-row windows (v_lo, v_hi).  The endpoint substitutions
# v = v_lo + s² and v = v_hi - t² remove both inverse square roots, and the
# Airy phase (2/3)|arg|^{3/2} inverts in closed form, so panel edges sit at
# equal phase increments (one fringe per panel) without sequential marching.
# The evanescent side uses a fixed argument ladder and truncates at +30,
# where Ai is ~1e-33.

_EVAN_LADDER = np.array([0.0, 1.0, 2.5, 4.5, 7.0, 10.0, 14.0, 19.0,
                         25.0, 30.0])
_TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _gl_span(c, h, g0, sign, s_lo, s_hi, glx, glw, ucoef):
    """Gauss–Legendre panel of 2·Ai(sign·(s²-c)/g0)/sqrt(2h-s²) on [s_lo, s_hi]."""
    mid = 0.5 * (s_lo + s_hi)
    half = 0.5 * (s_hi - s_lo)
    acc = 0.0
    for g in range(glx.size):
        s = mid + half * glx[g]
        den = 2.0 * h - s * s
        if den <= 0.0:
            continue
        arg = sign * (s * s - c) / g0
        acc += half * glw[g] * 2.0 * _airy_scalar(arg, ucoef) / math.sqrt(den)
    return acc


@njit(cache=True)
def _piece_scalar(c, h, g0, down, step, glx, glw, ucoef):
    """One endpoint piece: ∫_0^{sqrt(h)} 2 Ai(±(s² - c)/g0)/sqrt(2h - s²) ds.

    ``down=False`` is the lower-endpoint substitution (Airy argument rises
    through the piece: oscillatory for s² < c, evanescent after); ``down=
    True`` is the upper-endpoint one (argument falls: evanescent for
    s² < c, oscillatory after).  Oscillatory panel edges sit at unit-fringe
    phase increments, placed in closed form by inverting (2/3)|arg|^{3/2};
    evanescent panels follow a fixed argument ladder truncated at +30,
    beyond which Ai is numerically zero.
    """
    sign = -1.0 if down else 1.0
    total = 0.0
    if not down:
        # oscillatory: s² in [0, min(c, h)] when c > 0
        if c > 0.0:
            s2_end = c if c < h else h
            d0 = (2.0 / 3.0) * (c / g0) ** 1.5
            rem = c - s2_end
            d1 = (2.0 / 3.0) * (rem / g0) ** 1.5 if rem > 0.0 else 0.0
            n_pan = int(math.ceil((d0 - d1) / step))
            prev = 0.0
            for k in range(1, n_pan + 1):
                phi = d0 - step * k
                if phi < d1:
                    phi = d1
                s2 = c - g0 * (1.5 * phi) ** (2.0 / 3.0)
                if s2 < 0.0:
                    s2 = 0.0
                edge = math.sqrt(s2)
                if edge <= prev:
                    continue
                total += _gl_span(c, h, g0, sign, prev, edge, glx, glw, ucoef)
                prev = edge
            s_start_sq = s2_end
        else:
            s_start_sq = 0.0
        # evanescent: argument ladder from (s_start² - c)/g0 up to +30
        zeta_start = (s_start_sq - c) / g0
        if zeta_start < 30.0:
            prev_s = math.sqrt(s_start_sq)
            for j in range(_EVAN_LADDER.size):
                z_edge = _EVAN_LADDER[j]
                if z_edge <= zeta_start:
                    continue
                s2 = c + g0 * z_edge
                if s2 > h:
                    s2 = h
                edge = math.sqrt(s2)
                if edge <= prev_s:
                    continue
                total += _gl_span(c, h, g0, sign, prev_s, edge,
                                  glx, glw, ucoef)
                prev_s = edge
    else:
        # evanescent: s² in [max(0, c - 30 g0), min(c, h)], ladder descending
        if c > 0.0:
            lower2 = c - 30.0 * g0
            if lower2 < 0.0:
                lower2 = 0.0
            upper2 = c if c < h else h
            if upper2 > lower2:
                prev_s = math.sqrt(lower2)
                for j in range(_EVAN_LADDER.size):
                    zeta = _EVAN_LADDER[_EVAN_LADDER.size - 1 - j]
                    s2 = c - g0 * zeta
                    if s2 <= lower2:
                        continue
                    if s2 > upper2:
                        s2 = upper2
                    edge = math.sqrt(s2)
                    if edge <= prev_s:
                        continue
                    total += _gl_span(c, h, g0, sign, prev_s, edge,
                                      glx, glw, ucoef)
                    prev_s = edge
        # oscillatory: s² in [max(c, 0), h]
        osc_lo2 = c if c > 0.0 else 0.0
        if h > osc_lo2:
            p_start = 0.0 if c > 0.0 \
                else (2.0 / 3.0) * ((-c) / g0) ** 1.5
            p_end = (2.0 / 3.0) * ((h - c) / g0) ** 1.5
            n_pan = int(math.ceil((p_end - p_start) / step))
            prev = math.sqrt(osc_lo2)
            for k in range(1, n_pan + 1):
                phi = p_start + step * k
                if phi > p_end:
                    phi = p_end
                s2 = c + g0 * (1.5 * phi) ** (2.0 / 3.0)
                if s2 > h:
                    s2 = h
                edge = math.sqrt(s2)
                if edge <= prev:
                    continue
                total += _gl_span(c, h, g0, sign, prev, edge, glx, glw, ucoef)
                prev = edge
    return total


@njit(parallel=True, cache=True)
def _edge_profile_nb(v_lo, v_hi, shift, g0, step, glx, glw, ucoef, out):
    for i in prange(v_lo.size):
        lo = v_lo[i]
        hi = v_hi[i]
        h = 0.5 * (hi - lo)
        if h <= 1e-13 * (abs(hi) + abs(lo) + g0):
            m = 0.5 * (hi + lo)
            out[i] = math.pi * _airy_scalar((m - shift) / g0, ucoef)
            continue
        left = _piece_scalar(shift - lo, h, g0, False, step,
                             glx, glw, ucoef)
        right = _piece_scalar(hi - shift, h, g0, True, step,
                              glx, glw, ucoef)
        out[i] = left + right


def _piece_edges_numpy(c, h, g0, down, step):
    """Panel edges (in s) for one endpoint piece, exactly as the numba
    kernel places them."""
    if not down:
        edges = [0.0]
        if c > 0.0:
            s2_end = min(c, h)
            d0 = (2.0 / 3.0) * (c / g0) ** 1.5
            rem = c - s2_end
            d1 = (2.0 / 3.0) * (rem / g0) ** 1.5 if rem > 0.0 else 0.0
            n_pan = int(math.ceil((d0 - d1) / step))
            for k in range(1, n_pan + 1):
                phi = max(d0 - step * k, d1)
                s2 = max(c - g0 * (1.5 * phi) ** (2.0 / 3.0), 0.0)
                edge = math.sqrt(s2)
                if edge > edges[-1]:
                    edges.append(edge)
            s_start_sq = s2_end
        else:
            s_start_sq = 0.0
        zeta_start = (s_start_sq - c) / g0
        if zeta_start < 30.0:
            for z_edge in _EVAN_LADDER:
                if z_edge <= zeta_start:
                    continue
                s2 = min(c + g0 * z_edge, h)
                edge = math.sqrt(s2)
                if edge > edges[-1]:
                    edges.append(edge)
        return np.asarray(edges)
    edges = []
    if c > 0.0:
        lower2 = max(c - 30.0 * g0, 0.0)
        upper2 = min(c, h)
        if upper2 > lower2:
            edges.append(math.sqrt(lower2))
            for zeta in _EVAN_LADDER[::-1]:
                s2 = c - g0 * zeta
                if s2 <= lower2:
                    continue
                s2 = min(s2, upper2)
                edge = math.sqrt(s2)
                if edge > edges[-1]:
                    edges.append(edge)
    osc_lo2 = max(c, 0.0)
    if h > osc_lo2:
        if not edges or math.sqrt(osc_lo2) > edges[-1]:
            edges.append(math.sqrt(osc_lo2))
        p_start = 0.0 if c > 0.0 else (2.0 / 3.0) * ((-c) / g0) ** 1.5
        p_end = (2.0 / 3.0) * ((h - c) / g0) ** 1.5
        n_pan = int(math.ceil((p_end - p_start) / step))
        for k in range(1, n_pan + 1):
            phi = min(p_start + step * k, p_end)
            s2 = min(c + g0 * (1.5 * phi) ** (2.0 / 3.0), h)
            edge = math.sqrt(s2)
            if edge > edges[-1]:
                edges.append(edge)
    return np.asarray(edges)


def _piece_integral_numpy(c, h, g0, down, step, glx, glw):
    edges = _piece_edges_numpy(c, h, g0, down, step)
    if edges.size < 2:
        return 0.0
    mids = 0.5 * (edges[1:] + edges[:-1])
    halfs = 0.5 * (edges[1:] - edges[:-1])
    s = (mids[:, None] + halfs[:, None] * glx[None, :]).ravel()
    w = (halfs[:, None] * glw[None, :]).ravel()
    den = 2.0 * h - s * s
    good = den > 0.0
    sign = -1.0 if down else 1.0
    vals = np.zeros_like(s)
    vals[good] = 2.0 * airy_ai_numpy(sign * (s[good] ** 2 - c) / g0) \
        / np.sqrt(den[good])
    return float(w @ vals)


def edge_profile_numpy(v_lo, v_hi, shift, g0, nodes_per_panel=8,
                       fringe_stride=1.0):
    """Chebyshev-weighted Airy window integrals, pure-numpy implementation.

    Returns ``J_i = ∫ Ai((v - shift)/g0) dv / sqrt((v - v_lo_i)(v_hi_i - v))``
    over each window ``(v_lo_i, v_hi_i)``.
    """
    v_lo = np.atleast_1d(np.asarray(v_lo, dtype=float))
    v_hi = np.atleast_1d(np.asarray(v_hi, dtype=float))
    glx, glw = np.polynomial.legendre.leggauss(int(nodes_per_panel))
    step = _TWO_PI * float(fringe_stride)
    out = np.empty(v_lo.size)
    for i in range(v_lo.size):
        h = 0.5 * (v_hi[i] - v_lo[i])
        if h <= 1e-13 * (abs(v_hi[i]) + abs(v_lo[i]) + g0):
            m = 0.5 * (v_hi[i] + v_lo[i])
            out[i] = math.pi * airy_ai_numpy((m - shift) / g0)
            continue
        out[i] = (
            _piece_integral_numpy(shift - v_lo[i], h, g0, False,
                                  step, glx, glw)
            + _piece_integral_numpy(v_hi[i] - shift, h, g0, True,
                                    step, glx, glw))
    return out


def edge_profile_numba(v_lo, v_hi, shift, g0, nodes_per_panel=8,
                       fringe_stride=1.0):
    """Numba twin of :func:`edge_profile_numpy`."""
    v_lo = np.ascontiguousarray(np.atleast_1d(v_lo), dtype=float)
    v_hi = np.ascontiguousarray(np.atleast_1d(v_hi), dtype=float)
    glx, glw = np.polynomial.legendre.leggauss(int(nodes_per_panel))
    out = np.empty(v_lo.size)
    _edge_profile_nb(v_lo, v_hi, float(shift), float(g0),
                     _TWO_PI * float(fringe_stride),
                     np.ascontiguousarray(glx), np.ascontiguousarray(glw),
                     _U_COEF, out)
    return out


edge_profile = edge_profile_numba if HAS_NUMBA else edge_profile_numpy
