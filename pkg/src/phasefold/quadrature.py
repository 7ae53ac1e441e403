"""Panel-based Gauss-Legendre quadrature helpers.

Thin wrappers around ``numpy.polynomial.legendre.leggauss`` that provide
fixed and adaptive panel subdivision for vectorized integrands, plus node
construction for tensor-product 2-D integrals.  Integrands must accept an
array of abscissae and return an array of the same shape.
"""

import numpy as np
from numpy.polynomial.legendre import leggauss

_RULE_CACHE = {}


def _rule(n):
    if n not in _RULE_CACHE:
        _RULE_CACHE[n] = leggauss(n)
    return _RULE_CACHE[n]


def panel_nodes(edges, nodes_per_panel):
    """Gauss-Legendre nodes and weights for a sequence of panel edges.

    Parameters
    ----------
    edges : array_like
        Strictly increasing panel boundaries, length ``n_panels + 1``.
    nodes_per_panel : int
        Gauss-Legendre order used on every panel.

    Returns
    -------
    x, w : ndarray
        Flat node and weight arrays covering all panels in order.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("edges must be a 1-D array with at least two entries")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("panel edges must be strictly increasing")
    t, wt = _rule(int(nodes_per_panel))
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    x = (0.5 * (a + b) + half * t).reshape(-1)
    w = (half * wt).reshape(-1)
    return x, w


def fixed_quad(f, a, b, n_panels=8, nodes_per_panel=12):
    """Integrate ``f`` on ``[a, b]`` with equal panels, no error control."""
    edges = np.linspace(a, b, n_panels + 1)
    x, w = panel_nodes(edges, nodes_per_panel)
    return float(np.sum(w * f(x)))


def adaptive_quad(f, a, b, rtol=1e-10, atol=1e-13, max_depth=24, nodes_per_panel=12):
    """Integrate ``f`` on ``[a, b]`` by recursive panel halving.

    Each panel's value is compared against its two halves; panels that
    disagree beyond ``atol + rtol * |total estimate|`` are split, depth-first,
    up to ``max_depth`` levels.

    Returns
    -------
    value : float
    error_estimate : float
        Sum of the accepted panel discrepancies.
    """
    t, wt = _rule(int(nodes_per_panel))

    def panel_value(lo, hi):
        half = 0.5 * (hi - lo)
        x = 0.5 * (lo + hi) + half * t
        return half * float(np.sum(wt * f(x)))

    rough = panel_value(a, b)
    scale = max(abs(rough), atol)
    total = 0.0
    err = 0.0
    stack = [(a, b, rough, 0)]
    while stack:
        lo, hi, val, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = panel_value(lo, mid)
        right = panel_value(mid, hi)
        disc = abs(left + right - val)
        if disc <= atol + rtol * scale or depth >= max_depth:
            total += left + right
            err += disc
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
        scale = max(scale, abs(total))
    return total, err


def oscillatory_edges(a, b, phase_scale, min_panels=4, max_panels=400000,
                      points_per_period=4.0):
    """Uniform panel edges sized to resolve oscillations of local frequency.

    ``phase_scale`` is the (maximum) derivative of the integrand's phase on
    the interval; panels are sized so each spans at most ``2 pi /
    (phase_scale * points_per_period)``.
    """
    if b <= a:
        raise ValueError("need b > a")
    width = 2.0 * np.pi / (max(phase_scale, 1e-300) * points_per_period)
    n = int(np.ceil((b - a) / width))
    n = min(max(n, min_panels), max_panels)
    return np.linspace(a, b, n + 1)


def tensor_quad(f, x_edges, y_edges, nodes_per_panel=10):
    """2-D tensor-product panel quadrature of ``f(x, y)``.

    ``f`` must broadcast over meshgrid arrays.  Node count is
    ``(len(x_edges)-1) * (len(y_edges)-1) * nodes_per_panel**2``.
    """
    x, wx = panel_nodes(x_edges, nodes_per_panel)
    y, wy = panel_nodes(y_edges, nodes_per_panel)
    vals = f(x[:, None], y[None, :])
    return float(wx @ vals @ wy)
