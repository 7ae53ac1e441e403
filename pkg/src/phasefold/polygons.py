"""Symplectic polygons defined by the midpoints of their sides.

A chain of ``M`` phase-space points is read as the side *centres* of a
closed polygon: vertex ``i`` and vertex ``i+1`` (cyclically) average to
centre ``i``.  For odd ``M`` the vertices are determined uniquely by an
alternating sum; for even ``M`` a closure constraint must hold and the
vertex loop is then a family with one free vertex.  The symplectic area
of the loop, the formula for a single side in terms of the *other*
centres, and the tangency of sides to a Hamiltonian trajectory are the
quantities exercised by the tests.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .core import HamiltonianModel, ndof_of, skew_product

__all__ = [
    "PolygonPath",
    "reconstruct_vertices",
    "symplectic_area",
    "open_polygon_side",
    "closure_residual",
    "vertices_from_even_centres",
    "trajectory_polygon_centres",
    "tangency_residual",
]


def _centres_array(path) -> np.ndarray:
    """Coerce a :class:`PolygonPath` or a plain sequence to an (M, 2N) array."""
    if isinstance(path, PolygonPath):
        centres = np.asarray(path.side_centres, dtype=float)
    else:
        centres = np.asarray(path, dtype=float)
    if centres.ndim != 2 or centres.shape[0] < 1:
        raise ValueError("expected a non-empty sequence of phase-space points")
    ndof_of(centres[0])  # validates even phase-space dimension
    return centres


def _alternating_sum(centres: np.ndarray) -> np.ndarray:
    """Sum of ``(-1)^k c_k`` with 1-based ``k`` (first element negative)."""
    signs = np.where(np.arange(1, centres.shape[0] + 1) % 2 == 1, -1.0, 1.0)
    return signs @ centres


@dataclasses.dataclass(frozen=True)
class PolygonPath:
    """Ordered side centres of a polygon, with a closure flag.

    An odd number of centres is always closable (``closed`` is implied);
    an even number marked ``closed=True`` must satisfy the alternating-sum
    closure constraint to within ``1e-10`` of the coordinate scale.
    """

    side_centres: tuple
    closed: bool = True

    def __post_init__(self):
        centres = np.asarray(self.side_centres, dtype=float)
        if centres.ndim != 2 or centres.shape[0] < 1:
            raise ValueError("side_centres must be a non-empty sequence of phase-space points")
        ndof_of(centres[0])
        object.__setattr__(
            self, "side_centres", tuple(tuple(row) for row in centres)
        )
        if self.closed and centres.shape[0] % 2 == 0:
            scale = max(1.0, float(np.max(np.abs(centres))))
            gap = 2.0 * _alternating_sum(centres)
            if float(np.max(np.abs(gap))) > 1e-10 * scale:
                raise ValueError(
                    "even-sided centre chain does not satisfy the closure "
                    "constraint; construct it via vertices_from_even_centres"
                )

    def __len__(self) -> int:
        return len(self.side_centres)


def reconstruct_vertices(path) -> np.ndarray:
    """Vertices of the unique closed polygon with the given odd side-centre chain.

    Solves ``v_i + v_{i+1} = 2 c_i`` cyclically.  The first vertex is the
    alternating sum ``c_0 - c_1 + c_2 - ...`` (odd length makes the system
    non-singular); the rest follow by ``v_{i+1} = 2 c_i - v_i``.
    """
    centres = _centres_array(path)
    m = centres.shape[0]
    if m % 2 == 0:
        raise ValueError(
            "an even number of side centres does not determine the vertices; "
            "use vertices_from_even_centres with a chosen first vertex"
        )
    vertices = np.empty_like(centres)
    signs = np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
    vertices[0] = signs @ centres
    for i in range(m - 1):
        vertices[i + 1] = 2.0 * centres[i] - vertices[i]
    return vertices


def _loop_area(vertices: np.ndarray, per_plane: bool):
    n = ndof_of(vertices[0])
    rolled = np.roll(vertices, -1, axis=0)
    if not per_plane:
        return 0.5 * float(np.sum(skew_product(vertices, rolled)))
    p, q = vertices[:, :n], vertices[:, n:]
    rp, rq = rolled[:, :n], rolled[:, n:]
    return 0.5 * np.sum(p * rq - q * rp, axis=0)


def symplectic_area(path, per_plane: bool = False):
    """Signed symplectic area of the closed polygon with the given side centres.

    The vertex loop is reconstructed and the shoelace sum
    ``(1/2) sum_i v_i ^ v_{i+1}`` is taken in the symplectic form; for more
    than one degree of freedom this is the sum of the per-plane shoelaces
    (returned individually with ``per_plane=True``).  Even-length chains
    must satisfy the closure constraint; the area is then independent of
    the free vertex choice.
    """
    centres = _centres_array(path)
    if centres.shape[0] % 2 == 1:
        vertices = reconstruct_vertices(centres)
    else:
        vertices = vertices_from_even_centres(centres)
    return _loop_area(vertices, per_plane)


def open_polygon_side(path, distinguished: int) -> np.ndarray:
    """Vector of the side centred on ``distinguished``, from the other centres.

    Equals ``2 sum_k (-1)^k c_k`` over the remaining centres taken in cyclic
    order after the distinguished one (it does not depend on its own
    centre), and matches ``-J dArea/dc`` at the distinguished centre.
    """
    centres = _centres_array(path)
    m = centres.shape[0]
    if not -m <= distinguished < m:
        raise IndexError("distinguished side index out of range")
    others = np.roll(centres, -(distinguished % m), axis=0)[1:]
    return 2.0 * _alternating_sum(others)


def closure_residual(centres_a, centres_b) -> np.ndarray:
    """Gap vector obstructing two open centre chains from closing jointly.

    Returns ``2 [sum_k (-1)^k a_k + sum_k (-1)^k b_k]`` (1-based signs).  A
    zero vector means the concatenated even-sided polygon closes; shifting
    any single centre by half the residual, with the sign of its position,
    restores closure.
    """
    a = _centres_array(centres_a)
    b = _centres_array(centres_b)
    if a.shape[1] != b.shape[1]:
        raise ValueError("centre groups live in different phase spaces")
    return 2.0 * (_alternating_sum(a) + _alternating_sum(b))


def vertices_from_even_centres(centres, first_vertex=None, tol: float = 1e-10) -> np.ndarray:
    """One member of the closed-vertex family for an even side-centre chain.

    Even chains close only when the alternating sum of the centres
    vanishes; the vertices then form a family parametrized by the first
    vertex (``centres[0]`` by default).  All members have the same
    symplectic area.  Raises if the closure constraint is violated beyond
    ``tol`` relative to the coordinate scale.
    """
    pts = _centres_array(centres)
    m = pts.shape[0]
    if m % 2 == 1:
        raise ValueError("odd chains are uniquely closable; use reconstruct_vertices")
    scale = max(1.0, float(np.max(np.abs(pts))))
    gap = 2.0 * _alternating_sum(pts)
    if float(np.max(np.abs(gap))) > tol * scale:
        raise ValueError("even side-centre chain does not close (alternating sum nonzero)")
    vertices = np.empty_like(pts)
    vertices[0] = pts[0] if first_vertex is None else np.asarray(first_vertex, dtype=float)
    for i in range(m - 1):
        vertices[i + 1] = 2.0 * pts[i] - vertices[i]
    return vertices


def _rk4_step(model: HamiltonianModel, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = model.velocity(x)
    k2 = model.velocity(x + 0.5 * dt * k1)
    k3 = model.velocity(x + 0.5 * dt * k2)
    k4 = model.velocity(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def trajectory_polygon_centres(
    model: HamiltonianModel,
    x0,
    t: float,
    steps: int,
    substeps: int = 64,
) -> np.ndarray:
    """Side-centre chain shadowing a trajectory arc of ``model``.

    Integrates from ``x0`` for time ``t`` (fine fixed-step RK4, ``substeps``
    per half-interval) and samples the mid-times ``(k - 1/2) t/steps``.
    Row 0 is the chord centre, the midpoint of the arc's endpoints; the
    remaining rows are the mid-time samples ordered from the late end of
    the arc to the early end, which orients every reconstructed side along
    the flow.  ``steps`` must be even so the chain length is odd.
    """
    if steps < 2 or steps % 2 == 1:
        raise ValueError("steps must be a positive even integer")
    if substeps < 1:
        raise ValueError("substeps must be positive")
    x = np.asarray(x0, dtype=float)
    ndof_of(x)
    dt = t / (2.0 * steps * substeps)
    samples = [x]
    for _ in range(2 * steps):
        for _ in range(substeps):
            x = _rk4_step(model, x, dt)
        samples.append(x)
    chain = np.empty((steps + 1, samples[0].shape[0]))
    chain[0] = 0.5 * (samples[0] + samples[-1])
    for k in range(1, steps + 1):
        chain[k] = samples[2 * (steps - k) + 1]
    return chain


def tangency_residual(model: HamiltonianModel, t: float, steps: int, trajectory_centres) -> float:
    """Worst mismatch between polygon sides and the local flow increments.

    For a chain from :func:`trajectory_polygon_centres`, each side through
    a trajectory centre ``c`` should equal ``(t/steps) * velocity(c)`` up
    to a curvature error of order ``(t/steps)^2``; the maximum norm of the
    difference is returned.  The chord side (row 0) is excluded.
    """
    centres = _centres_array(trajectory_centres)
    if centres.shape[0] != steps + 1:
        raise ValueError("chain length must be steps + 1 (chord centre plus mid-times)")
    h = t / steps
    worst = 0.0
    for k in range(1, steps + 1):
        side = open_polygon_side(centres, k)
        mismatch = side - h * model.velocity(centres[k])
        worst = max(worst, float(np.linalg.norm(mismatch)))
    return worst
