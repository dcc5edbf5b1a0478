"""Closed-form test maps on cylinders.

These are the oracles of the test-suite and the seeds of the experiments:
great-circle necks, the equator wrap, the inverse-stereographic bubble and
a neck with an inserted bubble.
"""
import numpy as np

from .grid import MapField
from .manifold import UnitSphere

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])


def _sphere(target):
    return UnitSphere(3) if target is None else target


def geodesic_ansatz(grid, slope, target=None, p=E1, v=E2, t0=None):
    """``u(t, theta) = c(slope * (t - t0))`` for the great circle through ``p`` with velocity ``v``."""
    target = _sphere(target)
    t0 = grid.t_min if t0 is None else t0
    s = slope * (grid.t - t0)
    curve = target.geodesic(np.asarray(p, float), np.asarray(v, float), s)
    values = np.broadcast_to(curve[:, None, :], (grid.n_t, grid.n_th, curve.shape[-1]))
    return MapField(grid, values.copy(), target)


def constant_field(grid, point=E1, target=None):
    target = _sphere(target)
    point = target.project(np.asarray(point, float))
    values = np.broadcast_to(point, (grid.n_t, grid.n_th, point.shape[-1]))
    return MapField(grid, values.copy(), target)


def equator_wrap(grid):
    """``u(t, theta) = (cos theta, sin theta, 0)``: non-conformal, ``u_t = 0``."""
    T, TH = grid.mesh()
    values = np.stack([np.cos(TH), np.sin(TH), np.zeros_like(T)], axis=-1)
    return MapField(grid, values, UnitSphere(3))


def _bubble_values(T, TH, center=0.0, scale=1.0):
    # inverse stereographic image of z = exp(s + i theta)
    s = (T - center) / scale
    sech = 1.0 / np.cosh(s)
    return np.stack([np.cos(TH) * sech, np.sin(TH) * sech, np.tanh(s)], axis=-1)


def bubble_field(grid, center=0.0):
    """Inverse stereographic projection of ``exp(t - center + i theta)``; conformal."""
    T, TH = grid.mesh()
    return MapField(grid, _bubble_values(T, TH, center), UnitSphere(3))


def rotation_x(angle):
    """Rotation matrices about ``e_1``, stacked along the leading axes of ``angle``."""
    angle = np.asarray(angle, float)
    c, s = np.cos(angle), np.sin(angle)
    one, zero = np.ones_like(angle), np.zeros_like(angle)
    return np.stack([
        np.stack([one, zero, zero], -1),
        np.stack([zero, c, -s], -1),
        np.stack([zero, s, c], -1),
    ], -2)


def neck_bubble_field(grid, slope, center=0.0):
    """A bubble at ``t = center`` carried along a great-circle neck of speed ``slope``.

    ``u = R_x(slope * (t - center)) b(t, theta)`` with ``b`` the unit bubble; far
    from the centre both ends follow great circles through the poles.
    """
    T, TH = grid.mesh()
    b = _bubble_values(T, TH, center)
    R = rotation_x(slope * (grid.t - center))
    values = np.einsum("iab,ijb->ija", R, b)
    return MapField(grid, values, UnitSphere(3))


def small_oscillation_problem(grid, slope, amplitude, rng=None):
    """Dirichlet problem: a great-circle neck whose end circles are wiggled out of the curve.

    The lower circle sits near ``e1`` and the upper one near the point at
    arclength ``slope * length`` along the great circle towards ``e2``; each is
    displaced by ``amplitude`` times a mix of low Fourier modes, then projected.
    Without ``rng`` the modes are fixed (``cos th e3 + sin 2th e2`` below,
    ``sin th e3`` above); with a ``numpy.random.Generator`` three modes per
    direction get random coefficients, rescaled to peak ``amplitude``.

    Returns the geodesic interpolation between the two circles, ready for
    :func:`necklab.solver.solve`.
    """
    from .solver import BoundaryData, initial_guess

    target = UnitSphere(3)
    th = grid.theta
    e1, e2, e3 = np.eye(3)
    q = np.cos(slope * grid.length) * e1 + np.sin(slope * grid.length) * e2
    normal = np.cross(e1, e2)
    if rng is None:
        lo = np.cos(th)[:, None] * e3 + np.sin(2 * th)[:, None] * e2
        hi = np.sin(th)[:, None] * e3
    else:
        k = np.arange(1, 4)
        def wiggle(p):
            t1, t2 = np.cross(normal, p), normal
            c = rng.standard_normal((2, 3, 2))
            modes = c[..., 0] @ np.cos(np.outer(k, th)) + c[..., 1] @ np.sin(np.outer(k, th))
            w = modes[0][:, None] * t1 + modes[1][:, None] * t2
            return w / np.max(np.linalg.norm(w, axis=-1))
        lo, hi = wiggle(e1), wiggle(q)
    lower = target.project(e1[None] + amplitude * lo)
    upper = target.project(q[None] + amplitude * hi)
    return initial_guess(grid, target, BoundaryData(lower, upper))
