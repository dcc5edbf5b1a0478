"""Closed-form geometry of a hyperbolic collar around a short closed geodesic.

A collar with core length ``l`` is conformal to the flat cylinder
``[t_lo, t_hi] x S^1`` carrying the metric ``lam(t)^2 (dt^2 + dtheta^2)``
with ``lam(t) = l / (2 pi sin(l t / 2 pi))``; the core geodesic sits on the
circle ``t = pi^2 / l``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .exceptions import DeltaTooSmall, LengthOutOfRange, OutOfCollar

L_MAX = 2 * np.arcsinh(1.0)
DELTA_THIN = float(np.arcsinh(1.0))


def _check_length(l):
    if not 0 < l <= L_MAX * (1 + 1e-15):
        raise LengthOutOfRange(f"core length must lie in (0, 2 arcsinh 1], got {l}")


def cylinder_bounds(l):
    """``(t_lo, t_hi)`` of the flat cylinder conformal to the collar."""
    _check_length(l)
    ang = np.arctan(np.sinh(l / 2))
    k = 2 * np.pi / l
    return float(k * ang), float(k * (np.pi - ang))


def _check_t(l, t):
    lo, hi = cylinder_bounds(l)
    t = np.asarray(t, dtype=float)
    tol = 1e-12 * hi
    if np.any(t < lo - tol) or np.any(t > hi + tol):
        raise OutOfCollar(f"t outside the collar cylinder [{lo}, {hi}]")
    return t


def conformal_factor(l, t):
    """``lam(t) = l / (2 pi sin(l t / 2 pi))``; smallest on the core circle."""
    t = _check_t(l, t)
    return l / (2 * np.pi * np.sin(l * t / (2 * np.pi)))


def injrad(l, t):
    """Injectivity radius at height ``t``: ``arcsinh(sinh(l/2) / sin(l t / 2 pi))``."""
    t = _check_t(l, t)
    return np.arcsinh(np.sinh(l / 2) / np.sin(l * t / (2 * np.pi)))


def injrad_fermi(l, phi):
    """Injectivity radius at angle ``phi`` in the upper half-plane model.

    Solves ``sinh(r) sin(phi) = sinh(l/2)``; independent of the radial coordinate.
    """
    _check_length(l)
    return np.arcsinh(np.sinh(l / 2) / np.sin(np.asarray(phi, dtype=float)))


def fermi_to_cylinder(l, r, phi):
    """Map ``(r, phi)`` of the half-plane collar region to cylinder coordinates ``(t, theta)``.

    ``t = 2 pi phi / l`` and ``theta = 2 pi log(r) / l``; ``r = e^l`` lands on
    ``theta = 2 pi``, the same circle as ``r = 1``.
    """
    _check_length(l)
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ang = np.arctan(np.sinh(l / 2))
    if np.any(r < 1 - 1e-12) or np.any(r > np.exp(l) * (1 + 1e-12)):
        raise OutOfCollar("r must lie in [1, e^l]")
    if np.any(phi < ang - 1e-12) or np.any(phi > np.pi - ang + 1e-12):
        raise OutOfCollar("phi outside the collar angle range")
    k = 2 * np.pi / l
    return k * phi, k * np.log(r)


@dataclass(frozen=True)
class SubcollarBounds:
    """The part ``[T1, T2]`` of the collar cylinder where the injectivity radius is at most ``delta``."""

    delta: float
    T1: float
    T2: float

    @property
    def length(self):
        return self.T2 - self.T1


def subcollar(l, delta=DELTA_THIN):
    """Cylinder bounds of the ``delta``-thin part of the collar.

    Raises
    ------
    DeltaTooSmall
        If ``sinh(l/2) > sinh(delta)``: the core itself is thicker than ``delta``.
    """
    _check_length(l)
    if not 0 < delta <= DELTA_THIN * (1 + 1e-15):
        raise LengthOutOfRange(f"delta must lie in (0, arcsinh 1], got {delta}")
    ratio = np.sinh(l / 2) / np.sinh(delta)
    if ratio > 1 + 1e-15:
        raise DeltaTooSmall(f"sinh(l/2) > sinh(delta) for l={l}, delta={delta}")
    T1 = 2 * np.pi / l * np.arcsin(min(ratio, 1.0))
    return SubcollarBounds(float(delta), float(T1), float(2 * np.pi**2 / l - T1))


def collar_area(l):
    """Closed-form collar area ``l / sinh(l/2)``."""
    _check_length(l)
    return float(l / np.sinh(l / 2))


def collar_area_quadrature(l, t_a=None, t_b=None):
    """``2 pi * int lam(t)^2 dt`` over ``[t_a, t_b]`` (default: the whole collar cylinder)."""
    lo, hi = cylinder_bounds(l)
    t_a = lo if t_a is None else t_a
    t_b = hi if t_b is None else t_b
    _check_t(l, [t_a, t_b])
    k = l / (2 * np.pi)
    val, _ = quad(lambda t: (k / np.sin(k * t)) ** 2, t_a, t_b, epsabs=0, epsrel=1e-13, limit=200)
    return float(2 * np.pi * val)


@dataclass(frozen=True)
class CollarSpec:
    """A collar of core length ``l`` with its derived cylinder data."""

    l: float

    def __post_init__(self):
        _check_length(self.l)
        object.__setattr__(self, "l", float(self.l))

    @property
    def t_lo(self):
        return cylinder_bounds(self.l)[0]

    @property
    def t_hi(self):
        return cylinder_bounds(self.l)[1]

    @property
    def core_t(self):
        return np.pi**2 / self.l

    @property
    def length(self):
        lo, hi = cylinder_bounds(self.l)
        return hi - lo

    def conformal_factor(self, t):
        return conformal_factor(self.l, t)

    def injrad(self, t):
        return injrad(self.l, t)

    def subcollar(self, delta=DELTA_THIN):
        return subcollar(self.l, delta)

    def summary(self, delta=None):
        """All derived quantities as a flat dict."""
        d = {"l": self.l, "t_lo": self.t_lo, "t_hi": self.t_hi, "core_t": self.core_t,
             "length": self.length, "area": collar_area(self.l),
             "conformal_factor_core": float(conformal_factor(self.l, self.core_t)),
             "injrad_core": float(injrad(self.l, self.core_t))}
        if delta is not None:
            s = subcollar(self.l, delta)
            d.update({"delta": s.delta, "T1": s.T1, "T2": s.T2, "subcollar_length": s.length,
                      "length_ratio": s.length * self.l / (2 * np.pi**2)})
        return d
