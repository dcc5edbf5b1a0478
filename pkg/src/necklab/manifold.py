"""Embedded target manifolds: the unit sphere and flat tori.

Every method is vectorised over leading axes: points and vectors are arrays
whose last axis is the ambient dimension ``K``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, NonTangent, ZeroVector

ON_MANIFOLD_TOL = 1e-10


class TargetManifold:
    """Common interface of the embedded targets.

    Subclasses implement the closed-form geometry; ``delta`` is the one
    primitive used by all finite-difference stencils, so that a flat torus
    stored by canonical representatives still differentiates correctly
    across the identification.
    """

    ambient_dim: int

    def project(self, p):
        raise NotImplementedError

    def delta(self, p, q):
        """Ambient displacement from ``p`` to ``q`` (minimal image on tori)."""
        raise NotImplementedError

    def tangent_part(self, u, v):
        raise NotImplementedError

    def sff_term(self, u, du_t, du_th):
        raise NotImplementedError

    def geodesic(self, p, v, s):
        raise NotImplementedError

    def distance(self, p, q):
        raise NotImplementedError

    def contains(self, p, tol=ON_MANIFOLD_TOL):
        raise NotImplementedError

    def descriptor(self):
        raise NotImplementedError


@dataclass(frozen=True)
class UnitSphere(TargetManifold):
    """The unit sphere ``S^{K-1}`` in ``R^K``."""

    ambient_dim: int = 3

    def __post_init__(self):
        if int(self.ambient_dim) < 2:
            raise ConfigError("sphere needs ambient dimension >= 2")

    def project(self, p):
        p = np.asarray(p, dtype=float)
        norm = np.linalg.norm(p, axis=-1, keepdims=True)
        if np.any(norm <= 1e-14):
            raise ZeroVector("cannot project a (near) zero vector onto the sphere")
        # points already normalised to rounding are returned untouched (bitwise idempotence)
        keep = np.abs(norm - 1.0) <= 4 * np.finfo(float).eps
        return np.where(keep, p, p / norm)

    def delta(self, p, q):
        return np.asarray(q, dtype=float) - np.asarray(p, dtype=float)

    def tangent_part(self, u, v):
        return v - np.sum(u * v, axis=-1, keepdims=True) * u

    def sff_term(self, u, du_t, du_th):
        """``A(u)(du, du)``; equals ``(|u_t|^2 + |u_th|^2) u`` on the unit sphere."""
        grad2 = np.sum(du_t * du_t, axis=-1, keepdims=True) + np.sum(
            du_th * du_th, axis=-1, keepdims=True
        )
        return grad2 * u

    def geodesic(self, p, v, s):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        if np.any(np.abs(np.sum(p * v, axis=-1)) > 1e-10):
            raise NonTangent("initial velocity is not tangent to the sphere at p")
        s = np.asarray(s, dtype=float)[..., None] if np.ndim(s) else float(s)
        return np.cos(s) * p + np.sin(s) * v

    def distance(self, p, q):
        # 2*atan2(|p-q|, |p+q|) is arccos(p.q) without the loss of accuracy near 0 and pi
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        return 2.0 * np.arctan2(
            np.linalg.norm(p - q, axis=-1), np.linalg.norm(p + q, axis=-1)
        )

    def contains(self, p, tol=ON_MANIFOLD_TOL):
        p = np.asarray(p, dtype=float)
        return bool(np.all(np.abs(np.linalg.norm(p, axis=-1) - 1.0) <= tol))

    def descriptor(self):
        return {"name": "sphere", "dim": int(self.ambient_dim)}


@dataclass(frozen=True)
class FlatTorus(TargetManifold):
    """``R^K`` modulo the lattice spanned by the rows of ``basis``."""

    basis: tuple = field(default=((2 * np.pi, 0.0), (0.0, 2 * np.pi)))

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ConfigError("torus basis must be a square matrix of row vectors")
        if not np.linalg.det(b @ b.T) > 0:
            raise ConfigError("torus lattice basis is singular")
        object.__setattr__(self, "basis", tuple(tuple(map(float, r)) for r in b))

    @property
    def ambient_dim(self):
        return len(self.basis)

    @property
    def _b(self):
        return np.asarray(self.basis, dtype=float)

    def _lattice_coords(self, p):
        p = np.asarray(p, dtype=float)
        c = np.linalg.solve(self._b.T, p.reshape(-1, self.ambient_dim).T).T
        return c.reshape(p.shape)

    def project(self, p):
        p = np.asarray(p, dtype=float)
        c = self._lattice_coords(p)
        canonical = np.all((c >= -1e-12) & (c < 1.0), axis=-1, keepdims=True)
        c = c - np.floor(c)
        c = np.where(c >= 1.0, 0.0, c)
        return np.where(canonical, p, c @ self._b)

    def delta(self, p, q):
        d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
        c = self._lattice_coords(d)
        return (c - np.rint(c)) @ self._b

    def tangent_part(self, u, v):
        return v

    def sff_term(self, u, du_t, du_th):
        return np.zeros(np.broadcast(np.asarray(u), np.asarray(du_t)).shape)

    def geodesic(self, p, v, s):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        s = np.asarray(s, dtype=float)[..., None] if np.ndim(s) else float(s)
        return self.project(p + s * v)

    def distance(self, p, q):
        d = self.delta(p, q)
        best = np.linalg.norm(d, axis=-1)
        # rounding in lattice coordinates is only exact for orthogonal bases
        for shift in itertools.product((-1, 0, 1), repeat=self.ambient_dim):
            if any(shift):
                cand = np.linalg.norm(d + np.asarray(shift, float) @ self._b, axis=-1)
                best = np.minimum(best, cand)
        return best

    def contains(self, p, tol=ON_MANIFOLD_TOL):
        return bool(np.all(np.isfinite(np.asarray(p, dtype=float))))

    def descriptor(self):
        return {"name": "torus", "basis": [list(r) for r in self.basis]}


def make_target(descriptor):
    """Build a target from ``{"name": "sphere", "dim": K}`` or ``{"name": "torus", "basis": rows}``."""
    if isinstance(descriptor, TargetManifold):
        return descriptor
    if not isinstance(descriptor, dict) or "name" not in descriptor:
        raise ConfigError(f"bad target descriptor: {descriptor!r}")
    name = descriptor["name"]
    extra = set(descriptor) - {"name", "dim", "basis"}
    if extra:
        raise ConfigError(f"unknown target keys: {sorted(extra)}")
    if name == "sphere":
        return UnitSphere(int(descriptor.get("dim", 3)))
    if name == "torus":
        if "basis" not in descriptor:
            raise ConfigError("torus target requires 'basis'")
        return FlatTorus(tuple(map(tuple, descriptor["basis"])))
    raise ConfigError(f"unknown target {name!r}")
