"""Flat cylinder grids ``[t_min, t_max] x S^1`` and discrete calculus on them.

Nodes are indexed ``[i, j]`` with ``i`` along ``t`` (endpoints included) and
``j`` along ``theta`` (periodic, ``theta_j = j * 2 pi / n_th``).  Integrals
use the rectangle rule in ``theta`` and the trapezoid rule in ``t``;
subcylinder endpoints snap to the nearest grid row.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, EmptyRange
from .manifold import TargetManifold, make_target

FIELD_TOL = 1e-8
FORMAT_TAG = "necklab-mapfield v1"


@dataclass(frozen=True)
class CylinderGrid:
    t_min: float
    t_max: float
    n_t: int
    n_th: int

    def __post_init__(self):
        if not self.t_max - self.t_min > 2:
            raise ConfigError("cylinder must be longer than 2 (t_max - t_min > 2)")
        if int(self.n_t) < 8 or int(self.n_th) < 8:
            raise ConfigError("need n_t >= 8 and n_th >= 8")
        object.__setattr__(self, "n_t", int(self.n_t))
        object.__setattr__(self, "n_th", int(self.n_th))
        object.__setattr__(self, "t_min", float(self.t_min))
        object.__setattr__(self, "t_max", float(self.t_max))

    @property
    def h_t(self):
        return (self.t_max - self.t_min) / (self.n_t - 1)

    @property
    def h_th(self):
        return 2 * np.pi / self.n_th

    @property
    def length(self):
        return self.t_max - self.t_min

    @property
    def t(self):
        return self.t_min + self.h_t * np.arange(self.n_t)

    @property
    def theta(self):
        return self.h_th * np.arange(self.n_th)

    def mesh(self):
        """``(T, TH)`` arrays of shape ``(n_t, n_th)``."""
        return np.meshgrid(self.t, self.theta, indexing="ij")

    def row_index(self, t):
        """Index of the grid row nearest to ``t`` (clipped to the grid)."""
        i = int(np.rint((t - self.t_min) / self.h_t))
        return min(max(i, 0), self.n_t - 1)

    def row_range(self, t_a=None, t_b=None):
        """Snapped inclusive row indices ``(i_a, i_b)`` of ``[t_a, t_b]``."""
        i_a = 0 if t_a is None else self.row_index(t_a)
        i_b = self.n_t - 1 if t_b is None else self.row_index(t_b)
        return i_a, i_b


class MapField:
    """A map from a cylinder grid into a target, stored in ambient coordinates.

    Parameters
    ----------
    grid : CylinderGrid
    values : array-like of shape (n_t, n_th, K)
    target : TargetManifold
    check : bool, default=True
        Validate finiteness and the on-manifold tolerance ``1e-8``.
    """

    def __init__(self, grid, values, target, check=True):
        self.grid = grid
        self.target = target
        self.values = np.ascontiguousarray(values, dtype=float)
        if check:
            self._validate()

    def _validate(self):
        g = self.grid
        shape = (g.n_t, g.n_th, self.target.ambient_dim)
        if self.values.shape != shape:
            raise ValueError(f"values have shape {self.values.shape}, expected {shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("map field contains non-finite entries")
        if not self.target.contains(self.values, tol=FIELD_TOL):
            raise ValueError("map field leaves the target manifold")

    def copy(self, values=None):
        return MapField(self.grid, self.values.copy() if values is None else values,
                        self.target, check=False)

    def __repr__(self):
        g = self.grid
        return (f"MapField(t=[{g.t_min:g}, {g.t_max:g}], n_t={g.n_t}, n_th={g.n_th}, "
                f"target={self.target.descriptor()['name']})")


def partials(f, order=2):
    """Finite-difference ``(u_t, u_theta)`` at every node.

    Central differences in both directions, periodic in ``theta``.  The two
    boundary rows use the one-sided second-order stencil in ``t``.  With
    ``order=4`` the five-point central stencil is used wherever it fits;
    rows adjacent to the boundary then fall back to second order.

    Returns
    -------
    du_t, du_th : ndarray of shape (n_t, n_th, K)
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    u, m, g = f.values, f.target, f.grid
    ht, hth = g.h_t, g.h_th

    if order == 2:
        du_th = (m.delta(u, np.roll(u, -1, axis=1)) - m.delta(u, np.roll(u, 1, axis=1))) / (2 * hth)
    else:
        du_th = (
            8 * (m.delta(u, np.roll(u, -1, axis=1)) - m.delta(u, np.roll(u, 1, axis=1)))
            - (m.delta(u, np.roll(u, -2, axis=1)) - m.delta(u, np.roll(u, 2, axis=1)))
        ) / (12 * hth)

    du_t = np.empty_like(u)
    c = u[1:-1]
    du_t[1:-1] = (m.delta(c, u[2:]) - m.delta(c, u[:-2])) / (2 * ht)
    if order == 4 and g.n_t >= 5:
        c = u[2:-2]
        du_t[2:-2] = (
            8 * (m.delta(c, u[3:-1]) - m.delta(c, u[1:-3]))
            - (m.delta(c, u[4:]) - m.delta(c, u[:-4]))
        ) / (12 * ht)
    du_t[0] = (4 * m.delta(u[0], u[1]) - m.delta(u[0], u[2])) / (2 * ht)
    du_t[-1] = -(4 * m.delta(u[-1], u[-2]) - m.delta(u[-1], u[-3])) / (2 * ht)
    return du_t, du_th


def slice_integral(g, i_t, h_th=None):
    """Rectangle-rule integral ``sum_j g[i_t, j] * h_th`` over the circle at row ``i_t``."""
    g = np.asarray(g)
    n_th = g.shape[1]
    if not 0 <= i_t < g.shape[0]:
        raise IndexError(f"row {i_t} out of range")
    h = 2 * np.pi / n_th if h_th is None else h_th
    return np.sum(g[i_t]) * h


def row_integrals(g):
    """``slice_integral`` of every row, as one array."""
    g = np.asarray(g)
    return np.sum(g, axis=1) * (2 * np.pi / g.shape[1])


def trapezoid_rows(values, h_t):
    """Trapezoid rule over equally spaced row values (shape ``(n,)``)."""
    values = np.asarray(values)
    if values.shape[0] < 2:
        raise EmptyRange("fewer than two rows in range")
    return h_t * (np.sum(values) - 0.5 * (values[0] + values[-1]))


def integrate(grid, g, t_a=None, t_b=None):
    """Integral of the per-node scalar ``g`` over ``[t_a, t_b] x S^1``.

    Endpoints snap to the nearest grid rows.

    Raises
    ------
    EmptyRange
        If fewer than two rows fall in the range.
    """
    i_a, i_b = grid.row_range(t_a, t_b)
    if i_b - i_a < 1:
        raise EmptyRange(f"range [{t_a}, {t_b}] covers fewer than two grid rows")
    return trapezoid_rows(row_integrals(np.asarray(g)[i_a:i_b + 1]), grid.h_t)


def sample_field(grid, target, fn):
    """Evaluate ``fn(T, TH) -> (n_t, n_th, K)`` on the grid and wrap it as a MapField."""
    T, TH = grid.mesh()
    return MapField(grid, target.project(fn(T, TH)), target)


# --- serialization -------------------------------------------------------------


def _target_line(target):
    d = target.descriptor()
    if d["name"] == "sphere":
        return f"target sphere {d['dim']}"
    flat = " ".join(repr(float(x)) for row in d["basis"] for x in row)
    return f"target torus {len(d['basis'])} {flat}"


def dump_field(f, fp):
    """Write ``f`` in the text MapField format (see README for the layout)."""
    g = f.grid
    K = f.target.ambient_dim
    fp.write(f"# {FORMAT_TAG}\n")
    fp.write(f"t_min {g.t_min!r}\nt_max {g.t_max!r}\nn_t {g.n_t}\nn_th {g.n_th}\nK {K}\n")
    fp.write(_target_line(f.target) + "\n")
    fp.write("data\n")
    buf = io.StringIO()
    np.savetxt(buf, f.values.reshape(-1, K), fmt="%.17g")
    fp.write(buf.getvalue())


def save_field(f, path):
    path = Path(path)
    with path.open("w", encoding="ascii", newline="\n") as fp:
        dump_field(f, fp)
    return path


def load_field(path):
    """Read a MapField written by :func:`save_field`."""
    with Path(path).open("r", encoding="ascii") as fp:
        first = fp.readline().strip()
        if first != f"# {FORMAT_TAG}":
            raise ValueError(f"not a map field file (header {first!r})")
        header = {}
        for line in fp:
            line = line.strip()
            if line == "data":
                break
            key, _, rest = line.partition(" ")
            header[key] = rest
        data = np.loadtxt(fp, dtype=float, ndmin=2)
    parts = header["target"].split()
    if parts[0] == "sphere":
        target = make_target({"name": "sphere", "dim": int(parts[1])})
    else:
        k = int(parts[1])
        basis = np.array([float(x) for x in parts[2:]]).reshape(k, k)
        target = make_target({"name": "torus", "basis": basis.tolist()})
    grid = CylinderGrid(float(header["t_min"]), float(header["t_max"]),
                        int(header["n_t"]), int(header["n_th"]))
    K = int(header["K"])
    return MapField(grid, data.reshape(grid.n_t, grid.n_th, K), target)


__all__ = [
    "CylinderGrid", "MapField", "TargetManifold", "partials", "slice_integral",
    "row_integrals", "integrate", "trapezoid_rows", "sample_field",
    "save_field", "load_field", "dump_field",
]
