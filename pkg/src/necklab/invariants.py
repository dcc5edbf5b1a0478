"""Analytic quantities of maps on cylinders and falsifiable checks of the neck lemmas.

Everything here is a pure function of a :class:`~necklab.grid.MapField`.
Derivatives come from :func:`~necklab.grid.partials`; ``order=4`` is the
default because the Hopf slice integral of a conformal map is only small
enough with the fourth-order stencil (see ``alpha``).

Checks return a :class:`CheckReport`, a small tree that serialises to
plain JSON via :meth:`CheckReport.to_dict`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import EmptyRange, OutOfCollar, RangeTooShort
from .grid import partials, row_integrals, trapezoid_rows

DEFAULT_ORDER = 4
EPS0 = 0.5
EPS1 = 0.1
EPS2 = 0.5
C_CONVEXITY = 10.0
C_SMALL_ENERGY = 10.0
EXACT_OSC_NODES = 4096


# --- result types -----------------------------------------------------------------


@dataclass
class HopfField:
    """Hopf density ``|u_t|^2 - |u_th|^2 - 2i u_t.u_th`` on the interior rows.

    ``values[k]`` belongs to grid row ``rows[k]``.
    """

    values: np.ndarray
    rows: np.ndarray

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass
class AlphaResult:
    """Slice integrals of the Hopf density and their median.

    ``drift`` is the largest deviation of a slice value from ``alpha``.
    """

    alpha: complex
    per_slice: np.ndarray
    drift: float
    t: np.ndarray

    def to_dict(self):
        return {"alpha_re": self.alpha.real, "alpha_im": self.alpha.imag, "drift": self.drift,
                "n_slices": int(self.per_slice.size)}


@dataclass
class ThetaProfile:
    t: np.ndarray
    values: np.ndarray


@dataclass
class Oscillation:
    """Largest target distance between two image points; ``exact`` says whether all pairs were used."""

    value: float
    exact: bool
    n_points: int


@dataclass
class NeckMetrics:
    energy: float
    avg_length: float
    oscillation: float
    window_energy: float
    interval: tuple

    def to_dict(self):
        return {"energy": self.energy, "avg_length": self.avg_length,
                "oscillation": self.oscillation, "window_energy": self.window_energy,
                "t_a": self.interval[0], "t_b": self.interval[1]}


@dataclass
class CheckReport:
    """Outcome of one inequality check, or a group of them.

    A check whose hypothesis does not hold is reported with
    ``precondition_met=False`` and ``passed=True``: nothing is claimed.
    """

    name: str
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    slack: Optional[float] = None
    passed: bool = True
    precondition_met: bool = True
    children: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @classmethod
    def inequality(cls, name, lhs, rhs, slack, precondition_met=True, **info):
        if not precondition_met:
            return cls(name, float(lhs), None, None, True, False, info=info)
        lhs, rhs, slack = float(lhs), float(rhs), float(slack)
        return cls(name, lhs, rhs, slack, bool(lhs <= rhs + slack), True, info=info)

    @classmethod
    def group(cls, name, children, **info):
        return cls(name, passed=all(c.passed for c in children),
                   precondition_met=all(c.precondition_met for c in children),
                   children=list(children), info=info)

    def violations(self):
        """Leaf checks that ran and failed."""
        if self.children:
            return [v for c in self.children for v in c.violations()]
        return [] if self.passed else [self]

    def to_dict(self):
        d = {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
             "pass": self.passed, "precondition_met": self.precondition_met}
        if self.info:
            d["info"] = {k: _plain(v) for k, v in self.info.items()}
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


# --- helpers ----------------------------------------------------------------------


def _rows(f, t_a, t_b):
    i_a, i_b = f.grid.row_range(t_a, t_b)
    if i_b - i_a < 1:
        raise EmptyRange(f"range [{t_a}, {t_b}] covers fewer than two grid rows")
    return i_a, i_b


def _densities(f, order):
    du_t, du_th = partials(f, order=order)
    return np.sum(du_t * du_t, axis=-1), np.sum(du_th * du_th, axis=-1), np.sum(du_t * du_th, axis=-1)


def _span(f, i_a, i_b):
    return (i_b - i_a) * f.grid.h_t


# --- quantities -------------------------------------------------------------------


def energy(f, t_a=None, t_b=None, order=DEFAULT_ORDER):
    """Dirichlet energy ``1/2 * int(|u_t|^2 + |u_th|^2)`` over ``[t_a, t_b] x S^1``.

    Raises
    ------
    EmptyRange
    """
    i_a, i_b = _rows(f, t_a, t_b)
    tt, thth, _ = _densities(f, order)
    rows = row_integrals(tt + thth)[i_a:i_b + 1]
    return 0.5 * trapezoid_rows(rows, f.grid.h_t)


def energy_density(f, order=DEFAULT_ORDER):
    """Pointwise ``|du|^2`` (not halved)."""
    tt, thth, _ = _densities(f, order)
    return tt + thth


def theta_profile(f, order=DEFAULT_ORDER):
    """``Theta(t_i) = int |u_th|^2 dtheta`` for every row."""
    _, thth, _ = _densities(f, order)
    return ThetaProfile(f.grid.t.copy(), row_integrals(thth))


def hopf(f, order=DEFAULT_ORDER):
    """Hopf density at every interior node."""
    tt, thth, tth = _densities(f, order)
    phi = (tt - thth) - 2j * tth
    return HopfField(phi[1:-1], np.arange(1, f.grid.n_t - 1))


def hopf_dbar(f, order=DEFAULT_ORDER):
    """``1/2 (d_t + i d_th)`` of the Hopf density by central differences.

    Zero for harmonic maps in the continuum; returned on rows ``2..n_t-3``.
    """
    phi = hopf(f, order).values
    g = f.grid
    d_t = (phi[2:] - phi[:-2]) / (2 * g.h_t)
    d_th = (np.roll(phi, -1, axis=1) - np.roll(phi, 1, axis=1))[1:-1] / (2 * g.h_th)
    return 0.5 * (d_t + 1j * d_th)


def alpha(f, t_a=None, t_b=None, order=DEFAULT_ORDER):
    """Slice integrals ``int phi dtheta`` over the interior rows of a range.

    The aggregate is the componentwise median, which ignores the few rows
    next to the Dirichlet boundary where the stencil is one-sided.
    """
    i_a, i_b = _rows(f, t_a, t_b)
    lo, hi = max(i_a, 1), min(i_b, f.grid.n_t - 2)
    if hi < lo:
        raise EmptyRange("range contains no interior rows")
    h = hopf(f, order)
    per_slice = row_integrals(h.values)[lo - 1:hi]
    a = complex(np.median(per_slice.real), np.median(per_slice.imag))
    drift = float(np.max(np.abs(per_slice - a)))
    return AlphaResult(a, per_slice, drift, f.grid.t[lo:hi + 1].copy())


def average_length(f, t_a=None, t_b=None, order=DEFAULT_ORDER):
    """``int (int |u_t|^2 dtheta)^(1/2) dt`` over a range."""
    i_a, i_b = _rows(f, t_a, t_b)
    tt, _, _ = _densities(f, order)
    rows = np.sqrt(np.maximum(row_integrals(tt)[i_a:i_b + 1], 0.0))
    return trapezoid_rows(rows, f.grid.h_t)


def _pairwise_max(target, pts, chunk=256):
    best = 0.0
    for s in range(0, len(pts), chunk):
        d = target.distance(pts[s:s + chunk, None, :], pts[None, :, :])
        best = max(best, float(np.max(d)))
    return best


def oscillation(f, t_a=None, t_b=None, max_exact=EXACT_OSC_NODES):
    """Largest distance in the target between image points of ``[t_a, t_b] x S^1``.

    All pairs are compared when the range has at most ``max_exact`` nodes;
    otherwise a deterministic subset is used: evenly spaced rows (always
    including both end rows), each with evenly spaced columns.
    """
    i_a, i_b = _rows(f, t_a, t_b)
    block = f.values[i_a:i_b + 1]
    n_rows, n_th = block.shape[:2]
    if n_rows * n_th <= max_exact:
        pts = block.reshape(-1, block.shape[-1])
        return Oscillation(_pairwise_max(f.target, pts), True, len(pts))
    cols = np.unique(np.linspace(0, n_th - 1, min(n_th, max_exact // 4)).round().astype(int))
    k = max(2, max_exact // len(cols))
    rows = np.unique(np.linspace(0, n_rows - 1, min(k, n_rows)).round().astype(int))
    pts = block[rows][:, cols].reshape(-1, block.shape[-1])
    return Oscillation(_pairwise_max(f.target, pts), False, len(pts))


def window_profile(f, t_a=None, t_b=None, order=DEFAULT_ORDER, width=1.0):
    """Unhalved energy ``int |du|^2`` of every row-anchored window of ``width``.

    Returns ``(anchors, values)``: window ``k`` covers ``[anchors[k], anchors[k] + width]``
    with its right end snapped to a grid row.

    Raises
    ------
    RangeTooShort
        If the range is shorter than ``width``.
    """
    g = f.grid
    i_a, i_b = g.row_range(t_a, t_b)
    w = int(round(width / g.h_t))
    if (i_b - i_a) * g.h_t < width - 0.5 * g.h_t or w < 1 or i_b - i_a < w:
        raise RangeTooShort(f"range shorter than a window of width {width}")
    rows = row_integrals(energy_density(f, order))[i_a:i_b + 1]
    # trapezoid over every window of w+1 rows via a running sum
    c = np.concatenate([[0.0], np.cumsum(rows)])
    sums = c[w + 1:] - c[:-(w + 1)]
    vals = g.h_t * (sums - 0.5 * (rows[:-w] + rows[w:]))
    return g.t[i_a:i_b - w + 1].copy(), vals


def window_energy(f, t_a=None, t_b=None, order=DEFAULT_ORDER):
    """Largest unit-window energy ``sup_t int_[t, t+1] |du|^2`` (not halved)."""
    return float(np.max(window_profile(f, t_a, t_b, order)[1]))


def sup_gradient(f, t_a=None, t_b=None, order=DEFAULT_ORDER):
    """``sup |du|`` over the nodes of a range."""
    i_a, i_b = _rows(f, t_a, t_b)
    return float(np.sqrt(np.max(energy_density(f, order)[i_a:i_b + 1])))


def neck_metrics(f, t_a=None, t_b=None, order=DEFAULT_ORDER):
    """Energy, average length, oscillation and window energy of one range."""
    i_a, i_b = _rows(f, t_a, t_b)
    t0, t1 = f.grid.t[i_a], f.grid.t[i_b]
    try:
        w = window_energy(f, t0, t1, order)
    except RangeTooShort:
        w = 2 * energy(f, t0, t1, order)
    return NeckMetrics(energy(f, t0, t1, order), average_length(f, t0, t1, order),
                       oscillation(f, t0, t1).value, w, (float(t0), float(t1)))


# --- lemma checks -------------------------------------------------------------------


def _longest_run(mask):
    best, start = (0, -1), None
    for i, m in enumerate(np.append(mask, False)):
        if m and start is None:
            start = i
        elif not m and start is not None:
            if i - start > best[0]:
                best = (i - start, start)
            start = None
    return best[1], best[1] + best[0] - 1


def check_theta_convexity(f, eps1=EPS1, C=C_CONVEXITY, order=DEFAULT_ORDER):
    """Discrete ``Theta'' >= Theta`` and the integral bound it implies, where the gradient is small.

    Rows qualify when ``sup_theta |du| <= eps1``; the check runs on the
    longest contiguous run of qualifying rows (at least three).  On that run
    ``[T1, T2]``:

    * ``Theta - Theta'' <= C h_t^2 max Theta`` at every inner row, and
    * ``int Theta^nu <= 2 (Theta(T1)^nu + Theta(T2)^nu) / nu`` for ``nu`` in ``{1, 1/2}``.
    """
    g = f.grid
    row_sup = np.sqrt(np.max(energy_density(f, order), axis=1))
    i0, i1 = _longest_run(row_sup <= eps1)
    names = ["theta_convexity", "theta_integral_nu1", "theta_integral_nu_half"]
    if i0 < 0 or i1 - i0 < 2:
        kids = [CheckReport(n, precondition_met=False) for n in names]
        return CheckReport.group("lemma_theta", kids, eps1=eps1, rows=None)
    theta = theta_profile(f, order).values[i0:i1 + 1]
    h = g.h_t
    second = (theta[2:] - 2 * theta[1:-1] + theta[:-2]) / h**2
    gap = theta[1:-1] - second
    k = int(np.argmax(gap))
    slack = C * h**2 * float(np.max(theta))
    kids = [CheckReport.inequality(names[0], theta[1:-1][k], second[k], slack,
                                   worst_t=float(g.t[i0 + 1 + k]),
                                   n_violations=int(np.sum(gap > slack)))]
    for nu, name in ((1.0, names[1]), (0.5, names[2])):
        lhs = trapezoid_rows(np.maximum(theta, 0.0) ** nu, h)
        rhs = 2 * (max(theta[0], 0.0) ** nu + max(theta[-1], 0.0) ** nu) / nu
        kids.append(CheckReport.inequality(name, lhs, rhs, 1e-6 * (1 + abs(rhs))))
    return CheckReport.group("lemma_theta", kids, eps1=eps1,
                             t_range=[float(g.t[i0]), float(g.t[i1])])


def check_neck_bounds(f, t_a=None, t_b=None, eps2=EPS2, C=C_SMALL_ENERGY, order=DEFAULT_ORDER):
    """The neck estimates in terms of ``alpha`` and the small-energy bounds on ``Theta``.

    With ``Lam`` the (snapped) range length and ``Theta`` integrated over it:

    * ``|E - |Re a| Lam / 2| <= int Theta``
    * ``|L - sqrt|Re a| Lam| <= int sqrt(Theta)``
    * ``|Im a| Lam <= 2 sqrt(2E) sqrt(int Theta)``
    * ``int Theta <= C w`` and ``int sqrt(Theta) <= C sqrt(w)``, only when the
      window energy ``w`` is at most ``eps2``.

    Each inequality carries slack ``1e-6 * (1 + max(|lhs|, |rhs|))``.
    """
    i_a, i_b = _rows(f, t_a, t_b)
    t0, t1 = f.grid.t[i_a], f.grid.t[i_b]
    lam = _span(f, i_a, i_b)
    h = f.grid.h_t
    E = energy(f, t0, t1, order)
    L = average_length(f, t0, t1, order)
    a = alpha(f, t0, t1, order).alpha
    theta = np.maximum(theta_profile(f, order).values[i_a:i_b + 1], 0.0)
    int_theta = trapezoid_rows(theta, h)
    int_sqrt = trapezoid_rows(np.sqrt(theta), h)

    def ineq(name, lhs, rhs, pre=True, **info):
        slack = 1e-6 * (1 + max(abs(lhs), abs(rhs))) if pre else None
        return CheckReport.inequality(name, lhs, rhs, slack, pre, **info)

    kids = [
        ineq("energy_vs_alpha", abs(E - 0.5 * abs(a.real) * lam), int_theta),
        ineq("length_vs_alpha", abs(L - np.sqrt(abs(a.real)) * lam), int_sqrt),
        ineq("imag_alpha", abs(a.imag) * lam, 2 * np.sqrt(2 * E) * np.sqrt(int_theta)),
    ]
    try:
        w = window_energy(f, t0, t1, order)
    except RangeTooShort:
        w = float("inf")
    small = bool(w <= eps2)
    kids.append(ineq("theta_small_energy", int_theta, C * w if small else None, small, omega=w))
    kids.append(ineq("sqrt_theta_small_energy", int_sqrt, C * np.sqrt(w) if small else None,
                     small, omega=w))
    return CheckReport.group("neck_bounds", kids, alpha=complex(a), t_a=float(t0), t_b=float(t1),
                             energy=E, avg_length=L)


def check_osc_bound(f, t_a=None, t_b=None, order=DEFAULT_ORDER):
    """``osc <= 4 pi sup|du| + L / sqrt(2 pi)`` with slack ``1e-6 * rhs``."""
    i_a, i_b = _rows(f, t_a, t_b)
    t0, t1 = f.grid.t[i_a], f.grid.t[i_b]
    osc = oscillation(f, t0, t1)
    rhs = 4 * np.pi * sup_gradient(f, t0, t1, order) + average_length(f, t0, t1, order) / np.sqrt(2 * np.pi)
    return CheckReport.inequality("oscillation", osc.value, rhs, 1e-6 * rhs, exact=osc.exact)


def lemma_suite(f, t_a=None, t_b=None, eps1=EPS1, eps2=EPS2, order=DEFAULT_ORDER):
    """Every lemma check on one range, grouped in one report."""
    return CheckReport.group("lemma_suite", [
        check_theta_convexity(f, eps1, order=order),
        check_neck_bounds(f, t_a, t_b, eps2, order=order),
        check_osc_bound(f, t_a, t_b, order),
    ])


def conformal_energy_invariance(f, collar, order=DEFAULT_ORDER):
    """Relative gap between the flat energy and the energy in the collar metric.

    In the collar metric ``lam(t)^2 (dt^2 + dtheta^2)`` the squared gradient
    is ``|du|^2 / lam^2`` and the area element is ``lam^2 dt dtheta``; both
    are evaluated explicitly, so the result measures rounding only.

    Raises
    ------
    OutOfCollar
        If the grid reaches outside the collar cylinder.
    """
    from .collar import conformal_factor

    g = f.grid
    lo, hi = collar.t_lo, collar.t_hi
    if g.t_min < lo - 1e-12 or g.t_max > hi + 1e-12:
        raise OutOfCollar(f"grid [{g.t_min}, {g.t_max}] outside collar [{lo}, {hi}]")
    dens = energy_density(f, order)
    lam2 = conformal_factor(collar.l, np.clip(g.t, lo, hi))[:, None] ** 2
    e_flat = 0.5 * trapezoid_rows(row_integrals(dens), g.h_t)
    e_hyp = 0.5 * trapezoid_rows(row_integrals((dens / lam2) * lam2), g.h_t)
    if e_flat == 0.0:
        return 0.0 if e_hyp == 0.0 else float("inf")
    return abs(e_flat - e_hyp) / e_flat
