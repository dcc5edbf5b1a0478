"""Bubble and neck intervals of a map on a long cylinder, and neck energy accounting.

A unit window whose energy reaches ``epsilon`` marks energy concentration.
Marked windows closer than ``merge_gap`` are merged and padded by
``margin`` into bubble intervals; the complement is the neck region.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import invariants as inv
from .exceptions import MismatchedDecomposition, RangeTooShort, TooFewSamples

DEFAULT_EPSILON = 0.5 * inv.EPS0
CONSTANT_TOL = np.log(1.1)


@dataclass
class Decomposition:
    """Alternating neck and bubble intervals ``I0, J1, I1, ..., JK, IK`` covering the cylinder.

    A neck may be empty (``a == b``) when a bubble reaches the cylinder's end.
    """

    case: str
    necks: list
    bubbles: list
    epsilon: float
    t_range: tuple

    def intervals(self):
        """All intervals in order, as ``(kind, a, b)``."""
        out = [("neck", *self.necks[0])]
        for b, n in zip(self.bubbles, self.necks[1:]):
            out += [("bubble", *b), ("neck", *n)]
        return out

    def to_dict(self):
        return {"case": self.case, "epsilon": self.epsilon, "t_range": list(self.t_range),
                "necks": [list(n) for n in self.necks], "bubbles": [list(b) for b in self.bubbles]}


def _merge(intervals, gap):
    merged = []
    for a, b in intervals:
        if merged and a - merged[-1][1] <= gap:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return merged


def segment(f, epsilon=DEFAULT_EPSILON, merge_gap=1.0, margin=1.0, order=inv.DEFAULT_ORDER):
    """Split the cylinder of ``f`` into bubble and neck intervals.

    Parameters
    ----------
    f : MapField
    epsilon : float
        Unit-window energy (unhalved) at which a window counts as a bubble.
    merge_gap, margin : float
        Marked windows at most ``merge_gap`` apart are merged; every merged
        interval is widened by ``margin`` on both sides (clipped to the grid).

    Raises
    ------
    RangeTooShort
        If the cylinder is shorter than 4.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    g = f.grid
    if g.length < 4:
        raise RangeTooShort("segmentation needs a cylinder of length >= 4")
    anchors, vals = inv.window_profile(f, order=order)
    w = int(round(1.0 / g.h_t))
    marked = [(i, i + w) for i in np.flatnonzero(vals >= epsilon)]
    i0 = g.row_index(g.t_min)
    span = (g.t_min, g.t_max)
    if not marked:
        return Decomposition("AllNeck", [span], [], float(epsilon), span)

    pad = int(np.ceil(margin / g.h_t - 1e-9))
    gap = int(np.floor(merge_gap / g.h_t + 1e-9))
    rows = _merge([(a + i0, b + i0) for a, b in marked], gap)
    rows = _merge([(max(a - pad, 0), min(b + pad, g.n_t - 1)) for a, b in rows], 0)
    t = g.t
    bubbles = [(float(t[a]), float(t[b])) for a, b in rows]
    edges = [g.t_min] + [x for b in bubbles for x in b] + [g.t_max]
    necks = [(float(edges[k]), float(edges[k + 1])) for k in range(0, len(edges), 2)]
    return Decomposition("Mixed", necks, bubbles, float(epsilon), span)


@dataclass
class NeckIdentityReport:
    """Neck totals against the predictions from ``alpha`` of the whole cylinder."""

    total_neck_energy: float
    total_neck_length: float
    neck_span: float
    alpha: complex
    predicted_energy: float
    predicted_length: float
    residual_energy: float
    residual_length: float
    bound_checks: list = field(default_factory=list)
    neck_alphas: list = field(default_factory=list)
    alpha_drift: float = 0.0

    @property
    def alpha_agreement(self):
        """Largest ``|alpha(neck) - alpha|`` over the necks (0 if there are none)."""
        return max((abs(a - self.alpha) for a in self.neck_alphas), default=0.0)

    @property
    def bounds_pass(self):
        return all(c.passed for c in self.bound_checks)

    def to_dict(self):
        return {
            "total_neck_energy": self.total_neck_energy, "total_neck_length": self.total_neck_length,
            "neck_span": self.neck_span, "alpha_re": self.alpha.real, "alpha_im": self.alpha.imag,
            "alpha_drift": self.alpha_drift,
            "predicted_energy": self.predicted_energy, "predicted_length": self.predicted_length,
            "residual_energy": self.residual_energy, "residual_length": self.residual_length,
            "neck_alphas": [[a.real, a.imag] for a in self.neck_alphas],
            "bound_checks": [c.to_dict() for c in self.bound_checks],
        }


def _relative(value, prediction):
    if prediction > 0:
        return abs(value - prediction) / prediction
    return 0.0 if value == 0 else float("inf")


def _check_tiling(f, d):
    g = f.grid
    tol = 1e-9 * max(1.0, abs(g.t_max), abs(g.t_min))
    iv = d.intervals()
    ok = (len(d.necks) == len(d.bubbles) + 1
          and abs(iv[0][1] - g.t_min) <= tol and abs(iv[-1][2] - g.t_max) <= tol
          and all(abs(p[2] - q[1]) <= tol for p, q in zip(iv, iv[1:]))
          and all(a <= b + tol for _, a, b in iv))
    if not ok:
        raise MismatchedDecomposition("intervals do not tile the field's cylinder")


def neck_identity(f, d, order=inv.DEFAULT_ORDER):
    """Compare the neck energy and length with ``|Re a| S / 2`` and ``sqrt|Re a| S``.

    ``S`` is the total neck length and ``a`` is ``alpha`` of the whole
    cylinder.  Necks spanning fewer than two grid rows are skipped.

    Raises
    ------
    MismatchedDecomposition
        If ``d`` does not tile the cylinder of ``f``.
    """
    _check_tiling(f, d)
    g = f.grid
    full = inv.alpha(f, order=order)
    a = full.alpha
    E = L = span = 0.0
    checks, neck_alphas = [], []
    for t_a, t_b in d.necks:
        i_a, i_b = g.row_range(t_a, t_b)
        if i_b - i_a < 1:
            continue
        E += inv.energy(f, t_a, t_b, order)
        L += inv.average_length(f, t_a, t_b, order)
        span += (i_b - i_a) * g.h_t
        checks.append(inv.check_neck_bounds(f, t_a, t_b, order=order))
        if min(i_b, g.n_t - 2) >= max(i_a, 1):
            neck_alphas.append(inv.alpha(f, t_a, t_b, order).alpha)
    pe = 0.5 * abs(a.real) * span
    pl = np.sqrt(abs(a.real)) * span
    return NeckIdentityReport(E, L, span, a, pe, pl, _relative(E, pe), _relative(L, pl),
                              checks, neck_alphas, full.drift)


# --- degenerating families ----------------------------------------------------------


def trend(x, y, tol=CONSTANT_TOL):
    """Label how ``y`` behaves as ``x`` grows: ``"zero"``, ``"constant"`` or ``"infinity"``.

    A least-squares line is fitted to ``log y`` against ``log x``; the trend is
    constant when the fitted change over the sampled range stays within
    ``tol`` (10% by default).  All-zero data is ``"zero"``.

    Returns
    -------
    label : str
    slope : float
    """
    x = np.asarray(x, float)
    y = np.abs(np.asarray(y, float))
    if np.all(y == 0):
        return "zero", float("-inf")
    y = np.maximum(y, 1e-300)
    lx = np.log(x)
    slope = float(np.polyfit(lx, np.log(y), 1)[0])
    if abs(slope * (lx.max() - lx.min())) <= tol:
        return "constant", slope
    return ("zero" if slope < 0 else "infinity"), slope


REGIMES = {("constant", "infinity"): 1, ("zero", "infinity"): 2,
           ("zero", "constant"): 3, ("zero", "zero"): 4}


@dataclass
class CompactnessVerdict:
    """Regime of a degenerating family and the two compactness verdicts.

    ``regime`` is 1 to 4, or ``None`` for a trend pair outside the four cases.
    """

    regime: object
    energy_trend: str
    length_trend: str
    energy_slope: float
    length_slope: float
    w12: bool
    c0: bool

    def to_dict(self):
        return {"regime": self.regime, "energy_trend": self.energy_trend,
                "length_trend": self.length_trend, "energy_slope": self.energy_slope,
                "length_slope": self.length_slope, "w12": self.w12, "c0": self.c0}


def classify_compactness(l_values, reports, tol=CONSTANT_TOL):
    """Regime of a family from ``|Re a_n| pi^2 / l_n`` and ``sqrt|Re a_n| pi^2 / l_n``.

    Energy converges modulo bubbles iff the first quantity tends to zero;
    the neck images shrink to points iff the second does.

    Parameters
    ----------
    l_values : sequence of float
        Core lengths, any order (sorted internally).
    reports : sequence of NeckIdentityReport
        One per core length.

    Raises
    ------
    TooFewSamples
        With fewer than three members.
    """
    if len(l_values) != len(reports):
        raise ValueError("need one report per core length")
    if len(l_values) < 3:
        raise TooFewSamples("classification needs at least three family members")
    order = np.argsort(-np.asarray(l_values, float))
    l = np.asarray(l_values, float)[order]
    re = np.array([abs(reports[k].alpha.real) for k in order])
    e_label, e_slope = trend(1 / l, re * np.pi**2 / l, tol)
    l_label, l_slope = trend(1 / l, np.sqrt(re) * np.pi**2 / l, tol)
    return CompactnessVerdict(REGIMES.get((e_label, l_label)), e_label, l_label,
                              e_slope, l_slope, e_label == "zero", l_label == "zero")
