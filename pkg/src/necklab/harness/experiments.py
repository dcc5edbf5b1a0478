"""Experiment runners: one solve with every check, segmentation, collar tables and degenerating families."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import invariants as inv
from ..collar import CollarSpec, subcollar
from ..decompose import classify_compactness, neck_identity, segment
from ..exceptions import ConfigError, NecklabError, RangeTooShort
from ..fields import (bubble_field, constant_field, equator_wrap, geodesic_ansatz,
                      neck_bubble_field, small_oscillation_problem)
from ..grid import CylinderGrid
from ..manifold import FlatTorus, make_target
from ..solver import BoundaryData, initial_guess, solve

logger = logging.getLogger(__name__)

RECORD_FIELDS = (
    "l", "cylinder_length", "n_t", "slope", "alpha_re", "alpha_im", "alpha_drift",
    "E_neck", "L_neck", "neck_span", "neck_fraction",
    "pred_energy", "pred_length", "im_diag", "pred_energy_neck", "pred_length_neck",
    "identity_energy", "identity_length", "residual_energy", "residual_length",
    "bounds_pass", "case", "iterations", "final_residual", "converged", "status",
)


def build_field(cfg):
    """Initial map described by ``cfg.field`` on ``cfg.grid``."""
    g = CylinderGrid(cfg.grid.t_min, cfg.grid.t_max, cfg.grid.n_t, cfg.grid.n_th)
    target = make_target(cfg.target)
    fs = cfg.field
    if isinstance(target, FlatTorus):
        if fs.type != "geodesic":
            raise ConfigError("torus targets support only field.type 'geodesic'")
        v = np.zeros(target.ambient_dim)
        v[0] = 1.0
        f = geodesic_ansatz(g, fs.slope, target, p=np.zeros(target.ambient_dim), v=v)
    elif target.ambient_dim != 3:
        raise ConfigError("built-in fields need the sphere in R^3")
    elif fs.type == "geodesic":
        f = geodesic_ansatz(g, fs.slope, target)
    elif fs.type == "perturbed":
        f = small_oscillation_problem(g, fs.slope, fs.amplitude, np.random.default_rng(cfg.seed))
    elif fs.type == "constant":
        f = constant_field(g)
    elif fs.type == "bubble":
        f = bubble_field(g, fs.center)
    elif fs.type == "neck_bubble":
        f = neck_bubble_field(g, fs.slope, fs.center)
    else:
        f = equator_wrap(g)
    if fs.relax_from == "interpolation":
        f = initial_guess(g, f.target, BoundaryData.from_field(f))
    return f


def field_summary(f, cfg=None):
    """Every invariant of ``f`` plus the grouped lemma checks, as plain data."""
    eps1 = inv.EPS1 if cfg is None else cfg.checks.eps1
    eps2 = inv.EPS2 if cfg is None else cfg.checks.eps2
    a = inv.alpha(f)
    theta = inv.theta_profile(f).values
    try:
        omega = inv.window_energy(f)
    except RangeTooShort:
        omega = None
    osc = inv.oscillation(f)
    checks = inv.lemma_suite(f, eps1=eps1, eps2=eps2)
    return {
        "energy": inv.energy(f),
        "avg_length": inv.average_length(f),
        "alpha": a.to_dict(),
        "window_energy": omega,
        "oscillation": {"value": osc.value, "exact": osc.exact, "n_points": osc.n_points},
        "theta": {"max": float(np.max(theta)), "lower": float(theta[0]), "upper": float(theta[-1])},
        "hopf_max_abs": inv.hopf(f).max_abs,
        "checks": checks.to_dict(),
        "checks_pass": checks.passed,
    }


def _decomposition_summary(f, cfg):
    c = cfg.checks
    d = segment(f, c.epsilon, c.merge_gap, c.margin)
    r = neck_identity(f, d)
    return {"decomposition": d.to_dict(), "neck_identity": r.to_dict(),
            "neck_bounds_pass": r.bounds_pass}


def run_single(cfg):
    """Solve from the configured initial data and evaluate everything on the result.

    Returns
    -------
    report : dict
    field : MapField
    """
    f0 = build_field(cfg)
    f, rep = solve(f0, cfg=cfg.solve_config())
    report = {"kind": "single", "solve": rep.to_dict(), "invariants": field_summary(f, cfg)}
    if f.grid.length >= 4:
        report.update(_decomposition_summary(f, cfg))
    report["pass"] = bool(rep.converged and report["invariants"]["checks_pass"]
                          and report.get("neck_bounds_pass", True))
    return report, f


def run_segment(cfg):
    """Segment the configured field as given (no solve)."""
    f = build_field(cfg)
    report = {"kind": "segment", **_decomposition_summary(f, cfg)}
    report["pass"] = bool(report["neck_bounds_pass"])
    return report, f


def run_collar_table(cfg):
    """Derived collar quantities for every configured core length."""
    return [CollarSpec(l).summary(cfg.collar.delta) for l in cfg.collar.l]


def _failed_row(l, exc):
    row = {k: float("nan") for k in RECORD_FIELDS}
    row.update(l=float(l), bounds_pass=False, case="", iterations=0, converged=False,
               n_t=0, status=f"failed: {type(exc).__name__}: {exc}")
    return row


def degeneration_member(l, cfg):
    """Solve one collar of the family and account its neck energy and length.

    Returns ``(row, report)``; ``report`` is None for a failed member.
    """
    fam = cfg.family
    try:
        sub = subcollar(l, fam.delta)
        lam = sub.length
        a = fam.slope(lam)
        n_t = max(64, math.ceil(fam.rows_per_unit * lam))
        g = CylinderGrid(sub.T1, sub.T2, n_t, fam.n_th)
        f0 = geodesic_ansatz(g, a, make_target(cfg.target), t0=sub.T1)
        f, rep = solve(f0, cfg=cfg.solve_config())
        d = segment(f, cfg.checks.epsilon, cfg.checks.merge_gap, cfg.checks.margin)
        r = neck_identity(f, d)
    except NecklabError as exc:
        logger.warning("family member l=%g failed: %s", l, exc)
        return _failed_row(l, exc), None
    re, im = abs(r.alpha.real), abs(r.alpha.imag)
    frac = r.neck_span * l / (2 * np.pi**2)
    pe, pl = re * np.pi**2 / l, np.sqrt(re) * np.pi**2 / l
    row = {
        "l": float(l), "cylinder_length": lam, "n_t": n_t, "slope": float(a),
        "alpha_re": r.alpha.real, "alpha_im": r.alpha.imag, "alpha_drift": r.alpha_drift,
        "E_neck": r.total_neck_energy, "L_neck": r.total_neck_length,
        "neck_span": r.neck_span, "neck_fraction": frac,
        "pred_energy": pe, "pred_length": pl, "im_diag": im * np.pi**2 / l,
        "pred_energy_neck": pe * frac, "pred_length_neck": pl * frac,
        "identity_energy": r.predicted_energy, "identity_length": r.predicted_length,
        "residual_energy": r.residual_energy, "residual_length": r.residual_length,
        "bounds_pass": r.bounds_pass, "case": d.case, "iterations": rep.iterations,
        "final_residual": rep.final_residual, "converged": rep.converged,
        "status": "ok" if rep.converged else "not converged",
    }
    return row, r


def run_degeneration(cfg, threads=1):
    """Run every member of ``cfg.family`` and classify the family.

    Members run on a pool of ``threads`` workers; rows come back sorted by
    decreasing ``l`` whatever the completion order.

    Returns
    -------
    rows : list of dict
        One row per member, keys in ``RECORD_FIELDS`` order.
    verdict : dict or None
        ``None`` when fewer than three members succeeded.
    """
    ls = sorted(cfg.family.l_schedule, reverse=True)
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        results = list(pool.map(lambda l: degeneration_member(l, cfg), ls))
    results.sort(key=lambda x: -x[0]["l"])
    rows = [r for r, _ in results]
    ok = [(r["l"], rep) for r, rep in results if rep is not None]
    verdict = None
    if len(ok) >= 3:
        verdict = classify_compactness([l for l, _ in ok], [rep for _, rep in ok]).to_dict()
    return rows, verdict
