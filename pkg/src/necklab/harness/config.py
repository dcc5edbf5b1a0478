"""Experiment configuration: one JSON object, validated before any computation.

Unknown keys anywhere are an error.  See the README for a commented example
of each experiment kind.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from dataclasses import field as _field
from pathlib import Path

import numpy as np

from ..collar import DELTA_THIN, L_MAX
from ..decompose import DEFAULT_EPSILON
from ..exceptions import ConfigError
from ..invariants import EPS1, EPS2
from ..manifold import make_target
from ..solver import SolveConfig

KINDS = ("single", "degeneration", "collar", "segment")
FIELD_TYPES = ("geodesic", "perturbed", "constant", "bubble", "neck_bubble", "equator")
RULES = ("fixed_displacement", "fixed_slope", "power_law")


def _build(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    names = {f.name for f in fields(cls)}
    extra = set(data) - names
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass
class GridSpec:
    t_min: float = 0.0
    t_max: float = 10.0
    n_t: int = 401
    n_th: int = 16


@dataclass
class FieldSpec:
    """Initial data for ``single`` and ``segment`` runs.

    ``type`` is one of ``geodesic`` (uses ``slope``), ``perturbed`` (``slope``,
    ``amplitude``; random modes from the run seed), ``constant``, ``bubble``
    and ``neck_bubble`` (``center``, ``slope``), ``equator``.  With
    ``relax_from="interpolation"`` the interior is replaced by the geodesic
    interpolation of the end circles before solving.
    """

    type: str = "geodesic"
    slope: float = 0.5
    amplitude: float = 0.02
    center: float = 0.0
    relax_from: str = "field"

    def __post_init__(self):
        if self.type not in FIELD_TYPES:
            raise ConfigError(f"field.type must be one of {FIELD_TYPES}")
        if self.relax_from not in ("field", "interpolation"):
            raise ConfigError("field.relax_from must be 'field' or 'interpolation'")


@dataclass
class FamilySpec:
    """A degenerating collar family.

    ``rule`` picks the neck speed ``a_n`` from the subcollar length ``Lam_n``:
    ``fixed_displacement`` ``a = D / Lam``, ``fixed_slope`` ``a = a``,
    ``power_law`` ``a = c * Lam**(-p)``.
    """

    l_schedule: list = _field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    rule: str = "fixed_displacement"
    D: float = 1.0
    a: float = 0.0
    c: float = 1.0
    p: float = 0.5
    delta: float = DELTA_THIN
    rows_per_unit: float = 8.0
    n_th: int = 16

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigError(f"family.rule must be one of {RULES}")
        ls = [float(x) for x in self.l_schedule]
        if len(ls) < 3:
            raise ConfigError("family.l_schedule needs at least three lengths")
        if any(b >= a for a, b in zip(ls, ls[1:])):
            raise ConfigError("family.l_schedule must be strictly decreasing")
        if ls[0] > L_MAX or ls[-1] <= 0:
            raise ConfigError("family lengths must lie in (0, 2 arcsinh 1]")
        self.l_schedule = ls
        if not self.rows_per_unit > 0 or int(self.n_th) < 8:
            raise ConfigError("family needs rows_per_unit > 0 and n_th >= 8")

    def slope(self, lam):
        if self.rule == "fixed_displacement":
            return self.D / lam
        if self.rule == "fixed_slope":
            return self.a
        return self.c * lam ** (-self.p)


@dataclass
class CollarTableSpec:
    l: list = _field(default_factory=lambda: [0.5, 0.1, 0.01])
    delta: float | None = None

    def __post_init__(self):
        self.l = [float(x) for x in np.atleast_1d(self.l)]
        if not self.l or any(not 0 < x <= L_MAX for x in self.l):
            raise ConfigError("collar.l values must lie in (0, 2 arcsinh 1]")


@dataclass
class CheckSpec:
    """Calibration constants of the gated checks and the segmentation threshold."""

    eps1: float = EPS1
    eps2: float = EPS2
    epsilon: float = DEFAULT_EPSILON
    merge_gap: float = 1.0
    margin: float = 1.0


@dataclass
class ExperimentConfig:
    kind: str = "single"
    target: dict = _field(default_factory=lambda: {"name": "sphere", "dim": 3})
    grid: GridSpec = _field(default_factory=GridSpec)
    solver: dict = _field(default_factory=dict)
    field: FieldSpec = _field(default_factory=FieldSpec)
    family: FamilySpec = _field(default_factory=FamilySpec)
    collar: CollarTableSpec = _field(default_factory=CollarTableSpec)
    checks: CheckSpec = _field(default_factory=CheckSpec)
    seed: int = 0
    out: str = "out"

    def solve_config(self):
        opts = {"method": "newton", "max_iters": 200, **self.solver}
        cfg = _build(SolveConfig, opts, "solver")
        if cfg.method not in ("explicit", "sobolev", "newton"):
            raise ConfigError(f"unknown solver method {cfg.method!r}")
        return cfg

    def to_dict(self):
        return asdict(self)


def config_from_dict(data):
    """Validate a parsed JSON object and build an :class:`ExperimentConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    top = {f.name for f in fields(ExperimentConfig)}
    extra = set(data) - top
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    kind = data.get("kind", "single")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}")
    target = data.get("target", {"name": "sphere", "dim": 3})
    make_target(target)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    cfg = ExperimentConfig(
        kind=kind,
        target=target,
        grid=_build(GridSpec, data.get("grid"), "grid"),
        solver=dict(data.get("solver") or {}),
        field=_build(FieldSpec, data.get("field"), "field"),
        family=_build(FamilySpec, data.get("family"), "family"),
        collar=_build(CollarTableSpec, data.get("collar"), "collar"),
        checks=_build(CheckSpec, data.get("checks"), "checks"),
        seed=seed,
        out=str(data.get("out", "out")),
    )
    cfg.solve_config()
    return cfg


def load_config(path):
    """Read and validate a JSON configuration file."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return config_from_dict(data)
