"""Harmonic maps from long flat cylinders into the sphere and flat tori.

Subpackages and modules:

* ``manifold``: targets (unit sphere, flat torus)
* ``grid``: cylinder grids, map fields, finite differences, file format
* ``solver``: discrete harmonic maps with Dirichlet end circles
* ``invariants``: energy, Hopf slice integrals, neck quantities and lemma checks
* ``collar``: hyperbolic collar geometry in cylinder coordinates
* ``decompose``: bubble/neck segmentation and neck energy accounting
* ``harness``: configuration, experiments, export and the ``necklab`` CLI
"""
from .collar import CollarSpec, SubcollarBounds, subcollar
from .decompose import Decomposition, NeckIdentityReport, classify_compactness, neck_identity, segment
from .estimators import HarmonicMapSolver, HopfInvariants, NeckSegmenter
from .exceptions import NecklabError
from .grid import CylinderGrid, MapField, load_field, save_field
from .invariants import alpha, average_length, energy, oscillation, window_energy
from .manifold import FlatTorus, UnitSphere, make_target
from .solver import BoundaryData, SolveConfig, solve

__version__ = "0.1.0"

__all__ = [
    "BoundaryData", "CollarSpec", "CylinderGrid", "Decomposition", "FlatTorus",
    "HarmonicMapSolver", "HopfInvariants", "MapField", "NeckIdentityReport", "NeckSegmenter",
    "NecklabError", "SolveConfig", "SubcollarBounds", "UnitSphere", "alpha", "average_length",
    "classify_compactness", "energy", "load_field", "make_target", "neck_identity",
    "oscillation", "save_field", "segment", "solve", "subcollar", "window_energy",
]
