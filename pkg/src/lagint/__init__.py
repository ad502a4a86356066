"""Laguerre-Intersection cells of molecules.

The cell of atom ``i`` at solvent weight ``w`` is its Laguerre (power) cell
intersected with its own ball of weight ``w_i + w``.  Volumes and areas are
computed by inclusion-exclusion over the alpha complex of the regular
tetrahedrization, which depends only on the base weights and is therefore
built once for any number of solvent weights.

Typical use::

    from lagint import build, compute_filtration, assemble
    f = compute_filtration(build(centers, radii ** 2))
    report = assemble(f, w=1.96)
"""

from .alpha import Classification, Filtration, Tetraring, classify_at, compute_filtration, tetrarings
from .frame import MolecularFrame
from .geometry import CharacteristicPoint, DegenerateInputError, WeightedPoint
from .intersection import LIReport, assemble, compute_report, drop_ghosts, exterior_edge_cap, filtration_for
from .laguerre import CellReport, interior_cell_quantities
from .montecarlo import MCEstimate, ci_bound, mc_liv, mc_plis, mc_sas
from .solvent import ParameterGrid, SweepResult, radius_grid, sweep
from .triangulation import Tetrahedrization, build
from .union import union_of_balls

__all__ = [
    "CellReport", "CharacteristicPoint", "Classification", "DegenerateInputError", "Filtration",
    "LIReport", "MCEstimate", "MolecularFrame", "ParameterGrid", "SweepResult", "Tetraring",
    "Tetrahedrization", "WeightedPoint", "assemble", "build", "ci_bound", "classify_at",
    "compute_filtration", "compute_report", "drop_ghosts", "exterior_edge_cap", "filtration_for", "interior_cell_quantities",
    "mc_liv", "mc_plis", "mc_sas", "radius_grid", "sweep", "tetrarings", "union_of_balls",
]
