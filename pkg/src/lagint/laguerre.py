"""Laguerre cells of atoms fully surrounded by other generators.

Facet areas come from triangle fans over the characteristic points of the
tetrahedra around each edge, and cell volumes from the pyramids over each
facet with apex at the atom center.  Pyramid heights are signed: when the
radical plane lies beyond an atom's center (edge parameter ``t`` outside
``[0, 1]``), that atom's pyramid is subtracted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np

from .alpha import Filtration, Tetraring, compute_filtration
from .geometry import signed_area
from .intersection import facet_parts, interresidue, residue_index, residue_order
from .triangulation import build


class PreconditionError(ValueError):
    """An atom that must be enclosed lies on the convex hull."""


@dataclass(frozen=True, eq=False)
class FacetContributions:
    """Facet area and signed pyramid volumes of every edge.

    All arrays are indexed by edge id of the underlying triangulation.
    ``area`` is only meaningful for edges with complete tetrarings.
    """

    edges: np.ndarray
    area: np.ndarray
    volume_i: np.ndarray
    volume_j: np.ndarray
    height_i: np.ndarray
    height_j: np.ndarray
    t: np.ndarray
    complete: np.ndarray


def facet_contributions(f: Filtration) -> FacetContributions:
    """Facet areas and pyramid volumes from the characteristic points.

    Depends only on the radical planes, hence not on the solvent weight.
    """
    t = f.tri
    area = facet_parts(f)
    L = f.edge_length
    x = f.edge_center
    P = t.centers
    e = t.edges
    hi = np.linalg.norm(x - P[e[:, 0]], axis=1)
    hj = np.linalg.norm(x - P[e[:, 1]], axis=1)
    vi = f.edge_t * L * area / 3.0
    vj = (1.0 - f.edge_t) * L * area / 3.0
    return FacetContributions(e, area, vi, vj, hi, hj, f.edge_t, ~t.hull_edges)


def facet_area(f: Filtration, ring: Tetraring) -> float:
    """Area of the Laguerre facet of a complete ring, as a signed fan.

    The fan is taken about the edge's characteristic point; triangles whose
    orientation flips (the point lies outside the polygon) subtract.
    """
    if not ring.complete:
        raise ValueError(f"edge {ring.vertices} is on the hull; its facet is unbounded")
    P = f.tri.centers
    i, j = ring.vertices
    axis = P[j] - P[i]
    axis = axis / np.linalg.norm(axis)
    q = f.tet_center[list(ring.tets)]
    c = f.edge_center[ring.edge]
    return float(np.sum(signed_area(c, q, np.roll(q, -1, axis=0), axis)))


def pyramid_volumes(area: float, t: float, h_i: float, h_j: float) -> Tuple[float, float]:
    """Signed pyramid volumes over a facet, one per generator.

    ``h_i`` and ``h_j`` are unsigned distances from the centers to the facet
    plane; atom ``i``'s pyramid is negative for ``t < 0`` and atom ``j``'s for
    ``t > 1``.
    """
    return float(np.sign(t) * h_i * area / 3.0), float(np.sign(1.0 - t) * h_j * area / 3.0)


@dataclass(frozen=True, eq=False)
class CellReport:
    """Laguerre volumes and areas of the enclosed atoms.

    Attributes
    ----------
    atoms : (m,) indices of the reported atoms in the input
    volume : (m,) LV_i
    area : (m,) LS_i, total facet area including facets shared with
        solvent atoms
    pairs : (P, 2) atom pairs (input indices) sharing a facet
    pair_area : (P,) facet areas
    labels : (n,) residue labels of all input atoms, or None
    solvent : (n,) solvent mask of the input
    """

    atoms: np.ndarray
    volume: np.ndarray
    area: np.ndarray
    pairs: np.ndarray
    pair_area: np.ndarray
    labels: Optional[np.ndarray]
    solvent: np.ndarray

    @cached_property
    def _res(self):
        lab = None if self.labels is None else self.labels[self.atoms]
        res = residue_order(lab, len(self.atoms))
        idx = residue_index(lab, len(self.atoms), res)
        return res, idx

    @property
    def residues(self) -> Tuple[str, ...]:
        return self._res[0]

    @property
    def residue_volume(self) -> np.ndarray:
        res, idx = self._res
        return np.bincount(idx, self.volume, len(res))

    @property
    def interresidue_area(self) -> Dict[Tuple[str, str], float]:
        res, idx = self._res
        pos = np.full(len(self.solvent), -1, dtype=np.int64)
        pos[self.atoms] = np.arange(len(self.atoms))
        keep = ~self.solvent[self.pairs].any(axis=1)
        local = pos[self.pairs[keep]]
        return interresidue(local, self.pair_area[keep], idx, res)

    @property
    def residue_solvent_area(self) -> np.ndarray:
        """Facet area between each residue and the solvent."""
        res, idx = self._res
        pos = np.full(len(self.solvent), -1, dtype=np.int64)
        pos[self.atoms] = np.arange(len(self.atoms))
        sv = self.solvent[self.pairs]
        mixed = sv[:, 0] != sv[:, 1]
        solute = np.where(sv[:, 0], self.pairs[:, 1], self.pairs[:, 0])[mixed]
        return np.bincount(idx[pos[solute]], self.pair_area[mixed], len(res))


def interior_cell_quantities(
    centers, weights, solvent=None, labels=None, filtration: Filtration | None = None
) -> CellReport:
    """Laguerre cells of all non-solvent atoms.

    Parameters
    ----------
    centers, weights : all generators, solvent included
    solvent : (n,) bool mask of solvent atoms; defaults to none
    labels : (n,) residue labels
    filtration : reuse a precomputed filtration of the same points

    Raises
    ------
    PreconditionError
        If a non-solvent atom has an unbounded cell.
    """
    P = np.asarray(centers, dtype=float)
    W = np.asarray(weights, dtype=float)
    n = len(P)
    sv = np.zeros(n, dtype=bool) if solvent is None else np.asarray(solvent, dtype=bool)
    f = filtration or compute_filtration(build(P, W))
    t = f.tri
    atoms = np.flatnonzero(~sv)
    bad = atoms[t.hull_marks[atoms]]
    if len(bad):
        raise PreconditionError(f"atoms on the convex hull (unbounded cells): {bad[:10].tolist()}")
    fc = facet_contributions(f)
    e = t.edges
    touches = ~sv[e].all(axis=1)
    vol = np.zeros(n)
    area = np.zeros(n)
    np.add.at(vol, e[touches, 0], fc.volume_i[touches])
    np.add.at(vol, e[touches, 1], fc.volume_j[touches])
    np.add.at(area, e[touches, 0], fc.area[touches])
    np.add.at(area, e[touches, 1], fc.area[touches])
    lab = None if labels is None else np.asarray(labels, dtype=object)
    return CellReport(atoms, vol[atoms], area[atoms], e[touches].copy(), fc.area[touches], lab, sv)
