"""Volumes and areas of Laguerre-Intersection cells ``L_i ∩ B_i(w)``.

The cell of atom ``i`` is measured by inclusion-exclusion over the boundary of
the alpha complex ``C(w)``:

* vertices contribute the fraction ``Ω_i`` of the full ball and sphere,
* edges subtract the fraction ``Φ_ij`` of the two caps cut by the radical
  plane and add that fraction of the intersection disc as planar area,
* boundary triangles add back the triple-intersection pieces, weighted by
  ``c_T`` (1 for singular, 1/2 for regular triangles),
* every edge of an alpha tetrahedron adds the part ``F_ij`` of its Laguerre
  facet lying inside the union of alpha tetrahedra, plus the two pyramids
  over ``F_ij`` with apexes at the atom centers.

The facet parts ``F_ij`` are signed triangle fans about the edge's
characteristic point.  Each alpha tetrahedron ``(i, j, k, l)`` contributes the
"kite" ``x_ij, x_ijk, x_ijkl, x_ijl`` to each of its six edges, so the sum over
a run of consecutive tetrahedra in the ring of ``ij`` telescopes into the fan
over that run and the whole Laguerre facet for complete rings.

Pyramid heights are signed distances from the atom centers to the radical
plane, so an engulfed atom, whose center lies beyond the plane, receives a
negative pyramid volume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .alpha import Filtration, angle_coefficients, classify_at, compute_filtration
from .geometry import (
    FOUR_PI,
    TWO_PI,
    DegenerateInputError,
    WeightedPoint,
    batch_edge,
    batch_solid_angle,
    batch_triangle,
    cap_volume,
    dot,
    edge_characteristic,
    signed_area,
)
from .triangulation import TET_EDGE_OPP, TET_EDGES, build, enclose, is_flat, lookup_triangles

APEX_TOL = 1e-12


# ---------------------------------------------------------------------------
# kernels shared by the scalar operations and the vectorized assembly


def edge_terms(ri, rj, length, t, rho2):
    """Cap areas, cap volumes and disc area of a two-ball intersection.

    Returns ``(sphere_i, sphere_j, volume_i, volume_j, disc)`` for the full
    lens (``Φ = 1``).
    """
    hi = ri - t * length
    hj = rj - (1.0 - t) * length
    return (
        TWO_PI * ri * hi,
        TWO_PI * rj * hj,
        cap_volume(ri, hi),
        cap_volume(rj, hj),
        np.pi * rho2,
    )


def triangle_terms(pv, r, xe, rho2, x, n, H):
    """Triple-intersection terms of ``m`` triangles.

    Parameters
    ----------
    pv : (m, 3, 3) vertex centers, counter-clockwise about ``n``
    r : (m, 3) radii at the current weight
    xe : (m, 3, 3) edge characteristic points for edges (01, 02, 12)
    rho2 : (m, 3) squared disc radii of those edges
    x : (m, 3) triangle characteristic point
    n : (m, 3) unit normal
    H : (m,) apex height, so that ``x ± H n`` lies on all three spheres

    Returns
    -------
    sphere : (m, 3) spherical area of sphere ``i`` inside the two others
    volume : (m, 3) part of the triple intersection in the Laguerre cell of ``i``
    segment : (m, 3) disc area cut off by the third ball, per edge
    """
    apex = x + H[:, None] * n
    third = (2, 1, 0)
    ends = ((0, 1), (0, 2), (1, 2))
    s = np.empty(rho2.shape)
    for e, ((a, b), c) in enumerate(zip(ends, third)):
        ax = pv[:, b] - pv[:, a]
        ax = ax / np.linalg.norm(ax, axis=1)[:, None]
        v = pv[:, c] - pv[:, a]
        v = v - dot(v, ax)[:, None] * ax
        s[:, e] = dot(x - xe[:, e], v) / np.linalg.norm(v, axis=1)
    phi = np.arctan2(H[:, None], s) / TWO_PI
    segment = 2.0 * phi * np.pi * rho2 - s * H[:, None]

    sphere = np.empty(r.shape)
    volume = np.empty(r.shape)
    # (vertex i, edge ij, edge ik, j, k) for the three ccw rotations
    rots = ((0, 0, 1, 1, 2), (1, 2, 0, 2, 0), (2, 1, 2, 0, 1))
    for i, eij, eik, j, k in rots:
        pi = pv[:, i]
        ri = r[:, i]
        omega = batch_solid_angle(pv[:, j] - pi, pv[:, k] - pi, apex - pi)
        hij = ri - dot(xe[:, eij] - pi, _unit(pv[:, j] - pi))
        hik = ri - dot(xe[:, eik] - pi, _unit(pv[:, k] - pi))
        fij, fik = phi[:, eij], phi[:, eik]
        a = xe[:, eij] - pi
        b = x - pi
        d = xe[:, eik] - pi
        vt = H / 6.0 * dot(np.cross(a, b) + np.cross(b, d), n)
        sphere[:, i] = 2.0 * (TWO_PI * ri * (fij * hij + fik * hik) - omega * FOUR_PI * ri * ri)
        volume[:, i] = 2.0 * (
            vt - omega * FOUR_PI / 3.0 * ri ** 3 + fij * cap_volume(ri, hij) + fik * cap_volume(ri, hik)
        )
    return sphere, volume, segment


def kite_areas(c, xk, xt, xl, axis):
    """Signed areas of the kites ``c, xk, xt, xl`` viewed along ``axis``."""
    return signed_area(c, xk, xt, axis) + signed_area(c, xt, xl, axis)


def _unit(v):
    return v / np.linalg.norm(v, axis=-1)[..., None]


# ---------------------------------------------------------------------------
# scalar operations


@dataclass(frozen=True)
class LIContribution:
    """Signed contribution of one simplex to the cells of its atoms.

    ``volume`` and ``sphere`` are indexed like ``atoms``; ``pair_planar``
    maps atom pairs to planar facet area.  Cap terms are set for edges only.
    """

    atoms: Tuple[int, ...]
    volume: np.ndarray
    sphere: np.ndarray
    pair_planar: Dict[Tuple[int, int], float] = field(default_factory=dict)
    cap_area: float = 0.0
    cap_volume: Tuple[float, ...] = ()

    @property
    def planar(self) -> np.ndarray:
        out = np.zeros(len(self.atoms))
        for (a, b), v in self.pair_planar.items():
            out[self.atoms.index(a)] += v
            out[self.atoms.index(b)] += v
        return out


def vertex_contribution(atom: WeightedPoint, omega: float, w: float = 0.0, index: int = 0) -> LIContribution:
    r = atom.shifted(w).radius
    return LIContribution(
        (index,), np.array([omega * FOUR_PI / 3.0 * r ** 3]), np.array([omega * FOUR_PI * r * r])
    )


def edge_contribution(pi: WeightedPoint, pj: WeightedPoint, phi: float, w: float = 0.0, ids=(0, 1)) -> LIContribution:
    """Lens contribution of an edge on the alpha-complex boundary.

    Cap areas and volumes enter with a negative sign, the disc with a
    positive one, all scaled by the outer dihedral fraction ``phi``.
    """
    chp = edge_characteristic(pi, pj)
    rho2 = w - chp.size
    if rho2 < 0:
        raise DegenerateInputError("edge spheres do not intersect at this weight")
    length = float(np.linalg.norm(pj.center - pi.center))
    si, sj, vi, vj, disc = edge_terms(pi.shifted(w).radius, pj.shifted(w).radius, length, chp.t, rho2)
    return LIContribution(
        tuple(ids), -phi * np.array([vi, vj]), -phi * np.array([si, sj]), {tuple(sorted(ids)): phi * disc}
    )


def triangle_contribution(pi, pj, pk, c_tri: float, w: float = 0.0, ids=(0, 1, 2)) -> LIContribution:
    """Triple-intersection correction of a boundary triangle."""
    pts = [pi, pj, pk]
    P = np.stack([p.center for p in pts])
    W = np.array([p.weight for p in pts]) + w
    x, size, n = batch_triangle(P, W, np.array([[0, 1, 2]]))
    if not np.isfinite(size[0]):
        raise DegenerateInputError("collinear triangle")
    if size[0] >= 0:
        raise DegenerateInputError("spheres do not meet in a point pair")
    e = np.array([[0, 1], [0, 2], [1, 2]])
    _, xe, es = batch_edge(P, W, e)
    sph, vol, seg = triangle_terms(
        P[None], np.sqrt(W)[None], xe[None], -es[None], x, n, np.sqrt(-size)
    )
    pairs = {}
    for m, (a, b) in enumerate(e):
        key = tuple(sorted((ids[a], ids[b])))
        pairs[key] = -c_tri * float(seg[0, m])
    return LIContribution(tuple(ids), c_tri * vol[0], c_tri * sph[0], pairs)


def exterior_edge_cap(pi: WeightedPoint, pj: WeightedPoint, center, arcs: Sequence[Sequence], cyclic: Sequence[bool] = None):
    """Part of a Laguerre facet inside the alpha tetrahedra around an edge.

    Parameters
    ----------
    pi, pj : the edge generators
    center : the edge characteristic point
    arcs : for each run of consecutive alpha tetrahedra, the points
        ``x_ijk0, x_T1, x_ijk1, ..., x_Tm, x_ijkm`` in counter-clockwise order
        about ``p_j - p_i`` (boundary-triangle and tetrahedron characteristic
        points alternating); a cyclic run omits the repeated last triangle.
    cyclic : per-arc flag for runs that close around the edge.

    Returns
    -------
    F, P_i, P_j : area and the two signed pyramid volumes over it.
    """
    axis = _unit(pj.center - pi.center)
    c = np.asarray(center, float)
    if cyclic is None:
        cyclic = [False] * len(arcs)
    area = 0.0
    for pts, cyc in zip(arcs, cyclic):
        q = np.asarray(pts, float)
        if len(q) < 2:
            continue
        nxt = np.roll(q, -1, axis=0) if cyc else q[1:]
        cur = q if cyc else q[:-1]
        area += float(np.sum(signed_area(c, cur, nxt, axis)))
    di = float(dot(c - pi.center, axis))
    dj = float(dot(pj.center - c, axis))
    return area, area * di / 3.0, area * dj / 3.0


def arc_points(f: Filtration, ring) -> Tuple[list, list]:
    """Characteristic-point chains of the alpha arcs of a tetraring.

    An arc over ring positions ``s..e`` gives ``x(l_s), x_T(s), x(l_s+1), ...,
    x_T(e), x(l_e+1)``, where ``x(l)`` is the characteristic point of the
    triangle ``(i, j, l)`` and ``l_m`` the link vertices; cyclic arcs drop the
    repeated final triangle.
    """
    i, j = ring.vertices
    link = ring.link
    key = np.sort(np.array([[i, j, v] for v in link]), axis=1)
    tri = lookup_triangles(f.tri, key)
    xl = f.triangle_center[tri]
    chains = []
    for arc, cyc in zip(ring.arcs, ring.arc_cyclic):
        pts = []
        for s in arc:
            pts += [xl[s], f.tet_center[ring.tets[s]]]
        if not cyc:
            pts.append(xl[(arc[-1] + 1) % len(link)])
        chains.append(np.array(pts))
    return chains, list(ring.arc_cyclic)


def edge_cap(f: Filtration, ring) -> Tuple[float, float, float]:
    """:func:`exterior_edge_cap` of an edge from its classified tetraring."""
    i, j = ring.vertices
    P, W = f.tri.centers, f.tri.weights
    chains, cyc = arc_points(f, ring)
    return exterior_edge_cap(
        WeightedPoint(P[i], W[i]), WeightedPoint(P[j], W[j]), f.edge_center[ring.edge], chains, cyc
    )


# ---------------------------------------------------------------------------
# report and vectorized assembly


@dataclass(frozen=True, eq=False)
class LIReport:
    """Per-atom, per-pair and per-residue Laguerre-Intersection quantities.

    Attributes
    ----------
    w : solvent weight
    volume : (n,) LIV_i
    sphere : (n,) spherical (solvent-accessible) part of the cell surface
    planar : (n,) planar part of the cell surface
    pairs : (P, 2) atom pairs ``i < j`` with a planar contact
    pair_area : (P,) planar contact area of each pair
    labels : (n,) residue label of each atom, or None
    """

    w: float
    volume: np.ndarray
    sphere: np.ndarray
    planar: np.ndarray
    pairs: np.ndarray
    pair_area: np.ndarray
    labels: Optional[np.ndarray] = None

    @property
    def area(self) -> np.ndarray:
        return self.sphere + self.planar

    @cached_property
    def residues(self) -> Tuple[str, ...]:
        return residue_order(self.labels, len(self.volume))

    @cached_property
    def residue_index(self) -> np.ndarray:
        return residue_index(self.labels, len(self.volume), self.residues)

    @property
    def residue_volume(self) -> np.ndarray:
        return np.bincount(self.residue_index, self.volume, len(self.residues))

    @property
    def residue_sphere(self) -> np.ndarray:
        return np.bincount(self.residue_index, self.sphere, len(self.residues))

    @property
    def interresidue_area(self) -> Dict[Tuple[str, str], float]:
        return interresidue(self.pairs, self.pair_area, self.residue_index, self.residues)


def residue_order(labels, n) -> Tuple[str, ...]:
    if labels is None:
        return tuple(str(i) for i in range(n))
    seen = dict.fromkeys(str(x) for x in labels)
    return tuple(seen)


def residue_index(labels, n, residues) -> np.ndarray:
    if labels is None:
        return np.arange(n)
    pos = {r: k for k, r in enumerate(residues)}
    return np.array([pos[str(x)] for x in labels], dtype=np.int64)


def interresidue(pairs, area, res_idx, residues) -> Dict[Tuple[str, str], float]:
    ra = res_idx[pairs[:, 0]]
    rb = res_idx[pairs[:, 1]]
    keep = ra != rb
    lo = np.minimum(ra, rb)[keep]
    hi = np.maximum(ra, rb)[keep]
    nr = len(residues)
    code = lo * nr + hi
    uniq, inv = np.unique(code, return_inverse=True)
    tot = np.bincount(inv.reshape(-1), area[keep], len(uniq))
    return {(residues[c // nr], residues[c % nr]): float(v) for c, v in zip(uniq, tot)}


def assemble(f: Filtration, w: float = 0.0, labels=None, tol: float = APEX_TOL) -> LIReport:
    """Laguerre-Intersection volumes and areas of all atoms at solvent weight ``w``."""
    t = f.tri
    c = classify_at(f, w)
    omega, phi, c_tri = angle_coefficients(f, c)
    P = t.centers
    n = t.n_points
    Ww = t.weights + w
    r = np.sqrt(np.where(c.vertex_in, Ww, 0.0))

    vol = np.zeros(n)
    sph = np.zeros(n)
    pair_area = np.zeros(len(t.edges))

    # vertices
    vol += omega * FOUR_PI / 3.0 * r ** 3
    sph += omega * FOUR_PI * r * r

    # edges on the boundary
    e = t.edges
    be = np.flatnonzero(phi != 0.0)
    rho2 = np.maximum(w - f.edge_size, 0.0)
    si, sj, vi, vj, disc = edge_terms(
        r[e[be, 0]], r[e[be, 1]], f.edge_length[be], f.edge_t[be], rho2[be]
    )
    pb = phi[be]
    np.add.at(sph, e[be, 0], -pb * si)
    np.add.at(sph, e[be, 1], -pb * sj)
    np.add.at(vol, e[be, 0], -pb * vi)
    np.add.at(vol, e[be, 1], -pb * vj)
    pair_area[be] += pb * disc

    # boundary triangles with a real apex
    alpha = f.triangle_size - w
    bt = np.flatnonzero((c_tri != 0.0) & (alpha < -tol))
    if len(bt):
        tv = t.triangles[bt]
        te = t.triangle_edges[bt]
        sph_t, vol_t, seg = triangle_terms(
            P[tv], r[tv], f.edge_center[te], rho2[te],
            f.triangle_center[bt], f.triangle_normal[bt], np.sqrt(-alpha[bt]),
        )
        ct = c_tri[bt][:, None]
        np.add.at(sph, tv.reshape(-1), (ct * sph_t).reshape(-1))
        np.add.at(vol, tv.reshape(-1), (ct * vol_t).reshape(-1))
        np.add.at(pair_area, te.reshape(-1), -(ct * seg).reshape(-1))

    # facet parts inside alpha tetrahedra, and their pyramids
    F = facet_parts(f, c.tet_in)
    L = f.edge_length
    di = f.edge_t * L
    dj = (1.0 - f.edge_t) * L
    np.add.at(vol, e[:, 0], F * di / 3.0)
    np.add.at(vol, e[:, 1], F * dj / 3.0)
    pair_area += F

    keep = np.flatnonzero(c.edge_in)
    planar = np.zeros(n)
    np.add.at(planar, e[keep, 0], pair_area[keep])
    np.add.at(planar, e[keep, 1], pair_area[keep])
    lab = None if labels is None else np.asarray(labels, dtype=object)
    return LIReport(float(w), vol, sph, planar, e[keep].copy(), pair_area[keep], lab)


def facet_parts(f: Filtration, tet_mask=None) -> np.ndarray:
    """Signed facet area inside the selected tetrahedra, per edge.

    With every tetrahedron selected this is the Laguerre facet area of each
    edge whose ring is complete.
    """
    t = f.tri
    tets = np.flatnonzero(tet_mask) if tet_mask is not None else np.arange(len(t.tets))
    F = np.zeros(len(t.edges))
    if not len(tets):
        return F
    P = t.centers
    Q = t.tets[tets]
    tt = t.tet_triangles[tets]
    te = t.tet_edges[tets]
    xt = f.tet_center[tets]
    for m, (a, b) in enumerate(TET_EDGES):
        k, l = TET_EDGE_OPP[m]
        eid = te[:, m]
        axis = _unit(P[Q[:, b]] - P[Q[:, a]])
        kite = kite_areas(
            f.edge_center[eid],
            f.triangle_center[tt[:, l]],
            xt,
            f.triangle_center[tt[:, k]],
            axis,
        )
        np.add.at(F, eid, kite)
    return F


def filtration_for(centers, weights, w_max: float = 0.0) -> Filtration:
    """Filtration of a configuration, padded with ghost points if it is flat.

    The ghosts (see :func:`lagint.triangulation.enclose`) are placed for the
    largest solvent weight ``w_max`` that will be assembled; reports must be
    passed through :func:`drop_ghosts`.
    """
    P = np.asarray(centers, dtype=float)
    W = np.asarray(weights, dtype=float)
    if not is_flat(P):
        return compute_filtration(build(P, W))
    return compute_filtration(build(*enclose(P, W, w_max)))


def drop_ghosts(report: LIReport, n: int, labels=None) -> LIReport:
    """Restrict a report to the first ``n`` atoms."""
    if len(report.volume) == n:
        return report if labels is None else LIReport(
            report.w, report.volume, report.sphere, report.planar, report.pairs, report.pair_area,
            np.asarray(labels, dtype=object))
    keep = (report.pairs < n).all(axis=1)
    lab = None if labels is None else np.asarray(labels, dtype=object)
    return LIReport(report.w, report.volume[:n], report.sphere[:n], report.planar[:n],
                    report.pairs[keep], report.pair_area[keep], lab)


def compute_report(centers, weights, w: float = 0.0, labels=None, tol: float = APEX_TOL) -> LIReport:
    """Triangulate, filter and assemble in one call.

    Configurations with fewer than four atoms or no full affine span are
    padded with distant ghost points that are dropped from the report.
    """
    P = np.asarray(centers, dtype=float)
    W = np.asarray(weights, dtype=float)
    if not is_flat(P):
        return assemble(compute_filtration(build(P, W)), w, labels, tol)
    rep = assemble(filtration_for(P, W, w), w, None, tol)
    return drop_ghosts(rep, len(P), labels)
