"""Weighted alpha complex: filtration, classification, tetrarings, angles.

Each simplex of the regular tetrahedrization receives a filtration value.
An unattached simplex enters at its own size (the power of its
characteristic point).  An attached simplex, whose characteristic point is
power-closer to some other vertex of a coface, enters with its first coface.
A simplex belongs to the alpha complex ``C(w)`` iff its value is ``<= w``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from .geometry import batch_dihedral, batch_edge, batch_solid_angle, batch_tetra, batch_triangle, dot
from .triangulation import TET_EDGE_OPP, TET_EDGES, Tetrahedrization

EXCLUDED, SINGULAR, REGULAR, INTERIOR = 0, 1, 2, 3
STATE_NAMES = ("excluded", "singular", "regular", "interior")


@dataclass(frozen=True, eq=False)
class Filtration:
    """Characteristic points, filtration values and angles of a triangulation.

    Sizes are given at zero solvent weight; at solvent weight ``w`` every size
    is smaller by exactly ``w``.
    """

    tri: Tetrahedrization
    edge_t: np.ndarray
    edge_center: np.ndarray
    edge_size: np.ndarray
    triangle_center: np.ndarray
    triangle_size: np.ndarray
    triangle_normal: np.ndarray
    tet_center: np.ndarray
    tet_size: np.ndarray
    vertex_attached: np.ndarray
    edge_attached: np.ndarray
    triangle_attached: np.ndarray
    vertex_value: np.ndarray
    edge_value: np.ndarray
    triangle_value: np.ndarray
    tet_solid: np.ndarray
    tet_dihedral: np.ndarray

    @property
    def tet_value(self) -> np.ndarray:
        return self.tet_size

    @cached_property
    def edge_length(self) -> np.ndarray:
        P = self.tri.centers
        e = self.tri.edges
        return np.linalg.norm(P[e[:, 1]] - P[e[:, 0]], axis=1)


def compute_filtration(t: Tetrahedrization) -> Filtration:
    P, W = t.centers, t.weights
    n = t.n_points
    edges, tris, tets = t.edges, t.triangles, t.tets

    et, ex, es = batch_edge(P, W, edges)
    fx, fs, fn = batch_triangle(P, W, tris)
    tx, ts = batch_tetra(P, W, tets)

    def power(idx, x):
        d = P[idx] - x
        return dot(d, d) - W[idx]

    # triangles: attached if an opposite vertex beats the characteristic point
    f_att = np.zeros(len(tris), dtype=bool)
    for s in range(2):
        opp = t.triangle_opposite[:, s]
        ok = opp >= 0
        f_att[ok] |= power(opp[ok], fx[ok]) < fs[ok]
    fmin = np.full(len(tris), np.inf)
    np.minimum.at(fmin, t.tet_triangles.reshape(-1), np.repeat(ts, 4))
    f_val = np.where(f_att, fmin, np.minimum(fs, fmin))

    # edges: link vertices are the third vertices of incident triangles
    te = t.triangle_edges
    third = tris[:, [2, 1, 0]]
    e_ids = te.reshape(-1)
    e_att = np.zeros(len(edges), dtype=bool)
    hits = power(third.reshape(-1), ex[e_ids]) < es[e_ids]
    np.logical_or.at(e_att, e_ids, hits)
    emin = np.full(len(edges), np.inf)
    np.minimum.at(emin, e_ids, np.repeat(f_val, 3))
    e_val = np.where(e_att, emin, np.minimum(es, emin))

    # vertices: attached if a neighbor's power at the center is below -w_i
    d2 = dot(P[edges[:, 1]] - P[edges[:, 0]], P[edges[:, 1]] - P[edges[:, 0]])
    v_att = np.zeros(n, dtype=bool)
    np.logical_or.at(v_att, edges[:, 0], d2 - W[edges[:, 1]] < -W[edges[:, 0]])
    np.logical_or.at(v_att, edges[:, 1], d2 - W[edges[:, 0]] < -W[edges[:, 1]])
    vmin = np.full(n, np.inf)
    np.minimum.at(vmin, edges.reshape(-1), np.repeat(e_val, 2))
    v_val = np.where(v_att, vmin, np.minimum(-W, vmin))
    v_val[t.redundant] = np.inf

    # inner angles of every tetrahedron
    Q = P[tets]
    solid = np.empty((len(tets), 4))
    for k in range(4):
        o = [m for m in range(4) if m != k]
        solid[:, k] = batch_solid_angle(*(Q[:, m] - Q[:, k] for m in o))
    dih = np.empty((len(tets), 6))
    for m, (a, b) in enumerate(TET_EDGES):
        c, d = TET_EDGE_OPP[m]
        dih[:, m] = batch_dihedral(Q[:, b] - Q[:, a], Q[:, c] - Q[:, a], Q[:, d] - Q[:, a])

    return Filtration(
        t, et, ex, es, fx, fs, fn, tx, ts, v_att, e_att, f_att,
        v_val, e_val, f_val, solid, dih,
    )


@dataclass(frozen=True, eq=False)
class Classification:
    """Membership in ``C(w)`` and boundary state of every simplex."""

    w: float
    vertex_in: np.ndarray
    edge_in: np.ndarray
    triangle_in: np.ndarray
    tet_in: np.ndarray
    vertex_state: np.ndarray
    edge_state: np.ndarray
    triangle_state: np.ndarray
    tet_state: np.ndarray


def classify_at(f: Filtration, w: float) -> Classification:
    """Classify all simplices at solvent weight ``w`` (closed threshold)."""
    t = f.tri
    w = float(w)
    v_in = f.vertex_value <= w
    e_in = f.edge_value <= w
    f_in = f.triangle_value <= w
    t_in = f.tet_value <= w

    # triangles: count incident alpha tetrahedra
    n_tet = np.zeros(len(t.triangles), dtype=np.int64)
    np.add.at(n_tet, t.tet_triangles[t_in].reshape(-1), 1)
    tri_state = np.select([~f_in, n_tet == 0, n_tet == 2], [EXCLUDED, SINGULAR, INTERIOR], REGULAR)

    # edges/vertices: interior iff every incident tetrahedron is in C and
    # the simplex is not on the convex hull
    e_out = np.zeros(len(t.edges), dtype=bool)
    np.logical_or.at(e_out, t.tet_edges.reshape(-1), np.repeat(~t_in, 6))
    e_cof = np.zeros(len(t.edges), dtype=bool)
    np.logical_or.at(e_cof, t.triangle_edges.reshape(-1), np.repeat(f_in, 3))
    edge_state = np.select(
        [~e_in, ~e_cof, ~e_out & ~t.hull_edges], [EXCLUDED, SINGULAR, INTERIOR], REGULAR
    )

    v_out = np.zeros(t.n_points, dtype=bool)
    np.logical_or.at(v_out, t.tets.reshape(-1), np.repeat(~t_in, 4))
    v_cof = np.zeros(t.n_points, dtype=bool)
    np.logical_or.at(v_cof, t.edges.reshape(-1), np.repeat(e_in, 2))
    vertex_state = np.select(
        [~v_in, ~v_cof, ~v_out & ~t.hull_marks], [EXCLUDED, SINGULAR, INTERIOR], REGULAR
    )
    tet_state = np.where(t_in, INTERIOR, EXCLUDED)
    return Classification(w, v_in, e_in, f_in, t_in, vertex_state, edge_state, tri_state, tet_state)


def angle_coefficients(f: Filtration, c: Classification):
    """Outer angle fractions of the alpha complex at each simplex.

    Returns
    -------
    omega : ndarray (n,)
        ``1 - sum`` of inner solid angles of incident alpha tetrahedra, for
        vertices in ``C(w)``; zero for interior and excluded vertices.
    phi : ndarray (E,)
        ``1 - sum`` of inner dihedral angles, likewise for edges.
    c_tri : ndarray (F,)
        ``1 - (number of incident alpha tetrahedra) / 2``; zero outside ``C(w)``.
    """
    t = f.tri
    inside = c.tet_in
    omega = np.ones(t.n_points)
    np.subtract.at(omega, t.tets[inside].reshape(-1), f.tet_solid[inside].reshape(-1))
    omega[(c.vertex_state == INTERIOR) | ~c.vertex_in] = 0.0

    phi = np.ones(len(t.edges))
    np.subtract.at(phi, t.tet_edges[inside].reshape(-1), f.tet_dihedral[inside].reshape(-1))
    phi[(c.edge_state == INTERIOR) | ~c.edge_in] = 0.0

    n_tet = np.zeros(len(t.triangles))
    np.add.at(n_tet, t.tet_triangles[inside].reshape(-1), 1.0)
    c_tri = np.where(c.triangle_in, 1.0 - 0.5 * n_tet, 0.0)
    return omega, phi, c_tri


@dataclass(frozen=True)
class Tetraring:
    """Tetrahedra around an edge in counter-clockwise order about ``p_j - p_i``.

    ``link[m]`` and ``link[m + 1]`` are the vertices opposite the edge in
    ``tets[m]`` (``link`` wraps around for complete rings).  ``arcs`` lists
    maximal runs of consecutive alpha tetrahedra as index tuples into
    ``tets``; ``arc_cyclic`` flags runs that close up.
    """

    edge: int
    vertices: Tuple[int, int]
    tets: Tuple[int, ...]
    link: Tuple[int, ...]
    complete: bool
    arcs: Tuple[Tuple[int, ...], ...] = ()
    arc_cyclic: Tuple[bool, ...] = ()


def _edge_frame(tet, i, j):
    """Return (k, l) so that (i, j, k, l) is an even permutation of ``tet``."""
    pos = {v: m for m, v in enumerate(tet)}
    a, b = pos[i], pos[j]
    m = next(m for m, (x, y) in enumerate(TET_EDGES) if {x, y} == {a, b})
    k, l = TET_EDGE_OPP[m]
    if (a, b) != tuple(TET_EDGES[m]):
        k, l = l, k
    return tet[k], tet[l]


def _ring(t: Tetrahedrization, start: int, i: int, j: int):
    tets, nb = t.tets, t.neighbors

    def across(tau, v):
        # neighbor across the face opposite vertex v
        return int(nb[tau, int(np.flatnonzero(tets[tau] == v)[0])])

    fwd = [(start, *_edge_frame(tets[start], i, j))]
    while True:
        tau, k, _ = fwd[-1]
        nxt = across(tau, k)
        if nxt < 0:
            break
        if nxt == start:
            return [r[0] for r in fwd], [r[1] for r in fwd], True
        fwd.append((nxt, *_edge_frame(tets[nxt], i, j)))
    back = []
    tau, _, l = fwd[0]
    while True:
        nxt = across(tau, l)
        if nxt < 0:
            break
        k, l = _edge_frame(tets[nxt], i, j)
        back.append((nxt, k, l))
        tau = nxt
    ring = back[::-1] + fwd
    return [r[0] for r in ring], [ring[0][1]] + [r[2] for r in ring], False


def tetrarings(
    t: Tetrahedrization, c: Optional[Classification] = None, edges=None
) -> List[Tetraring]:
    """Ordered tetrahedron rings of the requested edges (default: all)."""
    if edges is None:
        edges = range(len(t.edges))
    first = np.full(len(t.edges), -1, dtype=np.int64)
    te = t.tet_edges
    first[te[::-1].reshape(-1)] = np.repeat(np.arange(len(t.tets))[::-1], 6)
    out = []
    for e in edges:
        e = int(e)
        i, j = (int(v) for v in t.edges[e])
        ring_t, ring_l, complete = _ring(t, int(first[e]), i, j)
        arcs, cyc = (), ()
        if c is not None:
            arcs, cyc = _arcs([bool(c.tet_in[x]) for x in ring_t], complete)
        out.append(Tetraring(e, (i, j), tuple(ring_t), tuple(int(v) for v in ring_l), complete, arcs, cyc))
    return out


def _arcs(member, complete):
    m = len(member)
    if complete and all(member):
        return (tuple(range(m)),), (True,)
    start = 0
    if complete:
        start = next(s for s in range(m) if not member[s])
    arcs, run = [], []
    for s in range(m):
        idx = (start + s) % m
        if member[idx]:
            run.append(idx)
        elif run:
            arcs.append(tuple(run))
            run = []
    if run:
        arcs.append(tuple(run))
    return tuple(arcs), tuple(False for _ in arcs)
