"""Volume and surface area of a union of balls by inclusion-exclusion.

The union ``B(w)`` is measured over the alpha complex with the classic
formula: the volume of the alpha tetrahedra plus, for every boundary simplex,
its outer-angle fraction of the corresponding ball, lens or triple
intersection, with alternating signs.  It deliberately shares nothing with
:mod:`lagint.intersection` beyond the filtration, so it serves as an
independent check of the per-atom partition.
"""

from __future__ import annotations

import numpy as np

from .alpha import Filtration, angle_coefficients, classify_at
from .geometry import (
    FOUR_PI,
    TWO_PI,
    WeightedPoint,
    batch_dihedral,
    batch_edge,
    batch_solid_angle,
    batch_triangle,
    cap_volume,
)


def triple_intersection(pi: WeightedPoint, pj: WeightedPoint, pk: WeightedPoint, w: float = 0.0):
    """Volume and boundary area of ``B_i ∩ B_j ∩ B_k`` (spheres meeting in two points).

    Uses the tetrahedron ``(p_i, p_j, p_k, p)`` with ``p`` one of the two
    sphere intersection points; its inner angles weight the single balls
    and the pairwise lenses.
    """
    P = np.stack([pi.center, pj.center, pk.center])
    W = np.array([pi.weight, pj.weight, pk.weight]) + w
    v, s = _triple(P[None], W[None])
    return float(v[0]), float(s[0])


def _triple(P, W):
    """Vectorized triple-intersection volume and area for ``(m, 3)`` triangles."""
    m = len(P)
    flat = P.reshape(-1, 3)
    Wf = W.reshape(-1)
    idx = np.arange(3 * m).reshape(m, 3)
    x, size, n = batch_triangle(flat, Wf, idx)
    apex = x + np.sqrt(np.maximum(-size, 0.0))[:, None] * n
    r = np.sqrt(W)
    vol = np.abs(np.einsum("ij,ij->i", P[:, 1] - P[:, 0], np.cross(P[:, 2] - P[:, 0], apex - P[:, 0]))) / 6.0
    area = np.zeros(m)
    for a in range(3):
        b, c = [k for k in range(3) if k != a]
        om = batch_solid_angle(P[:, b] - P[:, a], P[:, c] - P[:, a], apex - P[:, a])
        vol -= om * FOUR_PI / 3.0 * r[:, a] ** 3
        area -= om * FOUR_PI * r[:, a] ** 2
    for a, b in ((0, 1), (0, 2), (1, 2)):
        c = 3 - a - b
        ph = batch_dihedral(P[:, b] - P[:, a], P[:, c] - P[:, a], apex - P[:, a])
        e = np.array([[3 * k + a, 3 * k + b] for k in range(m)]).reshape(-1, 2)
        t, _, _ = batch_edge(flat, Wf, e)
        d = np.linalg.norm(P[:, b] - P[:, a], axis=1)
        hi = r[:, a] - t * d
        hj = r[:, b] - (1 - t) * d
        vol += ph * (cap_volume(r[:, a], hi) + cap_volume(r[:, b], hj))
        area += ph * TWO_PI * (r[:, a] * hi + r[:, b] * hj)
    return 2.0 * vol, 2.0 * area


def union_of_balls(f: Filtration, w: float = 0.0, tol: float = 1e-12):
    """Volume and area of the union of balls ``B_i(w)``.

    Returns
    -------
    volume, area : float
    """
    t = f.tri
    c = classify_at(f, w)
    omega, phi, c_tri = angle_coefficients(f, c)
    P = t.centers
    W = t.weights + w
    r = np.sqrt(np.where(c.vertex_in, W, 0.0))

    tets = t.tets[c.tet_in]
    a = P[tets[:, 0]]
    vol = float(
        np.sum(np.abs(np.einsum("ij,ij->i", P[tets[:, 1]] - a, np.cross(P[tets[:, 2]] - a, P[tets[:, 3]] - a))))
        / 6.0
    )
    vol += float(np.sum(omega * FOUR_PI / 3.0 * r ** 3))
    area = float(np.sum(omega * FOUR_PI * r ** 2))

    be = np.flatnonzero(phi != 0.0)
    e = t.edges[be]
    d = np.linalg.norm(P[e[:, 1]] - P[e[:, 0]], axis=1)
    ri, rj = r[e[:, 0]], r[e[:, 1]]
    # cap heights from the radical-plane distance, recomputed here
    di = (d * d + W[e[:, 0]] - W[e[:, 1]]) / (2.0 * d)
    hi, hj = ri - di, rj - (d - di)
    vol -= float(np.sum(phi[be] * (cap_volume(ri, hi) + cap_volume(rj, hj))))
    area -= float(np.sum(phi[be] * TWO_PI * (ri * hi + rj * hj)))

    bt = np.flatnonzero((c_tri != 0.0) & (f.triangle_size - w < -tol))
    if len(bt):
        tv = t.triangles[bt]
        v3, s3 = _triple(P[tv], W[tv])
        vol += float(np.sum(c_tri[bt] * v3))
        area += float(np.sum(c_tri[bt] * s3))
    return vol, area
