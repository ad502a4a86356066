"""Regular (weighted Delaunay) tetrahedrization.

The triangulation is the lower convex hull of the points lifted to
``(p, |p|^2 - w)`` in four dimensions, computed with Qhull.  Cospherical
configurations (cubic lattices, cube corners) are resolved by a tiny
deterministic perturbation of the lifted coordinate, which is equivalent to a
symbolic weight perturbation: the result is a valid regular triangulation of
the unperturbed input whenever the input is degenerate only up to ties.

The lifted coordinate is perturbed, never the centers, so all downstream
geometry is evaluated on the exact input.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .geometry import DegenerateInputError

log = logging.getLogger(__name__)

# Local edge and face numbering inside a tetrahedron (a, b, c, d).
TET_EDGES = np.array([[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])
# The two vertices opposite each local edge, ordered so that
# (e0, e1, k, l) is an even permutation of (0, 1, 2, 3).
TET_EDGE_OPP = np.array([[2, 3], [3, 1], [1, 2], [0, 3], [2, 0], [0, 1]])
# Face opposite local vertex k.
TET_FACES = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])

# (relative perturbation, qhull options) tried in order
_ATTEMPTS = (
    (1e-9, "Qt Q0"),
    (1e-8, "Qt Q0"),
    (1e-7, "Qt Q0"),
    (1e-9, "Qt"),
    (1e-6, "Qt"),
)


class DimensionError(DegenerateInputError):
    """Fewer than four points, or all centers coplanar."""


class DuplicatePointError(DegenerateInputError):
    """Two points share both center and weight."""


def _unique_rows(keys: np.ndarray):
    """Sorted unique rows of a small-int array and the inverse map."""
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    return uniq, inv.reshape(-1)


@dataclass(frozen=True, eq=False)
class Tetrahedrization:
    """Regular tetrahedrization with adjacency.

    Attributes
    ----------
    centers : ndarray (n, 3)
    weights : ndarray (n,)
    tets : ndarray (T, 4)
        Positively oriented vertex quadruples.
    neighbors : ndarray (T, 4)
        ``neighbors[t, k]`` is the tetrahedron across the face opposite local
        vertex ``k``, or -1 on the convex hull.
    redundant : ndarray (n,) of bool
        Points that are not vertices (power-hidden by the others).
    """

    centers: np.ndarray
    weights: np.ndarray
    tets: np.ndarray
    neighbors: np.ndarray
    redundant: np.ndarray
    options: str = field(default="")

    @property
    def n_points(self) -> int:
        return len(self.centers)

    # -- edges ------------------------------------------------------------
    @cached_property
    def _edge_table(self):
        e = np.sort(self.tets[:, TET_EDGES].reshape(-1, 2), axis=1)
        uniq, inv = _unique_rows(e)
        return uniq, inv.reshape(-1, 6)

    @property
    def edges(self) -> np.ndarray:
        """Unique edges ``(i, j)`` with ``i < j``, lexicographically sorted."""
        return self._edge_table[0]

    @property
    def tet_edges(self) -> np.ndarray:
        """Edge ids of each tetrahedron in :data:`TET_EDGES` order."""
        return self._edge_table[1]

    # -- triangles ----------------------------------------------------------
    @cached_property
    def _tri_table(self):
        f = np.sort(self.tets[:, TET_FACES].reshape(-1, 3), axis=1)
        uniq, inv = _unique_rows(f)
        inv = inv.reshape(-1, 4)
        tri_tets = np.full((len(uniq), 2), -1, dtype=np.int64)
        tri_opp = np.full((len(uniq), 2), -1, dtype=np.int64)
        flat = inv.reshape(-1)
        tet_id = np.repeat(np.arange(len(self.tets)), 4)
        opp = self.tets.reshape(-1)
        order = np.argsort(flat, kind="stable")
        fs = flat[order]
        first = np.ones(len(fs), dtype=bool)
        first[1:] = fs[1:] != fs[:-1]
        slot = np.where(first, 0, 1)
        tri_tets[fs, slot] = tet_id[order]
        tri_opp[fs, slot] = opp[order]
        return uniq, inv, tri_tets, tri_opp

    @property
    def triangles(self) -> np.ndarray:
        """Unique triangles ``(i, j, k)`` with ``i < j < k``."""
        return self._tri_table[0]

    @property
    def tet_triangles(self) -> np.ndarray:
        """Triangle id of the face opposite each local vertex."""
        return self._tri_table[1]

    @property
    def triangle_tets(self) -> np.ndarray:
        """The one or two tetrahedra incident to each triangle (-1 padded)."""
        return self._tri_table[2]

    @property
    def triangle_opposite(self) -> np.ndarray:
        """Vertex opposite the triangle in each incident tetrahedron."""
        return self._tri_table[3]

    @cached_property
    def triangle_edges(self) -> np.ndarray:
        """Edge ids of ``(i, j)``, ``(i, k)``, ``(j, k)`` for each triangle."""
        f = self.triangles
        keys = np.concatenate([f[:, [0, 1]], f[:, [0, 2]], f[:, [1, 2]]])
        idx = _lookup_edges(self.edges, keys, self.n_points)
        return idx.reshape(3, -1).T

    # -- hull -----------------------------------------------------------------
    @cached_property
    def hull_triangles(self) -> np.ndarray:
        return self.triangle_tets[:, 1] < 0

    @cached_property
    def hull_edges(self) -> np.ndarray:
        mask = np.zeros(len(self.edges), dtype=bool)
        mask[self.triangle_edges[self.hull_triangles].reshape(-1)] = True
        return mask

    @cached_property
    def hull_marks(self) -> np.ndarray:
        """Per-point flag: vertex on the convex hull."""
        mask = np.zeros(self.n_points, dtype=bool)
        mask[self.triangles[self.hull_triangles].reshape(-1)] = True
        return mask

    def euler_characteristic(self) -> int:
        nv = int(np.count_nonzero(~self.redundant))
        return nv - len(self.edges) + len(self.triangles) - len(self.tets)


def _lookup_edges(edges: np.ndarray, keys: np.ndarray, n: int) -> np.ndarray:
    code = edges[:, 0].astype(np.int64) * n + edges[:, 1]
    q = keys[:, 0].astype(np.int64) * n + keys[:, 1]
    pos = np.searchsorted(code, q)
    if np.any(pos >= len(code)) or np.any(code[np.minimum(pos, len(code) - 1)] != q):
        raise KeyError("edge not in triangulation")
    return pos


def lookup_edges(t: Tetrahedrization, keys) -> np.ndarray:
    """Edge ids of sorted vertex pairs ``keys``."""
    keys = np.sort(np.atleast_2d(np.asarray(keys, dtype=np.int64)), axis=1)
    return _lookup_edges(t.edges, keys, t.n_points)


def lookup_triangles(t: Tetrahedrization, keys) -> np.ndarray:
    """Triangle ids of vertex triples ``keys``."""
    keys = np.sort(np.atleast_2d(np.asarray(keys, dtype=np.int64)), axis=1)
    n = t.n_points
    code = (t.triangles[:, 0] * n + t.triangles[:, 1]) * n + t.triangles[:, 2]
    q = (keys[:, 0] * n + keys[:, 1]) * n + keys[:, 2]
    pos = np.searchsorted(code, q)
    if np.any(pos >= len(code)) or np.any(code[np.minimum(pos, len(code) - 1)] != q):
        raise KeyError("triangle not in triangulation")
    return pos


def _orient(P, tets):
    a = P[tets[:, 0]]
    return np.einsum(
        "ij,ij->i", P[tets[:, 1]] - a, np.cross(P[tets[:, 2]] - a, P[tets[:, 3]] - a)
    )


def _validate(centers, weights):
    P = np.asarray(centers, dtype=float)
    W = np.asarray(weights, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or W.shape != (len(P),):
        raise ValueError("centers must be (n, 3) and weights (n,)")
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(W))):
        raise ValueError("non-finite coordinates or weights")
    if len(P) < 4:
        raise DimensionError(f"need at least 4 points, got {len(P)}")
    X = P - P.mean(axis=0)
    s = np.linalg.svd(X, compute_uv=False)
    if s[2] <= 1e-12 * max(s[0], 1.0):
        raise DimensionError("all centers are coplanar")
    key = np.concatenate([P, W[:, None]], axis=1)
    _, counts = np.unique(key, axis=0, return_counts=True)
    if np.any(counts > 1):
        raise DuplicatePointError("duplicate centers with equal weights")
    _, counts = np.unique(P, axis=0, return_counts=True)
    if np.any(counts > 1):
        # same center, different weight: the lighter one is redundant and
        # handled by the lifting; only exact duplicates are an error
        log.debug("coincident centers with distinct weights")
    return P, W


def is_flat(centers) -> bool:
    """True for fewer than four centers or centers without full affine span."""
    P = np.asarray(centers, dtype=float)
    if len(P) < 4:
        return True
    s = np.linalg.svd(P - P.mean(axis=0), compute_uv=False)
    return bool(s[2] <= 1e-12 * max(s[0], 1.0))


def enclose(centers, weights, w: float = 0.0):
    """Append four zero-weight ghost points around a flat configuration.

    The ghosts sit on a regular tetrahedron far enough away that their
    radical planes with every real point lie outside all balls at weight
    ``w``; the Laguerre-Intersection cells of the real points are unchanged.
    Returns the padded centers and weights.
    """
    P = np.asarray(centers, dtype=float)
    W = np.asarray(weights, dtype=float)
    c = P.mean(axis=0)
    ext = float(np.linalg.norm(P - c, axis=1).max())
    rmax = float(np.sqrt(max(W.max() + w, 0.0)))
    D = 2.0 * (ext + rmax + np.sqrt(max(w, 0.0))) + 10.0
    g = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) / np.sqrt(3.0)
    return np.concatenate([P, c + D * g]), np.concatenate([W, np.zeros(4)])


def build(centers, weights, seed: int = 0) -> Tetrahedrization:
    """Build the regular tetrahedrization of weighted points.

    Parameters
    ----------
    centers : array_like (n, 3)
    weights : array_like (n,)
    seed : int
        Seed of the deterministic lift perturbation.

    Raises
    ------
    DimensionError, DuplicatePointError
    """
    P, W = _validate(centers, weights)
    n = len(P)
    X = P - P.mean(axis=0)
    z = np.einsum("ij,ij->i", X, X) - (W - W.mean())
    scale = float(np.ptp(z)) + float(np.ptp(X, axis=0).max()) ** 2 + 1.0
    u = np.random.default_rng(seed).random(n)
    last_err = None
    for rel, opts in _ATTEMPTS:
        lifted = np.empty((n + 1, 4))
        lifted[:n, :3] = X
        lifted[:n, 3] = z + rel * scale * u
        lifted[n] = (0.0, 0.0, 0.0, lifted[:n, 3].max() + scale)
        try:
            hull = ConvexHull(lifted, qhull_options=opts)
        except QhullError as err:
            last_err = err
            continue
        t = _extract(hull, P, n)
        if t is None:
            continue
        tets, nbrs = t
        redundant = np.ones(n, dtype=bool)
        redundant[tets.reshape(-1)] = False
        return Tetrahedrization(P, W, tets, nbrs, redundant, opts)
    raise DegenerateInputError(f"could not build a valid triangulation: {last_err}")


def _extract(hull, P, n):
    simp = hull.simplices
    eq = hull.equations
    lower = (eq[:, 3] < 0) & ~np.any(simp == n, axis=1)
    ids = np.flatnonzero(lower)
    tets = simp[ids].astype(np.int64)
    vol = _orient(P, tets)
    scale = np.ptp(P, axis=0).max() ** 3
    if np.any(np.abs(vol) <= 1e-14 * scale):
        return None
    remap = np.full(len(simp), -1, dtype=np.int64)
    remap[ids] = np.arange(len(ids))
    nbrs = remap[hull.neighbors[ids]]
    neg = vol < 0
    tets[neg] = tets[neg][:, [0, 1, 3, 2]]
    nbrs[neg] = nbrs[neg][:, [0, 1, 3, 2]]
    # canonical order: sort tets by vertex tuple for determinism
    order = np.lexsort(tets[:, ::-1].T)
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    tets = tets[order]
    nbrs = nbrs[order]
    nbrs = np.where(nbrs >= 0, inv[np.maximum(nbrs, 0)], -1)
    if not _consistent(tets, nbrs):
        return None
    return tets, nbrs


def _consistent(tets, nbrs) -> bool:
    """Every interior face is shared by exactly two tetrahedra, symmetrically."""
    T = len(tets)
    f = np.sort(tets[:, TET_FACES].reshape(-1, 3), axis=1)
    _, counts = np.unique(f, axis=0, return_counts=True)
    if np.any(counts > 2):
        return False
    has = nbrs >= 0
    src = np.repeat(np.arange(T), 4).reshape(T, 4)
    back = nbrs[np.where(has, nbrs, 0)]
    ok = np.any(back == src[:, :, None], axis=2)
    return bool(np.all(ok[has])) and int(np.count_nonzero(has)) == 2 * int(np.count_nonzero(counts == 2))
