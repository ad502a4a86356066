"""Geometric primitives on weighted points.

A weighted point carries a center ``p'`` and a weight ``w`` (the squared
radius of its ball).  Everything here is expressed through the power distance
``|p' - x|^2 - w``; a uniform solvent shift ``w -> w + s`` moves every power by
``-s`` and leaves radical planes and characteristic-point centers unchanged.

The scalar functions take :class:`WeightedPoint` instances and mirror the
textbook definitions.  The ``batch_*`` functions are the vectorized versions
used by the assembly code; they take index arrays into shared center/weight
arrays so that no per-simplex Python objects are created.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

FOUR_PI = 4.0 * np.pi
TWO_PI = 2.0 * np.pi


class DegenerateInputError(ValueError):
    """Raised when a geometric construction is undefined for the input."""


@dataclass(frozen=True)
class WeightedPoint:
    """A ball given by its center (Å) and weight (radius squared, Å^2).

    The weight may be negative; ``radius`` is only defined for ``weight >= 0``.
    """

    center: np.ndarray
    weight: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3)
        if not np.all(np.isfinite(c)) or not np.isfinite(self.weight):
            raise ValueError("weighted point must have finite center and weight")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "weight", float(self.weight))

    @classmethod
    def from_radius(cls, center, radius: float) -> "WeightedPoint":
        return cls(center, float(radius) ** 2)

    @property
    def radius(self) -> float:
        if self.weight < 0:
            raise DegenerateInputError(f"imaginary radius (weight {self.weight})")
        return float(np.sqrt(self.weight))

    def shifted(self, w: float) -> "WeightedPoint":
        """Return the point with its weight increased by ``w``."""
        return WeightedPoint(self.center, self.weight + w)


@dataclass(frozen=True)
class CharacteristicPoint:
    """Minimal-power equipowerdistant point of a simplex.

    Attributes
    ----------
    center : ndarray, shape (3,)
    size : float
        Common power of ``center`` with respect to the simplex generators.
    t : float or None
        Edge parameter, ``center = p_i + t (p_j - p_i)``.  Only set for edges.
    """

    center: np.ndarray
    size: float
    t: Optional[float] = None


def power_distance(p: WeightedPoint, x) -> float:
    d = p.center - np.asarray(x, dtype=float)
    return float(d @ d - p.weight)


def edge_characteristic(pi: WeightedPoint, pj: WeightedPoint) -> CharacteristicPoint:
    a = pj.center - pi.center
    a2 = float(a @ a)
    if a2 == 0.0:
        raise DegenerateInputError("coincident edge centers")
    t = 0.5 * ((pi.weight - pj.weight) / a2 + 1.0)
    x = pi.center + t * a
    return CharacteristicPoint(x, t * t * a2 - pi.weight, t)


def triangle_characteristic(pi: WeightedPoint, pj: WeightedPoint, pk: WeightedPoint):
    """Characteristic point, unit normal and apex height of a triangle.

    Returns
    -------
    chp : CharacteristicPoint
    normal : ndarray, shape (3,)
        ``(p_j - p_i) x (p_k - p_i)`` normalized.
    apex_height : float or None
        ``sqrt(-size)`` when the three spheres meet in two points, else None.
    """
    P = np.stack([pi.center, pj.center, pk.center])
    W = np.array([pi.weight, pj.weight, pk.weight])
    x, size, n = batch_triangle(P, W, np.array([[0, 1, 2]]))
    if not np.isfinite(size[0]):
        raise DegenerateInputError("collinear triangle centers")
    h = float(np.sqrt(-size[0])) if size[0] < 0 else None
    return CharacteristicPoint(x[0], float(size[0])), n[0], h


def tetra_characteristic(pi, pj, pk, pl) -> CharacteristicPoint:
    P = np.stack([pi.center, pj.center, pk.center, pl.center])
    W = np.array([pi.weight, pj.weight, pk.weight, pl.weight])
    x, size = batch_tetra(P, W, np.array([[0, 1, 2, 3]]))
    if not np.isfinite(size[0]):
        raise DegenerateInputError("coplanar tetrahedron centers")
    return CharacteristicPoint(x[0], float(size[0]))


def _nonzero(*vs):
    for v in vs:
        if not np.any(np.asarray(v, dtype=float)):
            raise DegenerateInputError("zero vector")


def normalized_solid_angle(a, b, c) -> float:
    """Solid angle spanned by ``a, b, c`` as a fraction of 4π.

    Uses the two-argument arctangent so obtuse trihedra land in (1/4, 1/2).
    """
    _nonzero(a, b, c)
    return float(batch_solid_angle(*(np.asarray(v, float)[None] for v in (a, b, c)))[0])


def normalized_dihedral_angle(n_k, n_l) -> float:
    """Angle between two plane normals as a fraction of 2π.

    With ``n_k = a x b`` and ``n_l = a x c`` this is the inner dihedral angle
    along ``a`` between the half-planes containing ``b`` and ``c``.
    """
    _nonzero(n_k, n_l)
    n_k = np.asarray(n_k, float)
    n_l = np.asarray(n_l, float)
    return float(np.arctan2(np.linalg.norm(np.cross(n_k, n_l)), n_k @ n_l) / TWO_PI)


def tetra_volume(a, b, c) -> float:
    return float(abs(np.dot(a, np.cross(b, c))) / 6.0)


def cap_heights(pi: WeightedPoint, pj: WeightedPoint, w: float = 0.0):
    """Cap heights of the two balls cut by their radical plane.

    ``h_i`` is the height of the part of ball ``i`` lying on ``j``'s side of
    the plane, and vice versa.  Both lie in ``[0, 2r]``.
    """
    chp = edge_characteristic(pi, pj)
    if chp.size - w > 0:
        raise DegenerateInputError("spheres do not intersect")
    d = np.linalg.norm(pj.center - pi.center)
    ri = pi.shifted(w).radius
    rj = pj.shifted(w).radius
    return ri - chp.t * d, rj - (1.0 - chp.t) * d


# ---------------------------------------------------------------------------
# vectorized kernels


def dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def batch_edge(P, W, e):
    """Edge parameter, characteristic center and size for index pairs ``e``."""
    pi = P[e[:, 0]]
    a = P[e[:, 1]] - pi
    a2 = dot(a, a)
    t = 0.5 * ((W[e[:, 0]] - W[e[:, 1]]) / a2 + 1.0)
    x = pi + t[:, None] * a
    return t, x, t * t * a2 - W[e[:, 0]]


def batch_triangle(P, W, f):
    """Characteristic center, size and unit normal for index triples ``f``."""
    pi = P[f[:, 0]]
    a = P[f[:, 1]] - pi
    b = P[f[:, 2]] - pi
    aa, ab, bb = dot(a, a), dot(a, b), dot(b, b)
    ra = 0.5 * (aa + W[f[:, 0]] - W[f[:, 1]])
    rb = 0.5 * (bb + W[f[:, 0]] - W[f[:, 2]])
    det = aa * bb - ab * ab
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = (ra * bb - rb * ab) / det
        beta = (rb * aa - ra * ab) / det
        x = pi + alpha[:, None] * a + beta[:, None] * b
        n = np.cross(a, b)
        n = n / np.linalg.norm(n, axis=1)[:, None]
    d = x - pi
    return x, dot(d, d) - W[f[:, 0]], n


def batch_tetra(P, W, s):
    """Characteristic center and size for index quadruples ``s``."""
    pi = P[s[:, 0]]
    a = P[s[:, 1]] - pi
    b = P[s[:, 2]] - pi
    c = P[s[:, 3]] - pi
    ra = 0.5 * (dot(a, a) + W[s[:, 0]] - W[s[:, 1]])
    rb = 0.5 * (dot(b, b) + W[s[:, 0]] - W[s[:, 2]])
    rc = 0.5 * (dot(c, c) + W[s[:, 0]] - W[s[:, 3]])
    bc, ca, ab = np.cross(b, c), np.cross(c, a), np.cross(a, b)
    vol6 = dot(a, bc)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = (ra[:, None] * bc + rb[:, None] * ca + rc[:, None] * ab) / vol6[:, None]
    return pi + y, dot(y, y) - W[s[:, 0]]


def batch_solid_angle(a, b, c):
    """Normalized solid angles (fractions of 4π) of trihedra ``(a, b, c)``."""
    la = np.linalg.norm(a, axis=-1)
    lb = np.linalg.norm(b, axis=-1)
    lc = np.linalg.norm(c, axis=-1)
    num = np.abs(dot(a, np.cross(b, c)))
    den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la
    return np.arctan2(num, den) / TWO_PI


def batch_dihedral(e, u, v):
    """Inner dihedral angles (fractions of 2π) along ``e`` between ``u`` and ``v``."""
    nu = np.cross(e, u)
    nv = np.cross(e, v)
    return np.arctan2(np.linalg.norm(np.cross(nu, nv), axis=-1), dot(nu, nv)) / TWO_PI


def signed_area(c, p, q, normal):
    """Signed area of triangles ``(c, p, q)`` viewed along ``normal``."""
    return 0.5 * dot(np.cross(p - c, q - c), normal)


def cap_volume(r, h):
    """Volume of a spherical cap of height ``h`` on a ball of radius ``r``."""
    return np.pi * h * h * (r - h / 3.0)
