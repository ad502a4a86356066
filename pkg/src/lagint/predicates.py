"""Filtered exact predicates for weighted points.

Each predicate is evaluated in floating point first.  When the result is
within a conservative forward error bound of zero, it is recomputed exactly
with :class:`fractions.Fraction` (every double is an exact rational, so the
fallback is exact).  Remaining exact zeros of the power test are resolved by
a symbolic perturbation of the weights ordered by point index.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

INSIDE, ON, OUTSIDE = "inside", "on", "outside"

# Generous relative bound for 4x4 determinants of doubles (a few dozen ulps).
_EPS = 64 * np.finfo(float).eps


def _det_exact(rows) -> Fraction:
    """Exact determinant by fraction-based Gaussian elimination."""
    m = [[Fraction(v) for v in r] for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def _sign_filtered(rows) -> int:
    a = np.asarray(rows, dtype=float)
    d = np.linalg.det(a)
    # permanent of |a| bounds the magnitude of every term in the expansion
    bound = _EPS * _permanent_bound(np.abs(a))
    if abs(d) > bound:
        return int(np.sign(d))
    return int(np.sign(_det_exact(rows)))


def _permanent_bound(a) -> float:
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    return float(sum(a[0, j] * _permanent_bound(np.delete(a[1:], j, axis=1)) for j in range(n)))


def orient3d(a, b, c, d) -> int:
    """Sign of ``det[b - a, c - a, d - a]`` (+1 for positively oriented)."""
    rows = [[x, y, z, 1.0] for (x, y, z) in (a, b, c, d)]
    # det[[p, 1]] rows equals -det[b-a, c-a, d-a]
    return -_sign_filtered(rows)


def _lifted_rows(points, weights):
    rows = []
    for p, w in zip(points, weights):
        p = [float(v) for v in p]
        rows.append(p + [p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - float(w), 1.0])
    return rows


def _lifted_exact(points, weights):
    rows = []
    for p, w in zip(points, weights):
        f = [Fraction(float(v)) for v in p]
        rows.append(f + [f[0] * f[0] + f[1] * f[1] + f[2] * f[2] - Fraction(float(w)), Fraction(1)])
    return rows


def power_sphere_predicate(
    points: Sequence, weights: Sequence, query, query_weight: float,
    indices: Sequence[int] | None = None, query_index: int | None = None,
    perturb: bool = True,
) -> str:
    """Locate a weighted query point relative to the orthosphere of a tetrahedron.

    ``inside`` means the query has power smaller than the tetrahedron size at
    the tetrahedron's characteristic point, i.e. it conflicts with the
    tetrahedron in a regular triangulation.

    Parameters
    ----------
    points, weights : four centers and weights of the tetrahedron.
    query, query_weight : the query point.
    indices, query_index : global indices used for the symbolic perturbation.
        Defaults to ``0..3`` and ``4``.
    perturb : resolve exact ties symbolically; otherwise ``on`` may be returned.
    """
    pts = list(points) + [query]
    ws = list(weights) + [query_weight]
    o = orient3d(*points)
    if o == 0:
        raise ValueError("degenerate tetrahedron")
    rows = _lifted_rows(pts, ws)
    a = np.asarray(rows)
    d = np.linalg.det(a)
    if abs(d) > _EPS * _permanent_bound(np.abs(a)):
        s = int(np.sign(d))
    else:
        exact = _lifted_exact(pts, ws)
        s = int(np.sign(_det_exact(exact)))
        if s == 0:
            if not perturb:
                return ON
            s = _perturbed_sign(exact, list(indices or range(4)) + [4 if query_index is None else query_index])
    # det5 = -(power excess of query) * det4[p, 1], and det4[p, 1] = -orient
    return INSIDE if s * o < 0 else OUTSIDE


def _perturbed_sign(exact_rows, idx) -> int:
    """Sign of the lifted determinant after lowering lifts by ``eps**(rank)``.

    The point with the smallest global index receives the dominant
    perturbation, which is equivalent to raising its weight.
    """
    for r in np.argsort(idx, kind="stable"):
        minor = [[row[0], row[1], row[2], row[4]] for k, row in enumerate(exact_rows) if k != r]
        cof = (-1) ** (r + 3) * _det_exact(minor)
        if cof != 0:
            # d(det)/d(lift_r) = cof, and the lift decreases
            return -1 if cof > 0 else 1
    return 0
