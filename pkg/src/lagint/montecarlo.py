"""Monte-Carlo estimates of Laguerre-Intersection volumes and areas.

Samples are drawn uniformly in the ball of an atom, on its sphere, or on its
intersection discs with neighboring balls, and counted when the atom is the
power-closest generator (and, for sphere samples, when no other ball covers
the point).  Only balls that overlap the sampled ball can compete, since a
point inside ``B_j`` has negative power to ``j``.

Every (atom, quantity) pair draws from its own counter-based Philox stream,
so estimates are reproducible regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy.spatial import cKDTree

from .geometry import FOUR_PI

QUANTITIES = {"liv": 0, "sas": 1, "plis": 2}
CHUNK = 1 << 17


@dataclass(frozen=True)
class MCEstimate:
    """Monte-Carlo estimate of a measure.

    Attributes
    ----------
    value : estimated measure (Å^3 or Å^2)
    n : number of samples
    f : hit fraction
    ci : relative half-width of the confidence interval; for ``f == 0`` the
        absolute half-width of the hit fraction instead
    total : measure of the sampled region
    """

    value: float
    n: int
    f: float
    ci: float
    total: float

    @property
    def half_width(self) -> float:
        """Absolute half-width of the interval around ``value``."""
        if self.f == 0.0:
            return self.ci * self.total
        return self.ci * self.value

    def contains(self, x: float) -> bool:
        return abs(x - self.value) <= self.half_width


def ci_bound(p: float, n: int, alpha: float = 0.01, strict: bool = True) -> float:
    """Relative half-width ``z sqrt(p (1 - p) / n) / p`` of a binomial proportion.

    Parameters
    ----------
    p : hit fraction
    n : sample count
    alpha : significance level; ``z`` is the ``1 - alpha/2`` normal quantile
    strict : require ``n p >= 10`` and ``n (1 - p) >= 10`` for the normal
        approximation

    For ``p == 0`` (and symmetrically ``p == 1``) the normal interval
    degenerates; the one-sided bound ``-ln(alpha) / n`` on the miss or hit
    fraction is returned instead.
    """
    if not 0.0 <= p <= 1.0 or n < 1:
        raise ValueError("need 0 <= p <= 1 and n >= 1")
    z = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    if p == 0.0 or p == 1.0:
        return -np.log(alpha) / n
    if strict and (n * p < 10 or n * (1 - p) < 10):
        raise ValueError(f"normal approximation invalid (n p = {n * p:.3g}, n (1 - p) = {n * (1 - p):.3g})")
    return z * np.sqrt(p * (1.0 - p) / n) / p


def _rng(seed: int, atom: int, quantity: str) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(int(atom), QUANTITIES[quantity]))
    return np.random.Generator(np.random.Philox(ss))


class _Scene:
    """Centers and shifted weights with a neighbor index."""

    def __init__(self, centers, weights, w):
        self.P = np.asarray(centers, dtype=float)
        self.W = np.asarray(weights, dtype=float) + w
        self.r = np.sqrt(np.maximum(self.W, 0.0))
        self.tree = cKDTree(self.P)
        self.rmax = float(self.r.max()) if len(self.r) else 0.0

    def neighbors(self, j):
        cand = self.tree.query_ball_point(self.P[j], self.r[j] + self.rmax)
        cand = np.array(sorted(c for c in cand if c != j and self.W[c] >= 0), dtype=np.int64)
        if len(cand) == 0:
            return cand
        d = np.linalg.norm(self.P[cand] - self.P[j], axis=1)
        return cand[d < self.r[j] + self.r[cand]]

    def wins(self, j, nb, x):
        """Mask of samples whose power-closest generator is ``j`` (ties to the lower index)."""
        pj = np.einsum("ij,ij->i", x - self.P[j], x - self.P[j]) - self.W[j]
        ok = np.ones(len(x), dtype=bool)
        for k in nb:
            pk = np.einsum("ij,ij->i", x - self.P[k], x - self.P[k]) - self.W[k]
            ok &= (pj < pk) | ((pj == pk) & (j < k))
        return ok

    def covered(self, j, nb, x):
        out = np.zeros(len(x), dtype=bool)
        for k in nb:
            out |= np.einsum("ij,ij->i", x - self.P[k], x - self.P[k]) < self.W[k]
        return out


def _ball(rng, n):
    out = np.empty((0, 3))
    while len(out) < n:
        m = int(1.95 * (n - len(out))) + 16
        u = rng.uniform(-1.0, 1.0, (m, 3))
        out = np.concatenate([out, u[np.einsum("ij,ij->i", u, u) <= 1.0]])
    return out[:n]


def _sphere(rng, n):
    g = rng.standard_normal((n, 3))
    return g / np.linalg.norm(g, axis=1)[:, None]


def _estimate(hits, n, total, alpha, strict):
    f = hits / n if n else 0.0
    ci = ci_bound(f, n, alpha, strict=strict) if n else 0.0
    return MCEstimate(f * total, n, f, ci, total)


def mc_liv(centers, weights, j, w=0.0, n=10 ** 6, seed=0, alpha=0.01, strict=False, scene=None):
    """Estimate the volume of ``L_j ∩ B_j(w)``."""
    sc = scene or _Scene(centers, weights, w)
    if sc.W[j] < 0:
        return MCEstimate(0.0, n, 0.0, 0.0, 0.0)
    rng = _rng(seed, j, "liv")
    nb = sc.neighbors(j)
    hits = 0
    for start in range(0, n, CHUNK):
        m = min(CHUNK, n - start)
        x = sc.P[j] + sc.r[j] * _ball(rng, m)
        hits += int(np.count_nonzero(sc.wins(j, nb, x)))
    return _estimate(hits, n, FOUR_PI / 3.0 * sc.r[j] ** 3, alpha, strict)


def mc_sas(centers, weights, j, w=0.0, n=10 ** 6, seed=0, alpha=0.01, strict=False, scene=None):
    """Estimate the solvent-accessible (spherical) area of atom ``j``."""
    sc = scene or _Scene(centers, weights, w)
    if sc.W[j] < 0:
        return MCEstimate(0.0, n, 0.0, 0.0, 0.0)
    rng = _rng(seed, j, "sas")
    nb = sc.neighbors(j)
    hits = 0
    for start in range(0, n, CHUNK):
        m = min(CHUNK, n - start)
        x = sc.P[j] + sc.r[j] * _sphere(rng, m)
        hits += int(np.count_nonzero(~sc.covered(j, nb, x)))
    return _estimate(hits, n, FOUR_PI * sc.r[j] ** 2, alpha, strict)


def mc_plis(centers, weights, j, w=0.0, n=10 ** 6, seed=0, alpha=0.01, strict=False, scene=None):
    """Estimate the planar area of the cell of atom ``j``.

    Each intersection disc of ``B_j`` with a neighbor ball receives a share of
    the ``n`` samples proportional to its area.
    """
    sc = scene or _Scene(centers, weights, w)
    nb = sc.neighbors(j) if sc.W[j] >= 0 else np.zeros(0, dtype=np.int64)
    if len(nb) == 0:
        return MCEstimate(0.0, 0, 0.0, 0.0, 0.0)
    rng = _rng(seed, j, "plis")
    a = sc.P[nb] - sc.P[j]
    d = np.linalg.norm(a, axis=1)
    axis = a / d[:, None]
    dj = (d * d + sc.W[j] - sc.W[nb]) / (2.0 * d)
    rho2 = np.maximum(sc.W[j] - dj * dj, 0.0)
    areas = np.pi * rho2
    total = float(areas.sum())
    if total == 0.0:
        return MCEstimate(0.0, 0, 0.0, 0.0, 0.0)
    counts = np.floor(n * areas / total).astype(np.int64)
    counts[np.argsort(-(n * areas / total - counts), kind="stable")[: n - counts.sum()]] += 1
    est = 0.0
    hits_tot = 0
    for k, m, ax, dk, r2, A in zip(nb, counts, axis, dj, rho2, areas):
        if m == 0:
            continue
        # orthonormal frame of the disc plane
        helper = np.eye(3)[np.argmin(np.abs(ax))]
        u = np.cross(ax, helper)
        u /= np.linalg.norm(u)
        v = np.cross(ax, u)
        hits = 0
        for start in range(0, m, CHUNK):
            mm = min(CHUNK, m - start)
            rad = np.sqrt(r2 * rng.random(mm))
            ang = 2.0 * np.pi * rng.random(mm)
            x = sc.P[j] + dk * ax + (rad * np.cos(ang))[:, None] * u + (rad * np.sin(ang))[:, None] * v
            others = nb[nb != k]
            hits += int(np.count_nonzero(sc.wins(j, others, x)))
        est += hits / m * A
        hits_tot += hits
    f = est / total
    ci = ci_bound(f, n, alpha, strict=strict) if f > 0 else ci_bound(0.0, n, alpha)
    return MCEstimate(est, n, f, ci, total)


def mc_all(centers, weights, w=0.0, n=10 ** 6, seed=0, alpha=0.01, atoms=None):
    """Estimates of all three quantities for the requested atoms.

    Returns a dict ``{"liv": [...], "sas": [...], "plis": [...]}`` of
    :class:`MCEstimate` lists in atom order.
    """
    sc = _Scene(centers, weights, w)
    atoms = range(len(sc.P)) if atoms is None else atoms
    out = {"liv": [], "sas": [], "plis": []}
    for j in atoms:
        out["liv"].append(mc_liv(None, None, j, w, n, seed, alpha, scene=sc))
        out["sas"].append(mc_sas(None, None, j, w, n, seed, alpha, scene=sc))
        out["plis"].append(mc_plis(None, None, j, w, n, seed, alpha, scene=sc))
    return out
