"""Synthetic molecular fixtures for tests, benchmarks and examples."""

from __future__ import annotations

from typing import List

import numpy as np
from scipy.spatial import cKDTree

from .frame import MolecularFrame

PROTEIN_RADII = np.array([1.52, 1.55, 1.7, 1.8])
PROTEIN_FREQ = np.array([0.22, 0.17, 0.58, 0.03])


def random_cluster(n: int, box: float = 20.0, rmin: float = 1.0, rmax: float = 2.0, seed: int = 0) -> MolecularFrame:
    """Uniform random centers in a cube with uniform random radii."""
    rng = np.random.default_rng(seed)
    P = rng.uniform(0.0, box, (n, 3))
    R = rng.uniform(rmin, rmax, n)
    return MolecularFrame(P, R)


def compact_molecule(n: int, spacing: float = 2.6, jitter: float = 0.3, residue_size: int = 8, seed: int = 0) -> MolecularFrame:
    """A dense globule of overlapping atoms with protein-like radii.

    Centers are a jittered cubic grid cut to a ball and ordered along a
    serpentine path, so consecutive atoms (one residue) are spatially close.
    """
    rng = np.random.default_rng(seed)
    R0 = spacing * (3.0 * n / (4.0 * np.pi)) ** (1.0 / 3.0) + 2.0 * spacing
    m = int(np.ceil(R0 / spacing))
    g = np.arange(-m, m + 1)
    ijk = np.array(np.meshgrid(g, g, g, indexing="ij")).reshape(3, -1).T
    d = np.linalg.norm(ijk, axis=1)
    ijk = ijk[np.argsort(d, kind="stable")[:n]]
    # serpentine ordering: sort by x, then y (alternating), then z (alternating)
    x, y, z = ijk.T
    ys = np.where(x % 2 == 0, y, -y)
    zs = np.where((x + y) % 2 == 0, z, -z)
    order = np.lexsort((zs, ys, x))
    ijk = ijk[order]
    P = ijk * spacing + rng.normal(0.0, jitter, (n, 3))
    R = rng.choice(PROTEIN_RADII, size=n, p=PROTEIN_FREQ)
    labels = np.array([f"R{k // residue_size + 1}" for k in range(n)], dtype=object)
    return MolecularFrame(P, R, labels)


def jitter_frames(frame: MolecularFrame, n_frames: int, sigma: float = 0.2, seed: int = 0) -> List[MolecularFrame]:
    """Thermal-noise copies of a frame (same atoms, perturbed centers)."""
    rng = np.random.default_rng(seed)
    return [
        MolecularFrame(frame.centers + rng.normal(0.0, sigma, frame.centers.shape), frame.radii, frame.labels, frame.solvent, index=k)
        for k in range(n_frames)
    ]


def solvate(frame: MolecularFrame, spacing: float = 3.0, probe: float = 1.4, layers: int = 3, seed: int = 0) -> MolecularFrame:
    """Surround a frame with a shell of solvent spheres.

    Solvent centers sit on a jittered grid, farther than ``r + 0.9 probe``
    from every solute atom of radius ``r`` and within ``layers * spacing`` of
    its surface.
    """
    rng = np.random.default_rng(seed)
    P, R = frame.centers, frame.radii
    lo = P.min(axis=0) - layers * spacing - R.max()
    hi = P.max(axis=0) + layers * spacing + R.max()
    axes = [np.arange(a, b + spacing, spacing) for a, b in zip(lo, hi)]
    G = np.array(np.meshgrid(*axes, indexing="ij")).reshape(3, -1).T
    G = G + rng.uniform(-0.15, 0.15, G.shape) * spacing
    tree = cKDTree(P)
    d, idx = tree.query(G)
    gap = d - R[idx]
    keep = (gap > 0.9 * probe) & (gap < layers * spacing)
    S = G[keep]
    labels = None
    if frame.labels is not None:
        labels = np.concatenate([frame.labels, np.array([f"HOH{k + 1}" for k in range(len(S))], dtype=object)])
    solvent = np.concatenate([np.zeros(len(P), bool), np.ones(len(S), bool)])
    return MolecularFrame(np.concatenate([P, S]), np.concatenate([R, np.full(len(S), probe)]), labels, solvent, index=frame.index)
