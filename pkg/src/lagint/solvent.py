"""Fitting a uniform solvent parameter against reference Laguerre quantities.

For a grid of solvent weights ``w_k = k dw`` (or radius increments
``r_k = k dr``), the Laguerre-Intersection quantities of solute-only frames
are compared with reference values (typically Laguerre quantities of the
same frames with explicit solvent).  Per frame the error of a family is the
mean absolute (or squared) deviation over its entities, skipping entities
that are zero in both.  The grid index minimizing the frame-averaged error is
the fitted parameter.

In weight mode the triangulation of each frame is built once and reused for
every ``k``, since a uniform weight shift does not change it.  Radius mode
changes the relative weights and rebuilds for every ``k``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from .frame import MolecularFrame
from .intersection import APEX_TOL, LIReport, assemble, drop_ghosts, filtration_for
from .laguerre import CellReport, interior_cell_quantities

FAMILIES = ("LV_res", "LV_atom", "LS_atom", "LS_interres", "LSAS_res")
BASE_RADIUS = 1.7


class SweepError(ValueError):
    """Frames or reference data are inconsistent."""


def radius_grid(dw: float, k_max: int, r0: float = BASE_RADIUS) -> float:
    """Radius step whose final expanded weight matches the weight grid.

    Solves ``r0^2 + k_max dw = (r0 + k_max dr)^2`` for ``dr``.
    """
    if dw <= 0 or k_max < 1:
        raise ValueError("need dw > 0 and k_max >= 1")
    return (np.sqrt(r0 * r0 + k_max * dw) - r0) / k_max


@dataclass(frozen=True)
class ParameterGrid:
    """Grid of solvent parameters ``k = 0 .. k_max``.

    ``mode == "weight"`` adds ``k dw`` to every weight; ``mode == "radius"``
    adds ``k dr`` to every radius, with ``dr`` coupled to ``dw`` by
    :func:`radius_grid`.
    """

    dw: float = 0.1
    k_max: int = 40
    mode: str = "weight"
    r0: float = BASE_RADIUS

    def __post_init__(self):
        if self.mode not in ("weight", "radius"):
            raise ValueError(f"unknown mode {self.mode!r}")
        radius_grid(self.dw, self.k_max, self.r0)

    @property
    def dr(self) -> float:
        return radius_grid(self.dw, self.k_max, self.r0)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_max + 1)

    @property
    def values(self) -> np.ndarray:
        """Parameter value at each ``k`` (Å^2 for weights, Å for radii)."""
        step = self.dw if self.mode == "weight" else self.dr
        return self.ks * step


# family -> entity key -> value; keys are residue labels, atom indices as
# strings, or "a|b" residue pairs
Quantities = Dict[str, Dict[str, float]]


def li_quantities(report: LIReport) -> Quantities:
    """The five comparison families of a Laguerre-Intersection report."""
    res = report.residues
    return {
        "LV_res": dict(zip(res, report.residue_volume.tolist())),
        "LV_atom": _atoms(report.volume),
        "LS_atom": _atoms(report.area),
        "LS_interres": {_pair_key(k): v for k, v in report.interresidue_area.items()},
        "LSAS_res": dict(zip(res, report.residue_sphere.tolist())),
    }


def laguerre_quantities(report: CellReport) -> Quantities:
    """The five comparison families of a solvated Laguerre report."""
    res = report.residues
    return {
        "LV_res": dict(zip(res, report.residue_volume.tolist())),
        "LV_atom": _atoms(report.volume),
        "LS_atom": _atoms(report.area),
        "LS_interres": {_pair_key(k): v for k, v in report.interresidue_area.items()},
        "LSAS_res": dict(zip(res, report.residue_solvent_area.tolist())),
    }


def _atoms(values) -> Dict[str, float]:
    return {str(i): v for i, v in enumerate(values.tolist())}


def _pair_key(pair) -> str:
    """Order-independent key ``"a|b"`` of a residue pair."""
    a, b = sorted(str(x) for x in pair)
    return f"{a}|{b}"


def reference_from_solvated(frame: MolecularFrame) -> Quantities:
    """Reference quantities from a frame with explicit solvent atoms."""
    if frame.solvent is None or not frame.solvent.any():
        raise SweepError(f"frame {frame.index} has no solvent atoms")
    rep = interior_cell_quantities(frame.centers, frame.weights, frame.solvent, frame.labels)
    return laguerre_quantities(rep)


def frame_errors(li: Mapping, ref: Mapping) -> Tuple[float, float, int]:
    """Mean absolute and mean squared deviation over masked entities.

    Entities missing on one side count as zero; entities that are zero on
    both sides are skipped.

    Returns
    -------
    eps1, eps2, n_bar : float, float, int
        ``eps1`` and ``eps2`` are NaN when ``n_bar == 0``.
    """
    keys = list(dict.fromkeys(list(li) + list(ref)))
    a = np.array([float(li.get(k, 0.0)) for k in keys])
    b = np.array([float(ref.get(k, 0.0)) for k in keys])
    mask = (a != 0.0) | (b != 0.0)
    nbar = int(np.count_nonzero(mask))
    if nbar == 0:
        return float("nan"), float("nan"), 0
    d = a[mask] - b[mask]
    return float(np.abs(d).sum() / nbar), float((d * d).sum() / nbar), nbar


def _reference_average(li: Mapping, ref: Mapping) -> float:
    keys = list(dict.fromkeys(list(li) + list(ref)))
    vals = [(float(li.get(k, 0.0)), float(ref.get(k, 0.0))) for k in keys]
    kept = [b for a, b in vals if a != 0.0 or b != 0.0]
    return float(np.mean(kept)) if kept else float("nan")


def convergence_trace(eps: np.ndarray) -> np.ndarray:
    """Running optimum: after frame ``i``, the argmin over ``k`` of the mean
    error of frames ``0..i``.  NaN frames are skipped; ties go to smaller ``k``.
    """
    eps = np.asarray(eps, dtype=float)
    valid = ~np.isnan(eps)
    csum = np.cumsum(np.where(valid, eps, 0.0), axis=0)
    cnt = np.cumsum(valid, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = csum / cnt
    mean = np.where(cnt > 0, mean, np.inf)
    return np.argmin(mean, axis=1)


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Errors of every family at every grid index.

    Attributes
    ----------
    grid : the parameter grid
    eps1, eps2 : per family, (frames, K) arrays of per-frame errors
    average : per family, (frames, K) arrays of masked reference averages
    n_builds : triangulations built during the sweep
    """

    grid: ParameterGrid
    eps1: Dict[str, np.ndarray]
    eps2: Dict[str, np.ndarray]
    average: Dict[str, np.ndarray]
    n_builds: int = 0
    families: Tuple[str, ...] = field(default=FAMILIES)

    def E1(self, family: str) -> np.ndarray:
        return np.nanmean(self.eps1[family], axis=0)

    def E2(self, family: str) -> np.ndarray:
        return np.sqrt(np.nanmean(self.eps2[family], axis=0))

    def av(self, family: str) -> np.ndarray:
        return np.nanmean(self.average[family], axis=0)

    def optimum(self, family: str, norm: str = "E1") -> int:
        err = self.E1(family) if norm == "E1" else self.E2(family)
        return int(np.argmin(err))

    def trace(self, family: str, norm: str = "E1") -> np.ndarray:
        eps = self.eps1[family] if norm == "E1" else self.eps2[family]
        return convergence_trace(eps)

    def rows(self):
        """Plot-ready table rows ``(family, k, parameter, E1, E2, av, E1/av, E2/av)``."""
        out = []
        vals = self.grid.values
        for fam in self.families:
            e1, e2, av = self.E1(fam), self.E2(fam), self.av(fam)
            for k in self.grid.ks:
                out.append((fam, int(k), float(vals[k]), float(e1[k]), float(e2[k]), float(av[k]),
                            float(e1[k] / av[k]), float(e2[k] / av[k])))
        return out


def _frame_sweep(frame: MolecularFrame, ref: Quantities, grid: ParameterGrid, families, tol):
    K = grid.k_max + 1
    e1 = {f: np.full(K, np.nan) for f in families}
    e2 = {f: np.full(K, np.nan) for f in families}
    av = {f: np.full(K, np.nan) for f in families}
    n = len(frame)
    builds = 0
    filt = None
    for k in grid.ks:
        if grid.mode == "weight":
            if filt is None:
                filt = filtration_for(frame.centers, frame.weights, float(grid.values[-1]))
                builds += 1
            rep = assemble(filt, float(grid.values[k]), None, tol)
        else:
            r = frame.radii + grid.values[k]
            filt = filtration_for(frame.centers, r * r)
            builds += 1
            rep = assemble(filt, 0.0, None, tol)
        rep = drop_ghosts(rep, n, frame.labels)
        q = li_quantities(rep)
        for fam in families:
            a, b, nbar = frame_errors(q[fam], ref.get(fam, {}))
            if nbar == 0:
                warnings.warn(f"frame {frame.index}: no entities for {fam} at k={k}")
                continue
            e1[fam][k], e2[fam][k] = a, b
            av[fam][k] = _reference_average(q[fam], ref.get(fam, {}))
    return e1, e2, av, builds


def sweep(
    frames: Sequence[MolecularFrame],
    reference: Sequence[Quantities],
    grid: ParameterGrid = ParameterGrid(),
    families: Sequence[str] = FAMILIES,
    threads: int = 1,
    tol: float = APEX_TOL,
) -> SweepResult:
    """Errors of Laguerre-Intersection quantities over a parameter grid.

    Parameters
    ----------
    frames : solute-only frames with identical atom sets
    reference : per-frame reference quantities (see :func:`li_quantities`)
    grid : parameter grid
    families : subset of :data:`FAMILIES`
    threads : frames evaluated concurrently
    """
    frames = list(frames)
    if not frames:
        raise SweepError("no frames")
    if len(reference) != len(frames):
        raise SweepError(f"{len(frames)} frames but {len(reference)} reference frames")
    n0 = len(frames[0])
    for k, fr in enumerate(frames):
        if len(fr) != n0:
            raise SweepError(f"frame {k} has {len(fr)} atoms, expected {n0}")
    unknown = set(families) - set(FAMILIES)
    if unknown:
        raise SweepError(f"unknown quantity families: {sorted(unknown)}")

    def work(k):
        return _frame_sweep(frames[k], reference[k], grid, families, tol)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, range(len(frames))))
    else:
        results = [work(k) for k in range(len(frames))]
    eps1 = {f: np.stack([r[0][f] for r in results]) for f in families}
    eps2 = {f: np.stack([r[1][f] for r in results]) for f in families}
    avg = {f: np.stack([r[2][f] for r in results]) for f in families}
    return SweepResult(grid, eps1, eps2, avg, sum(r[3] for r in results), tuple(families))
