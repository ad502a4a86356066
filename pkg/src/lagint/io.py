"""Structure ingestion, radii assignment and report serialization.

Two structure formats are read:

* a PDB subset: ``ATOM``/``HETATM`` records, ``MODEL``/``ENDMDL`` frames and
  ``TER``; the first alternate location of each atom wins.
* ``xyzr``: one atom per line, ``x y z r [name [residue [chain]]]``; blank
  lines separate frames and ``#`` starts a comment.

Reports are written as JSON or as sectioned CSV with floats at nine
significant digits, so output is byte-identical across runs.
"""

from __future__ import annotations

import csv
import io as _io
import json
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .frame import MolecularFrame

SOLVENT_NAMES = frozenset({"HOH", "WAT", "SOL", "H2O", "TIP", "TIP3", "TIP4", "T3P", "SPC"})
FLOAT_FMT = "{:.9g}"


class StructureError(ValueError):
    """Malformed structure or report input."""


@dataclass(frozen=True)
class RadiiTable:
    """Element-keyed radii (Å) with an explicit default."""

    radii: Dict[str, float]
    default: float = 1.7
    version: str = ""
    _warned: set = field(default_factory=set, compare=False, repr=False)

    @classmethod
    def load(cls, path=None) -> "RadiiTable":
        """Read a radii table; without ``path`` the packaged default is used."""
        if path is None:
            text = resources.files("lagint").joinpath("data/radii.json").read_text()
        else:
            text = Path(path).read_text()
        try:
            data = json.loads(text)
            radii = {str(k).upper(): float(v) for k, v in data["radii"].items()}
            default = float(data.get("default", 1.7))
        except (KeyError, TypeError, ValueError) as err:
            raise StructureError(f"invalid radii table: {err}") from err
        if default <= 0 or any(v <= 0 for v in radii.values()):
            raise StructureError("radii must be positive")
        return cls(radii, default, str(data.get("version", "")))

    def radius(self, element: str) -> float:
        key = element.strip().upper()
        if key in self.radii:
            return self.radii[key]
        if key not in self._warned:
            self._warned.add(key)
            warnings.warn(f"unknown element {element!r}; using default radius {self.default}")
        return self.default


def _element_from_name(name: str, radii: RadiiTable) -> str:
    letters = re.sub(r"[^A-Za-z]", "", name)
    if not letters:
        return ""
    if name[:1].isalpha() and len(name) == 4 and letters[:2].upper() in radii.radii:
        return letters[:2].upper()
    return letters[0].upper()


def _is_solvent(label: str) -> bool:
    res = label.split(":")[-1]
    return re.sub(r"-?\d+[A-Za-z]?$", "", res).upper() in SOLVENT_NAMES


def _component_labels(centers, radii) -> np.ndarray:
    """Residue labels ``_C<k>`` from connected components of overlapping balls."""
    n = len(centers)
    if n == 0:
        return np.zeros(0, dtype=object)
    tree = cKDTree(centers)
    pairs = tree.query_pairs(2.0 * float(np.max(radii)), output_type="ndarray")
    if len(pairs):
        d = np.linalg.norm(centers[pairs[:, 0]] - centers[pairs[:, 1]], axis=1)
        pairs = pairs[d < radii[pairs[:, 0]] + radii[pairs[:, 1]]]
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else coo_matrix((n, n))
    _, comp = connected_components(g, directed=False)
    # renumber components by first appearance
    first = {}
    for c in comp:
        first.setdefault(c, len(first))
    return np.array([f"_C{first[c] + 1}" for c in comp], dtype=object)


def _finish(index, centers, radii, labels, names, elements) -> MolecularFrame:
    P = np.asarray(centers, dtype=float).reshape(-1, 3)
    R = np.asarray(radii, dtype=float)
    lab = np.array(labels, dtype=object)
    missing = np.array([x is None for x in labels], dtype=bool)
    if missing.any():
        lab[missing] = _component_labels(P[missing], R[missing])
    solvent = np.array([_is_solvent(str(x)) for x in lab], dtype=bool)
    return MolecularFrame(P, R, lab, solvent, tuple(elements), tuple(names), index)


def parse_pdb(text: str, radii: RadiiTable, source: str = "<pdb>") -> List[MolecularFrame]:
    frames = []
    cur = None
    chosen_alt: Dict[tuple, str] = {}

    def flush():
        nonlocal cur
        if cur is not None and cur["centers"]:
            frames.append(_finish(len(frames), cur["centers"], cur["radii"], cur["labels"], cur["names"], cur["elements"]))
        cur = None

    for lineno, line in enumerate(text.splitlines(), 1):
        rec = line[:6].strip().upper()
        if rec == "MODEL":
            flush()
            cur = dict(centers=[], radii=[], labels=[], names=[], elements=[])
            chosen_alt = {}
        elif rec == "ENDMDL":
            flush()
        elif rec in ("ATOM", "HETATM"):
            if cur is None:
                cur = dict(centers=[], radii=[], labels=[], names=[], elements=[])
            if len(line) < 54:
                raise StructureError(f"{source}:{lineno}: truncated {rec} record")
            try:
                xyz = [float(line[30:38]), float(line[38:46]), float(line[46:54])]
            except ValueError:
                raise StructureError(f"{source}:{lineno}: malformed coordinates") from None
            if not all(np.isfinite(xyz)):
                raise StructureError(f"{source}:{lineno}: non-finite coordinates")
            name = line[12:16]
            alt = line[16]
            resname = line[17:20].strip()
            chain = line[21].strip()
            resseq = line[22:26].strip()
            icode = line[26].strip() if len(line) > 26 else ""
            key = (chain, resseq, icode, name.strip())
            if alt.strip():
                if chosen_alt.setdefault(key, alt) != alt:
                    continue
            element = line[76:78].strip() if len(line) >= 78 else ""
            if not element:
                element = _element_from_name(name, radii)
            label = None
            if resseq:
                label = f"{resname}{resseq}{icode}"
                label = f"{chain}:{label}" if chain else label
            cur["centers"].append(xyz)
            cur["radii"].append(radii.radius(element))
            cur["labels"].append(label)
            cur["names"].append(name.strip())
            cur["elements"].append(element.upper())
    flush()
    if not frames:
        raise StructureError(f"{source}: no atoms")
    _check_counts(frames, source)
    return frames


def parse_xyzr(text: str, source: str = "<xyzr>") -> List[MolecularFrame]:
    frames = []
    block: List[tuple] = []

    def flush():
        if block:
            P = [b[0] for b in block]
            frames.append(_finish(len(frames), P, [b[1] for b in block], [b[3] for b in block],
                                  [b[2] for b in block], ["" for _ in block]))
            block.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            flush()
            continue
        tok = line.split()
        if len(tok) < 4 or len(tok) > 7:
            raise StructureError(f"{source}:{lineno}: expected 'x y z r [name [residue [chain]]]'")
        try:
            x, y, z, r = (float(v) for v in tok[:4])
        except ValueError:
            raise StructureError(f"{source}:{lineno}: malformed number") from None
        if not (np.isfinite([x, y, z, r]).all() and r > 0):
            raise StructureError(f"{source}:{lineno}: coordinates must be finite and radius positive")
        name = tok[4] if len(tok) > 4 else "X"
        label = None
        if len(tok) > 5:
            label = f"{tok[6]}:{tok[5]}" if len(tok) > 6 else tok[5]
        block.append(((x, y, z), r, name, label))
    flush()
    if not frames:
        raise StructureError(f"{source}: no atoms")
    _check_counts(frames, source)
    return frames


def _check_counts(frames, source):
    n0 = len(frames[0])
    for fr in frames:
        if len(fr) != n0:
            raise StructureError(f"{source}: frame {fr.index} has {len(fr)} atoms, frame 0 has {n0}")


def parse_structure(path, fmt: Optional[str] = None, radii: Optional[RadiiTable] = None) -> List[MolecularFrame]:
    """Read all frames of a structure file.

    Parameters
    ----------
    path : file path
    fmt : ``"pdb"`` or ``"xyzr"``; inferred from the extension when omitted
    radii : radii table for PDB input (packaged default if omitted)
    """
    path = Path(path)
    fmt = fmt or detect_format(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as err:
        raise StructureError(f"{path}: {err}") from err
    if fmt == "pdb":
        return parse_pdb(text, radii or RadiiTable.load(), str(path))
    if fmt == "xyzr":
        return parse_xyzr(text, str(path))
    raise StructureError(f"unknown format {fmt!r}")


def detect_format(path) -> str:
    ext = Path(path).suffix.lower()
    if ext in (".pdb", ".ent"):
        return "pdb"
    if ext in (".xyzr", ".xyz"):
        return "xyzr"
    raise StructureError(f"{path}: cannot infer format from extension")


def write_xyzr(frames: Sequence[MolecularFrame]) -> str:
    """Serialize frames as xyzr with round-trip exact floats."""
    blocks = []
    for fr in frames:
        names = fr.names or ("X",) * len(fr)
        lines = []
        for k in range(len(fr)):
            x, y, z = (repr(float(v)) for v in fr.centers[k])
            parts = [x, y, z, repr(float(fr.radii[k])), str(names[k]) or "X"]
            if fr.labels is not None:
                lab = str(fr.labels[k])
                parts += [p for p in lab.split(":", 1)[::-1] if p]
            lines.append(" ".join(parts))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# reports


def _f(x) -> float:
    """Round to nine significant digits."""
    return float(FLOAT_FMT.format(float(x)))


def report_dict(report, frame: int = 0) -> dict:
    """Plain-data view of a Laguerre-Intersection report."""
    res = report.residues
    return {
        "frame": frame,
        "w": _f(report.w),
        "atoms": [
            {"index": i, "residue": res[report.residue_index[i]], "volume": _f(report.volume[i]),
             "sphere": _f(report.sphere[i]), "planar": _f(report.planar[i]), "area": _f(report.area[i])}
            for i in range(len(report.volume))
        ],
        "pairs": [
            {"i": int(a), "j": int(b), "area": _f(v)} for (a, b), v in zip(report.pairs, report.pair_area)
        ],
        "residues": [
            {"residue": r, "volume": _f(v), "sphere": _f(s)}
            for r, v, s in zip(res, report.residue_volume, report.residue_sphere)
        ],
        "interresidue": [
            {"a": a, "b": b, "area": _f(v)} for (a, b), v in report.interresidue_area.items()
        ],
    }


SECTIONS = (
    ("atoms", ("index", "residue", "volume", "sphere", "planar", "area")),
    ("pairs", ("i", "j", "area")),
    ("residues", ("residue", "volume", "sphere")),
    ("interresidue", ("a", "b", "area")),
)


def _cell(v) -> str:
    return FLOAT_FMT.format(v) if isinstance(v, float) else str(v)


def emit_report(reports, fmt: str = "json") -> bytes:
    """Serialize one or more reports (one per frame) as JSON or CSV."""
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    docs = [report_dict(r, k) for k, r in enumerate(reports)]
    if fmt == "json":
        return (json.dumps({"frames": docs}, indent=1) + "\n").encode()
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for name, cols in SECTIONS:
        buf.write(f"# {name}\n")
        w.writerow(("frame", "w") + cols)
        for d in docs:
            for row in d[name]:
                w.writerow([d["frame"], _cell(d["w"])] + [_cell(row[c]) for c in cols])
        buf.write("\n")
    return buf.getvalue().encode()


def parse_report(data: bytes) -> dict:
    """Inverse of the JSON form of :func:`emit_report`."""
    return json.loads(data.decode())


def emit_rows(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) if not isinstance(v, (bool, np.bool_)) else str(bool(v)).lower() for v in row])
    return buf.getvalue().encode()


SWEEP_HEADER = ("quantity", "k", "parameter", "E1", "E2", "av", "E1_ratio", "E2_ratio")


def emit_sweep(result, fmt: str = "csv") -> bytes:
    """Per-(quantity, k) error table of a sweep, with the optima."""
    rows = result.rows()
    if fmt == "csv":
        return emit_rows(SWEEP_HEADER, rows)
    doc = {
        "mode": result.grid.mode,
        "dw": _f(result.grid.dw),
        "dr": _f(result.grid.dr),
        "k_max": result.grid.k_max,
        "optimum": {f: {"E1": result.optimum(f, "E1"), "E2": result.optimum(f, "E2")} for f in result.families},
        "table": [dict(zip(SWEEP_HEADER, [r[0], r[1]] + [_f(v) for v in r[2:]])) for r in rows],
    }
    return (json.dumps(doc, indent=1) + "\n").encode()


def read_reference(path) -> List[dict]:
    """Per-frame reference quantities from ``{"frames": [{family: {key: value}}]}``."""
    try:
        data = json.loads(Path(path).read_text())
        frames = data["frames"]
        return [{fam: {str(k): float(v) for k, v in vals.items()} for fam, vals in fr.items()} for fr in frames]
    except (OSError, KeyError, TypeError, ValueError, AttributeError) as err:
        raise StructureError(f"{path}: invalid reference file: {err}") from err


def write_reference(frames: Sequence[dict]) -> bytes:
    doc = {"frames": [{fam: {k: _f(v) for k, v in vals.items()} for fam, vals in fr.items()} for fr in frames]}
    return (json.dumps(doc, indent=1, sort_keys=False) + "\n").encode()
