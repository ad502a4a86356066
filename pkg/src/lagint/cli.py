"""Command-line interface.

Exit codes: 0 success, 1 verification failure (``verify-mc``), 2 input error,
3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List

from . import io
from .frame import MolecularFrame
from .geometry import DegenerateInputError
from .intersection import APEX_TOL, compute_report
from .laguerre import PreconditionError
from .montecarlo import mc_all
from .solvent import FAMILIES, ParameterGrid, SweepError, li_quantities, reference_from_solvated, sweep

STRUCTURE_SUFFIXES = (".pdb", ".ent", ".xyzr", ".xyz")


def _load_frames(path, fmt=None, radii=None) -> List[MolecularFrame]:
    """Frames of a structure file, or of all structure files in a directory (name order)."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() in STRUCTURE_SUFFIXES)
        if not files:
            raise io.StructureError(f"{path}: no structure files")
    elif path.exists():
        files = [path]
    else:
        raise io.StructureError(f"{path}: no such file or directory")
    frames = []
    for f in files:
        frames.extend(io.parse_structure(f, fmt, radii))
    return [
        MolecularFrame(fr.centers, fr.radii, fr.labels, fr.solvent, fr.elements, fr.names, k)
        for k, fr in enumerate(frames)
    ]


def _radii(args):
    return io.RadiiTable.load(args.radii) if getattr(args, "radii", None) else None


def _write(data: bytes, out):
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_compute(args) -> int:
    frames = _load_frames(args.input, args.format, _radii(args))
    reports = _map(lambda fr: compute_report(fr.centers, fr.weights, args.weight, fr.labels, args.tolerance),
                   frames, args.threads)
    fmt = "csv" if args.out and Path(args.out).suffix.lower() == ".csv" else "json"
    _write(io.emit_report(reports, fmt), args.out)
    return 0


def cmd_verify_mc(args) -> int:
    frames = _load_frames(args.input, args.format, _radii(args))
    fr = frames[args.frame]
    rep = compute_report(fr.centers, fr.weights, args.weight, fr.labels, args.tolerance)
    atoms = args.atoms if args.atoms else range(len(fr))
    est = mc_all(fr.centers, fr.weights, args.weight, args.samples, args.seed, args.alpha, atoms)
    analytic = {"liv": rep.volume, "sas": rep.sphere, "plis": rep.planar}
    rows, failures = [], 0
    for q in ("liv", "sas", "plis"):
        for j, e in zip(atoms, est[q]):
            a = float(analytic[q][j])
            ok = e.contains(a)
            failures += not ok
            rows.append((j, q, a, e.value, e.half_width, e.f, "PASS" if ok else "FAIL"))
    header = ("atom", "quantity", "analytic", "mc", "half_width", "hit_fraction", "status")
    _write(io.emit_rows(header, rows), args.out)
    print(f"{len(rows) - failures}/{len(rows)} estimates contain the analytic value", file=sys.stderr)
    return 1 if failures else 0


def _reference(args, frames):
    """Reference quantities from a JSON table or from solvated structures."""
    ref = Path(args.reference)
    if ref.is_file() and ref.suffix.lower() == ".json":
        return io.read_reference(ref)
    solv = _load_frames(ref, None, _radii(args))
    return _map(reference_from_solvated, solv, args.threads)


def _sweep(args, families):
    frames = [fr.solute() for fr in _load_frames(args.frames, None, _radii(args))]
    refs = _reference(args, frames)
    grid = ParameterGrid(args.dw, args.kmax, args.mode)
    return sweep(frames, refs, grid, families, args.threads, args.tolerance)


def cmd_sweep(args) -> int:
    res = _sweep(args, args.families or FAMILIES)
    fmt = "json" if args.out and Path(args.out).suffix.lower() == ".json" else "csv"
    _write(io.emit_sweep(res, fmt), args.out)
    for fam in res.families:
        print(f"{fam}: optimal k (E1) = {res.optimum(fam, 'E1')}, (E2) = {res.optimum(fam, 'E2')}", file=sys.stderr)
    return 0


def cmd_trace(args) -> int:
    res = _sweep(args, [args.quantity])
    tr = res.trace(args.quantity, args.norm)
    vals = res.grid.values
    rows = [(i, int(k), float(vals[k])) for i, k in enumerate(tr)]
    _write(io.emit_rows(("frame", "k", "parameter"), rows), args.out)
    return 0


def cmd_reference(args) -> int:
    frames = _load_frames(args.frames, None, _radii(args))
    if args.weight is None:
        refs = _map(reference_from_solvated, frames, args.threads)
    else:
        refs = _map(
            lambda fr: li_quantities(compute_report(fr.centers, fr.weights, args.weight, fr.labels, args.tolerance)),
            frames, args.threads,
        )
    _write(io.write_reference(refs), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="frames processed concurrently")
    common.add_argument("--tolerance", type=float, default=APEX_TOL,
                        help="skip triangle terms whose apex power is below this (Å^2)")
    common.add_argument("--radii", help="radii table (JSON) for PDB input")

    p = argparse.ArgumentParser(prog="lagint", description="Laguerre-Intersection cells of molecules")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="per-atom, per-pair and per-residue quantities")
    c.add_argument("--input", required=True)
    c.add_argument("--format", choices=("pdb", "xyzr"))
    c.add_argument("--weight", type=float, default=0.0)
    c.add_argument("--out", help="output path (.csv or .json); JSON to stdout if omitted")
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify-mc", parents=[common], help="compare with Monte-Carlo estimates")
    v.add_argument("--input", required=True)
    v.add_argument("--format", choices=("pdb", "xyzr"))
    v.add_argument("--weight", type=float, default=0.0)
    v.add_argument("--samples", type=int, default=10 ** 6)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--alpha", type=float, default=0.01, help="significance level of the intervals")
    v.add_argument("--frame", type=int, default=0)
    v.add_argument("--atoms", type=int, nargs="*")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify_mc)

    for name, func, hlp in (("sweep", cmd_sweep, "error tables over a solvent-parameter grid"),
                            ("trace", cmd_trace, "running optimum over frames")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--frames", required=True, help="structure file or directory of frames")
        s.add_argument("--reference", required=True, help="reference JSON or solvated structures")
        s.add_argument("--dw", type=float, default=0.1)
        s.add_argument("--kmax", type=int, default=40)
        s.add_argument("--mode", choices=("weight", "radius"), default="weight")
        s.add_argument("--out")
        if name == "sweep":
            s.add_argument("--families", nargs="*", choices=FAMILIES)
        else:
            s.add_argument("--quantity", required=True, choices=FAMILIES)
            s.add_argument("--norm", choices=("E1", "E2"), default="E1")
        s.set_defaults(func=func)

    r = sub.add_parser("reference", parents=[common], help="write a reference table")
    r.add_argument("--frames", required=True, help="solvated structures, or solute frames with --weight")
    r.add_argument("--weight", type=float, help="use Laguerre-Intersection quantities at this weight")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reference)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except DegenerateInputError as err:
        print(f"error: numerical degeneracy: {err}", file=sys.stderr)
        return 3
    except (io.StructureError, SweepError, PreconditionError, FileNotFoundError, ValueError, IndexError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
