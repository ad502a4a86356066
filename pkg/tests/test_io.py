import json
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagint import io
from lagint.frame import MolecularFrame
from lagint.intersection import compute_report
from lagint.solvent import ParameterGrid, li_quantities, sweep


def atom(serial, name, resname, chain, resseq, x, y, z, element="", alt=" ", rec="ATOM"):
    return (f"{rec:<6}{serial:>5} {name:<4}{alt}{resname:>3} {chain}{resseq:>4}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}          {element:>2}")


@pytest.fixture
def table():
    return io.RadiiTable.load()


def test_pdb_columns(table):
    line = atom(1, "CA", "ALA", "A", 7, 1.0, -2.5, 3.25, "C")
    assert len(line) == 78
    (fr,) = io.parse_pdb(line, table)
    assert fr.centers.tolist() == [[1.0, -2.5, 3.25]]
    assert fr.radii.tolist() == [1.7]
    assert fr.labels.tolist() == ["A:ALA7"]
    assert fr.elements == ("C",) and fr.names == ("CA",)


def test_pdb_models(table):
    text = []
    for m in range(3):
        text.append(f"MODEL     {m + 1:>4}")
        text.append(atom(1, "N", "GLY", "A", 1, m, 0, 0, "N"))
        text.append(atom(2, "O", "HOH", "W", 5, m, 3, 0, "O", rec="HETATM"))
        text.append("ENDMDL")
    frames = io.parse_pdb("\n".join(text), table)
    assert [f.index for f in frames] == [0, 1, 2]
    assert [f.centers[0, 0] for f in frames] == [0.0, 1.0, 2.0]
    assert frames[0].radii.tolist() == [1.55, 1.52]
    assert frames[0].solvent.tolist() == [False, True]


def test_pdb_unknown_element_warns_once(table):
    text = "\n".join(atom(k, "X1", "UNK", "A", 1, 2.0 * k, 0, 0, "XX") for k in range(3))
    with pytest.warns(UserWarning, match="unknown element") as rec:
        (fr,) = io.parse_pdb(text, io.RadiiTable(table.radii))
    assert fr.radii.tolist() == [1.7] * 3
    assert len(rec) == 1


def test_pdb_element_from_name(table):
    (fr,) = io.parse_pdb(atom(1, "CL1", "LIG", "A", 1, 0, 0, 0) + "\n" + atom(2, "OG", "SER", "A", 2, 3, 0, 0), table)
    assert fr.elements == ("CL", "O")


def test_pdb_altloc_first_wins(table):
    text = "\n".join([
        atom(1, "CB", "SER", "A", 3, 0, 0, 0, "C", alt="A"),
        atom(2, "CB", "SER", "A", 3, 9, 9, 9, "C", alt="B"),
        atom(3, "OG", "SER", "A", 3, 1, 0, 0, "O", alt="B"),
        atom(4, "OG", "SER", "A", 3, 8, 0, 0, "O", alt="A"),
    ])
    (fr,) = io.parse_pdb(text, table)
    assert fr.centers[:, 0].tolist() == [0.0, 1.0]


def test_pdb_errors(table):
    good = atom(1, "C", "ALA", "A", 1, 0, 0, 0, "C")
    bad = good[:30] + "   x.xxx" + good[38:]
    with pytest.raises(io.StructureError, match=":2: malformed"):
        io.parse_pdb(good + "\n" + bad, table)
    with pytest.raises(io.StructureError, match="truncated"):
        io.parse_pdb(good[:40], table)
    with pytest.raises(io.StructureError, match="no atoms"):
        io.parse_pdb("REMARK nothing\n", table)
    two = "MODEL 1\n" + good + "\nENDMDL\nMODEL 2\n" + good + "\n" + good.replace(" 1    ", " 2    ") + "\nENDMDL"
    with pytest.raises(io.StructureError, match="frame 1"):
        io.parse_pdb(two, table)


def test_missing_residue_gets_component_label(table):
    text = "\n".join(atom(k, "C", "", " ", "", x, 0, 0, "C") for k, x in enumerate((0.0, 1.0, 10.0)))
    (fr,) = io.parse_pdb(text, table)
    assert fr.labels.tolist() == ["_C1", "_C1", "_C2"]


def test_solvent_names():
    for lab in ("W:HOH12", "WAT3", "SOL-1", "A:TIP3", "T3P7A"):
        assert io._is_solvent(lab), lab
    for lab in ("A:ALA7", "HOHX", "A:SER3"):
        assert not io._is_solvent(lab), lab


def test_xyzr_basic():
    text = "# two atoms\n0 0 0 1\n1.5 0 0 1.2 CA ALA1 A\n"
    (fr,) = io.parse_xyzr(text)
    assert fr.radii.tolist() == [1.0, 1.2]
    assert fr.labels.tolist() == ["_C1", "A:ALA1"]
    assert fr.names == ("X", "CA")


def test_xyzr_frames_and_errors():
    frames = io.parse_xyzr("0 0 0 1\n\n\n1 0 0 1\n")
    assert len(frames) == 2 and frames[1].index == 1
    for text, msg in (("0 0 1", ":1: expected"), ("0 0 0 -1", "radius positive"),
                      ("0 0 0 1\n0 a 0 1", ":2: malformed"), ("# only\n", "no atoms"),
                      ("0 0 0 1\n\n0 0 0 1\n1 0 0 1", "frame 1")):
        with pytest.raises(io.StructureError, match=msg):
            io.parse_xyzr(text)


coord = st.floats(-50, 50, allow_nan=False).map(lambda v: round(v, 6))


@given(st.lists(st.tuples(coord, coord, coord, st.floats(0.5, 3.0)), min_size=1, max_size=12),
       st.booleans())
def test_xyzr_roundtrip(atoms, with_labels):
    P = np.array([a[:3] for a in atoms])
    R = np.array([a[3] for a in atoms])
    labels = np.array([f"C{k % 2}:RES{k // 3}" for k in range(len(atoms))], dtype=object) if with_labels else None
    fr = MolecularFrame(P, R, labels)
    text = io.write_xyzr([fr])
    (back,) = io.parse_xyzr(text)
    assert np.array_equal(back.centers, P) and np.array_equal(back.radii, R)
    if with_labels:
        assert back.labels.tolist() == labels.tolist()
    once = io.write_xyzr(io.parse_xyzr(text))
    assert io.write_xyzr(io.parse_xyzr(once)) == once


def test_parse_structure(tmp_path):
    p = tmp_path / "m.xyzr"
    p.write_text("0 0 0 1\n")
    assert len(io.parse_structure(p)[0]) == 1
    with pytest.raises(io.StructureError, match="extension"):
        io.parse_structure(tmp_path / "m.dat")
    with pytest.raises(io.StructureError):
        io.parse_structure(tmp_path / "missing.xyzr")


def test_radii_table(tmp_path):
    t = io.RadiiTable.load()
    assert t.version and t.radius("c") == 1.7 and t.radius("Cl") == 1.75
    bad = tmp_path / "r.json"
    bad.write_text(json.dumps({"radii": {"C": -1}}))
    with pytest.raises(io.StructureError):
        io.RadiiTable.load(bad)
    bad.write_text("{}")
    with pytest.raises(io.StructureError):
        io.RadiiTable.load(bad)


def test_single_atom_report():
    rep = compute_report(np.zeros((1, 3)), np.ones(1))
    doc = io.parse_report(io.emit_report(rep))
    atom0 = doc["frames"][0]["atoms"][0]
    assert atom0["volume"] == 4.1887902
    assert atom0["sphere"] == 12.5663706
    assert atom0["planar"] == 0.0
    assert doc["frames"][0]["pairs"] == []


def test_report_json_and_csv():
    P = np.array([[0.0, 0, 0], [1.5, 0, 0], [0, 1.5, 0], [0, 0, 1.5], [4, 4, 4]])
    lab = np.array(["A1", "A1", "B2", "B2", "C3"], dtype=object)
    rep = compute_report(P, np.ones(5), 0.5, lab)
    doc = io.parse_report(io.emit_report([rep, rep]))
    assert len(doc["frames"]) == 2 and doc["frames"][1]["frame"] == 1
    d = doc["frames"][0]
    assert [a["residue"] for a in d["atoms"]] == lab.tolist()
    assert len(d["pairs"]) == len(rep.pairs)
    assert {(r["a"], r["b"]) for r in d["interresidue"]} == {("A1", "B2")}
    for a, v in zip(d["atoms"], rep.volume):
        assert a["volume"] == pytest.approx(v, rel=1e-8)
    csv_text = io.emit_report(rep, "csv").decode()
    sections = [ln for ln in csv_text.splitlines() if ln.startswith("#")]
    assert sections == ["# atoms", "# pairs", "# residues", "# interresidue"]
    assert "frame,w,index,residue,volume,sphere,planar,area" in csv_text
    with pytest.raises(ValueError):
        io.emit_report(rep, "xml")


def test_output_deterministic():
    from lagint.synthetic import random_cluster
    fr = random_cluster(30, box=10, seed=3)
    a = io.emit_report(compute_report(fr.centers, fr.weights, 1.0), "csv")
    b = io.emit_report(compute_report(fr.centers, fr.weights, 1.0), "csv")
    assert a == b


def test_sweep_table_and_reference(tmp_path):
    from lagint.synthetic import compact_molecule
    fr = compact_molecule(20, seed=0)
    refs = [li_quantities(compute_report(fr.centers, fr.weights, 0.5, fr.labels))]
    res = sweep([fr], refs, ParameterGrid(0.5, 2))
    rows = io.emit_sweep(res).decode().splitlines()
    assert rows[0] == ",".join(io.SWEEP_HEADER)
    assert len(rows) == 1 + 5 * 3
    doc = json.loads(io.emit_sweep(res, "json"))
    assert doc["optimum"]["LV_atom"] == {"E1": 1, "E2": 1}
    p = tmp_path / "ref.json"
    p.write_bytes(io.write_reference(refs))
    back = io.read_reference(p)
    assert back[0].keys() == refs[0].keys()
    for fam in refs[0]:
        for k, v in refs[0][fam].items():
            assert back[0][fam][k] == pytest.approx(v, rel=1e-8)
    p.write_text('{"frames": [{"LV_atom": 3}]}')
    with pytest.raises(io.StructureError):
        io.read_reference(p)


def test_warning_filter_untouched():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        io.RadiiTable({"C": 1.7}).radius("C")
    assert not rec
