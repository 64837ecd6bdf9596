import json

import numpy as np
import pytest

from spinshape import shapes
from spinshape.cli import main
from spinshape.formats import write_metricmesh, write_obj


@pytest.fixture(scope="module")
def torus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("meshes") / "flat_torus.metricmesh"
    m, _ = shapes.flat_torus(4, 4)
    write_metricmesh(str(path), m)
    return str(path)


@pytest.fixture(scope="module")
def icosphere_obj(tmp_path_factory):
    path = tmp_path_factory.mktemp("meshes") / "icosphere.obj"
    mesh, pos = shapes.icosphere(1)
    write_obj(str(path), pos, mesh.faces)
    return str(path)


def test_validate_ok(torus_file, capsys):
    assert main(["validate", torus_file]) == 0
    out = capsys.readouterr().out
    assert "genus 1" in out


def test_validate_triangle_inequality(tmp_path, capsys):
    path = tmp_path / "bad.metricmesh"
    path.write_text(
        "metricmesh 1\nvertices 3\nfaces 2\nf 0 1 2\nf 0 2 1\nedges 3\n"
        "l 0 1 1.0\nl 0 2 1.0\nl 1 2 3.0\n"
    )
    assert main(["validate", str(path)]) == 1
    err = capsys.readouterr().err
    assert "TriangleInequality face 0" in err


def test_validate_boundary_obj(tmp_path, capsys):
    path = tmp_path / "open.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    assert main(["validate", str(path)]) == 1
    assert "Boundary" in capsys.readouterr().err


def test_spin_enumerate_counts(torus_file, icosphere_obj, tmp_path, capsys):
    assert main(["spin", "enumerate", icosphere_obj]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("class")]
    assert len(lines) == 1

    dump = tmp_path / "signs.txt"
    assert main(["spin", "enumerate", torus_file, "--dump-signs", str(dump)]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("class")]
    assert len(lines) == 4
    assert [l.split()[1] for l in lines] == ["00", "01", "10", "11"]
    text = dump.read_text().splitlines()
    m, _ = shapes.flat_torus(4, 4)
    assert sum(1 for l in text if l.startswith("s ")) == 4 * m.mesh.edge_count


def test_spin_enumerate_genus2(tmp_path, capsys):
    path = tmp_path / "g2.metricmesh"
    write_metricmesh(str(path), shapes.genus2_metric())
    assert main(["spin", "enumerate", str(path)]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("class")]
    assert len(lines) == 16


def test_solve_wrong_bitstring(torus_file, capsys):
    assert main(["solve", torus_file, "--spin-class", "0"]) == 1
    assert "bitstring" in capsys.readouterr().err


def test_solve_eps1_zero(torus_file, capsys):
    assert main(["solve", torus_file, "--eps1", "0"]) == 1
    assert "eps1" in capsys.readouterr().err


def test_solve_writes_outputs(torus_file, tmp_path, capsys):
    report = tmp_path / "report.json"
    obj = tmp_path / "out.obj"
    figures = tmp_path / "figs"
    code = main(
        [
            "solve", torus_file,
            "--mode", "isometric",
            "--spin-class", "00",
            "--max-outer", "4",
            "--max-inner", "60",
            "--seed", "2",
            "-o", str(obj),
            "--report", str(report),
            "--figures", str(figures),
        ]
    )
    assert code in (0, 2)
    doc = json.loads(report.read_text())
    assert doc["versions"]["format"] == 1
    assert doc["input"]["genus"] == 1
    assert doc["spin_class"] == "00"
    assert 1 <= len(doc["trace"]) <= 4
    first, last = doc["trace"][0], doc["trace"][-1]
    assert last["e_alpha"] <= first["e_alpha"]
    assert "reconstruction" in doc and "distortion" in doc
    assert obj.exists()
    assert (figures / "trace.csv").exists()
    assert (figures / "trace.png").exists()


def test_solve_obj_input(icosphere_obj, tmp_path):
    report = tmp_path / "sr.json"
    code = main(
        [
            "solve", icosphere_obj,
            "--mode", "isometric",
            "--max-outer", "2",
            "--max-inner", "30",
            "--seed", "8",
            "--report", str(report),
        ]
    )
    assert code in (0, 2)
    doc = json.loads(report.read_text())
    assert doc["input"]["genus"] == 0
    assert doc["spin_class"] == ""
    assert doc["result"]["period_norms"] == []


def test_roundtrip_icosphere(icosphere_obj, tmp_path, capsys):
    report = tmp_path / "rt.json"
    assert main(["roundtrip", icosphere_obj, "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["roundtrip_ok"] is True
    assert doc["position_error"] <= 1e-10 * doc["diameter"]


def test_roundtrip_torus_of_revolution(tmp_path, capsys):
    path = tmp_path / "revtorus.obj"
    mesh, pos = shapes.torus_of_revolution(12, 6)
    write_obj(str(path), pos, mesh.faces)
    report = tmp_path / "rt.json"
    assert main(["roundtrip", str(path), "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["period_norm_max"] <= 1e-10 * doc["diameter"]


def test_roundtrip_degenerate_obj(tmp_path, capsys):
    path = tmp_path / "deg.obj"
    # doubled triangle with a zero-length edge
    path.write_text("v 0 0 0\nv 0 0 0\nv 0 1 0\nf 1 2 3\nf 1 3 2\n")
    assert main(["roundtrip", str(path)]) == 1


def test_report_determinism(torus_file, tmp_path):
    reports = []
    for i in range(2):
        rp = tmp_path / f"rep{i}.json"
        main(
            [
                "solve", torus_file,
                "--max-outer", "3",
                "--max-inner", "40",
                "--seed", "11",
                "--report", str(rp),
            ]
        )
        doc = rp.read_text().splitlines()
        reports.append([l for l in doc if '"timestamp"' not in l])
    assert reports[0] == reports[1]
