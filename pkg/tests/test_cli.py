import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from circlepatterns.cli import main
from circlepatterns.lattice import RhombicEmbedding


@pytest.fixture
def square_file(tmp_path):
    out = tmp_path / "sq.json"
    assert main(["gen", "--lattice", "square", "--eps", "0.125", "--out", str(out)]) == 0
    return out


def test_gen_lattices(tmp_path, capsys):
    for kind in ("square", "hex", "projection"):
        out = tmp_path / f"{kind}.json"
        assert main(["gen", "--lattice", kind, "--eps", "0.25", "--out", str(out)]) == 0
        emb = RhombicEmbedding.load(out)
        assert emb.bq.n_faces > 0
    assert "faces" in capsys.readouterr().out


def test_dirichlet_pipeline(tmp_path, square_file):
    bnd, rad, pat, svg = (tmp_path / n for n in ("b.json", "r.json", "p.json", "p.svg"))
    assert main(["boundary", "--pattern", str(square_file), "--map", "square",
                 "--out", str(bnd)]) == 0
    assert main(["solve", "--pattern", str(square_file), "--boundary", str(bnd),
                 "--out", str(rad), "--pattern-out", str(pat)]) == 0
    radii = json.loads(rad.read_text())
    emb = RhombicEmbedding.load(square_file)
    assert len(radii) == len(emb.bq.white)
    assert all(v > 0 for v in radii.values())
    assert main(["render", "--in", str(pat), "--out", str(svg)]) == 0
    assert svg.read_text().lstrip().startswith("<?xml")


def test_neumann_pipeline(tmp_path, square_file):
    bnd, rad = tmp_path / "b.json", tmp_path / "r.json"
    assert main(["boundary", "--pattern", str(square_file), "--map", "exp",
                 "--bc", "neumann", "--out", str(bnd)]) == 0
    assert main(["solve", "--problem", "neumann", "--pattern", str(square_file),
                 "--boundary", str(bnd), "--out", str(rad)]) == 0
    assert all(v > 0 for v in json.loads(rad.read_text()).values())


def test_render_embedding(tmp_path, square_file):
    out = tmp_path / "e.png"
    assert main(["render", "--in", str(square_file), "--out", str(out), "--no-circles"]) == 0
    assert out.read_bytes()[:4] == b"\x89PNG"


def test_green_modes(tmp_path):
    emb_file = tmp_path / "u.json"
    assert main(["gen", "--lattice", "square", "--eps", "1", "--domain=-10,-10,10,10",
                 "--out", str(emb_file)]) == 0
    emb = RhombicEmbedding.load(emb_file)
    w = emb.bq.white
    x0 = int(w[np.argmin(np.abs(emb.pos[w]))])
    out = tmp_path / "g.csv"
    for mode in ("integral", "asymptotic", "bounded"):
        assert main(["green", "--pattern", str(emb_file), "--x0", str(x0), "--radius", "4",
                     "--mode", mode, "--out", str(out)]) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) > 5
        if mode == "integral":
            vals = {int(r["vertex"]): float(r["value"]) for r in rows}
            assert vals[x0] == 0.0
            dist = [abs(complex(float(r["x"]), float(r["y"])) - emb.pos[x0]) for r in rows]
            near = [float(r["value"]) for r, d in zip(rows, dist) if abs(d - np.sqrt(2)) < 1e-9]
            assert near and all(abs(v + 0.25) < 1e-9 for v in near)


def test_converge(tmp_path, capsys):
    out_csv = tmp_path / "c.csv"
    svg_dir = tmp_path / "svg"
    assert main(["converge", "--map", "square", "--eps-list", "0.25,0.125",
                 "--csv", str(out_csv), "--svg-dir", str(svg_dir)]) == 0
    assert "slopes" in capsys.readouterr().out
    assert out_csv.exists() and (svg_dir / "convergence.svg").exists()


def test_errors_exit_2(tmp_path, capsys, square_file):
    assert main(["converge", "--eps-list", "0.125,0.25"]) == 2
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"0": -1.0}))
    assert main(["solve", "--pattern", str(square_file), "--boundary", str(bad),
                 "--out", str(tmp_path / "r.json")]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "circlepatterns", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("gen", "boundary", "solve", "render", "green", "converge"):
        assert cmd in res.stdout
