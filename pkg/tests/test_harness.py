import csv

import numpy as np
import pytest

from circlepatterns.errors import AnchorNotFound, OscillationTooLarge, VanishingDerivative
from circlepatterns.harness import (LATTICES, ConformalTestMap, ExperimentConfig,
                                    affine_map, anchor_edge, approximants,
                                    boundary_angles, boundary_radii, convergence_sweep,
                                    fit_slope, get_map, make_lattice, normalize_pattern,
                                    q_difference, run_single)
from circlepatterns.lattice import gen_square_grid
from circlepatterns.layout import isoradial_pattern


def rotation_map(psi):
    e = np.exp(1j * psi)
    return ConformalTestMap("rot", lambda z: e * z,
                            lambda z: e * np.ones_like(z, dtype=complex),
                            lambda z: np.zeros_like(z, dtype=complex), (1.0, 0.0, 2.0, 1.0))


# -- boundary data --------------------------------------------------------------

def test_radii_identity(square_emb):
    r = boundary_radii(get_map("identity"), square_emb)
    assert set(r) == set(square_emb.bq.boundary_white.tolist())
    assert all(v == square_emb.eps for v in r.values())


def test_radii_affine(square_emb):
    r = boundary_radii(affine_map(3.0, 7.0), square_emb)
    assert all(v == pytest.approx(3 * square_emb.eps, rel=1e-15) for v in r.values())


def test_radii_square(square_emb):
    r = boundary_radii(get_map("square"), square_emb)
    for z, v in r.items():
        assert v == pytest.approx(2 * abs(square_emb.pos[z]) * square_emb.eps, rel=1e-15)


def test_radii_square_spot():
    emb = gen_square_grid((1.5, 0.5, 2.5, 1.5), 0.25)
    r = boundary_radii(get_map("square"), emb)
    z = min(r, key=lambda k: abs(emb.pos[k] - (1.5 + 0.5j)))
    assert abs(emb.pos[z] - (1.5 + 0.5j)) < 1e-12
    assert r[z] == pytest.approx(0.25 * 2 * abs(1.5 + 0.5j))


def test_radii_vanishing_derivative():
    emb = gen_square_grid((0.0, 0.0, 1.0, 1.0), 0.25)
    with pytest.raises(VanishingDerivative):
        boundary_radii(get_map("square"), emb)


def test_angles_identity(lattices):
    for emb in lattices.values():
        phi = boundary_angles(get_map("identity"), emb)
        for (z, v), a in phi.items():
            assert a == pytest.approx(np.angle(emb.pos[v] - emb.pos[z]), abs=1e-15)


def test_angles_rotation(square_emb):
    psi = 0.4
    base = boundary_angles(get_map("identity"), square_emb)
    rot = boundary_angles(rotation_map(psi), square_emb)
    for k in base:
        assert rot[k] - base[k] == pytest.approx(psi, abs=1e-14)


def test_angles_square(square_emb):
    base = boundary_angles(get_map("identity"), square_emb)
    sq = boundary_angles(get_map("square"), square_emb)
    for (z, v) in base:
        assert sq[(z, v)] - base[(z, v)] == pytest.approx(np.angle(2 * square_emb.pos[v]),
                                                          abs=1e-14)


def test_angles_oscillation():
    emb = gen_square_grid((0.05, 0.05, 1.05, 1.05), 0.25)
    with pytest.raises(OscillationTooLarge):
        boundary_angles(get_map("inv"), emb)
    boundary_angles(get_map("inv"), emb, check=False)


# -- normalisation and approximants -----------------------------------------------

def test_anchor_edge(square_emb):
    z0, v0 = anchor_edge(square_emb, 1.5 + 0.5j)
    assert abs(square_emb.pos[z0] - (1.5 + 0.5j)) <= square_emb.eps
    ang = np.angle(square_emb.pos[v0] - square_emb.pos[z0]) % (2 * np.pi)
    for v in square_emb.bq.fans[z0].neighbors:
        assert np.angle(square_emb.pos[v] - square_emb.pos[z0]) % (2 * np.pi) >= ang - 1e-12
    with pytest.raises(AnchorNotFound):
        anchor_edge(square_emb, 10 + 10j)


def test_normalize_identity(lattices):
    for emb in lattices.values():
        cp = isoradial_pattern(emb)
        z0, v0 = anchor_edge(emb, 1.5 + 0.5j)
        out = normalize_pattern(cp, get_map("identity"), z0, v0, emb=emb)
        assert np.max(np.abs(out.pos - emb.pos)) < 1e-14


def test_normalize_rigid_motion(penrose_emb):
    emb = penrose_emb
    cp = isoradial_pattern(emb).transformed(np.exp(2.1j), 3 - 4j)
    gmap = affine_map(np.exp(0.7j), 0.2 + 0.1j)
    z0, v0 = anchor_edge(emb, 1.5 + 0.5j)
    out = normalize_pattern(cp, gmap, z0, v0, emb=emb)
    assert np.max(np.abs(out.pos - gmap.g(emb.pos))) < 1e-9
    assert out.pos[v0] == pytest.approx(gmap.g(emb.pos[v0]), abs=1e-14)
    d_out = np.angle(out.pos[v0] - out.pos[z0])
    d_ref = np.angle(emb.pos[v0] - emb.pos[z0]) + 0.7
    assert np.angle(np.exp(1j * (d_out - d_ref))) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("kind", LATTICES)
def test_affine_reproduced(kind, lattices):
    a, b = 1.2 + 0.5j, 0.3 - 0.7j
    emb = lattices[kind]
    res = run_single(get_map("affine"), emb)
    w = emb.bq.white
    assert np.max(np.abs(res.q[w] - a)) < 1e-8
    blk = emb.bq.black
    assert np.max(np.abs(res.gn[blk] - (a * emb.pos[blk] + b))) < 1e-8


def test_approximants_shape(square_emb):
    q, gn = approximants(isoradial_pattern(square_emb), square_emb)
    bq = square_emb.bq
    assert np.all(np.isnan(q[bq.black])) and np.all(np.isnan(gn[bq.white]))
    np.testing.assert_allclose(q[bq.white], 1, atol=1e-14)
    np.testing.assert_allclose(gn[bq.black], square_emb.pos[bq.black], atol=0)


# -- sweeps -----------------------------------------------------------------------

@pytest.mark.parametrize("kind", LATTICES)
@pytest.mark.parametrize("name", ["square", "exp", "inv", "moebius"])
def test_errors_decrease(name, kind):
    rep = convergence_sweep(ExperimentConfig(map_name=name, lattice=kind,
                                             eps_list=(1 / 4, 1 / 8, 1 / 16)))
    for key in ("err_q", "err_g"):
        col = rep.column(key)
        assert np.all(np.diff(col) < 0), (key, col)


@pytest.mark.parametrize("name", ["identity", "affine"])
def test_similarity_errors_vanish(name):
    rep = convergence_sweep(ExperimentConfig(map_name=name, lattice="projection",
                                             eps_list=(1 / 4, 1 / 8)))
    assert np.max(rep.column("err_q")) < 1e-12
    assert np.max(rep.column("err_g")) < 1e-12


def test_neumann_tracks_dirichlet():
    rows = q_difference(ExperimentConfig(map_name="square", eps_list=(1 / 4, 1 / 8, 1 / 16)))
    diffs = [d for _, d, _ in rows]
    assert np.all(np.diff(diffs) < 0)
    assert diffs[-1] < rows[-1][2]


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(eps_list=(1 / 8, 1 / 4))
    with pytest.raises(ValueError):
        ExperimentConfig(eps_list=(1 / 8, 0.0))
    with pytest.raises(ValueError):
        ExperimentConfig(bc="robin")
    with pytest.raises(ValueError):
        ExperimentConfig(margin=0.6)
    with pytest.raises(ValueError):
        ExperimentConfig(map_name="sin")
    with pytest.raises(ValueError):
        make_lattice("triangular", (0, 0, 1, 1), 0.25)


def test_default_margin():
    cfg = ExperimentConfig(eps_list=(1 / 8, 1 / 16))
    assert cfg.margin == pytest.approx(0.25)
    assert cfg.compact == pytest.approx((1.25, 0.25, 1.75, 0.75))
    cfg = ExperimentConfig(eps_list=(1 / 32, 1 / 64))
    assert cfg.margin == pytest.approx(5 / 32)


def test_fit_slope():
    eps = np.array([1 / 4, 1 / 8, 1 / 16, 1 / 32])
    assert fit_slope(eps, 3 * eps ** 2) == pytest.approx(2.0)
    assert np.isnan(fit_slope(eps, np.zeros(4)))


def test_csv_and_determinism(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (p1, p2):
        convergence_sweep(ExperimentConfig(map_name="exp", lattice="hex",
                                           eps_list=(1 / 4, 1 / 8), csv_path=str(p)))
    assert p1.read_text() == p2.read_text()
    with open(p1) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["eps", "err_q", "err_g", "err_t", "err_d1", "slope_q", "slope_g"]
    assert [float(r["eps"]) for r in rows] == [0.25, 0.125]


def test_svg_output(tmp_path):
    convergence_sweep(ExperimentConfig(map_name="square", eps_list=(1 / 4, 1 / 8),
                                       svg_dir=str(tmp_path)))
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "convergence.svg" in names
    assert sum(n.startswith("pattern_") for n in names) == 2


def test_vanishing_derivative_in_sweep():
    with pytest.raises(VanishingDerivative):
        convergence_sweep(ExperimentConfig(map_name="square", domain=(-0.5, -0.5, 0.5, 0.5),
                                           eps_list=(1 / 4, 1 / 8)))
