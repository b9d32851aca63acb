import numpy as np
import pytest

from circlepatterns.bquad import build_bquad, derive_views
from circlepatterns.errors import (ClosingConditionInfeasible, InvalidBoundary,
                                   KiteConditionViolated, NoConvergence, NotAPattern)
from circlepatterns.harness import boundary_angles, boundary_radii, get_map
from circlepatterns.kernels import RadiusFunction, residuals, vertex_residual
from circlepatterns.lattice import gen_square_grid
from circlepatterns.layout import angle_function, isoradial_pattern
from circlepatterns.solver import (DirichletProblem, NeumannProblem,
                                   check_max_principle, solve_dirichlet,
                                   solve_neumann)

SQUARE = get_map("square")

# max interior |log r - log(eps |g'|)| for g = z^2 on [1,2]x[0,1], square grid
DIRICHLET_LOG_ERR = {1 / 16: 6.58039868468574e-05, 1 / 32: 1.6448224599230343e-05}
# max |log r_neumann - log r_dirichlet| for the same map, anchored at one vertex
NEUMANN_GAP = {1 / 16: 3.1773300313675534e-04, 1 / 32: 7.946188344343241e-05}


def _dirichlet(emb, values, **kw):
    return solve_dirichlet(DirichletProblem(derive_views(emb.bq), emb.alpha, values), **kw)


def _max_residual(emb, r):
    view = derive_views(emb.bq)
    u = np.log(np.where(emb.bq.is_white, radius_values(r), 1.0))
    return np.max(np.abs(residuals(view, emb.alpha, u)[emb.bq.interior_white]))


def radius_values(r):
    return r.values if isinstance(r, RadiusFunction) else np.asarray(r)


# -- Dirichlet ------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["square", "hex", "projection"])
def test_constant_boundary_gives_constant(lattices, kind):
    emb = lattices[kind]
    b = {int(z): 3 * emb.eps for z in emb.bq.boundary_white}
    r = _dirichlet(emb, b)
    w = emb.bq.white
    assert np.max(np.abs(r.values[w] - 3 * emb.eps)) < 1e-10
    assert _max_residual(emb, r) <= 1e-10


@pytest.mark.parametrize("kind", ["square", "hex", "projection"])
def test_linear_map_boundary(lattices, kind):
    emb = lattices[kind]
    a = 1.7 - 0.4j
    b = boundary_radii(get_map("affine"), emb)
    b = {z: emb.eps * abs(a) for z in b}
    r = _dirichlet(emb, b)
    assert np.allclose(r.values[emb.bq.white], emb.eps * abs(a), rtol=1e-10, atol=0)


def test_boundary_values_reproduced_exactly(penrose_emb):
    b = boundary_radii(SQUARE, penrose_emb)
    r = _dirichlet(penrose_emb, b)
    for z, val in b.items():
        assert r.values[z] == val


def test_exact_exponential_solution():
    # r = c exp(k Re z) closes every square-grid fan: neighbours pair up
    emb = gen_square_grid((0, 0, 1, 1), 1 / 16)
    exact = np.where(emb.bq.is_white, 0.3 * np.exp(1.5 * emb.pos.real), np.nan)
    assert _max_residual(emb, exact) < 1e-13
    r = _dirichlet(emb, {int(z): exact[z] for z in emb.bq.boundary_white})
    w = emb.bq.white
    assert np.max(np.abs(r.values[w] / exact[w] - 1)) < 1e-10


def test_restriction_of_known_solution(penrose_emb):
    emb = penrose_emb
    big = _dirichlet(emb, boundary_radii(get_map("square"), emb))
    bq = emb.bq
    centroid = emb.pos[bq.faces].mean(axis=1)
    sel = np.abs(centroid - (1.5 + 0.5j)) < 0.3
    sub = build_bquad([tuple(bq.labels[i] for i in q) for q in bq.faces[sel]])
    src = np.array([bq.index_of(lab) for lab in sub.labels])
    alpha = emb.alpha[sel]
    known = np.where(sub.is_white, big.values[src], np.nan)
    view = derive_views(sub)
    r = solve_dirichlet(DirichletProblem(view, alpha,
                                         {int(z): known[z] for z in sub.boundary_white}))
    assert len(sub.interior_white) > 10
    assert np.max(np.abs(r.values[sub.white] - known[sub.white])) < 1e-9


@pytest.mark.parametrize("kind", ["square", "hex", "projection"])
def test_uniqueness_across_initial_guesses(lattices, kind):
    emb = lattices[kind]
    view = derive_views(emb.bq)
    b = boundary_radii(SQUARE, emb)
    rng = np.random.default_rng(7)
    guess1 = np.where(emb.bq.is_white, emb.eps, np.nan)
    guess2 = np.where(emb.bq.is_white, emb.eps * np.exp(rng.uniform(-1, 1, emb.bq.n_vertices)),
                      np.nan)
    r1 = solve_dirichlet(DirichletProblem(view, emb.alpha, b, guess1))
    r2 = solve_dirichlet(DirichletProblem(view, emb.alpha, b, RadiusFunction(guess2)))
    assert np.max(np.abs(r1.values[emb.bq.white] - r2.values[emb.bq.white])) < 1e-9


def test_residual_after_success(lattices):
    for emb in lattices.values():
        r = _dirichlet(emb, boundary_radii(SQUARE, emb), tol=1e-11)
        view = derive_views(emb.bq)
        worst = max(abs(vertex_residual(view, emb.alpha, r, int(z)))
                    for z in emb.bq.interior_white)
        assert worst <= 1e-11


def test_gauss_seidel_fallback_agrees():
    emb = gen_square_grid((1, 0, 2, 1), 1 / 8)
    b = boundary_radii(SQUARE, emb)
    newton = _dirichlet(emb, b)
    sweeps = _dirichlet(emb, b, max_iter=0)
    assert sweeps.method != newton.method
    assert np.max(np.abs(sweeps.values[emb.bq.white] - newton.values[emb.bq.white])) < 1e-9


def test_two_resolution_oracle():
    errs = {}
    for eps in (1 / 16, 1 / 32):
        emb = gen_square_grid((1, 0, 2, 1), eps)
        r = _dirichlet(emb, boundary_radii(SQUARE, emb))
        w = emb.bq.interior_white
        errs[eps] = np.max(np.abs(np.log(r.values[w]) - np.log(eps * np.abs(2 * emb.pos[w]))))
        assert errs[eps] == pytest.approx(DIRICHLET_LOG_ERR[eps], rel=1e-6)
    # second order: halving eps divides the error by four
    assert errs[1 / 16] / errs[1 / 32] == pytest.approx(4.0, rel=0.02)


def test_monotone_in_boundary_data(hex_emb):
    emb = hex_emb
    b = boundary_radii(SQUARE, emb)
    base = _dirichlet(emb, b)
    view = derive_views(emb.bq)
    # boundary vertices with an interior neighbour influence the interior
    touching = [z for z in b if not emb.bq.is_boundary[view.white_star(z)[1]].all()]
    for z in touching[:: max(1, len(touching) // 5)]:
        raised = dict(b)
        raised[z] *= 1.1
        r = _dirichlet(emb, raised)
        w = emb.bq.interior_white
        assert np.all(r.values[w] >= base.values[w] - 1e-12)
        assert np.any(r.values[w] > base.values[w])


def test_invalid_boundary(square_emb):
    b = boundary_radii(SQUARE, square_emb)
    bad = dict(b)
    bad[next(iter(bad))] = -1.0
    with pytest.raises(InvalidBoundary):
        _dirichlet(square_emb, bad)
    short = dict(b)
    short.pop(next(iter(short)))
    with pytest.raises(InvalidBoundary):
        _dirichlet(square_emb, short)
    extra = dict(b)
    extra[int(square_emb.bq.interior_white[0])] = 1.0
    with pytest.raises(InvalidBoundary):
        _dirichlet(square_emb, extra)


def test_no_convergence_reported(square_emb):
    b = boundary_radii(SQUARE, square_emb)
    with pytest.raises(NoConvergence):
        _dirichlet(square_emb, b, tol=1e-30, max_iter=2, sweeps=2)


# -- maximum principle ----------------------------------------------------------

def test_max_principle_identical(square_emb):
    emb = square_emb
    r = _dirichlet(emb, boundary_radii(SQUARE, emb))
    for r2 in (r, RadiusFunction(r.values / 2)):
        hi, lo = check_max_principle(derive_views(emb.bq), emb.alpha, r, r2)
        assert emb.bq.is_boundary[hi] and emb.bq.is_boundary[lo]


@pytest.mark.parametrize("kind", ["square", "hex", "projection"])
def test_max_principle_on_boundary(lattices, kind):
    emb = lattices[kind]
    r = _dirichlet(emb, boundary_radii(SQUARE, emb))
    iso = np.where(emb.bq.is_white, emb.eps, np.nan)
    hi, lo = check_max_principle(derive_views(emb.bq), emb.alpha, r, iso)
    assert emb.bq.is_boundary[hi] and emb.bq.is_boundary[lo]
    q = r.values[emb.bq.white] / emb.eps
    assert r.values[hi] / emb.eps == q.max() and r.values[lo] / emb.eps == q.min()


def test_max_principle_rejects_non_patterns(square_emb):
    emb = square_emb
    bad = np.where(emb.bq.is_white, emb.eps, np.nan)
    bad[emb.bq.interior_white[3]] *= 1.5
    with pytest.raises(NotAPattern):
        check_max_principle(derive_views(emb.bq), emb.alpha, bad, bad)


# -- Neumann --------------------------------------------------------------------

def _iso_angles(emb):
    bq = emb.bq
    e = bq.edges[bq.is_boundary_edge]
    return {(int(z), int(v)): float(np.angle(emb.pos[v] - emb.pos[z])) for z, v in e}


@pytest.mark.parametrize("kind", ["square", "hex", "projection"])
def test_neumann_identity_data(lattices, kind):
    emb = lattices[kind]
    z0 = int(emb.bq.interior_white[0])
    r, phi = solve_neumann(NeumannProblem(emb.bq, emb.alpha, _iso_angles(emb),
                                          (z0, emb.eps)))
    assert np.allclose(r.values[emb.bq.white], emb.eps, rtol=1e-10, atol=0)
    ref = angle_function(isoradial_pattern(emb))
    d = (phi.phi - ref.phi + np.pi) % (2 * np.pi) - np.pi
    assert np.max(np.abs(d)) < 1e-10
    for (z, v), ang in _iso_angles(emb).items():
        assert abs((phi(z, v) - ang + np.pi) % (2 * np.pi) - np.pi) < 1e-10


@pytest.mark.parametrize("psi", [0.4, -2.0, 3.0])
def test_neumann_rotation_equivariance(hex_emb, psi):
    emb = hex_emb
    data = boundary_angles(SQUARE, emb)
    z0 = int(emb.bq.interior_white[0])
    anchor = (z0, emb.eps * 2 * abs(emb.pos[z0]))
    r1, p1 = solve_neumann(NeumannProblem(emb.bq, emb.alpha, data, anchor))
    rot = {k: v + psi for k, v in data.items()}
    r2, p2 = solve_neumann(NeumannProblem(emb.bq, emb.alpha, rot, anchor))
    w = emb.bq.white
    assert np.max(np.abs(r1.values[w] / r2.values[w] - 1)) < 1e-10
    d = (p2.phi - p1.phi - psi + np.pi) % (2 * np.pi) - np.pi
    assert np.max(np.abs(d)) < 1e-10


def test_neumann_string_keys(square_emb):
    emb = square_emb
    data = boundary_angles(SQUARE, emb)
    z0 = int(emb.bq.interior_white[0])
    r1, _ = solve_neumann(NeumannProblem(emb.bq, emb.alpha, data, (z0, 1.0)))
    r2, _ = solve_neumann(NeumannProblem(emb.bq, emb.alpha,
                                         {f"{z},{v}": a for (z, v), a in data.items()},
                                         (z0, 1.0)))
    assert np.array_equal(r1.values, r2.values, equal_nan=True)


def test_neumann_closing_condition_at_black_vertices(penrose_emb):
    emb = penrose_emb
    z0 = int(emb.bq.interior_white[0])
    r, phi = solve_neumann(NeumannProblem(emb.bq, emb.alpha,
                                          boundary_angles(SQUARE, emb), (z0, emb.eps)))
    # the radii close up around every interior white vertex as well
    assert _max_residual(emb, r) < 1e-9
    assert r.values[z0] == pytest.approx(emb.eps, rel=1e-15)


def test_neumann_matches_dirichlet_across_resolutions():
    gaps = {}
    for eps in (1 / 16, 1 / 32):
        emb = gen_square_grid((1, 0, 2, 1), eps)
        rd = _dirichlet(emb, boundary_radii(SQUARE, emb))
        w = emb.bq.interior_white
        z0 = int(w[len(w) // 2])
        rn, _ = solve_neumann(NeumannProblem(emb.bq, emb.alpha, boundary_angles(SQUARE, emb),
                                             (z0, rd.values[z0])))
        wa = emb.bq.white
        gaps[eps] = np.max(np.abs(np.log(rn.values[wa]) - np.log(rd.values[wa])))
        assert gaps[eps] == pytest.approx(NEUMANN_GAP[eps], rel=1e-6)
    assert gaps[1 / 32] <= 0.5 * gaps[1 / 16]


def test_neumann_kite_condition(square_emb):
    emb = square_emb
    data = _iso_angles(emb)
    # open one boundary kite past its admissible range
    k = next(iter(data))
    z, v = k
    bad = dict(data)
    for key in bad:
        if key[1] == v:
            bad[key] += 2.0
    with pytest.raises(KiteConditionViolated):
        solve_neumann(NeumannProblem(emb.bq, emb.alpha, bad, (z, emb.eps)))


def test_neumann_invalid_data(square_emb):
    emb = square_emb
    data = _iso_angles(emb)
    z0 = int(emb.bq.interior_white[0])
    with pytest.raises(InvalidBoundary):
        solve_neumann(NeumannProblem(emb.bq, emb.alpha, data, (z0, 0.0)))
    short = dict(data)
    v = next(iter(short))[1]
    for key in [k for k in short if k[1] == v]:
        short.pop(key)
    with pytest.raises(InvalidBoundary):
        solve_neumann(NeumannProblem(emb.bq, emb.alpha, short, (z0, 1.0)))


def test_neumann_infeasible_labelling():
    emb = gen_square_grid((0, 0, 1, 1), 0.25)
    alpha = emb.alpha.copy()
    bq = emb.bq
    f = next(f for f, q in enumerate(bq.faces) if not bq.is_boundary[q].any())
    alpha[f] = np.pi / 3
    with pytest.raises(ClosingConditionInfeasible):
        solve_neumann(NeumannProblem(bq, alpha, _iso_angles(emb),
                                     (int(bq.interior_white[0]), 1.0)))
