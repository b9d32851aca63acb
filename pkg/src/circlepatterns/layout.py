"""Planar realisation of circle patterns and comparison functions.

A circle pattern is stored by the positions of all vertices of its
b-quad-graph: white vertices carry circle centres, black vertices carry
intersection points.  Every face is a kite with side lengths ``r(z-)`` and
``r(z+)`` and angle ``alpha`` at both black corners.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .bquad import BQuadGraph, as_alpha_array, derive_views
from .errors import (BoundaryMismatch, CombinatoricsMismatch, DegenerateEdge,
                     InconsistentExtension, MissingValue, NonClosingFan,
                     ResidualTooLarge)
from .kernels import RadiusFunction, f_theta, radius_values, residuals

LAYOUT_RESIDUAL_TOL = 1e-8
CLOSURE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CirclePattern:
    """Realised circle pattern.

    Attributes
    ----------
    bq : BQuadGraph
    alpha : ndarray, shape (nf,)
    radii : ndarray, shape (nv,)
        Radius at white vertices, NaN at black vertices.
    pos : complex ndarray, shape (nv,)
        Circle centres (white) and intersection points (black).
    closure_gap : float
        Largest relative mismatch met while placing kites.
    """
    bq: BQuadGraph
    alpha: np.ndarray
    radii: np.ndarray
    pos: np.ndarray
    closure_gap: float = 0.0

    @property
    def centers(self) -> dict:
        return {int(z): self.pos[z] for z in self.bq.white}

    @property
    def points(self) -> dict:
        return {int(v): self.pos[v] for v in self.bq.black}

    @property
    def kites(self) -> np.ndarray:
        """Corner positions of every face, shape (nf, 4)."""
        return self.pos[self.bq.faces]

    def transformed(self, rot: complex, shift: complex) -> "CirclePattern":
        """Pattern moved by ``p -> rot * p + shift``."""
        return CirclePattern(self.bq, self.alpha, self.radii * abs(rot),
                             rot * self.pos + shift, self.closure_gap)

    def to_dict(self) -> dict:
        return {
            "centers": {str(z): [self.pos[z].real, self.pos[z].imag]
                        for z in map(int, self.bq.white)},
            "points": {str(v): [self.pos[v].real, self.pos[v].imag]
                       for v in map(int, self.bq.black)},
            "radii": {str(z): float(self.radii[z]) for z in map(int, self.bq.white)},
            "faces": self.bq.faces.tolist(),
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)


def pattern_from_dict(data: dict, bq: BQuadGraph | None = None, alpha=None):
    """Rebuild a pattern from its JSON form.

    The combinatorics are taken from ``bq`` when given, otherwise from the
    ``faces`` entry.
    """
    from .bquad import build_bquad
    if bq is None:
        white = [int(k) for k in data["centers"]]
        black = [int(k) for k in data["points"]]
        bq = build_bquad(data["faces"], white=white, black=black)
    pos = np.full(bq.n_vertices, np.nan, dtype=complex)
    radii = np.full(bq.n_vertices, np.nan)
    for key in ("centers", "points"):
        for k, (x, y) in data[key].items():
            pos[bq.index_of(int(k))] = complex(x, y)
    for k, r in data["radii"].items():
        radii[bq.index_of(int(k))] = r
    if alpha is None:
        q = bq.faces
        alpha = np.abs(np.angle((pos[q[:, 2]] - pos[q[:, 1]])
                                / (pos[q[:, 0]] - pos[q[:, 1]])))
    return CirclePattern(bq, as_alpha_array(bq, alpha), radii, pos)


def isoradial_pattern(emb) -> CirclePattern:
    """Pattern whose kites are the rhombi of an embedding."""
    radii = np.where(emb.bq.is_white, emb.eps, np.nan)
    return CirclePattern(emb.bq, np.asarray(emb.alpha, dtype=float), radii,
                         np.asarray(emb.pos, dtype=complex))


def _local_edge_angles(q, alpha, r):
    """Edge directions of kite ``q`` in a frame where ``z- -> v-`` points along 0.

    Returned in face-edge order ``(z-v-), (v-z+), (z+v+), (v+z-)``, each as
    the angle of ``p(black) - p(white)``.
    """
    A, B, C, D = (int(x) for x in q)
    ang = 2.0 * f_theta(alpha, np.log(r[C]) - np.log(r[A]))
    b = r[A]
    d = r[A] * np.exp(1j * ang)
    c = r[A] - r[C] * np.exp(-1j * alpha)
    return np.array([0.0, np.angle(b - c), np.angle(d - c), ang])


def layout_pattern(bq: BQuadGraph, alpha, r, seed_edge=None,
                   seed_point: complex = 0.0, seed_direction: complex = 1.0,
                   closure_tol: float = CLOSURE_TOL) -> CirclePattern:
    """Realise a radius function as a planar pattern.

    Edge directions are propagated face by face from the seed edge using
    exact per-kite offsets, then vertices are placed by summing edge vectors
    along a spanning tree.  Both stages only add offsets, so rounding errors
    grow linearly with graph distance.

    Parameters
    ----------
    r : RadiusFunction or array over vertex ids
    seed_edge : (white, black) pair or edge index, default edge 0
        Its white end is put at ``seed_point`` and its black end in the
        direction ``seed_direction``.
    closure_tol : float
        Allowed mismatch, relative to the local radius, when an edge
        direction or a vertex is reached along a second route.

    Raises
    ------
    ResidualTooLarge
        Some interior closing condition is violated by more than 1e-8.
    NonClosingFan
        A second route disagrees by more than ``closure_tol``.
    """
    a = as_alpha_array(bq, alpha)
    rv = radius_values(bq, r)
    view = derive_views(bq)
    inner = bq.interior_white
    if len(inner):
        res = residuals(view, a, np.log(np.where(bq.is_white, rv, 1.0)))[inner]
        worst = float(np.max(np.abs(res)))
        if worst > LAYOUT_RESIDUAL_TOL:
            raise ResidualTooLarge(f"closing condition violated by {worst:.3e}")
    if seed_edge is None:
        e0 = 0
    elif np.ndim(seed_edge) == 0:
        e0 = int(seed_edge)
    else:
        e0 = bq.edge_id(*seed_edge)

    # edge directions
    phi = np.full(len(bq.edges), np.nan)
    phi[e0] = np.angle(complex(seed_direction))
    gap = 0.0
    queue = deque(int(f) for f in bq.edge_faces[e0] if f >= 0)
    done = np.zeros(bq.n_faces, dtype=bool)
    done[list(queue)] = True
    while queue:
        f = queue.popleft()
        fe = bq.face_edges[f]
        loc = _local_edge_angles(bq.faces[f], a[f], rv)
        k = next(i for i in range(4) if not np.isnan(phi[fe[i]]))
        vals = phi[fe[k]] + loc - loc[k]
        for e, val in zip(fe, vals):
            if np.isnan(phi[e]):
                phi[e] = val
            else:
                g = abs(_wrap(val - phi[e]))
                gap = max(gap, g)
                if g > closure_tol:
                    raise NonClosingFan(int(bq.edges[e][1]), g)
            for g2 in bq.edge_faces[e]:
                if g2 >= 0 and not done[g2]:
                    done[g2] = True
                    queue.append(int(g2))

    # vertex positions along a spanning tree of the edge graph
    z0, v0 = (int(x) for x in bq.edges[e0])
    vec = rv[bq.edges[:, 0]] * np.exp(1j * phi)
    adj = [[] for _ in range(bq.n_vertices)]
    for e, (z, v) in enumerate(bq.edges):
        adj[z].append((v, e, 1.0))
        adj[v].append((z, e, -1.0))
    pos = np.full(bq.n_vertices, np.nan, dtype=complex)
    pos[z0] = complex(seed_point)
    queue = deque([z0])
    while queue:
        x = queue.popleft()
        for y, e, s in adj[x]:
            if np.isnan(pos[y]):
                pos[y] = pos[x] + s * vec[e]
                queue.append(y)
    mism = np.abs(pos[bq.edges[:, 1]] - pos[bq.edges[:, 0]] - vec) / rv[bq.edges[:, 0]]
    worst = float(np.max(mism, initial=0.0))
    if worst > closure_tol:
        e = int(np.argmax(mism))
        raise NonClosingFan(int(bq.edges[e][1]), worst)
    gap = max(gap, worst)
    radii = np.where(bq.is_white, rv, np.nan)
    return CirclePattern(bq, a, radii, pos, gap)


def kite_angle_sums(cp: CirclePattern) -> np.ndarray:
    """Sum of incident kite angles at every vertex (NaN-free for all ids)."""
    bq = cp.bq
    out = np.zeros(bq.n_vertices)
    q = bq.faces
    p = cp.pos[q]
    for k in range(4):
        prev, here, nxt = p[:, (k - 1) % 4], p[:, k], p[:, (k + 1) % 4]
        ang = np.angle((prev - here) / (nxt - here)) % (2 * np.pi)
        np.add.at(out, q[:, k], ang)
    return out


def is_embedded(cp: CirclePattern, tol: float = 1e-9) -> bool:
    """Whether distinct kites have disjoint interiors.

    Candidate pairs come from an R-tree over kite bounding boxes; each pair is
    tested by polygon intersection area.
    """
    from shapely import STRtree
    from shapely.geometry import Polygon
    polys = [Polygon([(z.real, z.imag) for z in k]) for k in cp.kites]
    if any(not p.is_valid for p in polys):
        return False
    tree = STRtree(polys)
    left, right = tree.query(polys, predicate="intersects")
    area_scale = np.nanmax(cp.radii) ** 2
    for i, j in zip(left, right):
        if i < j and polys[i].intersection(polys[j]).area > tol * area_scale:
            return False
    return True


# -- angle functions ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AngleFunction:
    """Arguments of the edge vectors ``p(v) - p(z)``, white to black.

    ``phi[e]`` is a real lift chosen along a breadth-first tree of edges; the
    reversed edge carries ``phi[e] - pi``.
    """
    bq: BQuadGraph
    phi: np.ndarray

    def __call__(self, a: int, b: int) -> float:
        """Angle of the directed edge from ``a`` to ``b``."""
        e = self.bq.edge_id(a, b)
        return float(self.phi[e] if self.bq.is_white[a] else self.phi[e] - np.pi)


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def lift_angles(bq: BQuadGraph, raw) -> np.ndarray:
    """Lift angles mod 2 pi along a breadth-first tree over face adjacency."""
    raw = np.asarray(raw, dtype=float)
    ne = len(bq.edges)
    out = np.full(ne, np.nan)
    nbrs = [[] for _ in range(ne)]
    for fe in bq.face_edges:
        for i in range(4):
            nbrs[fe[i]].append(fe[(i + 1) % 4])
            nbrs[fe[(i + 1) % 4]].append(fe[i])
    for root in range(ne):
        if not np.isnan(out[root]):
            continue
        out[root] = raw[root]
        queue = deque([root])
        while queue:
            e = queue.popleft()
            for g in nbrs[e]:
                if np.isnan(out[g]):
                    out[g] = out[e] + _wrap(raw[g] - out[e])
                    queue.append(g)
    return out


def angle_function(cp: CirclePattern) -> AngleFunction:
    """Angle function of a laid-out pattern.

    Raises
    ------
    DegenerateEdge
        Some edge has (numerically) zero length.
    """
    e = cp.bq.edges
    vec = cp.pos[e[:, 1]] - cp.pos[e[:, 0]]
    scale = np.nanmax(np.abs(vec)) if len(vec) else 1.0
    bad = np.flatnonzero(~(np.abs(vec) > 1e-14 * scale))
    if len(bad):
        raise DegenerateEdge(f"edge {tuple(e[bad[0]])} has zero length")
    return AngleFunction(cp.bq, lift_angles(cp.bq, np.angle(vec)))


def angle_relation_errors(af: AngleFunction, alpha, r) -> np.ndarray:
    """Violations (mod 2 pi) of the six per-face angle relations.

    Returns an array of shape (nf, 6).  With the face labelled
    ``(z-, v-, z+, v+)`` and ``e1 = z- v+``, ``e2 = z- v-``,
    ``-e3 = v- z+``, ``-e4 = v+ z+`` the relations are::

        phi(e1) - phi(-e3)  = alpha - pi + K
        phi(-e4) - phi(e2)  = alpha - pi + K
        phi(e1) - phi(e2)   = K
        phi(-e4) - phi(-e3) = -2 f(log r- - log r+)
        phi(-e3) - phi(e2)  = pi - alpha
        phi(-e4) - phi(e1)  = alpha - pi

    where ``K = 2 f(log r+ - log r-)``.
    """
    bq = af.bq
    a = as_alpha_array(bq, alpha)
    rv = radius_values(bq, r)
    q = bq.faces
    fe = bq.face_edges  # (z-v-), (v-z+), (z+v+), (v+z-)
    e1 = af.phi[fe[:, 3]]
    e2 = af.phi[fe[:, 0]]
    m3 = af.phi[fe[:, 1]] - np.pi
    m4 = af.phi[fe[:, 2]] - np.pi
    x = np.log(rv[q[:, 2]]) - np.log(rv[q[:, 0]])
    K = 2 * f_theta(a, x)
    lhs = np.stack([e1 - m3, m4 - e2, e1 - e2, m4 - m3, m3 - e2, m4 - e1], 1)
    rhs = np.stack([a - np.pi + K, a - np.pi + K, K, -2 * f_theta(a, -x),
                    np.pi - a, a - np.pi], 1)
    return np.abs(_wrap(lhs - rhs))


def monotonicity_violations(af: AngleFunction) -> list:
    """White vertices where edge angles fail to wind monotonically once."""
    bq = af.bq
    bad = []
    for z in bq.white:
        nb = bq.fans[z].neighbors
        ang = np.array([af(int(z), int(v)) for v in nb])
        if bq.fans[z].closed:
            inc = np.diff(np.append(ang, ang[0])) % (2 * np.pi)
            ok = np.all(inc > 0) and abs(inc.sum() - 2 * np.pi) < 1e-9
        else:
            inc = np.diff(ang) % (2 * np.pi)
            ok = np.all(inc > 0) and inc.sum() < 2 * np.pi
        if not ok:
            bad.append(int(z))
    return bad


# -- comparison functions ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComparisonFunction:
    """Scale at white vertices and rotation at black vertices.

    ``values[z] = r2(z) / r1(z)`` for white ``z`` and ``exp(i delta(v))`` for
    black ``v``; ``delta`` holds the real rotation angles (NaN at white).
    """
    bq: BQuadGraph
    values: np.ndarray
    delta: np.ndarray = field(default=None)

    def __getitem__(self, x):
        return self.values[x]


def _same_combinatorics(c1, c2):
    if c1.bq is c2.bq:
        return True
    return (c1.bq.faces.shape == c2.bq.faces.shape
            and np.array_equal(c1.bq.faces, c2.bq.faces)
            and np.array_equal(c1.bq.is_white, c2.bq.is_white))


def comparison_function(c1: CirclePattern, c2: CirclePattern,
                        anchor_black_vertex: int | None = None,
                        anchor_delta: float | None = 0.0) -> ComparisonFunction:
    """Comparison function of ``c2`` relative to ``c1``.

    The rotation ``delta`` is propagated over the black graph from the
    anchor by the per-face relation between scale ratios and rotations.
    With ``anchor_delta=None`` the anchor value is read off the two
    patterns, reduced to ``[0, 2 pi)``.

    Raises
    ------
    CombinatoricsMismatch
        The patterns differ in faces or labels.
    """
    if not _same_combinatorics(c1, c2) or not np.allclose(c1.alpha, c2.alpha,
                                                          atol=1e-12):
        raise CombinatoricsMismatch("patterns have different combinatorics")
    bq = c1.bq
    r1 = np.where(bq.is_white, c1.radii, 1.0)
    r2 = np.where(bq.is_white, c2.radii, 1.0)
    w = r2 / r1
    if anchor_black_vertex is None:
        anchor = int(bq.black[0])
    else:
        anchor = int(anchor_black_vertex)
    if anchor_delta is None:
        e = bq.fans[anchor].neighbors[0]
        d1 = np.angle(c1.pos[anchor] - c1.pos[e])
        d2 = np.angle(c2.pos[anchor] - c2.pos[e])
        anchor_delta = float((d2 - d1) % (2 * np.pi))
    delta = np.full(bq.n_vertices, np.nan)
    delta[anchor] = anchor_delta
    a = c1.alpha
    q = bq.faces
    lr1 = np.log(r1[q[:, 2]] / r1[q[:, 0]])
    lw = np.log(w[q[:, 2]] / w[q[:, 0]])
    jump = 2 * f_theta(a, lw + lr1) - 2 * f_theta(a, lr1)  # delta(v+) - delta(v-)
    adj = [[] for _ in range(bq.n_vertices)]
    for f, (vm, vp) in enumerate(q[:, [1, 3]]):
        adj[vm].append((vp, jump[f]))
        adj[vp].append((vm, -jump[f]))
    queue = deque([anchor])
    while queue:
        x = queue.popleft()
        for y, j in adj[x]:
            if np.isnan(delta[y]):
                delta[y] = delta[x] + j
                queue.append(y)
    values = np.where(bq.is_white, w, np.exp(1j * np.nan_to_num(delta)))
    return ComparisonFunction(bq, values.astype(complex), delta)


def check_hirota(w, positions, face) -> complex:
    """Kite closing sum of the image pattern on one face.

    Parameters
    ----------
    w : ComparisonFunction or complex array over vertex ids
    positions : complex array (or an object with ``pos`` and ``bq``)
        Vertex positions of the reference pattern.
    face : int or 4-sequence ``(y0, x0, y1, x1)``
        Face index (requires ``positions.bq``) or CCW vertex quadruple.

    Returns
    -------
    complex
        ``w(x0)w(y0)(x0-y0) + w(x0)w(y1)(y1-x0) + w(x1)w(y1)(x1-y1)
        + w(x1)w(y0)(y0-x1)``, which on rhombi reduces to
        ``w(x0)w(y0)a0 - w(x1)w(y0)a1 - w(x1)w(y1)a0 + w(x0)w(y1)a1``.
    """
    vals = w.values if isinstance(w, ComparisonFunction) else np.asarray(w)
    if np.ndim(face) == 0:
        face = positions.bq.faces[int(face)]
    pos = positions.pos if hasattr(positions, "pos") else np.asarray(positions)
    y0, x0, y1, x1 = (int(v) for v in face)
    ww = vals[[y0, x0, y1, x1]]
    if np.any(~np.isfinite(ww)):
        raise MissingValue(f"comparison function undefined on face {tuple(face)}")
    wy0, wx0, wy1, wx1 = ww
    py0, px0, py1, px1 = pos[[y0, x0, y1, x1]]
    return complex(wx0 * wy0 * (px0 - py0) + wx0 * wy1 * (py1 - px0)
                   + wx1 * wy1 * (px1 - py1) + wx1 * wy0 * (py0 - px1))


# -- extension to the brick and transplantation -----------------------------

def _facet_points(base, j, k):
    b = np.asarray(base)
    ej = np.zeros_like(b)
    ek = np.zeros_like(b)
    ej[j] = 1
    ek[k] = 1
    return [tuple(b.tolist()), tuple((b + ej).tolist()),
            tuple((b + ej + ek).tolist()), tuple((b + ek).tolist())]


def _facet_residual(vals, pts, directions):
    """Hirota closing sum on a unit lattice facet, any vertex order."""
    p = [np.asarray(x) @ directions for x in pts]
    white = [i for i in range(4) if sum(pts[i]) % 2 == 0]
    y0, y1 = white
    x0, x1 = (y0 + 1) % 4, (y0 + 3) % 4
    # cycle y0 -> x0 -> y1 -> x1 -> y0 along the facet boundary
    return (vals[x0] * vals[y0] * (p[x0] - p[y0])
            + vals[x0] * vals[y1] * (p[y1] - p[x0])
            + vals[x1] * vals[y1] * (p[x1] - p[y1])
            + vals[x1] * vals[y0] * (p[y0] - p[x1]))


def _solve_fourth(vals, pts, directions, unknown):
    # the closing sum is affine in each single value
    v0 = list(vals)
    v0[unknown] = 0.0
    b = _facet_residual(v0, pts, directions)
    v0[unknown] = 1.0
    a = _facet_residual(v0, pts, directions) - b
    if abs(a) < 1e-300:
        raise InconsistentExtension("degenerate facet while extending")
    return -b / a


def extend_comparison(w, lift, target, points=None, tol: float = 1e-8) -> dict:
    """Extend a comparison function from a lifted surface into a brick.

    Values are propagated facet by facet: whenever three corners of a unit
    facet inside the brick are known the fourth follows from the closing
    sum.  Every facet whose corners all end up known is checked.

    Parameters
    ----------
    w : ComparisonFunction or complex array over the lift's vertex ids
    lift : ZdLift
    target : Brick
    points : iterable of lattice points, optional
        Restrict the extension to these points (default: the whole brick).

    Returns
    -------
    dict
        Lattice point tuple -> complex value.

    Raises
    ------
    InconsistentExtension
        Two routes give different values, beyond ``tol`` relative.
    """
    import itertools
    vals = w.values if isinstance(w, ComparisonFunction) else np.asarray(w)
    dirs = lift.directions
    d = lift.dim
    known = {tuple(c.tolist()): complex(vals[i]) for i, c in enumerate(lift.coords)}
    allowed = None if points is None else {tuple(map(int, p)) for p in points}
    allowed_ok = (lambda p: target.contains(p)) if allowed is None else \
        (lambda p: p in allowed and target.contains(p))
    pairs = list(itertools.combinations(range(d), 2))

    def facets_at(p):
        p = np.asarray(p)
        for j, k in pairs:
            for sj in (0, 1):
                for sk in (0, 1):
                    base = p.copy()
                    base[j] -= sj
                    base[k] -= sk
                    pts = _facet_points(base, j, k)
                    if all(allowed_ok(x) for x in pts):
                        yield tuple(pts)

    queue = deque(known)
    seen_facets = set()
    while queue:
        p = queue.popleft()
        for pts in facets_at(p):
            missing = [i for i, x in enumerate(pts) if x not in known]
            if len(missing) != 1:
                if not missing:
                    seen_facets.add(pts)
                continue
            i = missing[0]
            val = _solve_fourth([known.get(x, 0.0) for x in pts], pts, dirs, i)
            known[pts[i]] = val
            queue.append(pts[i])
    scale = max(1.0, max(abs(v) for v in known.values()))
    for pts in seen_facets:
        res = _facet_residual([known[x] for x in pts], pts, dirs)
        if abs(res) > tol * scale ** 2:
            raise InconsistentExtension(f"facet {pts[0]} residual {abs(res):.3e}")
    return known


def _boundary_edges(lift):
    bq = lift.bq
    out = set()
    for e in np.flatnonzero(bq.is_boundary_edge):
        a, b = bq.edges[e]
        out.add(frozenset((tuple(lift.coords[a].tolist()),
                           tuple(lift.coords[b].tolist()))))
    return out


def transplant(c2: CirclePattern, lift, lift_prime) -> CirclePattern:
    """Carry a pattern on one surface over to another with equal boundary.

    The comparison function of ``c2`` against the isoradial pattern of
    ``lift`` is extended to the lattice points of ``lift_prime`` and the new
    pattern is assembled from the scaled and rotated rhombus edges.

    Raises
    ------
    BoundaryMismatch
        The two surfaces have different boundary edges in Z^d.
    """
    if _boundary_edges(lift) != _boundary_edges(lift_prime):
        raise BoundaryMismatch("surfaces do not share their boundary")
    from .lattice import brick, Brick
    ref = isoradial_pattern(lift.embedding(1.0))
    w = comparison_function(ref, c2, anchor_delta=None)
    pts = {tuple(c.tolist()) for c in lift.coords}
    pts |= {tuple(c.tolist()) for c in lift_prime.coords}
    b1, b2 = brick(lift), brick(lift_prime)
    box = Brick(np.minimum(b1.lo, b2.lo), np.maximum(b1.hi, b2.hi))
    ext = extend_comparison(w, lift, box, points=pts)
    bq = lift_prime.bq
    coords = [tuple(c.tolist()) for c in lift_prime.coords]
    try:
        wv = np.array([ext[c] for c in coords])
    except KeyError as err:
        raise InconsistentExtension(f"no value reached lattice point {err}")
    unit = lift_prime.positions(1.0)
    # anchor at a boundary vertex shared with the source pattern
    start = int(np.flatnonzero(bq.is_boundary)[0])
    src = lift.vertex_of(coords[start])
    pos = np.full(bq.n_vertices, np.nan, dtype=complex)
    pos[start] = c2.pos[src]
    adj = [[] for _ in range(bq.n_vertices)]
    for a, b in bq.edges:
        adj[a].append(b)
        adj[b].append(a)
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if np.isnan(pos[y]):
                pos[y] = pos[x] + wv[x] * wv[y] * (unit[y] - unit[x])
                queue.append(y)
    radii = np.where(bq.is_white, np.abs(wv), np.nan)
    alpha = lift_prime.embedding(1.0).alpha
    return CirclePattern(bq, alpha, radii, pos)
