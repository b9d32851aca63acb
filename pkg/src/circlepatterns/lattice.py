"""Isoradial rhombic embeddings and their lifts to Z^d.

Generators return a :class:`RhombicEmbedding`: a b-quad-graph with vertex
positions such that every face is a rhombus of side ``eps``.  The labelling
``alpha`` is the rhombus angle at the black vertices, so that labels add up to
``2 pi`` around every interior black vertex.

Quasicrystallic embeddings come from the grid projection (de Bruijn
multigrid) construction.  Every edge of such an embedding is parallel to one
of finitely many directions ``a_1..a_d`` and the embedding lifts to a
two-dimensional surface in Z^d, represented by :class:`ZdLift`.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .bquad import BQuadGraph, build_bquad, bquad_from_dict, bquad_to_dict
from .errors import (DegenerateDomain, DegenerateFacetProjection,
                     DegenerateOffset, InconsistentDirections,
                     NonManifoldEdge, NotFlippable,
                     PlaneContainsLatticeSegment)

DIRECTION_TOL = 1e-9
SEGMENT_TOL = 1e-9
CONCURRENCY_TOL = 1e-9
EXACT_MONOTONE_LIMIT = 1500


@dataclass(frozen=True, eq=False)
class RhombicEmbedding:
    """Planar rhombic embedding of a b-quad-graph.

    Attributes
    ----------
    bq : BQuadGraph
    alpha : ndarray, shape (nf,)
        Rhombus angle at the black vertices of each face.
    pos : complex ndarray, shape (nv,)
    eps : float
        Common edge length.
    directions : complex ndarray, shape (d,)
        Unit edge directions ``a_1..a_d``; every edge vector is ``+-eps a_k``.
    """
    bq: BQuadGraph
    alpha: np.ndarray
    pos: np.ndarray
    eps: float
    directions: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.directions)

    def edge_lengths(self) -> np.ndarray:
        e = self.bq.edges
        return np.abs(self.pos[e[:, 0]] - self.pos[e[:, 1]])

    def scaled(self, factor: float) -> "RhombicEmbedding":
        return RhombicEmbedding(self.bq, self.alpha, self.pos * factor,
                                self.eps * factor, self.directions)

    def to_dict(self) -> dict:
        out = bquad_to_dict(self.bq, self.alpha)
        out["positions"] = [[float(p.real), float(p.imag)] for p in self.pos]
        out["eps"] = float(self.eps)
        out["directions"] = [[float(a.real), float(a.imag)]
                             for a in self.directions]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RhombicEmbedding":
        bq, alpha = bquad_from_dict(data)
        pos_in = np.array([complex(x, y) for x, y in data["positions"]])
        # positions are listed by original id; reorder to compact ids
        pos = pos_in[[int(lab) for lab in bq.labels]]
        if alpha is None:
            alpha = alpha_from_positions(bq, pos)
        dirs = np.array([complex(x, y) for x, y in data["directions"]])
        return cls(bq, alpha, pos, float(data["eps"]), dirs)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "RhombicEmbedding":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def alpha_from_positions(bq: BQuadGraph, pos) -> np.ndarray:
    """Interior angle at ``v-`` of every face."""
    q = bq.faces
    zm, vm, zp = pos[q[:, 0]], pos[q[:, 1]], pos[q[:, 2]]
    return np.abs(np.angle((zp - vm) / (zm - vm)))


def check_rhombic(emb: RhombicEmbedding, tol: float = 1e-10) -> list:
    """Violated embedding invariants as human-readable strings."""
    problems = []
    lengths = emb.edge_lengths()
    if np.any(np.abs(lengths - emb.eps) > tol * emb.eps):
        problems.append("edge length differs from eps")
    a = alpha_from_positions(emb.bq, emb.pos)
    if np.any(np.abs(a - emb.alpha) > 1e-9):
        problems.append("alpha differs from rhombus angle")
    if np.any((emb.alpha <= 0) | (emb.alpha >= np.pi)):
        problems.append("alpha outside (0, pi)")
    q = emb.pos[emb.bq.faces]
    # rhombus: diagonals share a midpoint
    if np.any(np.abs(q[:, 0] + q[:, 2] - q[:, 1] - q[:, 3]) > tol * emb.eps * 4):
        problems.append("face is not a parallelogram")
    area = 0.5 * np.imag(np.conj(q[:, 2] - q[:, 0]) * (q[:, 3] - q[:, 1]))
    if np.any(area <= 0):
        problems.append("face not counterclockwise")
    return problems


# -- helpers shared by generators -----------------------------------------

def _cleanup(quads):
    """Drop pinched stars and keep the largest edge-connected piece.

    ``quads`` are CCW tuples of hashable keys.  Returns a new list.
    """
    quads = list(quads)
    while True:
        by_vertex = {}
        for f, q in enumerate(quads):
            for k in range(4):
                by_vertex.setdefault(q[k], []).append(f)
        drop = set()
        for x, fs in by_vertex.items():
            if len(fs) < 2:
                continue
            # faces around x are linked when they share an edge at x
            parent = {f: f for f in fs}

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a
            by_nbr = {}
            for f in fs:
                q = quads[f]
                k = q.index(x)
                for n in (q[(k + 1) % 4], q[(k - 1) % 4]):
                    if n in by_nbr:
                        parent[find(f)] = find(by_nbr[n])
                    else:
                        by_nbr[n] = f
            groups = {}
            for f in fs:
                groups.setdefault(find(f), []).append(f)
            if len(groups) > 1:
                keep = max(groups.values(), key=lambda g: (len(g), -min(g)))
                drop.update(f for g in groups.values() if g is not keep
                            for f in g)
        if not drop:
            break
        quads = [q for f, q in enumerate(quads) if f not in drop]

    # largest component under edge adjacency
    by_edge = {}
    for f, q in enumerate(quads):
        for k in range(4):
            by_edge.setdefault(frozenset((q[k], q[(k + 1) % 4])), []).append(f)
    comp = [-1] * len(quads)
    sizes = []
    for s in range(len(quads)):
        if comp[s] >= 0:
            continue
        c = len(sizes)
        comp[s] = c
        stack, n = [s], 0
        while stack:
            f = stack.pop()
            n += 1
            q = quads[f]
            for k in range(4):
                for g in by_edge[frozenset((q[k], q[(k + 1) % 4]))]:
                    if comp[g] < 0:
                        comp[g] = c
                        stack.append(g)
        sizes.append(n)
    if not sizes:
        return []
    best = int(np.argmax(sizes))
    return [q for f, q in enumerate(quads) if comp[f] == best]


def _assemble(quads, key_pos, eps, directions, with_keys=False):
    """Turn key quadruples into a RhombicEmbedding.

    ``key_pos`` maps a vertex key to its position; keys are renumbered in
    order of first appearance.  With ``with_keys`` the cleaned quadruples and
    the key of every vertex id are returned as well.
    """
    quads = _cleanup(quads)
    if not quads:
        raise DegenerateDomain("no face fits into the domain")
    ids = {}
    for q in quads:
        for x in q:
            if x not in ids:
                ids[x] = len(ids)
    faces = [[ids[x] for x in q] for q in quads]
    white = sorted({f[0] for f in faces} | {f[2] for f in faces})
    black = sorted({f[1] for f in faces} | {f[3] for f in faces})
    bq = build_bquad(faces, white=white, black=black)
    keys = [None] * len(ids)
    for x, i in ids.items():
        keys[i] = x
    pos = np.array([key_pos(keys[lab]) for lab in bq.labels], dtype=complex)
    alpha = alpha_from_positions(bq, pos)
    emb = RhombicEmbedding(bq, alpha, pos, float(eps),
                           np.asarray(directions, dtype=complex))
    if with_keys:
        return emb, quads, [keys[lab] for lab in bq.labels]
    return emb


def _domain(domain):
    x0, y0, x1, y1 = (float(c) for c in domain)
    if not (x1 > x0 and y1 > y0):
        raise DegenerateDomain(f"empty domain {domain}")
    return x0, y0, x1, y1


# -- generators ------------------------------------------------------------

def gen_square_grid(domain, eps: float) -> RhombicEmbedding:
    """Square grid ``eps Z^2`` anchored at the lower-left domain corner.

    White vertices are the lattice points with even index sum.
    """
    x0, y0, x1, y1 = _domain(domain)
    if not eps > 0:
        raise DegenerateDomain("eps must be positive")
    nx = int(np.floor((x1 - x0) / eps + 1e-9))
    ny = int(np.floor((y1 - y0) / eps + 1e-9))
    if nx < 1 or ny < 1:
        raise DegenerateDomain("fewer than one face fits")
    faces = []
    for j in range(ny):
        for i in range(nx):
            c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if (i + j) % 2:
                c = c[1:] + c[:1]
            faces.append(tuple(c))
    return _assemble(faces, lambda k: complex(x0 + k[0] * eps, y0 + k[1] * eps),
                     eps, [1.0, 1j])


def gen_hexagonal(domain, eps: float) -> RhombicEmbedding:
    """Rhombic embedding of the regular hexagonal circle pattern.

    White vertices (circle centres) form a triangular lattice with spacing
    ``eps sqrt(3)``; black vertices are the triangle centres.  Every rhombus
    has angle ``2 pi / 3`` at its black vertices.  Faces with all four
    vertices inside the domain are kept.
    """
    x0, y0, x1, y1 = _domain(domain)
    if not eps > 0:
        raise DegenerateDomain("eps must be positive")
    s = eps * np.sqrt(3.0)
    w1, w2 = complex(s, 0.0), s * np.exp(1j * np.pi / 3)
    origin = complex(x0, y0)

    def white_pos(i, j):
        return origin + i * w1 + j * w2

    def key_pos(k):
        if k[0] == "w":
            return white_pos(k[1], k[2])
        i, j = k[1], k[2]
        if k[0] == "u":
            return white_pos(i, j) + (w1 + w2) / 3
        return white_pos(i, j) + 2 * (w1 + w2) / 3

    jmax = int(np.ceil((y1 - y0) / (1.5 * eps))) + 1
    imin = -jmax - 1
    imax = int(np.ceil((x1 - x0) / s)) + 1
    lo, hi = complex(x0, y0), complex(x1, y1)
    tol = 1e-12 * max(1.0, abs(x1), abs(y1))

    def inside(p):
        return (lo.real - tol <= p.real <= hi.real + tol
                and lo.imag - tol <= p.imag <= hi.imag + tol)

    faces = []
    for j in range(0, jmax + 1):
        for i in range(imin, imax + 1):
            z = ("w", i, j)
            # (neighbour, right triangle, left triangle) for the three
            # edge directions 0, pi/3, 2pi/3
            for nb, right, left in (
                    (("w", i + 1, j), ("d", i, j - 1), ("u", i, j)),
                    (("w", i, j + 1), ("u", i, j), ("d", i - 1, j)),
                    (("w", i - 1, j + 1), ("d", i - 1, j), ("u", i - 1, j))):
                q = (z, right, nb, left)
                if all(inside(key_pos(k)) for k in q):
                    faces.append(q)
    dirs = np.exp(1j * np.array([np.pi / 6, np.pi / 2, 5 * np.pi / 6]))
    return _assemble(faces, key_pos, eps, dirs)


def penrose_plane(d: int = 5):
    """Orthonormal basis of the plane invariant under cyclic coordinate shift."""
    k = np.arange(d)
    u = np.sqrt(2.0 / d) * np.cos(2 * np.pi * k / d)
    v = np.sqrt(2.0 / d) * np.sin(2 * np.pi * k / d)
    return u, v


def gen_grid_projection(basis, offset, clip, eps: float = 1.0,
                        d: int | None = None,
                        monotone: bool = True) -> RhombicEmbedding:
    """Quasicrystallic rhombic embedding from a plane in R^d.

    Parameters
    ----------
    basis : (2, d) array
        Orthonormal vectors ``u, v`` spanning the plane.
    offset : (d,) array
        Translation ``t`` of the plane.
    clip : (x0, y0, x1, y1)
        Region in output coordinates; faces whose centroid lies inside it are
        kept.
    eps : float
        Edge length of the output.
    monotone : bool
        Peel boundary faces until every vertex pair is joined by a
        coordinate-monotone path inside the patch.  Clipping alone can cut
        such paths near the clip boundary.

    Notes
    -----
    Lattice points are taken on ``c_1 Z x ... x c_d Z`` where ``c_j`` makes
    the projected lattice edges unit length; a vertex with integer
    coordinates ``n`` sits at ``eps * sum n_j a_j``.  Each crossing of two
    grid hyperplanes with the plane gives a rhombus.  Where three hyperplanes
    meet in a point the hexagon they bound is split into three rhombi around
    the inner cube vertex nearest to the plane.
    """
    u, v = (np.asarray(b, dtype=float) for b in basis)
    t = np.asarray(offset, dtype=float)
    d = len(u) if d is None else d
    if len(u) != d or len(v) != d or len(t) != d or d < 2:
        raise DegenerateDomain("basis, offset and dimension disagree")
    if not eps > 0:
        raise DegenerateDomain("eps must be positive")
    G = np.array([[u @ u, u @ v], [u @ v, v @ v]])
    if np.max(np.abs(G - np.eye(2))) > 1e-9:
        raise DegenerateDomain("basis must be orthonormal")
    norm2 = u ** 2 + v ** 2
    if d > 2:
        dist = np.sqrt(np.clip(1.0 - norm2, 0.0, None))
        hit = np.flatnonzero(dist < SEGMENT_TOL)
        if len(hit):
            raise PlaneContainsLatticeSegment(
                f"plane contains lattice direction(s) {hit.tolist()}")
    if np.any(norm2 < 1e-18):
        raise DegenerateFacetProjection("a lattice direction projects to 0")
    c = 1.0 / np.sqrt(norm2)
    a = c * (u + 1j * v)
    for j, k in itertools.combinations(range(d), 2):
        if abs(np.imag(np.conj(a[j]) * a[k])) < 1e-9:
            raise DegenerateFacetProjection(f"facet ({j},{k}) projects flat")

    x0, y0, x1, y1 = _domain(clip)
    # vertex positions (unit scale) stay within `reach` of the projected
    # crossing point
    tau = complex(t @ u, t @ v)
    reach = 0.5 * np.sqrt(np.sum(c ** 2)) + 2.0
    lo = complex(x0, y0) / eps - tau - reach * (1 + 1j)
    hi = complex(x1, y1) / eps - tau + reach * (1 + 1j)
    corners = np.array([[lo.real, lo.imag], [hi.real, lo.imag],
                        [lo.real, hi.imag], [hi.real, hi.imag]])

    ranges = []
    for j in range(d):
        proj = corners @ np.array([u[j], v[j]])
        mlo = int(np.floor((t[j] + proj.min()) / c[j] - 0.5)) - 1
        mhi = int(np.ceil((t[j] + proj.max()) / c[j] - 0.5)) + 1
        ranges.append(np.arange(mlo, mhi + 1))

    def in_clip(p):
        return x0 <= p.real <= x1 and y0 <= p.imag <= y1

    cells = []  # (base n, (j, k)) unit rhombi
    triple = {}
    for j, k in itertools.combinations(range(d), 2):
        A = np.array([[u[j], v[j]], [u[k], v[k]]])
        mj, mk = np.meshgrid(ranges[j], ranges[k], indexing="ij")
        mj, mk = mj.ravel(), mk.ravel()
        rhs = np.stack([c[j] * (mj + 0.5) - t[j], c[k] * (mk + 0.5) - t[k]])
        s = np.linalg.solve(A, rhs)
        ok = ((s[0] >= lo.real) & (s[0] <= hi.real)
              & (s[1] >= lo.imag) & (s[1] <= hi.imag))
        s, mj, mk = s[:, ok], mj[ok], mk[ok]
        X = (t[:, None] + np.outer(u, s[0]) + np.outer(v, s[1])) / c[:, None]
        n = np.rint(X).astype(np.int64)
        frac = np.abs(X - np.floor(X) - 0.5)
        frac[[j, k]] = 1.0
        n[j], n[k] = mj, mk
        conc = frac < CONCURRENCY_TOL
        for col in range(n.shape[1]):
            others = np.flatnonzero(conc[:, col])
            if len(others):
                fam = tuple(sorted((j, k) + tuple(others.tolist())))
                if len(fam) > 3:
                    raise DegenerateOffset(
                        f"{len(fam)} grid hyperplanes meet in one point")
                base = n[:, col].copy()
                for l in others:
                    base[l] = int(np.floor(X[l, col]))
                triple[(fam, tuple(base.tolist()))] = X[:, col]
                continue
            base = n[:, col]
            centroid = eps * (base @ a + 0.5 * (a[j] + a[k]))
            if in_clip(centroid):
                cells.append((tuple(base.tolist()), j, k))

    for (fam, base), X in sorted(triple.items()):
        base = np.array(base)
        centre = eps * (base @ a + 0.5 * a[list(fam)].sum())
        if not in_clip(centre):
            continue
        inner = _split_vertex(base, fam, a, c, t, u, v)
        for p, q in itertools.combinations(range(3), 2):
            jj, kk = fam[p], fam[q]
            b = inner.copy()
            b[jj], b[kk] = base[jj], base[kk]
            cells.append((tuple(b.tolist()), jj, kk))

    quads = [_oriented_cell(np.array(b), j, k, a) for b, j, k in cells]

    def key_pos(key):
        return eps * (np.array(key) @ a)
    emb, quads, keys = _assemble(quads, key_pos, eps, a, with_keys=True)
    while monotone:
        culprits = _monotone_culprits(emb, np.array(keys), (x0, y0, x1, y1))
        if not culprits:
            break
        bad = {keys[i] for i in culprits}
        quads = [q for q in quads if not bad.intersection(q)]
        emb, quads, keys = _assemble(quads, key_pos, eps, a, with_keys=True)
    return emb


def _monotone_culprits(emb, coords, clip):
    """Vertices to remove so that fewer pairs lack a monotone path.

    Of each failing pair the vertex lying farther outside the clip region is
    chosen, then the boundary one, then the one in more failing pairs.
    """
    bq = emb.bq
    nbrs = [[] for _ in range(bq.n_vertices)]
    for w, b in bq.edges:
        nbrs[w].append(b)
        nbrs[b].append(w)
    fail = _monotone_failures(coords, nbrs)
    fail |= fail.T
    if not fail.any():
        return []
    x0, y0, x1, y1 = clip
    p = emb.pos
    outside = np.maximum.reduce([x0 - p.real, p.real - x1, y0 - p.imag,
                                 p.imag - y1, np.zeros(len(p))])
    score = np.round(outside / emb.eps, 9)
    count = fail.sum(axis=1)
    xs, ys = np.nonzero(np.triu(fail))
    out = set()
    for x, y in zip(xs, ys):
        kx = (score[x], bq.is_boundary[x], count[x], -x)
        ky = (score[y], bq.is_boundary[y], count[y], -y)
        out.add(int(x) if kx > ky else int(y))
    return sorted(out)


def _split_vertex(base, fam, a, c, t, u, v):
    """Inner cube vertex nearest to the plane (ties: lexicographic)."""
    verts = []
    for bits in itertools.product((0, 1), repeat=3):
        p = base.copy()
        for b, l in zip(bits, fam):
            p[l] += b
        verts.append(p)
    pts = np.array([[(p @ a).real, (p @ a).imag] for p in verts])
    hull = set(ConvexHull(pts).vertices.tolist())
    inner = [verts[i] for i in range(8) if i not in hull]
    if len(inner) != 2:
        raise DegenerateOffset("cube projection is not a hexagon")

    def dist(p):
        x = c * p - t
        return np.linalg.norm(x - (x @ u) * u - (x @ v) * v)
    da, db = dist(inner[0]), dist(inner[1])
    if abs(da - db) <= 1e-12:
        return min(inner, key=lambda p: tuple(p.tolist()))
    return inner[0] if da < db else inner[1]


def _oriented_cell(base, j, k, a):
    """CCW quadruple of lattice-point keys for a unit facet, white first."""
    if np.imag(np.conj(a[j]) * a[k]) < 0:
        j, k = k, j
    ej = np.zeros_like(base)
    ek = np.zeros_like(base)
    ej[j] = 1
    ek[k] = 1
    pts = [base, base + ej, base + ej + ek, base + ek]
    if base.sum() % 2:
        pts = pts[1:] + pts[:1]
    return tuple(tuple(p.tolist()) for p in pts)


# -- lifts ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ZdLift:
    """Two-dimensional combinatorial surface in Z^d.

    Attributes
    ----------
    bq : BQuadGraph
    coords : int ndarray, shape (nv, d)
        Lattice point of every vertex.
    directions : complex ndarray, shape (d,)
        Projection of the unit lattice vectors.
    """
    bq: BQuadGraph
    coords: np.ndarray
    directions: np.ndarray

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def positions(self, eps: float = 1.0, origin: complex = 0.0) -> np.ndarray:
        return origin + eps * (self.coords @ self.directions)

    def facets(self) -> list:
        """Faces as ``(base point, (j, k))`` with ``j < k``."""
        out = []
        for q in self.bq.faces:
            pts = self.coords[q]
            base = pts.min(axis=0)
            span = tuple(np.flatnonzero(pts.max(axis=0) != base).tolist())
            out.append((tuple(base.tolist()), span))
        return out

    def facet_set(self) -> set:
        return set(self.facets())

    def vertex_of(self, point) -> int:
        hits = np.flatnonzero(np.all(self.coords == np.asarray(point), axis=1))
        if not len(hits):
            raise KeyError(f"lattice point {tuple(point)} not on the surface")
        return int(hits[0])

    def embedding(self, eps: float = 1.0, origin: complex = 0.0):
        pos = self.positions(eps, origin)
        return RhombicEmbedding(self.bq, alpha_from_positions(self.bq, pos),
                                pos, eps, self.directions)


def lift_from_facets(facets, directions) -> ZdLift:
    """Build a surface from unit facets ``(base point, (j, k))``.

    Orientation is propagated combinatorially across shared edges, starting
    from the first facet oriented by its projection, so folded surfaces can
    be represented as well.  White vertices are those with even coordinate
    sum.
    """
    dirs = np.asarray(directions, dtype=complex)
    cells = []
    for base, (j, k) in facets:
        b = np.asarray(base, dtype=np.int64)
        ej = np.zeros_like(b)
        ek = np.zeros_like(b)
        ej[j] = 1
        ek[k] = 1
        cyc = [tuple(b.tolist()), tuple((b + ej).tolist()),
               tuple((b + ej + ek).tolist()), tuple((b + ek).tolist())]
        cells.append(cyc)
    if not cells:
        raise NonManifoldEdge("no facets")
    # orient by BFS: a shared edge must be traversed oppositely
    first = cells[0]
    p = [np.array(x) @ dirs for x in first]
    area = np.imag(np.conj(p[2] - p[0]) * (p[3] - p[1]))
    sign = [0] * len(cells)
    sign[0] = 1 if area > 0 else -1
    by_edge = {}
    for f, cyc in enumerate(cells):
        for i in range(4):
            by_edge.setdefault(frozenset((cyc[i], cyc[(i + 1) % 4])), []).append(f)
    queue = deque([0])
    while queue:
        f = queue.popleft()
        cyc = cells[f] if sign[f] > 0 else cells[f][::-1]
        for i in range(4):
            a, b = cyc[i], cyc[(i + 1) % 4]
            for g in by_edge[frozenset((a, b))]:
                if g == f or sign[g]:
                    continue
                gc = cells[g]
                ia = gc.index(a)
                # in g the edge must run b -> a
                sign[g] = 1 if gc[(ia - 1) % 4] == b else -1
                queue.append(g)
    quads = []
    for f, cyc in enumerate(cells):
        cyc = cyc if sign[f] >= 0 else cyc[::-1]
        if sum(cyc[0]) % 2:
            cyc = cyc[1:] + cyc[:1]
        quads.append(tuple(cyc))
    white = {q[0] for q in quads} | {q[2] for q in quads}
    black = {q[1] for q in quads} | {q[3] for q in quads}
    bq = build_bquad(quads, white=white, black=black)
    coords = np.array(bq.labels, dtype=np.int64)
    return ZdLift(bq, coords, dirs)


def lift_to_zd(emb: RhombicEmbedding, root_white_vertex: int | None = None) -> ZdLift:
    """Lift an embedding to Z^d with the root white vertex at the origin.

    Raises
    ------
    InconsistentDirections
        An edge is not parallel to a direction, or two paths disagree.
    """
    bq = emb.bq
    root = int(bq.white[0]) if root_white_vertex is None else int(root_white_vertex)
    dirs = emb.directions
    e = bq.edges
    vec = (emb.pos[e[:, 1]] - emb.pos[e[:, 0]]) / emb.eps
    step = np.zeros((len(e), emb.dim), dtype=np.int64)
    for i, w in enumerate(vec):
        diff = np.concatenate([np.abs(w - dirs), np.abs(w + dirs)])
        m = int(np.argmin(diff))
        if diff[m] > DIRECTION_TOL:
            raise InconsistentDirections(f"edge {tuple(e[i])} has direction {w}")
        step[i, m % emb.dim] = 1 if m < emb.dim else -1
    adj = [[] for _ in range(bq.n_vertices)]
    for i, (w, b) in enumerate(e):
        adj[w].append((b, i, 1))
        adj[b].append((w, i, -1))
    coords = np.zeros((bq.n_vertices, emb.dim), dtype=np.int64)
    seen = np.zeros(bq.n_vertices, dtype=bool)
    seen[root] = True
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y, i, sgn in adj[x]:
            c = coords[x] + sgn * step[i]
            if seen[y]:
                if np.any(coords[y] != c):
                    raise InconsistentDirections(f"lift of vertex {y} is not unique")
                continue
            seen[y] = True
            coords[y] = c
            queue.append(y)
    if not seen.all():
        raise InconsistentDirections("embedding is not connected")
    return ZdLift(bq, coords, dirs)


def check_monotone(lift: ZdLift, n_samples: int = 4000, seed: int = 0) -> bool:
    """Whether every vertex pair is joined by a coordinate-monotone path.

    Exact for up to ``EXACT_MONOTONE_LIMIT`` vertices; above that a fixed
    random sample of pairs is checked.
    """
    coords = lift.coords
    nv, d = coords.shape
    e = lift.bq.edges
    nbrs = [[] for _ in range(nv)]
    for w, b in e:
        nbrs[w].append(b)
        nbrs[b].append(w)
    if nv <= EXACT_MONOTONE_LIMIT:
        return _monotone_exact(coords, nbrs)
    rng = np.random.default_rng(seed)
    pairs = rng.integers(0, nv, size=(n_samples, 2))
    return all(_monotone_pair(coords, nbrs, int(x), int(y)) for x, y in pairs)


def _monotone_failures(coords, nbrs):
    """Boolean matrix of ordered pairs without a monotone connecting path.

    For every octant a reachability table is filled by dynamic programming in
    decreasing height order; rows are packed bitsets.
    """
    nv, d = coords.shape
    code = np.zeros((nv, nv), dtype=np.uint8)
    for k in range(d):
        code |= ((coords[None, :, k] < coords[:, None, k]) << k).astype(np.uint8)
    fail = np.zeros((nv, nv), dtype=bool)
    eye = np.packbits(np.eye(nv, dtype=bool), axis=1)
    for oc in np.unique(code):
        sigma = np.where((int(oc) >> np.arange(d)) & 1, -1, 1)
        height = coords @ sigma
        order = np.argsort(-height, kind="stable")
        reach = eye.copy()
        for x in order:
            row = reach[x]
            for y in nbrs[x]:
                if height[y] == height[x] + 1:
                    np.bitwise_or(row, reach[y], out=row)
        full = np.unpackbits(reach, axis=1, count=nv).astype(bool)
        fail |= (code == oc) & ~full
    return fail


def _monotone_exact(coords, nbrs):
    return not _monotone_failures(coords, nbrs).any()


def _monotone_pair(coords, nbrs, x, y):
    target = coords[y]
    seen = {x}
    stack = [x]
    while stack:
        p = stack.pop()
        if p == y:
            return True
        rem = target - coords[p]
        for q in nbrs[p]:
            if q in seen:
                continue
            step = coords[q] - coords[p]
            k = int(np.flatnonzero(step)[0])
            if rem[k] * step[k] > 0:
                seen.add(q)
                stack.append(q)
    return False


def flip(lift: ZdLift, zhat: int) -> ZdLift:
    """Replace the three facets at ``zhat`` by the opposite cube facets.

    Raises
    ------
    NotFlippable
        ``zhat`` is a boundary vertex, does not have exactly three incident
        facets, or those facets do not bound a common 3-cube.
    """
    bq = lift.bq
    fan = bq.fans[zhat]
    if not fan.closed or len(fan.faces) != 3:
        raise NotFlippable(f"vertex {zhat} needs exactly three interior facets")
    P = lift.coords[zhat]
    steps = [lift.coords[n] - P for n in fan.neighbors]
    axes = [int(np.flatnonzero(s)[0]) for s in steps]
    if len(set(axes)) != 3:
        raise NotFlippable(f"facets at {zhat} do not span a 3-cube")
    Q = P + sum(steps)
    if np.any(np.all(lift.coords == Q, axis=1)):
        raise NotFlippable("antipodal cube vertex already on the surface")
    old = set(int(f) for f in fan.faces)
    facets = [fc for f, fc in enumerate(lift.facets()) if f not in old]
    for p, q in itertools.combinations(range(3), 2):
        # facet through Q spanned by the two axes
        base = Q.copy()
        for s in (steps[p], steps[q]):
            base = np.minimum(base, Q - s)
        j, k = sorted((axes[p], axes[q]))
        facets.append((tuple(base.tolist()), (j, k)))
    return lift_from_facets(facets, lift.directions)


@dataclass(frozen=True)
class Brick:
    """Coordinate bounding box ``lo <= n <= hi`` of a lift."""
    lo: np.ndarray
    hi: np.ndarray

    def contains(self, point) -> bool:
        p = np.asarray(point)
        return bool(np.all(self.lo <= p) and np.all(p <= self.hi))

    def points(self):
        """All lattice points of the brick (small bricks only)."""
        axes = [np.arange(a, b + 1) for a, b in zip(self.lo, self.hi)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)


def brick(lift: ZdLift) -> Brick:
    return Brick(lift.coords.min(axis=0), lift.coords.max(axis=0))
