"""Bipartite quad graphs and their white/black graphs.

A b-quad-graph is a cell complex whose faces are quadrilaterals with
alternating white and black vertices.  Faces are stored as counterclockwise
quadruples ``(z_minus, v_minus, z_plus, v_plus)`` where the ``z`` entries are
white and the ``v`` entries are black.  Each face yields one edge
``(z_minus, z_plus)`` of the white graph and one edge ``(v_minus, v_plus)`` of
the black graph.

Vertex ids are compact integers ``0..n-1`` assigned by :func:`build_bquad`;
the caller's original labels are kept in ``BQuadGraph.labels``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (InconsistentOrientation, MissingLabel, NonBipartite,
                     NonManifoldEdge)

ADMISSIBLE_TOL = 1e-12


@dataclass(frozen=True)
class Fan:
    """Faces around a vertex in counterclockwise order.

    ``neighbors[i]`` and ``neighbors[i + 1]`` are the two neighbours of the
    vertex inside ``faces[i]``.  Closed fans have ``len(neighbors) ==
    len(faces)`` and wrap around; open fans carry one extra neighbour so the
    start and end edges are explicit.
    """
    faces: tuple
    neighbors: tuple
    closed: bool


@dataclass(frozen=True, eq=False)
class BQuadGraph:
    """Immutable b-quad-graph with adjacency indexes.

    Attributes
    ----------
    faces : ndarray, shape (nf, 4)
        Counterclockwise quadruples ``(z-, v-, z+, v+)`` of compact ids.
    is_white : ndarray of bool, shape (nv,)
    labels : tuple
        Original vertex labels, ``labels[i]`` for compact id ``i``.
    edges : ndarray, shape (ne, 2)
        Undirected edges as ``(white, black)``.
    face_edges : ndarray, shape (nf, 4)
        Edge indices of ``(z-,v-), (v-,z+), (z+,v+), (v+,z-)``.
    edge_faces : ndarray, shape (ne, 2)
        Incident faces of each edge, ``-1`` when missing.
    is_boundary : ndarray of bool, shape (nv,)
    fans : tuple of Fan
    """
    faces: np.ndarray
    is_white: np.ndarray
    labels: tuple
    edges: np.ndarray
    face_edges: np.ndarray
    edge_faces: np.ndarray
    is_boundary: np.ndarray
    fans: tuple
    _edge_index: dict = field(repr=False, default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.is_white)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def white(self) -> np.ndarray:
        return np.flatnonzero(self.is_white)

    @property
    def black(self) -> np.ndarray:
        return np.flatnonzero(~self.is_white)

    @property
    def is_boundary_edge(self) -> np.ndarray:
        return self.edge_faces[:, 1] < 0

    @property
    def interior_white(self) -> np.ndarray:
        return np.flatnonzero(self.is_white & ~self.is_boundary)

    @property
    def interior_black(self) -> np.ndarray:
        return np.flatnonzero(~self.is_white & ~self.is_boundary)

    @property
    def boundary_white(self) -> np.ndarray:
        return np.flatnonzero(self.is_white & self.is_boundary)

    def edge_id(self, a: int, b: int) -> int:
        """Index of the edge joining ``a`` and ``b`` (either order)."""
        key = (a, b) if self.is_white[a] else (b, a)
        return self._edge_index[key]

    def has_edge(self, a: int, b: int) -> bool:
        key = (a, b) if self.is_white[a] else (b, a)
        return key in self._edge_index

    def index_of(self, label) -> int:
        """Compact id of an original label."""
        return self.labels.index(label)


def _canonical(quad):
    # rotate by two so the smaller white id comes first; keeps orientation
    z0, v0, z1, v1 = quad
    if z1 < z0:
        return (z1, v1, z0, v0)
    return (z0, v0, z1, v1)


def build_bquad(faces: Iterable[Sequence], white: Iterable | None = None,
                black: Iterable | None = None) -> BQuadGraph:
    """Build a b-quad-graph from counterclockwise vertex quadruples.

    Parameters
    ----------
    faces : iterable of 4-sequences
        Quadruples ``(z-, v-, z+, v+)``; entries at even positions are white.
    white, black : iterable, optional
        Declared colour classes.  When given, every quadruple must alternate
        with respect to them.

    Raises
    ------
    NonBipartite
        A vertex occurs in both colour roles, or a quadruple does not
        alternate with respect to the declared colours.
    NonManifoldEdge
        An edge lies in more than two faces, two faces share more than one
        edge, a quadruple repeats a vertex, or a vertex star is not a single
        fan.
    InconsistentOrientation
        Two faces traverse a shared edge in the same direction.
    """
    raw = [tuple(q) for q in faces]
    if not raw:
        raise NonManifoldEdge("no faces")
    for q in raw:
        if len(q) != 4:
            raise NonBipartite(f"face {q} is not a quadrilateral")
        if len(set(q)) != 4:
            raise NonManifoldEdge(f"face {q} repeats a vertex")

    white_set = set(white) if white is not None else None
    black_set = set(black) if black is not None else None
    role = {}
    for q in raw:
        for k, x in enumerate(q):
            w = k % 2 == 0
            if white_set is not None or black_set is not None:
                declared_w = (white_set is not None and x in white_set)
                declared_b = (black_set is not None and x in black_set)
                if declared_w and declared_b:
                    raise NonBipartite(f"vertex {x} declared both colours")
                if (w and declared_b) or (not w and declared_w):
                    raise NonBipartite(f"face {q} does not alternate colours")
            if role.setdefault(x, w) != w:
                raise NonBipartite(f"vertex {x} used as white and black")

    try:
        labels = sorted(role)
    except TypeError:
        labels = list(role)
    if white_set is not None:
        extra = [x for x in white_set if x not in role]
        labels += sorted(extra)
        for x in extra:
            role[x] = True
    if black_set is not None:
        extra = [x for x in black_set if x not in role]
        labels += sorted(extra)
        for x in extra:
            role[x] = False
    ids = {x: i for i, x in enumerate(labels)}
    is_white = np.array([role[x] for x in labels], dtype=bool)
    quads = np.array([_canonical(tuple(ids[x] for x in q)) for q in raw],
                     dtype=np.int64)

    # undirected edge table
    edge_index: dict = {}
    edge_list = []
    face_edges = np.empty_like(quads)
    count = []
    for f, q in enumerate(quads):
        for k in range(4):
            a, b = int(q[k]), int(q[(k + 1) % 4])
            key = (a, b) if is_white[a] else (b, a)
            e = edge_index.get(key)
            if e is None:
                e = len(edge_list)
                edge_index[key] = e
                edge_list.append(key)
                count.append([])
            count[e].append(f)
            face_edges[f, k] = e
    edge_faces = np.full((len(edge_list), 2), -1, dtype=np.int64)
    for e, fs in enumerate(count):
        if len(fs) > 2:
            raise NonManifoldEdge(f"edge {edge_list[e]} lies in {len(fs)} faces")
        edge_faces[e, :len(fs)] = fs

    # directed half-edges must be unique
    seen = set()
    for q in quads:
        for k in range(4):
            h = (int(q[k]), int(q[(k + 1) % 4]))
            if h in seen:
                raise InconsistentOrientation(
                    f"half-edge {h} traversed twice in the same direction")
            seen.add(h)

    # strong regularity
    pair_count: dict = {}
    for e in range(len(edge_list)):
        f, g = edge_faces[e]
        if g >= 0:
            key = (min(f, g), max(f, g))
            pair_count[key] = pair_count.get(key, 0) + 1
            if pair_count[key] > 1:
                raise NonManifoldEdge(f"faces {key} share more than one edge")

    is_boundary_edge = edge_faces[:, 1] < 0
    is_boundary = np.zeros(len(labels), dtype=bool)
    for e in np.flatnonzero(is_boundary_edge):
        is_boundary[edge_list[e][0]] = True
        is_boundary[edge_list[e][1]] = True

    fans = _build_fans(quads, len(labels), is_boundary)
    return BQuadGraph(faces=quads, is_white=is_white, labels=tuple(labels),
                      edges=np.array(edge_list, dtype=np.int64).reshape(-1, 2),
                      face_edges=face_edges, edge_faces=edge_faces,
                      is_boundary=is_boundary, fans=tuple(fans),
                      _edge_index=edge_index)


def _build_fans(quads, nv, is_boundary):
    # by_next[x][n] = (face, prev): face containing x whose successor is n
    by_next = [dict() for _ in range(nv)]
    incident = [[] for _ in range(nv)]
    for f, q in enumerate(quads):
        for k in range(4):
            x = int(q[k])
            by_next[x][int(q[(k + 1) % 4])] = (f, int(q[(k - 1) % 4]))
            incident[x].append(f)
    prevs = [set(p for _, p in d.values()) for d in by_next]
    fans = []
    for x in range(nv):
        d = by_next[x]
        if not d:
            fans.append(Fan((), (), False))
            continue
        # an open fan starts at the face whose leading edge has no predecessor
        starts = [n for n in d if n not in prevs[x]]
        if starts:
            if len(starts) > 1:
                raise NonManifoldEdge(f"vertex {x} has a pinched star")
            n = starts[0]
        else:
            n = min(d)
        faces_, nbrs = [], [n]
        while n in d and len(faces_) <= len(incident[x]):
            f, p = d[n]
            faces_.append(f)
            n = p
            if not starts and n == nbrs[0]:
                break
            nbrs.append(n)
        if len(faces_) != len(incident[x]):
            raise NonManifoldEdge(f"vertex {x} star is not a single fan")
        closed = not starts
        if closed == bool(is_boundary[x]):
            raise NonManifoldEdge(f"vertex {x} fan type disagrees with boundary")
        fans.append(Fan(tuple(faces_), tuple(nbrs), closed))
    return fans


@dataclass(frozen=True, eq=False)
class PrimalDualView:
    """White graph ``G`` and black graph ``G*`` of a b-quad-graph.

    Edge ``i`` of both graphs corresponds to face ``i``.
    """
    bq: BQuadGraph
    g_edges: np.ndarray
    gstar_edges: np.ndarray

    @property
    def face_of_g_edge(self) -> np.ndarray:
        return np.arange(len(self.g_edges))

    @property
    def face_of_gstar_edge(self) -> np.ndarray:
        return np.arange(len(self.gstar_edges))

    def white_star(self, z: int):
        """``(faces, neighbours)`` of white vertex ``z`` in ``G``, CCW."""
        return _star(self.bq, self.g_edges, z)

    def black_star(self, v: int):
        """``(faces, neighbours)`` of black vertex ``v`` in ``G*``, CCW."""
        return _star(self.bq, self.gstar_edges, v)


def _star(bq, edges, x):
    faces = bq.fans[x].faces
    nb = [int(edges[f, 1] if edges[f, 0] == x else edges[f, 0]) for f in faces]
    return np.array(faces, dtype=np.int64), np.array(nb, dtype=np.int64)


def derive_views(bq: BQuadGraph) -> PrimalDualView:
    """White and black graphs with one edge per face."""
    return PrimalDualView(bq=bq, g_edges=bq.faces[:, [0, 2]].copy(),
                          gstar_edges=bq.faces[:, [1, 3]].copy())


def as_alpha_array(bq: BQuadGraph, alpha) -> np.ndarray:
    """Normalise a labelling (array or face->angle mapping) to an array."""
    if isinstance(alpha, Mapping):
        out = np.full(bq.n_faces, np.nan)
        for k, a in alpha.items():
            out[int(k)] = a
    else:
        out = np.asarray(alpha, dtype=float)
        if out.shape != (bq.n_faces,):
            raise MissingLabel(f"expected {bq.n_faces} labels, got {out.shape}")
    missing = np.flatnonzero(~np.isfinite(out))
    if len(missing):
        raise MissingLabel(f"faces without label: {missing[:10].tolist()}")
    return out


def check_admissible(bq: BQuadGraph, alpha, tol: float = ADMISSIBLE_TOL) -> list:
    """Interior black vertices whose label sum differs from 2*pi.

    Boundary black vertices are never reported.
    """
    a = as_alpha_array(bq, alpha)
    bad = []
    for v in bq.interior_black:
        s = a[list(bq.fans[v].faces)].sum()
        if abs(s - 2 * np.pi) > tol:
            bad.append(int(v))
    return bad


def classify_boundary(bq: BQuadGraph) -> np.ndarray:
    """Boolean array, true for vertices on a boundary edge."""
    return bq.is_boundary.copy()


def bquad_to_dict(bq: BQuadGraph, alpha=None) -> dict:
    out = {
        "white": [int(i) for i in bq.white],
        "black": [int(i) for i in bq.black],
        "faces": bq.faces.tolist(),
    }
    if alpha is not None:
        a = as_alpha_array(bq, alpha)
        out["alpha"] = {str(i): float(x) for i, x in enumerate(a)}
    return out


def bquad_from_dict(data: dict):
    """Inverse of :func:`bquad_to_dict`; returns ``(bq, alpha or None)``."""
    bq = build_bquad(data["faces"], white=data.get("white"),
                     black=data.get("black"))
    alpha = None
    if "alpha" in data:
        # labels in the file refer to input face order, which build keeps
        alpha = as_alpha_array(bq, {int(k): v for k, v in data["alpha"].items()})
    return bq, alpha


def save_bquad(path, bq: BQuadGraph, alpha=None) -> None:
    with open(path, "w") as fh:
        json.dump(bquad_to_dict(bq, alpha), fh)


def load_bquad(path):
    with open(path) as fh:
        return bquad_from_dict(json.load(fh))
