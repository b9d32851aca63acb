"""Convergence experiments: boundary data from a holomorphic map, solve,
lay out, normalise, and compare the discrete approximants with the map."""
from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .bquad import derive_views
from .errors import (AnchorNotFound, OscillationTooLarge,
                     VanishingDerivative)
from .lattice import (gen_grid_projection, gen_hexagonal, gen_square_grid,
                      penrose_plane)
from .layout import CirclePattern, layout_pattern
from .solver import (DirichletProblem, NeumannProblem, solve_dirichlet,
                     solve_neumann)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConformalTestMap:
    """Holomorphic test map with analytic first and second derivatives.

    ``domain`` is the default rectangle ``(x0, y0, x1, y1)`` on which ``g``
    is locally injective.
    """
    name: str
    g: object
    gprime: object
    gsecond: object
    domain: tuple

    def check_injective(self, points, tol: float = 1e-12) -> None:
        """Raise VanishingDerivative if ``g'`` vanishes or blows up at a sample."""
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.abs(self.gprime(np.asarray(points)))
        bad = np.flatnonzero(~((d > tol) & np.isfinite(d)))
        if len(bad):
            raise VanishingDerivative(int(bad[0]))


_A, _B = 1.2 + 0.5j, 0.3 - 0.7j

MAPS = {
    "identity": ConformalTestMap("identity", lambda z: z + 0j,
                                 lambda z: np.ones_like(z, dtype=complex),
                                 lambda z: np.zeros_like(z, dtype=complex),
                                 (1.0, 0.0, 2.0, 1.0)),
    "affine": ConformalTestMap("affine", lambda z: _A * z + _B,
                               lambda z: _A * np.ones_like(z, dtype=complex),
                               lambda z: np.zeros_like(z, dtype=complex),
                               (1.0, 0.0, 2.0, 1.0)),
    "square": ConformalTestMap("square", lambda z: z * z, lambda z: 2 * z,
                               lambda z: 2 * np.ones_like(z, dtype=complex),
                               (1.0, 0.0, 2.0, 1.0)),
    "exp": ConformalTestMap("exp", np.exp, np.exp, np.exp, (0.0, 0.0, 1.0, 1.0)),
    "inv": ConformalTestMap("inv", lambda z: 1 / z, lambda z: -1 / z ** 2,
                            lambda z: 2 / z ** 3, (1.0, 0.0, 2.0, 1.0)),
    "moebius": ConformalTestMap("moebius", lambda z: (z - 3) / (z + 3),
                                lambda z: 6 / (z + 3) ** 2,
                                lambda z: -12 / (z + 3) ** 3,
                                (-1.0, -1.0, 1.0, 1.0)),
}


def get_map(name: str) -> ConformalTestMap:
    try:
        return MAPS[name]
    except KeyError:
        raise ValueError(f"unknown map {name!r}; choose from {sorted(MAPS)}")


def affine_map(a: complex, b: complex) -> ConformalTestMap:
    """``z -> a z + b`` on the unit square shifted to ``[1, 2] x [0, 1]``."""
    return ConformalTestMap(f"affine({a},{b})", lambda z: a * z + b,
                            lambda z: a * np.ones_like(z, dtype=complex),
                            lambda z: np.zeros_like(z, dtype=complex),
                            (1.0, 0.0, 2.0, 1.0))


# -- boundary data --------------------------------------------------------------

def boundary_radii(gmap: ConformalTestMap, emb) -> dict:
    """``eps |g'(z)|`` at each boundary white vertex."""
    bq = emb.bq
    b = bq.boundary_white
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.abs(gmap.gprime(emb.pos[b]))
    bad = np.flatnonzero(~((d > 1e-12) & np.isfinite(d)))
    if len(bad):
        raise VanishingDerivative(int(b[bad[0]]))
    return {int(z): float(emb.eps * dz) for z, dz in zip(b, d)}


def boundary_angles(gmap: ConformalTestMap, emb, check: bool = True) -> dict:
    """Isoradial edge angle plus ``arg g'`` at the black end, per boundary edge.

    Keys are ``(white, black)`` pairs.

    Raises
    ------
    OscillationTooLarge
        ``arg g'`` varies by at least ``min(pi - alpha)`` within distance
        ``2 eps`` of a boundary black vertex.
    """
    bq = emb.bq
    e = bq.edges[bq.is_boundary_edge]
    blacks = np.unique(e[:, 1])
    if check:
        theta = np.linspace(0, 2 * np.pi, 32, endpoint=False)
        v = emb.pos[blacks]
        ring = v[:, None] + 2 * emb.eps * np.exp(1j * theta)[None, :]
        osc = np.abs(np.angle(gmap.gprime(ring) / gmap.gprime(v)[:, None]))
        bound = float(np.min(np.pi - np.asarray(emb.alpha)))
        if np.max(osc) >= bound:
            raise OscillationTooLarge(f"arg g' oscillation {np.max(osc):.3f} "
                                      f">= {bound:.3f}")
    out = {}
    for z, v in e:
        out[(int(z), int(v))] = float(np.angle(emb.pos[v] - emb.pos[z])
                                      + np.angle(gmap.gprime(emb.pos[v])))
    return out


# -- normalisation and approximants -----------------------------------------------

def anchor_edge(emb, point: complex):
    """White vertex whose circle contains ``point`` and its anchor edge.

    Returns ``(z0, v0)`` where ``[z0, v0]`` has the smallest isoradial angle
    in ``[0, 2 pi)``; ties go to the smallest black id.
    """
    bq = emb.bq
    white = bq.white
    d = np.abs(emb.pos[white] - point)
    k = int(np.argmin(d))
    if d[k] > emb.eps * (1 + 1e-12):
        raise AnchorNotFound(f"no circle contains {point}")
    z0 = int(white[k])
    nbrs = sorted(int(v) for v in bq.fans[z0].neighbors)
    ang = [float(np.angle(emb.pos[v] - emb.pos[z0]) % (2 * np.pi)) for v in nbrs]
    best = min(ang)
    v0 = min(v for v, a in zip(nbrs, ang) if a <= best + 1e-9)
    return z0, v0


def normalize_pattern(cp: CirclePattern, gmap: ConformalTestMap, z0: int,
                      v0: int, emb=None, angle: float | None = None) -> CirclePattern:
    """Rotate and translate ``cp`` so the anchor edge matches the map.

    The edge ``z0 -> v0`` gets direction ``arg g'(v0)`` plus its isoradial
    direction (or ``angle`` when given) and ``p(v0) = g(v0)``.  ``emb`` is the
    isoradial embedding supplying reference positions.
    """
    ref = emb.pos if emb is not None else cp.pos
    if angle is None:
        angle = float(np.angle(ref[v0] - ref[z0]) + np.angle(gmap.gprime(ref[v0])))
    cur = np.angle(cp.pos[v0] - cp.pos[z0])
    rot = np.exp(1j * (angle - cur))
    shift = complex(gmap.g(ref[v0])) - rot * cp.pos[v0]
    return cp.transformed(rot, shift)


def approximants(cp: CirclePattern, emb, gmap: ConformalTestMap | None = None):
    """Discrete derivative ``q`` at white vertices and ``g_n`` at black ones.

    ``q(z) = (r(z) / eps) * exp(i (phi(z, w) - phi_iso(z, w)))`` with ``w``
    the incident black vertex of smallest id.

    Returns
    -------
    (q, gn) : complex arrays over vertex ids, NaN where undefined
    """
    bq = cp.bq
    q = np.full(bq.n_vertices, np.nan, dtype=complex)
    for z in bq.white:
        w = min(bq.fans[z].neighbors)
        rot = (cp.pos[w] - cp.pos[z]) / (emb.pos[w] - emb.pos[z])
        q[z] = cp.radii[z] / emb.eps * rot / abs(rot)
    gn = np.where(bq.is_white, np.nan, cp.pos)
    return q, gn


# -- sweeps -----------------------------------------------------------------------

LATTICES = ("square", "hex", "projection")
PROJECTION_OFFSET = (0.1, 0.23, 0.37, 0.05, 0.61)


def make_lattice(kind: str, domain, eps: float):
    if kind == "square":
        return gen_square_grid(domain, eps)
    if kind == "hex":
        return gen_hexagonal(domain, eps)
    if kind == "projection":
        return gen_grid_projection(penrose_plane(), PROJECTION_OFFSET, domain, eps)
    raise ValueError(f"unknown lattice {kind!r}")


@dataclass
class ExperimentConfig:
    """Parameters of one convergence sweep.

    ``margin`` of ``None`` means ``min(5 * eps_max, 0.25 * shorter side)``.
    """
    map_name: str = "square"
    lattice: str = "square"
    domain: tuple | None = None
    eps_list: tuple = (1 / 8, 1 / 16, 1 / 32)
    margin: float | None = None
    bc: str = "dirichlet"
    csv_path: str | None = None
    svg_dir: str | None = None
    gmap: ConformalTestMap | None = None

    def __post_init__(self):
        if self.gmap is None:
            self.gmap = get_map(self.map_name)
        if self.domain is None:
            self.domain = self.gmap.domain
        eps = list(self.eps_list)
        if any(b >= a for a, b in zip(eps, eps[1:])) or min(eps) <= 0:
            raise ValueError("eps list must be positive and strictly decreasing")
        if self.bc not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown boundary mode {self.bc!r}")
        x0, y0, x1, y1 = self.domain
        if self.margin is None:
            self.margin = min(5 * max(eps), 0.25 * min(x1 - x0, y1 - y0))
        if not 2 * self.margin < min(x1 - x0, y1 - y0):
            raise ValueError("compact subset is empty for this margin")

    @property
    def compact(self) -> tuple:
        x0, y0, x1, y1 = self.domain
        m = self.margin
        return (x0 + m, y0 + m, x1 - m, y1 - m)


@dataclass
class RunResult:
    eps: float
    emb: object
    pattern: CirclePattern
    q: np.ndarray
    gn: np.ndarray
    errors: dict


@dataclass
class ConvergenceReport:
    """Per-eps sup-norm errors on the compact subset and fitted slopes."""
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)

    COLUMNS = ("eps", "err_q", "err_g", "err_t", "err_d1", "slope_q", "slope_g")

    def column(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for r in self.rows:
                w.writerow([repr(float(r["eps"])), *(f"{r[k]:.6e}" for k in
                            ("err_q", "err_g", "err_t", "err_d1")),
                            f"{self.slopes['q']:.4f}", f"{self.slopes['g']:.4f}"])


def fit_slope(eps, err, last: int = 3) -> float:
    """Least-squares slope of ``log err`` against ``log eps`` (last points)."""
    e = np.asarray(eps, dtype=float)[-last:]
    y = np.asarray(err, dtype=float)[-last:]
    if len(e) < 2 or np.any(y <= 0):
        return float("nan")
    return float(np.polyfit(np.log(e), np.log(y), 1)[0])


def _inside(points, box):
    x0, y0, x1, y1 = box
    return (points.real >= x0) & (points.real <= x1) & \
        (points.imag >= y0) & (points.imag <= y1)


def run_single(gmap: ConformalTestMap, emb, bc: str = "dirichlet",
               compact=None) -> RunResult:
    """Solve, lay out, normalise and measure one pattern."""
    bq = emb.bq
    view = derive_views(bq)
    gmap.check_injective(emb.pos)
    x0, y0, x1, y1 = gmap.domain if compact is None else compact
    centre = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    z0, v0 = anchor_edge(emb, centre)
    angle = None
    if bc == "dirichlet":
        r = solve_dirichlet(DirichletProblem(view, emb.alpha,
                                             boundary_radii(gmap, emb)))
    else:
        anchor = (z0, emb.eps * abs(gmap.gprime(emb.pos[z0])))
        r, phi = solve_neumann(NeumannProblem(bq, emb.alpha,
                                              boundary_angles(gmap, emb), anchor))
        angle = phi(z0, v0)
    cp = layout_pattern(bq, emb.alpha, r)
    cp = normalize_pattern(cp, gmap, z0, v0, emb=emb, angle=angle)
    q, gn = approximants(cp, emb, gmap)
    errors = measure_errors(gmap, emb, cp, q, gn, view, compact)
    return RunResult(emb.eps, emb, cp, q, gn, errors)


def measure_errors(gmap, emb, cp, q, gn, view, compact=None) -> dict:
    bq = emb.bq
    box = compact if compact is not None else gmap.domain
    w = bq.white[_inside(emb.pos[bq.white], box)]
    b = bq.black[_inside(emb.pos[bq.black], box)]
    err_q = float(np.max(np.abs(q[w] - gmap.gprime(emb.pos[w]))))
    err_g = float(np.max(np.abs(gn[b] - gmap.g(emb.pos[b]))))
    t = np.log(cp.radii / emb.eps)
    h = np.log(np.abs(gmap.gprime(emb.pos)))
    err_t = float(np.max(np.abs(t[w] - h[w])))
    # first-order differences of t along white-graph edges vs d/dv log|g'|
    zm, zp = view.g_edges[:, 0], view.g_edges[:, 1]
    sel = _inside(emb.pos[zm], box) & _inside(emb.pos[zp], box)
    step = emb.pos[zp[sel]] - emb.pos[zm[sel]]
    mid = 0.5 * (emb.pos[zp[sel]] + emb.pos[zm[sel]])
    exact = (gmap.gsecond(mid) / gmap.gprime(mid) * step / np.abs(step)).real
    disc = (t[zp[sel]] - t[zm[sel]]) / np.abs(step)
    err_d1 = float(np.max(np.abs(disc - exact))) if np.any(sel) else float("nan")
    return {"err_q": err_q, "err_g": err_g, "err_t": err_t, "err_d1": err_d1}


def convergence_sweep(config: ExperimentConfig, keep_runs: bool = False):
    """Run the experiment at every eps and fit log-log slopes.

    Returns
    -------
    ConvergenceReport, plus the list of RunResult when ``keep_runs``.
    """
    report = ConvergenceReport(config)
    runs = []
    for eps in config.eps_list:
        emb = make_lattice(config.lattice, config.domain, eps)
        res = run_single(config.gmap, emb, config.bc, config.compact)
        log.info("eps=%g faces=%d %s", eps, emb.bq.n_faces, res.errors)
        report.rows.append({"eps": eps, **res.errors})
        if keep_runs:
            runs.append(res)
        if config.svg_dir is not None:
            from .plotting import render_pattern
            os.makedirs(config.svg_dir, exist_ok=True)
            render_pattern(res.pattern, os.path.join(
                config.svg_dir, f"pattern_eps{len(report.rows)}.svg"))
    for key in ("q", "g", "t", "d1"):
        report.slopes[key] = fit_slope(report.column("eps"), report.column("err_" + key))
    if config.csv_path is not None:
        report.to_csv(config.csv_path)
    if config.svg_dir is not None:
        from .plotting import plot_convergence
        plot_convergence(report, os.path.join(config.svg_dir, "convergence.svg"))
    return (report, runs) if keep_runs else report


def q_difference(config: ExperimentConfig) -> list:
    """``sup_K |q_neumann - q_dirichlet|`` per eps, with the Dirichlet errors."""
    out = []
    for eps in config.eps_list:
        emb = make_lattice(config.lattice, config.domain, eps)
        rd = run_single(config.gmap, emb, "dirichlet", config.compact)
        rn = run_single(config.gmap, emb, "neumann", config.compact)
        w = emb.bq.white[_inside(emb.pos[emb.bq.white], config.compact)]
        out.append((eps, float(np.max(np.abs(rn.q[w] - rd.q[w]))), rd.errors["err_q"]))
    return out
