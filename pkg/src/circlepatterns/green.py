"""Discrete potential theory on rhombic embeddings with unit edges.

The free-space Green's function is a contour integral of the discrete
exponential around the poles ``a_l`` of ``e(x; .)`` with a suitable branch of
``log``.  For white targets the poles lie in an open half plane, so the
contour can be opened along a ray pointing away from them.  The circle
contributions near 0 and infinity cancel the logarithmic divergence and the
value becomes

    G(x0, x) = (1 / 4 pi) * integral_0^inf (e(x; s u) - 1) ds / s,

with ``u`` the unit ray direction.  This integrand is bounded by 2 and is
evaluated with adaptive Gauss-Kronrod quadrature.  The small-loop trapezoid
rule around each pole is kept as an independent cross-check; it loses
accuracy like ``(2 / loop radius) ** |n|`` and is only reliable close to x0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad
from scipy.sparse.linalg import spsolve

from .bquad import PrimalDualView, as_alpha_array
from .errors import (DiskNotCovered, NegativeValue, NoMonotonePath,
                     NotHarmonic, NotNeighbors, PoleHit, QuadratureFailure,
                     SamePoint, SingularSystem)
from .kernels import dual_face_area, laplacian_matrix, laplacian_weight

QUAD_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteExpParams:
    """Lattice displacement ``n`` and edge directions ``a_1..a_d``."""
    n: tuple
    directions: tuple

    def __post_init__(self):
        a = np.asarray(self.directions, dtype=complex)
        if len(self.n) != len(a):
            raise ValueError("n and directions differ in length")
        for i in range(len(a)):
            for j in range(i):
                if abs((a[i] * np.conj(a[j])).imag) < 1e-12:
                    raise ValueError("directions must be pairwise non-collinear")


@dataclass(frozen=True)
class GreenEvaluation:
    value: float
    path_octant: int
    quadrature_error_estimate: float


def discrete_exp(params: DiscreteExpParams, lam) -> complex:
    """``prod_k ((lam + a_k) / (lam - a_k)) ** n_k``.

    Raises
    ------
    PoleHit
        ``lam`` equals ``a_k`` (``n_k > 0``) or ``-a_k`` (``n_k < 0``).
    """
    n = np.asarray(params.n, dtype=int)
    a = np.asarray(params.directions, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    out = np.ones(lam.shape, dtype=complex)
    for nk, ak in zip(n, a):
        if nk == 0:
            continue
        pole = ak if nk > 0 else -ak
        if np.any(np.abs(lam - pole) < 1e-14):
            raise PoleHit(f"lambda hits the pole {pole}")
        out = out * ((lam + ak) / (lam - ak)) ** nk
    return complex(out) if out.ndim == 0 else out


def _circular_directions(directions):
    """The ``2d`` points ``+-a_k`` in counterclockwise order from ``a_1``.

    Returns ``(points, thetas)`` with ``thetas`` increasing from the
    principal argument of ``a_1``, consecutive differences in ``(0, pi)``.
    """
    a = np.asarray(directions, dtype=complex)
    pts = np.concatenate([a, -a])
    th0 = np.angle(a[0])
    rel = (np.angle(pts) - th0) % (2 * np.pi)
    order = np.argsort(rel, kind="stable")
    return pts[order], th0 + rel[order]


def _poles(n, directions):
    a = np.asarray(directions, dtype=complex)
    return [a[k] if n[k] > 0 else -a[k] for k in range(len(a)) if n[k] != 0]


def admissible_octants(n, directions) -> list:
    """Octants ``m`` (1-based) whose window ``a_m..a_{m+d-1}`` holds every pole.

    A monotone path from x0 to x with steps in that window exists exactly
    when the window contains all directions the displacement uses.
    """
    pts, _ = _circular_directions(directions)
    d = len(directions)
    poles = _poles(n, directions)
    out = []
    for m in range(2 * d):
        window = pts[[(m + j) % (2 * d) for j in range(d)]]
        if all(np.min(np.abs(window - p)) < 1e-12 for p in poles):
            out.append(m + 1)
    return out


def _ray_direction(directions, m):
    _, th = _circular_directions(directions)
    d = len(directions)
    first = th[m - 1]
    last = th[(m - 1 + d - 1) % (2 * d)]
    if last < first:
        last += 2 * np.pi
    return np.exp(1j * (0.5 * (first + last) + np.pi))


def _green_ray(n, directions, m):
    params = DiscreteExpParams(tuple(int(x) for x in n), tuple(directions))
    u = _ray_direction(directions, m)
    scale = 2.0 * np.sum(np.abs(n)) + 2.0
    t_lo, t_hi = -np.log(scale) - 40.0, np.log(scale) + 40.0

    def integrand(t):
        return (discrete_exp(params, np.exp(t) * u) - 1.0).real
    # split near |lambda| = 1 where the poles sit
    pieces = [(t_lo, -2.0), (-2.0, 0.0), (0.0, 2.0), (2.0, t_hi)]
    total, err = 0.0, 0.0
    for lo, hi in pieces:
        val, e = quad(integrand, lo, hi, limit=2000, epsabs=1e-13, epsrel=1e-12)
        total += val
        err += e
    return total / (4 * np.pi), err / (4 * np.pi)


def _green_loops(n, directions, m, tol=1e-10, max_points=2 ** 16):
    params = DiscreteExpParams(tuple(int(x) for x in n), tuple(directions))
    pts, th = _circular_directions(directions)
    d = len(directions)
    gaps = np.abs(pts[:, None] - pts[None, :])
    rho = 0.1 * np.min(gaps[gaps > 0])
    poles = _poles(n, directions)
    # arguments continuous across the window, starting at theta_m
    idx = [(m - 1 + j) % (2 * d) for j in range(d)]
    theta = {}
    base = th[idx[0]]
    for j, i in enumerate(idx):
        t = th[i]
        while t < base:
            t += 2 * np.pi
        theta[i] = t
    total, err = 0.0 + 0.0j, 0.0
    for p in poles:
        i = int(np.argmin(np.abs(pts - p)))
        tl = theta[i]
        M = 16
        prev = None
        while True:
            phi = 2 * np.pi * np.arange(M) / M
            lam = p + rho * np.exp(1j * phi)
            log_lam = np.log(np.abs(lam)) + 1j * (tl + np.angle(lam / p))
            g = log_lam / (2 * lam) * discrete_exp(params, lam)
            val = np.sum(g * 1j * rho * np.exp(1j * phi)) * (2 * np.pi / M)
            if prev is not None and abs(val - prev) < tol:
                break
            if M >= max_points:
                raise QuadratureFailure("loop quadrature did not settle")
            prev = val
            M *= 2
        total += val
        err = max(err, abs(val - prev))
    return (-total / (4 * np.pi ** 2 * 1j)).real, err


def green_from_displacement(n, directions, method: str = "ray",
                            octant: int | None = None) -> GreenEvaluation:
    """Green's function value for lattice displacement ``n`` in Z^d.

    Parameters
    ----------
    method : {"ray", "loops"}
    octant : int, optional
        Window index to use; defaults to the first admissible one.

    Raises
    ------
    NoMonotonePath
        No window of ``d`` consecutive directions contains the steps.
    QuadratureFailure
        Error estimate above the acceptance threshold.
    """
    n = np.asarray(n, dtype=int)
    if np.sum(n) % 2:
        raise ValueError("displacement must join two white vertices")
    valid = admissible_octants(n, directions)
    if not valid:
        raise NoMonotonePath("no monotone path between the vertices")
    if octant is None:
        m = valid[0]
    elif octant in valid:
        m = octant
    else:
        raise NoMonotonePath(f"octant {octant} carries no monotone path")
    if not np.any(n):
        return GreenEvaluation(0.0, m, 0.0)
    if method == "ray":
        val, err = _green_ray(n, directions, m)
    elif method == "loops":
        val, err = _green_loops(n, directions, m)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not err < QUAD_TOL:
        raise QuadratureFailure(f"quadrature error estimate {err:.3e}")
    return GreenEvaluation(float(val), m, float(err))


def green_function(lift, x0: int, x: int, method: str = "ray",
                   octant: int | None = None) -> GreenEvaluation:
    """``G(x0, x)`` for white vertices of a lifted embedding (unit edges)."""
    n = lift.coords[x] - lift.coords[x0]
    return green_from_displacement(n, lift.directions, method, octant)


def green_asymptotic(x0, x) -> float:
    """``-(log(2|x - x0|) + gamma) / (2 pi)`` for points in unit-edge scale."""
    r = abs(complex(x) - complex(x0))
    if r == 0:
        raise SamePoint("asymptotic expansion is singular at x0")
    return -(np.log(2 * r) + np.euler_gamma) / (2 * np.pi)


# -- finite domains -----------------------------------------------------------

def _white_adjacency(view):
    n = view.bq.n_vertices
    zm, zp = view.g_edges[:, 0], view.g_edges[:, 1]
    ones = np.ones(len(zm), dtype=bool)
    A = sp.csr_matrix((np.concatenate([ones, ones]),
                       (np.concatenate([zm, zp]), np.concatenate([zp, zm]))),
                      shape=(n, n))
    return A


def split_vertex_set(view: PrimalDualView, W):
    """``(W_int, W_bnd)``: members with all white neighbours in ``W`` or not.

    Members that are boundary vertices of the whole graph count as
    boundary of ``W``.
    """
    bq = view.bq
    W = np.unique(np.asarray(W, dtype=int))
    inw = np.zeros(bq.n_vertices, dtype=bool)
    inw[W] = True
    A = _white_adjacency(view)
    outside = A @ (~inw).astype(float)
    interior = (outside[W] == 0) & ~bq.is_boundary[W]
    return W[interior], W[~interior]


def disk_vertices(view: PrimalDualView, positions, x0: int, rho: float):
    """White vertices in the closed disk of radius ``rho`` about ``x0``.

    Raises
    ------
    DiskNotCovered
        The disk reaches a boundary vertex of the embedding.
    """
    bq = view.bq
    pos = np.asarray(positions)
    white = bq.white
    dist = np.abs(pos[white] - pos[x0])
    W = white[dist <= rho * (1 + 1e-12)]
    if np.any(bq.is_boundary[W]):
        raise DiskNotCovered(f"disk of radius {rho} about {x0} is not covered")
    return W


def green_bounded(view: PrimalDualView, alpha, x0: int, rho: float,
                  positions) -> np.ndarray:
    """Green's function of the disk ``V(x0, rho)`` vanishing on its boundary.

    Returns
    -------
    ndarray
        Values over all vertex ids; NaN outside the disk.

    Raises
    ------
    DiskNotCovered
    SingularSystem
    """
    a = as_alpha_array(view.bq, alpha)
    W = disk_vertices(view, positions, x0, rho)
    return green_on_set(view, a, W, x0)


def green_on_set(view: PrimalDualView, alpha, W, x0: int) -> np.ndarray:
    """Solve ``Delta G = -delta_x0`` on ``W_int`` with ``G = 0`` on ``W_bnd``."""
    bq = view.bq
    a = as_alpha_array(bq, alpha)
    inner, bnd = split_vertex_set(view, W)
    if x0 not in set(inner.tolist()):
        raise ValueError("x0 must be an interior vertex of W")
    L = laplacian_matrix(view, laplacian_weight(a))
    LII = L[inner][:, inner].tocsc()
    rhs = np.zeros(len(inner))
    rhs[np.searchsorted(inner, x0)] = -1.0
    with np.errstate(all="raise"):
        try:
            g = spsolve(LII, rhs)
        except (RuntimeError, FloatingPointError) as err:
            raise SingularSystem(str(err))
    if not np.all(np.isfinite(g)):
        raise SingularSystem("Laplacian restricted to the disk is singular")
    out = np.full(bq.n_vertices, np.nan)
    out[bnd] = 0.0
    out[inner] = g
    return out


def green_identity_check(view: PrimalDualView, alpha, W, u, v):
    """Both sides of the discrete Green identity on ``W``.

    ``lhs = sum_{W_int} (v Lu - u Lv)`` and
    ``rhs = sum_{p in W_int, q in W_bnd} c(p, q) (v(p) u(q) - u(p) v(q))``.
    """
    bq = view.bq
    a = as_alpha_array(bq, alpha)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    inner, bnd = split_vertex_set(view, W)
    c = laplacian_weight(a)
    L = laplacian_matrix(view, c)
    uz = np.nan_to_num(u)
    vz = np.nan_to_num(v)
    lhs = float(np.sum(vz[inner] * (L @ uz)[inner] - uz[inner] * (L @ vz)[inner]))
    is_in = np.zeros(bq.n_vertices, dtype=bool)
    is_in[inner] = True
    is_bd = np.zeros(bq.n_vertices, dtype=bool)
    is_bd[bnd] = True
    zm, zp = view.g_edges[:, 0], view.g_edges[:, 1]
    rhs = 0.0
    for p, q, s in ((zm, zp, 1), (zp, zm, 1)):
        sel = is_in[p] & is_bd[q]
        rhs += s * float(np.sum(c[sel] * (vz[p[sel]] * uz[q[sel]]
                                          - uz[p[sel]] * vz[q[sel]])))
    return lhs, rhs


def representation_weights(view: PrimalDualView, alpha, W, x0: int):
    """Weights ``c(q)`` with ``u(x0) = sum_q c(q) u(q)`` for harmonic ``u``."""
    bq = view.bq
    a = as_alpha_array(bq, alpha)
    g = green_on_set(view, a, W, x0)
    inner, bnd = split_vertex_set(view, W)
    c = laplacian_weight(a)
    is_in = np.zeros(bq.n_vertices, dtype=bool)
    is_in[inner] = True
    is_bd = np.zeros(bq.n_vertices, dtype=bool)
    is_bd[bnd] = True
    out = np.zeros(bq.n_vertices)
    zm, zp = view.g_edges[:, 0], view.g_edges[:, 1]
    for p, q in ((zm, zp), (zp, zm)):
        sel = is_in[p] & is_bd[q]
        np.add.at(out, q[sel], c[sel] * g[p[sel]])
    return out


def _harmonic_defect(view, a, u, inner):
    L = laplacian_matrix(view, laplacian_weight(a))
    uz = np.nan_to_num(np.asarray(u, dtype=float))
    return (L @ uz)[inner]


def gauss_mean_value_check(view: PrimalDualView, alpha, x0: int, rho: float,
                           u, positions, tol: float = 1e-9) -> float:
    """``|u(x0) - (1 / pi rho^2) sum F*(v) u(v)| * rho / u(x0)``.

    The sum runs over interior vertices of the disk ``V(x0, rho)``.

    Raises
    ------
    NegativeValue
        ``u`` negative somewhere on the disk.
    NotHarmonic
        ``Lu`` exceeds ``tol`` (relative to ``max u``) at an interior vertex.
    """
    bq = view.bq
    a = as_alpha_array(bq, alpha)
    u = np.asarray(u, dtype=float)
    W = disk_vertices(view, positions, x0, rho)
    if np.any(u[W] < 0):
        raise NegativeValue("u must be non-negative on the disk")
    inner, _ = split_vertex_set(view, W)
    scale = max(1.0, float(np.max(np.abs(u[W]))))
    if np.max(np.abs(_harmonic_defect(view, a, u, inner)), initial=0.0) > tol * scale:
        raise NotHarmonic("u is not discrete harmonic on the disk")
    area = np.array([dual_face_area(view, a, positions, int(v)) for v in inner])
    mean = float(np.sum(area * u[inner])) / (np.pi * rho ** 2)
    return abs(u[x0] - mean) * rho / u[x0]


def regularity_check(view: PrimalDualView, alpha, W, u, x0: int, x1: int,
                     positions):
    """Terms of the regularity estimate for ``u`` on ``W``.

    Returns
    -------
    (lhs, (norm_u, rho2_M))
        ``lhs = |u(x0) - u(x1)| * rho`` with ``rho`` the distance from ``x0``
        to the boundary of ``W``; ``norm_u = max_W |u|``;
        ``rho2_M = rho^2 * max_{W_int} |Lu / (4 F*)|``.

    Raises
    ------
    NotNeighbors
        ``x1`` is not a white neighbour of ``x0``.
    """
    bq = view.bq
    a = as_alpha_array(bq, alpha)
    pos = np.asarray(positions)
    u = np.asarray(u, dtype=float)
    _, nbrs = view.white_star(int(x0)) if not bq.is_boundary[x0] else (None, [])
    if int(x1) not in set(np.asarray(nbrs).tolist()):
        raise NotNeighbors(f"{x1} is not adjacent to {x0}")
    inner, bnd = split_vertex_set(view, W)
    rho = float(np.min(np.abs(pos[bnd] - pos[x0])))
    lap = _harmonic_defect(view, a, u, inner)
    area = np.array([dual_face_area(view, a, pos, int(v)) for v in inner])
    M = float(np.max(np.abs(lap / (4 * area)), initial=0.0))
    norm = float(np.max(np.abs(u[np.asarray(W, dtype=int)])))
    return abs(u[x0] - u[x1]) * rho, (norm, rho ** 2 * M)


def harmonic_extension(view: PrimalDualView, alpha, W, boundary_values):
    """Discrete harmonic function on ``W`` with given values on ``W_bnd``.

    ``boundary_values`` is an array over vertex ids (read on ``W_bnd``).
    """
    bq = view.bq
    a = as_alpha_array(bq, alpha)
    inner, bnd = split_vertex_set(view, W)
    L = laplacian_matrix(view, laplacian_weight(a))
    b = np.asarray(boundary_values, dtype=float)
    out = np.full(bq.n_vertices, np.nan)
    out[bnd] = b[bnd]
    out[inner] = spsolve(L[inner][:, inner].tocsc(), -(L[inner][:, bnd] @ b[bnd]))
    return out
