"""Boundary value problems for radius and angle functions.

Dirichlet problem: given radii on the boundary white vertices, find interior
radii satisfying the closing condition.  Solved in log radii by damped Newton
iteration; the Jacobian is a weighted graph Laplacian with positive weights.
Gauss-Seidel with per-vertex bracketing takes over if Newton stalls.

Neumann problem: given edge angles on the boundary, find the pattern.  The
unknowns are the rotations ``delta`` of the black edge stars relative to the
isoradial pattern.  On each face the log-radius jump across the white
diagonal is an odd increasing function of the rotation jump across the black
diagonal, so the interior equations form a nonlinear Laplacian on the black
graph, solved the same way.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.linalg import spsolve

from .bquad import BQuadGraph, PrimalDualView, as_alpha_array, derive_views
from .errors import (ClosingConditionInfeasible, InvalidBoundary,
                     KiteConditionViolated, NoConvergence, NotAPattern)
from .kernels import (RadiusFunction, f_theta, f_theta_inv, f_theta_prime,
                      laplacian_matrix, laplacian_weight, radius_values,
                      residuals)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50
DEFAULT_SWEEPS = 10_000
MAX_LOG_STEP = 1.0


@dataclass(frozen=True, eq=False)
class DirichletProblem:
    """Radii prescribed on all boundary white vertices.

    Parameters
    ----------
    view : PrimalDualView
    alpha : labelling, array or mapping
    boundary_r : mapping boundary white id -> radius, or array over ids
    initial_guess : RadiusFunction or array, optional
    """
    view: PrimalDualView
    alpha: object
    boundary_r: object
    initial_guess: object = None

    def boundary_array(self) -> np.ndarray:
        bq = self.view.bq
        b = bq.boundary_white
        if isinstance(self.boundary_r, dict):
            keys = {int(k) for k in self.boundary_r}
            if keys != set(b.tolist()):
                raise InvalidBoundary("boundary data must cover exactly the "
                                      "boundary white vertices")
            vals = np.array([self.boundary_r[int(z)] if int(z) in self.boundary_r
                             else self.boundary_r[str(z)] for z in b], dtype=float)
        else:
            arr = radius_values(bq, self.boundary_r)
            vals = arr[b]
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise InvalidBoundary("boundary radii must be positive")
        return vals


def _harmonic_extension(L, inner, bnd, ub):
    """Solve ``(L u)_I = 0`` with ``u_B`` prescribed."""
    LII = L[inner][:, inner].tocsc()
    LIB = L[inner][:, bnd]
    return spsolve(-LII, LIB @ ub) if len(inner) else np.zeros(0)


def _newton(F, jac, x0, tol, max_iter, feasible=None, max_step=None):
    """Damped Newton on ``F(x) = 0`` with a symmetric negative Jacobian.

    ``max_step`` caps the sup norm of a step; the residuals saturate far
    from the solution, where unbounded steps make the Jacobian singular.

    Returns ``(x, iterations, converged)``.
    """
    x = x0.copy()
    r = F(x)
    norm = np.linalg.norm(r)
    for it in range(1, max_iter + 1):
        if np.max(np.abs(r), initial=0.0) <= tol:
            return x, it - 1, True
        J = jac(x)
        try:
            step = spsolve(-J.tocsc(), r)
        except RuntimeError:
            return x, it, False
        if not np.all(np.isfinite(step)):
            return x, it, False
        if max_step is not None:
            big = np.max(np.abs(step), initial=0.0)
            if big > max_step:
                step *= max_step / big
        t = 1.0
        accepted = False
        for _ in range(40):
            xn = x + t * step
            if feasible is None or feasible(xn):
                rn = F(xn)
                nn = np.linalg.norm(rn)
                if nn <= (1 - 1e-4 * t) * norm or np.max(np.abs(rn)) <= tol:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            return x, it, False
        x, r, norm = xn, rn, nn
    return x, max_iter, np.max(np.abs(r), initial=0.0) <= tol


def solve_dirichlet(p: DirichletProblem, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER,
                    sweeps: int = DEFAULT_SWEEPS) -> RadiusFunction:
    """Interior radii satisfying the closing condition.

    Raises
    ------
    InvalidBoundary
        Boundary data missing or non-positive.
    NoConvergence
        Neither Newton nor the Gauss-Seidel fallback reached ``tol``.
    """
    view = p.view
    bq = view.bq
    a = as_alpha_array(bq, p.alpha)
    ub = np.log(p.boundary_array())
    inner, bnd = bq.interior_white, bq.boundary_white
    u = np.zeros(bq.n_vertices)
    u[bnd] = ub
    if p.initial_guess is not None:
        guess = radius_values(bq, p.initial_guess)[inner]
        if np.any(~np.isfinite(guess)) or np.any(guess <= 0):
            raise InvalidBoundary("initial guess must be positive")
        u[inner] = np.log(guess)
    else:
        L0 = laplacian_matrix(view, laplacian_weight(a))
        u[inner] = _harmonic_extension(L0, inner, bnd, ub)

    zm, zp = view.g_edges[:, 0], view.g_edges[:, 1]

    def F(x):
        u[inner] = x
        return residuals(view, a, u)[inner]

    def jac(x):
        u[inner] = x
        w = f_theta_prime(a, u[zp] - u[zm])
        return laplacian_matrix(view, w)[inner][:, inner]

    x, it, ok = _newton(F, jac, u[inner].copy(), tol, max_iter, max_step=MAX_LOG_STEP)
    method = "newton"
    if not ok:
        log.info("Newton stalled after %d steps; switching to Gauss-Seidel", it)
        u[inner] = x
        x, it2, ok = _gauss_seidel(view, a, u, inner, tol, sweeps)
        it += it2
        method = "gauss-seidel"
    u[inner] = x
    worst = float(np.max(np.abs(residuals(view, a, u)[inner]), initial=0.0))
    if not ok:
        raise NoConvergence(it, worst)
    r = np.where(bq.is_white, np.exp(u), np.nan)
    r[bnd] = p.boundary_array()  # exact, not via exp(log)
    return RadiusFunction(r, iterations=it, residual=worst, method=method)


def _gauss_seidel(view, a, u, inner, tol, sweeps):
    bq = view.bq
    stars = [view.white_star(int(z)) for z in inner]
    u = u.copy()
    for sweep in range(1, sweeps + 1):
        for z, (faces, nbrs) in zip(inner, stars):
            uj, al = u[nbrs], a[faces]

            def g(x):
                return np.sum(f_theta(al, uj - x)) - np.pi
            lo, hi = uj.min() - 40.0, uj.max() + 40.0
            u[z] = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        worst = np.max(np.abs(residuals(view, a, u)[inner]), initial=0.0)
        if worst <= tol:
            return u[inner], sweep, True
    return u[inner], sweeps, False


def check_max_principle(view: PrimalDualView, alpha, r1, r2,
                        tol: float = 1e-8):
    """Locations of the maximum and minimum of ``r1 / r2``.

    Among vertices attaining an extremum (to rounding) a boundary vertex is
    preferred, so the returned witnesses lie on the boundary whenever the
    maximum principle holds.

    Raises
    ------
    NotAPattern
        Either radius function violates the closing condition by more than
        ``tol`` at some interior vertex.
    """
    bq = view.bq
    a = as_alpha_array(bq, alpha)
    inner = bq.interior_white
    white = bq.white
    vals = []
    for r in (r1, r2):
        rv = radius_values(bq, r)
        u = np.log(np.where(bq.is_white, rv, 1.0))
        if len(inner) and np.max(np.abs(residuals(view, a, u)[inner])) > tol:
            raise NotAPattern("radius function violates the closing condition")
        vals.append(rv)
    q = vals[0][white] / vals[1][white]
    out = []
    for target in (q.max(), q.min()):
        hits = white[np.abs(q - target) <= 1e-12 * abs(target)]
        on_bnd = hits[bq.is_boundary[hits]]
        out.append(int(on_bnd[0] if len(on_bnd) else hits[0]))
    return tuple(out)


# -- Neumann problem ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NeumannProblem:
    """Edge angles prescribed on the boundary.

    Parameters
    ----------
    bq : BQuadGraph
    alpha : labelling
    boundary_phi : mapping (white, black) -> angle of ``p(black) - p(white)``
        One entry per boundary edge.
    anchor : (white vertex, radius)
    """
    bq: BQuadGraph
    alpha: object
    boundary_phi: dict
    anchor: tuple = field(default=None)


def _h(alpha, x):
    """Log-radius jump across a face for rotation jump ``x``."""
    return f_theta_inv(alpha, (np.pi - alpha) / 2 + x / 2)


def _h_prime(alpha, x):
    y = (np.pi - alpha) / 2 + x / 2
    return 0.5 * (1.0 / np.tan(y) - 1.0 / np.tan(y + alpha))


def solve_neumann(p: NeumannProblem, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER):
    """Radius and angle functions matching boundary edge angles.

    Returns
    -------
    (RadiusFunction, AngleFunction)

    Raises
    ------
    ClosingConditionInfeasible
        No isoradial pattern exists for the labelling, so the reference
        angles are undefined.
    KiteConditionViolated
        Boundary data (or the starting guess) opens some kite beyond its
        admissible range.
    NoConvergence
        Newton iteration failed.
    InvalidBoundary
        Missing boundary angles, inconsistent data at a black vertex, or a
        non-positive anchor radius.
    """
    from .layout import AngleFunction, layout_pattern, lift_angles

    bq = p.bq
    a = as_alpha_array(bq, p.alpha)
    view = derive_views(bq)
    ref = _reference_angles(bq, a)

    z0, r0 = p.anchor
    if not r0 > 0:
        raise InvalidBoundary("anchor radius must be positive")
    z0 = int(z0)

    # rotations at boundary black vertices
    raw = np.full(bq.n_vertices, np.nan)
    given = {}
    for key, ang in p.boundary_phi.items():
        if isinstance(key, str):
            key = tuple(int(s) for s in key.split(","))
        w, b = (int(x) for x in key)
        if not bq.is_white[w]:
            w, b = b, w
            ang = ang + np.pi
        e = bq.edge_id(w, b)
        given[e] = ang
        d = ang - ref[e]
        if np.isnan(raw[b]):
            raw[b] = d
        elif abs(_wrap(raw[b] - d)) > 1e-8:
            raise InvalidBoundary(f"conflicting angles at black vertex {b}")
    bblack = bq.black[bq.is_boundary[bq.black]]
    missing = [int(v) for v in bblack if np.isnan(raw[v])]
    if missing:
        raise InvalidBoundary(f"no boundary angle at black vertices {missing[:5]}")
    delta = _unwrap_black(view, raw, bblack)

    vm, vp = view.gstar_edges[:, 0], view.gstar_edges[:, 1]
    inner = bq.interior_black
    for f in np.flatnonzero(bq.is_boundary[vm] & bq.is_boundary[vp]):
        if abs(delta[vp[f]] - delta[vm[f]]) >= np.pi - a[f]:
            raise KiteConditionViolated(int(f))

    # starting guess: linear harmonic extension with weights tan(alpha/2)
    Lb = _black_laplacian(view, np.tan(a / 2))
    delta[inner] = _harmonic_extension(Lb, inner, bblack, delta[bblack])

    def feasible(x):
        delta[inner] = x
        return np.all(np.abs(delta[vp] - delta[vm]) < np.pi - a)

    if not feasible(delta[inner].copy()):
        bad = np.flatnonzero(~(np.abs(delta[vp] - delta[vm]) < np.pi - a))
        raise KiteConditionViolated(int(bad[0]))

    def F(x):
        delta[inner] = x
        jump = _h(a, delta[vp] - delta[vm])  # t(z+) - t(z-)
        out = np.zeros(bq.n_vertices)
        # sum over faces of h(delta(other) - delta(v))
        np.add.at(out, vm, jump)
        np.add.at(out, vp, -jump)
        return out[inner]

    def jac(x):
        delta[inner] = x
        w = _h_prime(a, delta[vp] - delta[vm])
        return _black_laplacian(view, w)[inner][:, inner]

    x, it, ok = _newton(F, jac, delta[inner].copy(), tol, max_iter, feasible)
    delta[inner] = x
    worst = float(np.max(np.abs(F(x)), initial=0.0))
    if not ok:
        raise NoConvergence(it, worst)

    # integrate log radii over the white graph from the anchor
    jump = _h(a, delta[vp] - delta[vm])
    t = np.full(bq.n_vertices, np.nan)
    t[z0] = np.log(r0)
    adj = [[] for _ in range(bq.n_vertices)]
    for f, (zm, zp) in enumerate(view.g_edges):
        adj[zm].append((zp, jump[f]))
        adj[zp].append((zm, -jump[f]))
    queue = deque([z0])
    while queue:
        z = queue.popleft()
        for y, j in adj[z]:
            if np.isnan(t[y]):
                t[y] = t[z] + j
                queue.append(y)
    r = np.where(bq.is_white, np.exp(t), np.nan)
    phi = ref + delta[bq.edges[:, 1]]
    # align the lift with the prescribed boundary values
    phi = lift_angles(bq, phi)
    for e, ang in given.items():
        phi[e] += 2 * np.pi * np.round((ang - phi[e]) / (2 * np.pi))
        break
    radius = RadiusFunction(r, iterations=it, residual=worst, method="newton")
    return radius, AngleFunction(bq, phi)


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def _black_laplacian(view, weights):
    n = view.bq.n_vertices
    vm, vp = view.gstar_edges[:, 0], view.gstar_edges[:, 1]
    w = np.asarray(weights, dtype=float)
    rows = np.concatenate([vm, vp, vm, vp])
    cols = np.concatenate([vp, vm, vm, vp])
    vals = np.concatenate([w, w, -w, -w])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _unwrap_black(view, raw, bblack):
    """Lift boundary rotations so that neighbours differ by less than pi."""
    bq = view.bq
    delta = np.full(bq.n_vertices, np.nan)
    on = np.zeros(bq.n_vertices, dtype=bool)
    on[bblack] = True
    # neighbours: sharing a face, or sharing a white vertex (bridges corners)
    adj = [[] for _ in range(bq.n_vertices)]
    for vm, vp in view.gstar_edges:
        if on[vm] and on[vp]:
            adj[vm].append(vp)
            adj[vp].append(vm)
    for z in bq.white:
        nb = [int(v) for v in bq.fans[z].neighbors if on[v]]
        for i, x in enumerate(nb):
            for y in nb[i + 1:]:
                adj[x].append(y)
                adj[y].append(x)
    for root in bblack:
        if not np.isnan(delta[root]):
            continue
        delta[root] = _wrap(raw[root])
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if np.isnan(delta[y]):
                    delta[y] = delta[x] + _wrap(raw[y] - delta[x])
                    queue.append(y)
    return delta


def _reference_angles(bq: BQuadGraph, a) -> np.ndarray:
    """Edge angles of the isoradial pattern with unit radii.

    Raises
    ------
    ClosingConditionInfeasible
        Kite angles ``pi - alpha`` do not close around some interior white
        vertex, or labels do not close around an interior black vertex.
    """
    from .layout import layout_pattern
    for z in bq.interior_white:
        s = np.sum(np.pi - a[list(bq.fans[z].faces)])
        if abs(s - 2 * np.pi) > 1e-9:
            raise ClosingConditionInfeasible(
                f"no isoradial pattern: white vertex {z} angle sum {s:.12f}")
    for v in bq.interior_black:
        s = np.sum(a[list(bq.fans[v].faces)])
        if abs(s - 2 * np.pi) > 1e-9:
            raise ClosingConditionInfeasible(
                f"labelling not admissible at black vertex {v}")
    cp = layout_pattern(bq, a, np.where(bq.is_white, 1.0, np.nan))
    e = bq.edges
    return np.angle(cp.pos[e[:, 1]] - cp.pos[e[:, 0]])
