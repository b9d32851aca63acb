"""Scalar kernels: the half-kite-angle function and linear operators.

``f_theta(theta, x)`` is half the kite angle at a circle of radius ``r1`` when
it meets a circle of radius ``r2 = r1 * exp(x)`` at exterior intersection
angle ``theta``.  It maps the real line increasingly onto ``(0, pi - theta)``
and satisfies ``f(x) + f(-x) = pi - theta``.

All functions accept numpy arrays and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .bquad import PrimalDualView, as_alpha_array
from .errors import (BoundaryVertex, NeighborMissing, ThetaOutOfRange,
                     YOutOfRange)


@dataclass(frozen=True, eq=False)
class RadiusFunction:
    """Circle radii indexed by vertex id (NaN at black vertices).

    ``iterations``, ``residual`` and ``method`` describe the solve that
    produced the values, when there was one.
    """
    values: np.ndarray
    iterations: int = 0
    residual: float = 0.0
    method: str = ""

    def __getitem__(self, z):
        return self.values[z]

    def __len__(self):
        return len(self.values)

    @property
    def log(self) -> np.ndarray:
        """Log radii (the ``LogRadius`` view); NaN at black vertices."""
        return np.log(self.values)


def radius_values(bq, r) -> np.ndarray:
    """Radii as a float array over all vertex ids."""
    if isinstance(r, RadiusFunction):
        return np.asarray(r.values, dtype=float)
    if isinstance(r, dict):
        out = np.full(bq.n_vertices, np.nan)
        for k, val in r.items():
            out[int(k)] = val
        return out
    out = np.asarray(r, dtype=float)
    if out.ndim == 0:
        return np.where(bq.is_white, float(out), np.nan)
    return out


def _check_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(~(theta > 0)) or np.any(~(theta < np.pi)):
        raise ThetaOutOfRange("theta must lie in (0, pi)")
    return theta


def f_theta(theta, x):
    """Half kite angle ``(1/2i) log((1 - e^(x-i theta)) / (1 - e^(x+i theta)))``.

    Evaluated as an arctangent; both branches below are algebraically equal
    and each keeps the exponential bounded by one.
    """
    theta = _check_theta(theta)
    x = np.asarray(x, dtype=float)
    s, c = np.sin(theta), np.cos(theta)
    neg = x <= 0
    e = np.exp(-np.abs(x))
    # x <= 0: atan2(s e^x, 1 - c e^x); x > 0: atan2(s, e^-x - c)
    num = np.where(neg, s * e, s)
    den = np.where(neg, 1.0 - c * e, e - c)
    out = np.arctan2(num, den)
    return out if out.ndim else float(out)


def f_theta_prime(theta, x):
    """Derivative ``sin(theta) / (2 (cosh x - cos theta))``."""
    theta = _check_theta(theta)
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    out = np.sin(theta) * e / (1.0 + e * e - 2.0 * np.cos(theta) * e)
    return out if out.ndim else float(out)


def f_theta_inv(theta, y):
    """Inverse ``log(sin y / sin(y + theta))`` on ``0 < y < pi - theta``."""
    theta = _check_theta(theta)
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)) or np.any(~(y < np.pi - theta)):
        raise YOutOfRange("y must lie in (0, pi - theta)")
    out = np.log(np.sin(y) / np.sin(y + theta))
    return out if out.ndim else float(out)


def laplacian_weight(alpha_e):
    """Edge weight ``2 f'_alpha(0) = cot(alpha / 2)``."""
    a = _check_theta(alpha_e)
    out = 1.0 / np.tan(a / 2.0)
    return out if out.ndim else float(out)


def vertex_residual(view: PrimalDualView, alpha, r, z0: int) -> float:
    """Closing-condition residual ``sum f_alpha(log r_j - log r_0) - pi``.

    Parameters
    ----------
    r : array over vertex ids, or mapping white id -> radius
    z0 : interior white vertex
    """
    bq = view.bq
    if not bq.is_white[z0] or bq.is_boundary[z0]:
        raise BoundaryVertex(f"vertex {z0} is not an interior white vertex")
    a = as_alpha_array(bq, alpha)
    rv = radius_values(view.bq, r)
    faces, nbrs = view.white_star(z0)
    x = np.log(rv[nbrs]) - np.log(rv[z0])
    return float(np.sum(f_theta(a[faces], x)) - np.pi)


def residuals(view: PrimalDualView, alpha, u) -> np.ndarray:
    """Residuals at all vertices from log radii ``u`` (array over ids).

    Entries at black or boundary vertices are meaningless; callers mask with
    ``bq.interior_white``.
    """
    zm, zp = view.g_edges[:, 0], view.g_edges[:, 1]
    d = u[zp] - u[zm]
    out = np.zeros(len(u))
    np.add.at(out, zm, f_theta(alpha, d))
    np.add.at(out, zp, f_theta(alpha, -d))
    return out - np.pi


def laplacian_matrix(view: PrimalDualView, weights) -> sp.csr_matrix:
    """Sparse ``L`` with ``(L eta)(z) = sum_j w_j (eta(z_j) - eta(z))``.

    ``weights`` is one value per face (white-graph edge).  Rows at black
    vertices are zero.
    """
    n = view.bq.n_vertices
    zm, zp = view.g_edges[:, 0], view.g_edges[:, 1]
    w = np.asarray(weights, dtype=float)
    rows = np.concatenate([zm, zp, zm, zp])
    cols = np.concatenate([zp, zm, zm, zp])
    vals = np.concatenate([w, w, -w, -w])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def discrete_laplacian(view: PrimalDualView, alpha, eta, z: int) -> float:
    """``sum_j cot(alpha_j / 2) (eta(z_j) - eta(z))`` at interior white ``z``."""
    bq = view.bq
    if not bq.is_white[z] or bq.is_boundary[z]:
        raise BoundaryVertex(f"vertex {z} is not an interior white vertex")
    a = as_alpha_array(bq, alpha)
    eta = np.asarray(eta)
    faces, nbrs = view.white_star(z)
    return np.sum(laplacian_weight(a[faces]) * (eta[nbrs] - eta[z]))


def scaled_laplacian(view: PrimalDualView, alpha, eps: float, eta, z: int):
    """Discrete Laplacian divided by ``eps**2``."""
    return discrete_laplacian(view, alpha, eta, z) / eps ** 2


def dual_face_area(view: PrimalDualView, alpha, positions, v: int) -> float:
    """``(1/4) sum c([z, v]) |z - v|^2`` over white-graph edges at ``v``."""
    bq = view.bq
    if not bq.is_white[v] or bq.is_boundary[v]:
        raise BoundaryVertex(f"vertex {v} is not an interior white vertex")
    a = as_alpha_array(bq, alpha)
    pos = np.asarray(positions)
    faces, nbrs = view.white_star(v)
    return float(0.25 * np.sum(laplacian_weight(a[faces])
                               * np.abs(pos[nbrs] - pos[v]) ** 2))


def discrete_partial(positions, eps: float, h, z: int, v_dir: complex,
                     tree: cKDTree | None = None, vertices=None):
    """Difference quotient ``(h(z + eps v) - h(z)) / (eps |v|)``.

    The vertex at ``positions[z] + eps * v_dir`` is located by nearest
    neighbour search with tolerance ``1e-6 * eps``.

    Parameters
    ----------
    positions : complex array over vertex ids
    h : array over vertex ids
    tree : prebuilt KD-tree over the points of ``vertices`` (optional)
    vertices : ids indexed by ``tree`` (defaults to all vertices)
    """
    pos = np.asarray(positions)
    if vertices is None:
        vertices = np.arange(len(pos))
    if tree is None:
        pts = pos[vertices]
        tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    target = pos[z] + eps * v_dir
    dist, idx = tree.query([target.real, target.imag])
    if not np.isfinite(dist) or dist > 1e-6 * eps:
        raise NeighborMissing(f"no vertex at {target}")
    z1 = int(np.asarray(vertices)[idx])
    h = np.asarray(h)
    return (h[z1] - h[z]) / (eps * abs(v_dir))
