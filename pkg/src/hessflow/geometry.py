"""Curvature matrices and p-curvatures of hypersurfaces in R^n.

For a parametric patch ``X(theta)`` with metric ``g_ij = (X_i, X_j)`` pick ``tau``
with ``g^{-1} = tau^T tau``; the moving frame ``X_(i) = tau_i^k X_k`` is
orthonormal and the curvature matrix is ``K_ij = (X_(ij), n)`` with ``n`` the
interior normal.  Its p-traces are the p-curvatures.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .cones import cone_membership_def
from .exceptions import DomainError
from .trace_core import traces_batch

FD_STEP = 1e-4


def _fd_jacobian(X, theta, h=FD_STEP):
    theta = np.asarray(theta, dtype=float)
    cols = []
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        cols.append((np.asarray(X(theta + e)) - np.asarray(X(theta - e))) / (2 * h))
    return np.stack(cols, axis=1)


def _fd_hessian(X, theta, h=FD_STEP):
    theta = np.asarray(theta, dtype=float)
    d = theta.size
    x0 = np.asarray(X(theta), dtype=float)
    out = np.empty((x0.size, d, d))
    for k in range(d):
        ek = np.zeros(d)
        ek[k] = h
        out[:, k, k] = (np.asarray(X(theta + ek)) - 2 * x0 + np.asarray(X(theta - ek))) / h**2
        for l in range(k + 1, d):
            el = np.zeros(d)
            el[l] = h
            val = (
                np.asarray(X(theta + ek + el)) - np.asarray(X(theta + ek - el))
                - np.asarray(X(theta - ek + el)) + np.asarray(X(theta - ek - el))
            ) / (4 * h * h)
            out[:, k, l] = val
            out[:, l, k] = val
    return out


@dataclass
class ParametricSurface:
    """Patch ``X: R^{n-1} -> R^n``.

    ``jacobian(theta)`` returns the ``n x (n-1)`` matrix of ``X_k``;
    ``second(theta)`` the ``n x (n-1) x (n-1)`` array of ``X_kl``.  Missing
    derivatives fall back to central differences.  ``interior(theta)`` returns
    any vector pointing into the enclosed region; the unit normal is oriented
    along it.
    """

    position: Callable
    interior: Callable
    jacobian: Optional[Callable] = None
    second: Optional[Callable] = None
    name: str = "patch"

    def frame_data(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        J = self.jacobian(theta) if self.jacobian else _fd_jacobian(self.position, theta)
        D2 = self.second(theta) if self.second else _fd_hessian(self.position, theta)
        J = np.asarray(J, dtype=float)
        n_amb = J.shape[0]
        q, _ = np.linalg.qr(J, mode="complete")
        normal = q[:, n_amb - 1]
        if normal @ np.asarray(self.interior(theta), dtype=float) < 0:
            normal = -normal
        return J, np.asarray(D2, dtype=float), normal


@dataclass
class LevelSetSurface:
    """Surface ``{F = 0}`` with the enclosed region ``{F < 0}``.

    ``point(theta)`` places sample points on the surface.
    """

    gradient: Callable
    hessian: Callable
    point: Callable
    name: str = "level set"


def frame_factor(g, rotation=None):
    """Upper-triangular ``tau`` with ``g^{-1} = tau^T tau``, optionally rotated to ``R tau``."""
    g = np.asarray(g, dtype=float)
    try:
        L = np.linalg.cholesky(np.linalg.inv(g))
    except np.linalg.LinAlgError as exc:
        raise DomainError("metric tensor is singular or indefinite") from exc
    tau = L.T
    if rotation is not None:
        tau = np.asarray(rotation, dtype=float) @ tau
    return tau


def curvature_matrix(surface, theta, rotation=None):
    """Curvature matrix at parameter ``theta`` (parametric) or sample id (level set).

    ``rotation`` applies an orthogonal change of tangent frame, which must
    leave every p-curvature unchanged.
    """
    if isinstance(surface, LevelSetSurface):
        return _level_set_curvature(surface, theta, rotation)
    J, D2, normal = surface.frame_data(theta)
    g = J.T @ J
    if np.linalg.cond(g) > 1e12:
        raise DomainError("degenerate parametrization: singular metric")
    tau = frame_factor(g, rotation)
    second = np.einsum("akl,a->kl", D2, normal)
    K = tau @ second @ tau.T
    return 0.5 * (K + K.T), normal


def _level_set_curvature(surface, theta, rotation):
    x = np.asarray(surface.point(theta), dtype=float)
    grad = np.asarray(surface.gradient(x), dtype=float)
    norm = np.linalg.norm(grad)
    if norm == 0:
        raise DomainError("critical point of the level function")
    normal = -grad / norm
    q, _ = np.linalg.qr(grad.reshape(-1, 1), mode="complete")
    tangent = q[:, 1:]
    K = tangent.T @ np.asarray(surface.hessian(x), dtype=float) @ tangent / norm
    if rotation is not None:
        R = np.asarray(rotation, dtype=float)
        K = R @ K @ R.T
    return 0.5 * (K + K.T), normal


@dataclass(frozen=True)
class CurvatureReport:
    point_id: object
    curvature: np.ndarray
    p_curvatures: tuple
    max_convexity_m: int
    normal: tuple
    principal: tuple


def p_curvatures(surface, theta, rotation=None, tol=1e-12):
    K, normal = curvature_matrix(surface, theta, rotation)
    k = traces_batch(K)[1:]
    max_m = cone_membership_def(K, tol=tol).max_m
    principal = tuple(np.linalg.eigvalsh(K).tolist())
    normal = normal + 0.0  # no negative zeros in reports
    return CurvatureReport(theta if np.ndim(theta) == 0 else tuple(np.atleast_1d(theta).tolist()),
                           K, tuple(k.tolist()), max_m, tuple(normal.tolist()), principal)


def max_convexity_from_chain(p_curv, tol=1e-12):
    """Largest ``m`` with ``k_1, ..., k_m > tol``."""
    m = 0
    for k in p_curv:
        if k > tol:
            m += 1
        else:
            break
    return m


@dataclass(frozen=True)
class ConvexityReport:
    m: int
    min_k_m: float
    min_k_m1: float
    m_convex: bool
    precondition_ok: bool
    verdict: str
    worst_sample: object


def classify_m_convex(surface, samples, m, tol=1e-12):
    """Check ``k_m > 0`` and the solvability precondition ``k_{m-1} > 0`` over samples.

    ``k_0 = 1`` so the precondition is vacuous for ``m = 1``.
    """
    samples = list(samples)
    if not samples:
        raise DomainError("need at least one sample point")
    reports = [p_curvatures(surface, s) for s in samples]
    n1 = len(reports[0].p_curvatures)
    if not 1 <= m <= n1:
        raise DomainError(f"m must be in 1..{n1}")
    km = np.array([r.p_curvatures[m - 1] for r in reports])
    km1 = np.array([1.0 if m == 1 else r.p_curvatures[m - 2] for r in reports])
    worst = int(np.argmin(km))
    m_convex = bool(km.min() > tol)
    precondition = bool(km1.min() > tol)
    if precondition:
        verdict = "k_{m-1} > 0: Dirichlet problem solvable"
    else:
        verdict = "k_{m-1} <= 0 somewhere: no C^{2,1} solutions for constant boundary data"
    return ConvexityReport(m, float(km.min()), float(km1.min()), m_convex, precondition,
                           verdict, samples[worst])


# built-in surfaces with analytic derivatives ---------------------------------


def sphere(R=1.0, center=(0.0, 0.0, 0.0)):
    """Spherical coordinates ``(polar, azimuth)``."""
    c = np.asarray(center, dtype=float)

    def X(t):
        a, b = t
        return c + R * np.array([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)])

    def J(t):
        a, b = t
        return R * np.array([
            [np.cos(a) * np.cos(b), -np.sin(a) * np.sin(b)],
            [np.cos(a) * np.sin(b), np.sin(a) * np.cos(b)],
            [-np.sin(a), 0.0],
        ])

    def D2(t):
        a, b = t
        out = np.empty((3, 2, 2))
        out[:, 0, 0] = -R * np.array([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)])
        out[:, 0, 1] = out[:, 1, 0] = R * np.array([-np.cos(a) * np.sin(b), np.cos(a) * np.cos(b), 0.0])
        out[:, 1, 1] = -R * np.array([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), 0.0])
        return out

    return ParametricSurface(X, lambda t: c - X(t), J, D2, name="sphere")


def sphere_graph(R=1.0):
    """Lower hemisphere as the graph ``z = -sqrt(R^2 - x^2 - y^2)``."""

    def X(t):
        x, y = t
        return np.array([x, y, -np.sqrt(R * R - x * x - y * y)])

    def J(t):
        x, y = t
        w = np.sqrt(R * R - x * x - y * y)
        return np.array([[1.0, 0.0], [0.0, 1.0], [x / w, y / w]])

    def D2(t):
        x, y = t
        w = np.sqrt(R * R - x * x - y * y)
        out = np.zeros((3, 2, 2))
        out[2, 0, 0] = (R * R - y * y) / w**3
        out[2, 1, 1] = (R * R - x * x) / w**3
        out[2, 0, 1] = out[2, 1, 0] = x * y / w**3
        return out

    return ParametricSurface(X, lambda t: -X(t), J, D2, name="sphere graph")


def ellipsoid(a=1.0, b=1.0, c=2.0):
    def X(t):
        u, v = t
        return np.array([a * np.sin(u) * np.cos(v), b * np.sin(u) * np.sin(v), c * np.cos(u)])

    def J(t):
        u, v = t
        return np.array([
            [a * np.cos(u) * np.cos(v), -a * np.sin(u) * np.sin(v)],
            [b * np.cos(u) * np.sin(v), b * np.sin(u) * np.cos(v)],
            [-c * np.sin(u), 0.0],
        ])

    def D2(t):
        u, v = t
        out = np.empty((3, 2, 2))
        out[:, 0, 0] = -np.array([a * np.sin(u) * np.cos(v), b * np.sin(u) * np.sin(v), c * np.cos(u)])
        out[:, 0, 1] = out[:, 1, 0] = np.array([-a * np.cos(u) * np.sin(v), b * np.cos(u) * np.cos(v), 0.0])
        out[:, 1, 1] = -np.array([a * np.sin(u) * np.cos(v), b * np.sin(u) * np.sin(v), 0.0])
        return out

    return ParametricSurface(X, lambda t: -X(t), J, D2, name="ellipsoid")


def cylinder(R=1.0):
    """Parameters ``(angle, height)``; the axis is the z-axis."""

    def X(t):
        phi, z = t
        return np.array([R * np.cos(phi), R * np.sin(phi), z])

    def J(t):
        phi, _ = t
        return np.array([[-R * np.sin(phi), 0.0], [R * np.cos(phi), 0.0], [0.0, 1.0]])

    def D2(t):
        phi, _ = t
        out = np.zeros((3, 2, 2))
        out[:, 0, 0] = [-R * np.cos(phi), -R * np.sin(phi), 0.0]
        return out

    def inward(t):
        p = X(t)
        return np.array([-p[0], -p[1], 0.0])

    return ParametricSurface(X, inward, J, D2, name="cylinder")


def torus(R=2.0, r=1.0):
    """Parameters ``(u, v)``: ``u`` around the axis, ``v`` around the tube.

    ``v = 0`` is the outer equator, ``v = pi`` the inner one.
    """

    def X(t):
        u, v = t
        w = R + r * np.cos(v)
        return np.array([w * np.cos(u), w * np.sin(u), r * np.sin(v)])

    def J(t):
        u, v = t
        w = R + r * np.cos(v)
        return np.array([
            [-w * np.sin(u), -r * np.sin(v) * np.cos(u)],
            [w * np.cos(u), -r * np.sin(v) * np.sin(u)],
            [0.0, r * np.cos(v)],
        ])

    def D2(t):
        u, v = t
        w = R + r * np.cos(v)
        out = np.empty((3, 2, 2))
        out[:, 0, 0] = [-w * np.cos(u), -w * np.sin(u), 0.0]
        out[:, 0, 1] = out[:, 1, 0] = [r * np.sin(v) * np.sin(u), -r * np.sin(v) * np.cos(u), 0.0]
        out[:, 1, 1] = [-r * np.cos(v) * np.cos(u), -r * np.cos(v) * np.sin(u), -r * np.sin(v)]
        return out

    def inward(t):
        u, _ = t
        core = np.array([R * np.cos(u), R * np.sin(u), 0.0])
        return core - X(t)

    return ParametricSurface(X, inward, J, D2, name="torus")


def plane():
    return ParametricSurface(
        lambda t: np.array([t[0], t[1], 0.0]),
        lambda t: np.array([0.0, 0.0, 1.0]),
        lambda t: np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
        lambda t: np.zeros((3, 2, 2)),
        name="plane",
    )


def polynomial_graph(coeffs, up=True):
    """Graph ``z = p(x, y)`` of a 2-d polynomial (``numpy.polynomial`` coefficients).

    The interior side is ``z > p`` when ``up`` is true.
    """
    from numpy.polynomial import polynomial as P

    c = np.asarray(coeffs, dtype=float)
    cx, cy = P.polyder(c, axis=0), P.polyder(c, axis=1)
    cxx, cyy, cxy = P.polyder(cx, axis=0), P.polyder(cy, axis=1), P.polyder(cx, axis=1)

    def X(t):
        return np.array([t[0], t[1], P.polyval2d(t[0], t[1], c)])

    def J(t):
        return np.array([[1.0, 0.0], [0.0, 1.0],
                         [P.polyval2d(t[0], t[1], cx), P.polyval2d(t[0], t[1], cy)]])

    def D2(t):
        out = np.zeros((3, 2, 2))
        out[2, 0, 0] = P.polyval2d(t[0], t[1], cxx)
        out[2, 1, 1] = P.polyval2d(t[0], t[1], cyy)
        out[2, 0, 1] = out[2, 1, 0] = P.polyval2d(t[0], t[1], cxy)
        return out

    side = 1.0 if up else -1.0
    return ParametricSurface(X, lambda t: np.array([0.0, 0.0, side]), J, D2, name="graph")


def sphere_level_set(R=1.0, n=3):
    """``|x|^2 - R^2 = 0`` in ``R^n``; sample points are unit directions scaled by ``R``."""

    def point(direction):
        d = np.asarray(direction, dtype=float)
        return R * d / np.linalg.norm(d)

    return LevelSetSurface(lambda x: 2 * x, lambda x: 2 * np.eye(n), point, name="sphere level set")


SURFACES = {
    "sphere": sphere,
    "ellipsoid": ellipsoid,
    "cylinder": cylinder,
    "torus": torus,
    "plane": plane,
    "graph": polynomial_graph,
}
