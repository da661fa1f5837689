"""Canonical domains, boundary quadrature and time grids.

Four domains are supported: a bounded interval ``(a, b)``, the half line
``(0, inf)``, the half space ``(0, inf) x R^m`` and the unit ball in ``R^d``.

Points of the one-dimensional domains are plain floats (or arrays of floats);
points of the multi-dimensional domains are arrays whose last axis holds the
coordinates.  For the half space the first coordinate is the distance to the
boundary hyperplane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from .errors import ConfigurationError, DomainError

__all__ = [
    "Interval",
    "HalfLine",
    "HalfSpace",
    "UnitBall",
    "BoundaryQuadrature",
    "TimeGrid",
    "dist_to_boundary",
    "boundary_quadrature",
    "normal_probe_line",
    "inward_normal",
    "sphere_area",
    "sphere_quadrature",
    "gauss_legendre",
    "log_gauss_legendre",
    "interior_quadrature",
    "DEFAULT_HALFSPACE_RADIUS",
]

DEFAULT_HALFSPACE_RADIUS = 20.0


def sphere_area(k):
    """Surface measure of the unit sphere S^{k-1} in R^k (2 for k=1)."""
    return 2.0 * math.pi ** (k / 2) / math.gamma(k / 2)


@dataclass(frozen=True)
class Interval:
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise DomainError(f"Interval requires a < b, got a={self.a}, b={self.b}")

    kind = "interval"
    bounded = True

    @property
    def length(self):
        return self.b - self.a

    def dimension(self):
        return 1

    @property
    def reach(self):
        return 0.5 * self.length

    def dist(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.a, self.b - x)

    def boundary_points(self):
        return np.array([self.a, self.b])

    def on_boundary(self, y, tol=1e-12):
        y = np.asarray(y, dtype=float)
        return (np.abs(y - self.a) <= tol) | (np.abs(y - self.b) <= tol)

    def inward_normal(self, y):
        y = np.asarray(y, dtype=float)
        if not np.all(self.on_boundary(y)):
            raise DomainError(f"{y} is not a boundary point of {self}")
        return np.where(np.abs(y - self.a) <= 1e-12, 1.0, -1.0)


@dataclass(frozen=True)
class HalfLine:
    kind = "halfline"
    bounded = False
    reach = math.inf

    def dimension(self):
        return 1

    def dist(self, x):
        return np.asarray(x, dtype=float) * 1.0

    def boundary_points(self):
        return np.array([0.0])

    def on_boundary(self, y, tol=1e-12):
        return np.abs(np.asarray(y, dtype=float)) <= tol

    def inward_normal(self, y):
        if not np.all(self.on_boundary(y)):
            raise DomainError(f"{y} is not the boundary point 0 of the half line")
        return np.ones_like(np.asarray(y, dtype=float))


@dataclass(frozen=True)
class HalfSpace:
    """``(0, inf) x R^m``; dimension ``m + 1``."""

    m: int = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"HalfSpace needs a positive integer m, got {self.m}")

    kind = "halfspace"
    bounded = False
    reach = math.inf

    def dimension(self):
        return self.m + 1

    def dist(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] * 1.0

    def on_boundary(self, y, tol=1e-12):
        y = np.asarray(y, dtype=float)
        return np.abs(y[..., 0]) <= tol

    def inward_normal(self, y):
        y = np.asarray(y, dtype=float)
        if not np.all(self.on_boundary(y)):
            raise DomainError("boundary points of the half space have first coordinate 0")
        n = np.zeros_like(y)
        n[..., 0] = 1.0
        return n


@dataclass(frozen=True)
class UnitBall:
    d: int = 2

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"UnitBall needs a positive integer d, got {self.d}")

    kind = "ball"
    bounded = True
    reach = 1.0

    def dimension(self):
        return self.d

    def dist(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - np.linalg.norm(x, axis=-1)

    def on_boundary(self, y, tol=1e-12):
        y = np.asarray(y, dtype=float)
        return np.abs(np.linalg.norm(y, axis=-1) - 1.0) <= tol

    def inward_normal(self, y):
        y = np.asarray(y, dtype=float)
        if not np.all(self.on_boundary(y, tol=1e-10)):
            raise DomainError("boundary points of the unit ball have norm 1")
        return -y

    @cached_property
    def poisson_constant(self):
        """Normalisation of the Poisson kernel, calibrated by ``D(1)(0) = 1``.

        At the centre the kernel is ``C_d (1 - 0) / 1``, so ``C_d`` times the
        boundary mass must equal one.  The mass is taken from the boundary
        quadrature rather than the closed-form sphere area; both agree to
        rounding (see tests).
        """
        q = boundary_quadrature(self, 64)
        return 1.0 / float(np.sum(q.weights))


Domain = Interval | HalfLine | HalfSpace | UnitBall


def _is_multid(domain):
    return isinstance(domain, (HalfSpace, UnitBall))


def _check_interior(domain, x):
    x = np.asarray(x, dtype=float)
    if _is_multid(domain) and (x.ndim == 0 or x.shape[-1] != domain.dimension()):
        raise DomainError(f"point of dimension {domain.dimension()} expected, got shape {x.shape}")
    dist = domain.dist(x)
    if np.any(~np.isfinite(dist)) or np.any(dist <= 0.0):
        raise DomainError(f"{x.tolist()} is not an interior point of {domain}")
    return x, dist


def dist_to_boundary(domain, x):
    """Distance from an interior point (or array of points) to the boundary."""
    _, dist = _check_interior(domain, x)
    return dist[()] if np.ndim(dist) == 0 else dist


def inward_normal(domain, y):
    return domain.inward_normal(y)


@dataclass(frozen=True, eq=False)
class BoundaryQuadrature:
    """Nodes on the boundary and nonnegative weights discretising a boundary measure.

    ``radius`` is set when the boundary was truncated (half space only).
    """

    nodes: np.ndarray
    weights: np.ndarray
    radius: float | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if len(nodes) != len(weights):
            raise ConfigurationError("nodes and weights must have the same length")
        if np.any(weights < 0):
            raise ConfigurationError("quadrature weights must be nonnegative")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)

    @property
    def mass(self):
        return float(np.sum(self.weights))

    def integrate(self, values):
        """Sum of ``weights * values`` along the node axis (axis 0)."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))


def gauss_legendre(a, b, n):
    """Gauss--Legendre nodes and weights on ``[a, b]``."""
    u, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (u + 1.0), half * w


def log_gauss_legendre(a, b, n=16, panels=None):
    """Composite Gauss--Legendre rule in ``log t`` on ``[a, b]``, ``0 < a < b``.

    Returns nodes ``t`` and weights such that ``sum(w * f(t))`` approximates
    ``int_a^b f(t) dt``.  One panel per factor e of range by default.
    """
    if not 0 < a < b:
        raise DomainError("log-spaced rule needs 0 < a < b")
    la, lb = math.log(a), math.log(b)
    if panels is None:
        panels = max(4, int(math.ceil(lb - la)))
    edges = np.linspace(la, lb, panels + 1)
    u, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * u[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    t = np.exp(s)
    return t, ws * t


def sphere_quadrature(k, n):
    """Product rule on the unit sphere ``S^{k-1}`` of ``R^k``.

    ``k = 1`` gives the two points ``{-1, +1}`` with unit weights, ``k = 2``
    the ``n``-point trapezoid rule, and ``k >= 3`` Gauss--Jacobi rules in
    the polar angles times a ``2n``-point trapezoid rule in the last angle.
    Nodes have shape ``(N, k)``.
    """
    if k == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    if k == 2:
        theta = 2.0 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(theta), np.sin(theta)]), np.full(n, 2.0 * np.pi / n)
    sub_nodes, sub_w = sphere_quadrature(k - 1, n if k > 3 else 2 * n)
    # surface element on S^{k-1}: (1 - u^2)^{(k-3)/2} du dsigma_{k-2}
    expo = 0.5 * (k - 3)
    u, wu = special.roots_jacobi(n, expo, expo)
    r = np.sqrt(1.0 - u**2)
    nodes = np.concatenate(
        [np.column_stack([np.full(len(sub_w), ui), ri * sub_nodes]) for ui, ri in zip(u, r)]
    )
    weights = np.concatenate([wi * sub_w for wi in wu])
    return nodes, weights


def boundary_quadrature(domain, n, radius=None):
    """Quadrature for the natural boundary measure of ``domain``.

    Interval: the two endpoints with unit weights.  Half line: the single
    point 0.  Unit ball: surface measure.  Half space: Lebesgue measure on
    ``R^m`` truncated to the ball of the given radius (required); radial
    Gauss--Jacobi nodes times a sphere rule.
    """
    if n < 1:
        raise ConfigurationError("node count must be at least 1")
    if isinstance(domain, Interval):
        return BoundaryQuadrature(np.array([domain.a, domain.b]), np.array([1.0, 1.0]))
    if isinstance(domain, HalfLine):
        return BoundaryQuadrature(np.array([0.0]), np.array([1.0]))
    if isinstance(domain, UnitBall):
        nodes, weights = sphere_quadrature(domain.d, n)
        return BoundaryQuadrature(nodes, weights)
    if isinstance(domain, HalfSpace):
        if radius is None:
            raise ConfigurationError(
                "the half-space boundary is unbounded; pass a truncation radius"
            )
        m = domain.m
        u, wu = special.roots_jacobi(n, 0.0, m - 1.0)
        r = 0.5 * radius * (1.0 + u)
        wr = wu * (0.5 * radius) ** m
        dirs, wd = sphere_quadrature(m, n)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, m)
        w = (wr[:, None] * wd[None, :]).ravel()
        nodes = np.column_stack([np.zeros(len(w)), pts])
        return BoundaryQuadrature(nodes, w, radius=float(radius))
    raise ConfigurationError(f"unknown domain {domain!r}")


def normal_probe_line(domain, anchor, distances):
    """Points at the given distances from a boundary point along the inward normal."""
    distances = np.asarray(distances, dtype=float)
    if np.any(distances <= 0):
        raise DomainError("probe distances must be positive")
    if isinstance(domain, (Interval, HalfLine)):
        anchor = float(anchor)
        normal = float(domain.inward_normal(anchor))
        extent = domain.length if isinstance(domain, Interval) else math.inf
        if np.any(distances >= extent):
            raise DomainError(f"probe distance exceeds the domain {domain}")
        return anchor + normal * distances
    anchor = np.asarray(anchor, dtype=float)
    normal = domain.inward_normal(anchor)
    if isinstance(domain, UnitBall) and np.any(distances >= 2.0):
        raise DomainError("probe distance exceeds the diameter of the unit ball")
    return anchor[None, :] + distances[:, None] * normal[None, :]


def interior_quadrature(domain, n=200, radius=None):
    """Nodes and weights for Lebesgue measure on the domain.

    Gauss--Legendre on bounded intervals; on the half line a Gauss--Legendre
    rule on ``(0, radius)`` (default 40); on the unit disk a polar product
    rule.  Other domains are not supported.
    """
    if isinstance(domain, Interval):
        return gauss_legendre(domain.a, domain.b, n)
    if isinstance(domain, HalfLine):
        return gauss_legendre(0.0, 40.0 if radius is None else radius, n)
    if isinstance(domain, UnitBall) and domain.d == 2:
        nr = max(8, n // 4)
        r, wr = gauss_legendre(0.0, 1.0, nr)
        nt = max(8, n)
        th = 2.0 * np.pi * np.arange(nt) / nt
        pts = np.stack(
            [np.outer(r, np.cos(th)), np.outer(r, np.sin(th))], axis=-1
        ).reshape(-1, 2)
        w = np.outer(wr * r, np.full(nt, 2.0 * np.pi / nt)).ravel()
        return pts, w
    raise ConfigurationError(f"no interior quadrature for {domain}")


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing time nodes in ``(0, T]``; the origin 0 is implicit."""

    nodes: np.ndarray
    scheme: str = "uniform"
    _origin: float = field(default=0.0, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) == 0:
            raise DomainError("a time grid needs at least one node")
        if nodes[0] <= 0 or np.any(np.diff(nodes) <= 0):
            raise DomainError("time nodes must be positive and strictly increasing")
        if self.scheme not in ("uniform", "log-spaced", "graded"):
            raise ConfigurationError(f"unknown time-grid scheme {self.scheme!r}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, T, n):
        return cls(T * np.arange(1, n + 1) / n, "uniform")

    @classmethod
    def log_spaced(cls, T, n, t_min):
        """Geometric nodes from ``t_min`` to ``T`` (clustered near the origin)."""
        return cls(np.geomspace(t_min, T, n), "log-spaced")

    @classmethod
    def graded(cls, T, n, tau_min):
        """Nodes clustered geometrically toward the end point ``T``.

        Used for stochastic convolutions whose kernel concentrates at
        ``s = T``; the gaps ``T - s`` form a geometric sequence down to
        ``tau_min`` and the node ``T`` itself is included.
        """
        if not 0 < tau_min < T:
            raise DomainError("graded grid needs 0 < tau_min < T")
        gaps = np.geomspace(T, tau_min, n)
        nodes = np.concatenate([T - gaps[1:], [T]])
        nodes = nodes[nodes > 0]
        return cls(nodes, "graded")

    def __len__(self):
        return len(self.nodes)

    @property
    def horizon(self):
        return float(self.nodes[-1])

    @property
    def with_origin(self):
        return np.concatenate([[0.0], self.nodes])

    @property
    def steps(self):
        return np.diff(self.with_origin)
