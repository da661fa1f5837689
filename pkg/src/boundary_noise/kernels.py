"""Dirichlet heat kernels, Green kernels and their boundary normal derivatives.

All normal derivatives are taken along the *inward* unit normal, so the
elliptic normal derivative is the (nonnegative) Poisson kernel and the
Dirichlet map of the constant 1 is 1.

Arguments broadcast with numpy rules.  For one-dimensional domains points
are floats; otherwise the last axis holds coordinates, so an outer product
over ``P`` interior points and ``Q`` boundary nodes is obtained with
``x[:, None, :]`` and ``y[None, :, :]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
from numpy.polynomial import hermite_e
from scipy import special

from .domains import HalfLine, HalfSpace, Interval, TimeGrid, UnitBall, sphere_area
from .errors import ConfigurationError, DomainError, SingularityError

__all__ = [
    "KernelConfig",
    "gaussian",
    "heat_kernel",
    "heat_kernel_derivative",
    "heat_kernel_normal_derivative",
    "heat_normal_derivative_time_integral",
    "green_kernel",
    "green_kernel_quadrature",
    "green_normal_derivative",
    "green_normal_derivative_quadrature",
    "halfspace_fourier_normal_derivative",
    "halfspace_green_fourier_normal_derivative",
    "halfspace_poisson_tail_bound",
    "check_gaussian_bound",
    "GaussianBoundFit",
    "check_normal_derivative_bound",
    "interval_eigen_error_bound",
    "first_dirichlet_eigenvalue",
    "SelfTestResult",
    "kernel_selftest",
]


@dataclass(frozen=True)
class KernelConfig:
    """Resolvent shift ``lam``, series truncation and Laplace-transform quadrature.

    ``laplace_nodes`` points are placed log-uniformly on
    ``[laplace_t_min, T_max]`` with ``T_max`` chosen so the transform weight
    ``exp(-(lam + lambda_1) T_max)`` is below 1e-12 (``lambda_1`` being the
    first Dirichlet eigenvalue, 0 on unbounded domains).
    """

    lam: float = 0.0
    series_terms: int = 64
    laplace_nodes: int = 2000
    laplace_t_min: float = 1e-8

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError("lambda must be nonnegative")
        if self.series_terms < 1:
            raise ConfigurationError("series_terms must be at least 1")

    def laplace_grid(self, domain, t_min=None):
        rate = self.lam + first_dirichlet_eigenvalue(domain)
        if rate <= 0:
            raise ConfigurationError("the Laplace transform needs lambda > 0 on unbounded domains")
        t_max = -math.log(1e-12) / rate
        t_min = self.laplace_t_min if t_min is None else min(t_min, self.laplace_t_min)
        return TimeGrid.log_spaced(t_max, self.laplace_nodes, t_min)


def check_lambda(domain, cfg):
    if not domain.bounded and cfg.lam <= 0:
        raise ConfigurationError(
            f"lambda must be positive on the unbounded domain {domain}, got {cfg.lam}"
        )


def first_dirichlet_eigenvalue(domain):
    if isinstance(domain, Interval):
        return (math.pi / domain.length) ** 2
    if isinstance(domain, UnitBall):
        return float(special.jn_zeros(domain.d / 2 - 1, 1)[0]) ** 2 if domain.d == 2 else (
            _bessel_zero(domain.d / 2 - 1) ** 2
        )
    return 0.0


def _bessel_zero(order):
    # first positive zero of J_order for half-integer orders
    from scipy.optimize import brentq

    grid = np.linspace(0.5, 20, 400)
    vals = special.jv(order, grid)
    i = np.where(np.sign(vals[:-1]) != np.sign(vals[1:]))[0][0]
    return brentq(lambda z: special.jv(order, z), grid[i], grid[i + 1])


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("time must be positive")
    return t


def gaussian(t, z, dim=1):
    """Free heat kernel ``(4 pi t)^{-dim/2} exp(-|z|^2 / 4t)``.

    For ``dim > 1`` the last axis of ``z`` holds coordinates.
    """
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    r2 = z * z if dim == 1 else np.sum(z * z, axis=-1)
    return (4.0 * np.pi * t) ** (-0.5 * dim) * np.exp(-r2 / (4.0 * t))


def _gauss_deriv(t, z, k):
    """k-th derivative in z of the one-dimensional Gaussian kernel."""
    sigma = np.sqrt(2.0 * t)
    base = gaussian(t, z)
    if k == 0:
        return base
    coef = np.zeros(k + 1)
    coef[k] = 1.0
    return (-1.0) ** k * sigma ** (-k) * hermite_e.hermeval(z / sigma, coef) * base


# ---------------------------------------------------------------------------
# interval: image series and sine series


def interval_eigen_error_bound(t, terms, length=1.0):
    """Bound ``2 exp(-K^2 pi^2 t / L^2)`` on the truncated sine-series tail (unit length scale)."""
    return 2.0 * np.exp(-(terms**2) * np.pi**2 * np.asarray(t) / length**2)


def _interval_images(L, t, xr, yr, k, terms):
    n = np.arange(-terms, terms + 1)
    shape = np.broadcast(t, xr, yr).shape
    t_, x_, y_ = (np.broadcast_to(v, shape)[..., None] for v in (t, xr, yr))
    shifts = 2.0 * L * n
    return np.sum(_gauss_deriv(t_, x_ - y_ + shifts, k) - _gauss_deriv(t_, x_ + y_ + shifts, k), axis=-1)


def _interval_eigen(L, t, xr, yr, terms):
    k = np.arange(1, terms + 1)
    shape = np.broadcast(t, xr, yr).shape
    t_, x_, y_ = (np.broadcast_to(v, shape)[..., None] for v in (t, xr, yr))
    w = k * np.pi / L
    return (2.0 / L) * np.sum(np.sin(w * x_) * np.sin(w * y_) * np.exp(-(w**2) * t_), axis=-1)


def _interval_method(domain, t, method):
    if method == "auto":
        return "eigen" if np.all(np.asarray(t) >= 0.05 * domain.length**2) else "images"
    if method not in ("eigen", "images"):
        raise ConfigurationError(f"unknown interval kernel method {method!r}")
    return method


# ---------------------------------------------------------------------------
# unit disk: Bessel eigenfunction series


@lru_cache(maxsize=8)
def _disk_table(n_orders, n_zeros):
    """Zeros ``j_{n,k}`` and ``J_{n+1}(j_{n,k})`` for ``0 <= n < n_orders``."""
    zeros = np.array([special.jn_zeros(n, n_zeros) for n in range(n_orders)])
    jn1 = special.jv(np.arange(n_orders)[:, None] + 1, zeros)
    zeros.setflags(write=False)
    jn1.setflags(write=False)
    return zeros, jn1


DISK_T_MIN = 1e-3


def _disk_table_for(t_min):
    # keep terms with exp(-j^2 t) above ~1e-17
    if t_min < DISK_T_MIN:
        raise DomainError(f"the disk eigenfunction series is used for t >= {DISK_T_MIN}")
    jmax = math.sqrt(40.0 / float(t_min))
    n_orders = int(jmax) + 2
    n_zeros = int(jmax / math.pi) + 2
    n_orders = 1 << (n_orders - 1).bit_length()
    n_zeros = 1 << (n_zeros - 1).bit_length()
    return _disk_table(n_orders, n_zeros)


def _polar(p):
    p = np.asarray(p, dtype=float)
    return np.hypot(p[..., 0], p[..., 1]), np.arctan2(p[..., 1], p[..., 0])


def _disk_series(t, x, y, normal):
    t = np.asarray(t, dtype=float)
    r, th = _polar(x)
    rho, ph = _polar(y)
    zeros, jn1 = _disk_table_for(np.min(t))
    shape = np.broadcast(t, r, rho).shape
    t_, r_, rho_, d_ = (np.broadcast_to(v, shape)[..., None] for v in (t, r, rho, th - ph))
    out = np.zeros(shape)
    jmax = math.sqrt(40.0 / float(np.min(t)))
    for n in range(zeros.shape[0]):
        keep = zeros[n] <= jmax
        if not keep.any():
            break
        j, jn = zeros[n][keep], jn1[n][keep]
        decay = np.exp(-(j**2) * t_)
        ang = (1.0 if n == 0 else 2.0) * np.cos(n * d_[..., 0])
        if normal:
            radial = np.sum(special.jv(n, j * r_) * j * decay / (np.pi * jn), axis=-1)
        else:
            radial = np.sum(
                special.jv(n, j * r_) * special.jv(n, j * rho_) * decay / (np.pi * jn**2),
                axis=-1,
            )
        out += ang * radial
    return out


# ---------------------------------------------------------------------------
# heat kernel


def heat_kernel(domain, t, x, y, method="auto", terms=64):
    """Dirichlet heat kernel ``G(t, x, y)``.

    Half line and half space use the method of images; the interval uses the
    image series for small times and the sine series otherwise (``method``
    forces one); the unit disk uses the Bessel eigenfunction series.
    """
    t = _check_time(t)
    if isinstance(domain, HalfLine):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return gaussian(t, x - y) - gaussian(t, x + y)
    if isinstance(domain, HalfSpace):
        x, y = np.asarray(x, float), np.asarray(y, float)
        d = domain.dimension()
        xbar = x * np.r_[-1.0, np.ones(domain.m)]
        return gaussian(t, x - y, d) - gaussian(t, xbar - y, d)
    if isinstance(domain, Interval):
        L = domain.length
        xr, yr = np.asarray(x, float) - domain.a, np.asarray(y, float) - domain.a
        if _interval_method(domain, t, method) == "eigen":
            return _interval_eigen(L, t, xr, yr, terms)
        return _interval_images(L, t, xr, yr, 0, terms)
    if isinstance(domain, UnitBall):
        if domain.d != 2:
            raise ConfigurationError("heat kernel on the unit ball is implemented for d=2 only")
        return _disk_series(t, x, y, normal=False)
    raise ConfigurationError(f"unknown domain {domain!r}")


def heat_kernel_derivative(domain, t, x, y, n=0, alpha=0, terms=64):
    """``d^n/dt^n d^alpha/dx^alpha G(t, x, y)`` in closed form (image series).

    ``alpha`` is an integer for one-dimensional domains and a multi-index
    (tuple of length ``m + 1``) for the half space.
    """
    t = _check_time(t)
    if isinstance(domain, (HalfLine, Interval)):
        a = int(alpha if np.ndim(alpha) == 0 else sum(alpha))
        k = a + 2 * n
        x, y = np.asarray(x, float), np.asarray(y, float)
        if isinstance(domain, HalfLine):
            return _gauss_deriv(t, x - y, k) - _gauss_deriv(t, x + y, k)
        return _interval_images(domain.length, t, x - domain.a, y - domain.a, k, terms)
    if isinstance(domain, HalfSpace):
        d = domain.dimension()
        alpha = tuple(alpha) if np.ndim(alpha) else (int(alpha),) + (0,) * domain.m
        if len(alpha) != d:
            raise ConfigurationError(f"multi-index of length {d} expected")
        x, y = np.asarray(x, float), np.asarray(y, float)
        total = 0.0
        # d/dt = Laplacian: expand Laplacian^n into monomials
        for combo in product(range(d), repeat=n):
            beta = list(alpha)
            for i in combo:
                beta[i] += 2
            direct = 1.0
            reflected = (-1.0) ** beta[0] * _gauss_deriv(t, -x[..., 0] - y[..., 0], beta[0])
            for i in range(d):
                f = _gauss_deriv(t, x[..., i] - y[..., i], beta[i])
                direct = direct * f
                if i > 0:
                    reflected = reflected * f
            total = total + direct - reflected
        return total
    if isinstance(domain, UnitBall) and domain.d == 2 and n == 0 and not np.any(alpha):
        return heat_kernel(domain, t, x, y)
    raise ConfigurationError(f"derivatives not available for {domain}")


def _boundary_offset(domain, x, y):
    """Interval: distance of x from the boundary point y (which must be a or b)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    at_a = np.abs(y - domain.a) <= 1e-12
    at_b = np.abs(y - domain.b) <= 1e-12
    if not np.all(at_a | at_b):
        raise DomainError("y must be an endpoint of the interval")
    return np.where(at_a, x - domain.a, domain.b - x)


def _require_boundary(domain, y):
    if isinstance(domain, (HalfSpace, UnitBall)) and not np.all(domain.on_boundary(y, tol=1e-10)):
        raise DomainError("y must lie on the boundary")
    if isinstance(domain, HalfLine) and not np.all(domain.on_boundary(y)):
        raise DomainError("the boundary of the half line is {0}")


def heat_kernel_normal_derivative(domain, t, x, y, method="auto", terms=64):
    """Inward normal derivative ``dG/dn_y(t, x, y)`` at a boundary point ``y``.

    Half space: ``(x_0 / t) Gamma(t, x - y)``; interval at ``y = a``:
    ``sum_n (x' + 2nL)/t Gamma_1(t, x' + 2nL)`` or
    ``(2/L) sum_k (k pi / L) sin(k pi x'/L) exp(-k^2 pi^2 t / L^2)``.
    """
    t = _check_time(t)
    _require_boundary(domain, y)
    if isinstance(domain, HalfLine):
        x = np.asarray(x, float)
        return x / t * gaussian(t, x) + 0.0 * np.asarray(y, float)
    if isinstance(domain, HalfSpace):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return x[..., 0] / t * gaussian(t, x - y, domain.dimension())
    if isinstance(domain, Interval):
        L = domain.length
        xr = _boundary_offset(domain, x, y)
        if _interval_method(domain, t, method) == "eigen":
            k = np.arange(1, terms + 1)
            shape = np.broadcast(t, xr).shape
            t_, x_ = (np.broadcast_to(v, shape)[..., None] for v in (t, xr))
            w = k * np.pi / L
            return (2.0 / L) * np.sum(w * np.sin(w * x_) * np.exp(-(w**2) * t_), axis=-1)
        n = np.arange(-terms, terms + 1)
        shape = np.broadcast(t, xr).shape
        t_, x_ = (np.broadcast_to(v, shape)[..., None] for v in (t, xr))
        z = x_ + 2.0 * L * n
        return np.sum(z / t_ * gaussian(t_, z), axis=-1)
    if isinstance(domain, UnitBall):
        if domain.d != 2:
            raise ConfigurationError("heat kernel on the unit ball is implemented for d=2 only")
        return _disk_series(t, x, y, normal=True)
    raise ConfigurationError(f"unknown domain {domain!r}")


def heat_normal_derivative_time_integral(domain, tau, x, y, terms=64):
    """``int_0^tau dG/dn_y(s, x, y) ds`` in closed form (complementary error functions).

    Used for cell-averaged convolution weights.  Available on the half line,
    interval and half space.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError("tau must be nonnegative")
    pos = np.maximum(tau, 1e-300)
    if isinstance(domain, HalfLine):
        x = np.asarray(x, float)
        return np.where(tau > 0, special.erfc(x / (2.0 * np.sqrt(pos))), 0.0)
    if isinstance(domain, Interval):
        xr = _boundary_offset(domain, x, y)
        n = np.arange(-terms, terms + 1)
        shape = np.broadcast(pos, xr).shape
        t_, x_ = (np.broadcast_to(v, shape)[..., None] for v in (pos, xr))
        z = x_ + 2.0 * domain.length * n
        val = np.sum(np.sign(z) * special.erfc(np.abs(z) / (2.0 * np.sqrt(t_))), axis=-1)
        return np.where(tau > 0, val, 0.0)
    if isinstance(domain, HalfSpace):
        x, y = np.asarray(x, float), np.asarray(y, float)
        _require_boundary(domain, y)
        d = domain.dimension()
        r2 = np.sum((x - y) ** 2, axis=-1)
        a = 0.5 * d
        val = (
            x[..., 0]
            * (4.0 * np.pi) ** (-a)
            * (4.0 / r2) ** a
            * special.gamma(a)
            * special.gammaincc(a, r2 / (4.0 * pos))
        )
        return np.where(tau > 0, val, 0.0)
    raise ConfigurationError(f"time integral not available for {domain}")


# ---------------------------------------------------------------------------
# Green kernel


def _laplace(domain, cfg, f, r2_min):
    """``int_0^inf exp(-lam t) f(t) dt`` by the trapezoid rule in ``log t``.

    ``f`` maps an array of times (trailing axis) to values.
    """
    # below r^2/160 the heat kernel carries a factor exp(-40)
    t_min = max(float(np.min(r2_min)) / 160.0, 1e-300)
    if isinstance(domain, UnitBall):
        # the series cost grows like 1/t; the part below DISK_T_MIN is at most
        # of order exp(-|x-y|^2 / (4 DISK_T_MIN)) and is dropped
        grid = TimeGrid.log_spaced(
            cfg.laplace_grid(domain).horizon, min(cfg.laplace_nodes, 400), max(t_min, DISK_T_MIN)
        )
    else:
        grid = cfg.laplace_grid(domain, t_min)
    t = grid.nodes
    h = math.log(t[1] / t[0])
    w = np.full_like(t, h) * t
    w[0] *= 0.5
    w[-1] *= 0.5
    return np.sum(np.exp(-cfg.lam * t) * w * f(t), axis=-1)


def green_kernel_quadrature(domain, cfg, x, y):
    """``int_0^inf exp(-lam t) G(t, x, y) dt`` evaluated numerically."""
    check_lambda(domain, cfg)
    x, y = np.asarray(x, float), np.asarray(y, float)
    r2 = (x - y) ** 2 if domain.dimension() == 1 else np.sum((x - y) ** 2, axis=-1)
    if np.any(r2 == 0):
        raise SingularityError("the Green kernel is singular on the diagonal x = y")
    if domain.dimension() == 1:
        f = lambda t: heat_kernel(domain, t, x[..., None], y[..., None], terms=cfg.series_terms)
    else:
        f = lambda t: heat_kernel(domain, t, x[..., None, :], y[..., None, :], terms=cfg.series_terms)
    return _laplace(domain, cfg, f, r2)


def green_kernel(domain, cfg, x, y):
    """Green kernel of ``lam - Laplacian`` with zero Dirichlet data.

    Closed forms on the half line, the interval and the unit ball
    (``lam = 0``); Laplace-transform quadrature of the heat kernel elsewhere.
    """
    check_lambda(domain, cfg)
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(x == y) if domain.dimension() == 1 else np.any(np.all(x == y, axis=-1)):
        raise SingularityError("the Green kernel is singular on the diagonal x = y")
    lam = cfg.lam
    if isinstance(domain, HalfLine):
        s = math.sqrt(lam)
        return (np.exp(-s * np.abs(x - y)) - np.exp(-s * (x + y))) / (2.0 * s)
    if isinstance(domain, Interval):
        lo = np.minimum(x, y) - domain.a
        hi = domain.b - np.maximum(x, y)
        L = domain.length
        if lam == 0:
            return lo * hi / L
        s = math.sqrt(lam)
        return np.sinh(s * lo) * np.sinh(s * hi) / (s * np.sinh(s * L))
    if isinstance(domain, UnitBall) and lam == 0:
        d = domain.d
        ny = np.linalg.norm(y, axis=-1)
        # |y| |x - y*| = | |y| x - y/|y| |, continuous at y = 0
        safe = np.where(ny > 0, ny, 1.0)[..., None]
        mirrored = np.where(
            (ny > 0)[..., None], safe * x - y / safe, np.broadcast_to(0.0 * x + 1.0, np.broadcast(x, y).shape) / math.sqrt(d)
        )
        a = np.linalg.norm(mirrored, axis=-1)
        a = np.where(ny > 0, a, 1.0)
        b = np.linalg.norm(x - y, axis=-1)
        if d == 2:
            return np.log(a / b) / (2.0 * np.pi)
        return (b ** (2 - d) - a ** (2 - d)) / ((d - 2) * sphere_area(d))
    return green_kernel_quadrature(domain, cfg, x, y)


def green_normal_derivative_quadrature(domain, cfg, x, y):
    """Laplace transform of :func:`heat_kernel_normal_derivative`, numerically."""
    check_lambda(domain, cfg)
    _require_boundary(domain, y)
    x, y = np.asarray(x, float), np.asarray(y, float)
    if domain.dimension() == 1:
        r2 = domain.dist(x) ** 2 if isinstance(domain, HalfLine) else _boundary_offset(domain, x, y) ** 2
        f = lambda t: heat_kernel_normal_derivative(domain, t, x[..., None], y[..., None], terms=cfg.series_terms)
    else:
        r2 = np.sum((x - y) ** 2, axis=-1)
        f = lambda t: heat_kernel_normal_derivative(domain, t, x[..., None, :], y[..., None, :], terms=cfg.series_terms)
    return _laplace(domain, cfg, f, r2)


def green_normal_derivative(domain, cfg, x, y):
    """Inward normal derivative of the Green kernel at a boundary point.

    Closed forms: interval (linear / hyperbolic), half line ``exp(-sqrt(lam) x)``,
    unit ball with ``lam = 0`` (Poisson kernel ``C_d (1 - |x|^2) / |x - y|^d``),
    unit disk with ``lam > 0`` (modified Bessel series).  The half space uses
    the Laplace transform of the heat-kernel normal derivative.
    """
    check_lambda(domain, cfg)
    _require_boundary(domain, y)
    lam = cfg.lam
    x, y = np.asarray(x, float), np.asarray(y, float)
    if isinstance(domain, HalfLine):
        return np.exp(-math.sqrt(lam) * x) + 0.0 * y
    if isinstance(domain, Interval):
        off = _boundary_offset(domain, x, y)
        L = domain.length
        if lam == 0:
            return (L - off) / L
        s = math.sqrt(lam)
        return np.sinh(s * (L - off)) / np.sinh(s * L)
    if isinstance(domain, UnitBall):
        if lam == 0:
            d = domain.d
            r2 = np.sum(x * x, axis=-1)
            dist = np.linalg.norm(x - y, axis=-1)
            return domain.poisson_constant * (1.0 - r2) / dist**d
        if domain.d == 2:
            return _disk_helmholtz_poisson(lam, x, y, cfg.series_terms)
        raise ConfigurationError("lambda > 0 on the ball is implemented for d=2 only")
    if isinstance(domain, HalfSpace):
        return green_normal_derivative_quadrature(domain, cfg, x, y)
    raise ConfigurationError(f"unknown domain {domain!r}")


def _disk_helmholtz_poisson(lam, x, y, terms):
    r, th = _polar(x)
    _, ph = _polar(y)
    s = math.sqrt(lam)
    n = np.arange(0, 4 * terms)
    shape = np.broadcast(r, th - ph).shape
    r_, d_ = (np.broadcast_to(v, shape)[..., None] for v in (r, th - ph))
    den = special.ive(n, s)
    ratio = np.divide(special.ive(n, s * r_), den, out=np.zeros(np.broadcast(r_, n).shape), where=den > 0)
    ratio = ratio * np.exp(s * (r_ - 1.0))
    weight = np.where(n == 0, 1.0, 2.0)
    return np.sum(weight * ratio * np.cos(n * d_), axis=-1) / (2.0 * np.pi)


def halfspace_poisson_tail_bound(domain, x, radius):
    """Upper bound on ``int_{|y| > R} dG/dn_y(x, y) dy`` for the truncated half-space boundary.

    Uses the ``lam = 0`` Poisson kernel, which dominates every ``lam > 0``
    kernel: the tail is at most ``2 x_0 |S^{m-1}| / (|S^m| (R - |x'|))``.
    """
    x = np.asarray(x, float)
    m = domain.m
    lateral = np.linalg.norm(x[..., 1:], axis=-1)
    if np.any(lateral >= radius):
        return np.inf
    return 2.0 * x[..., 0] * sphere_area(m) / (sphere_area(m + 1) * (radius - lateral))


# ---------------------------------------------------------------------------
# Fourier side on the half space


def halfspace_fourier_normal_derivative(t, x, eta, form="printed"):
    """Fourier transform in the boundary variable of the heat normal derivative.

    ``form="printed"`` evaluates
    ``-(x_0 / (2 sqrt(pi) t^{3/2})) exp(-x_0^2/4t) exp(i<x', eta> - ((2t)^m / 2)|eta|^2)``
    verbatim; ``form="direct"`` is the transform of the inward derivative
    ``(x_0/t) Gamma(t, x - y)`` computed directly, whose Gaussian factor is
    ``exp(-t |eta|^2)``.  The two differ in sign (normal orientation) and,
    for ``m >= 2``, in the Gaussian factor.
    """
    t = _check_time(t)
    x = np.asarray(x, float)
    eta = np.asarray(eta, float)
    x0 = x[..., 0]
    if np.any(x0 <= 0):
        raise DomainError("x_0 must be positive")
    xt = x[..., 1:]
    m = eta.shape[-1]
    if xt.shape[-1] != m:
        raise ConfigurationError("frequency dimension must equal m")
    amp = x0 / (2.0 * math.sqrt(math.pi) * t**1.5) * np.exp(-(x0**2) / (4.0 * t))
    phase = np.exp(1j * np.sum(xt * eta, axis=-1))
    e2 = np.sum(eta * eta, axis=-1)
    if form == "printed":
        return -amp * phase * np.exp(-0.5 * (2.0 * t) ** m * e2)
    if form == "direct":
        return amp * phase * np.exp(-t * e2)
    raise ConfigurationError(f"unknown form {form!r}")


def halfspace_green_fourier_normal_derivative(cfg, x, eta, form="direct", closed=True):
    """``int_0^inf exp(-lam t) F_y dG/dn_y(t, x, eta) dt``.

    With ``form="direct"`` and ``closed=True`` this is
    ``exp(-x_0 sqrt(lam + |eta|^2)) exp(i <x', eta>)``; otherwise the time
    integral is done numerically on the Laplace grid.
    """
    if cfg.lam <= 0:
        raise ConfigurationError("lambda must be positive on the half space")
    x = np.asarray(x, float)
    eta = np.asarray(eta, float)
    if form == "direct" and closed:
        e2 = np.sum(eta * eta, axis=-1)
        phase = np.exp(1j * np.sum(x[..., 1:] * eta, axis=-1))
        return np.exp(-x[..., 0] * np.sqrt(cfg.lam + e2)) * phase
    dom = HalfSpace(eta.shape[-1])
    f = lambda t: halfspace_fourier_normal_derivative(t, x[..., None, :], eta[..., None, :], form)
    return _laplace(dom, cfg, f, x[..., 0] ** 2)


# ---------------------------------------------------------------------------
# Gaussian bounds


@dataclass
class GaussianBoundFit:
    """Result of scanning ``K_2`` for the Gaussian derivative bound."""

    K1: float
    K2: float
    ok: bool
    table: dict = field(default_factory=dict)
    worst_point: tuple | None = None


def _default_probes(domain, S):
    ts = np.geomspace(1e-3, S, 25)
    if isinstance(domain, Interval):
        pts = domain.a + domain.length * np.linspace(0.02, 0.98, 17)
        X, Y = np.meshgrid(pts, pts, indexing="ij")
        return ts, X.ravel(), Y.ravel()
    if isinstance(domain, HalfLine):
        pts = np.geomspace(0.01, 5.0, 15)
        X, Y = np.meshgrid(pts, pts, indexing="ij")
        return ts, X.ravel(), Y.ravel()
    if isinstance(domain, HalfSpace):
        rng = np.random.default_rng(5)
        d = domain.dimension()
        X = rng.uniform(-2, 2, size=(150, d))
        Y = rng.uniform(-2, 2, size=(150, d))
        X[:, 0] = np.abs(X[:, 0]) + 0.01
        Y[:, 0] = np.abs(Y[:, 0]) + 0.01
        return ts, X, Y
    raise ConfigurationError(f"no default probe set for {domain}")


def check_gaussian_bound(domain, n=0, alpha=0, S=1.0, probes=None, K2_grid=(2.0, 3.0, 4.0, 4.5, 5.0, 6.0, 8.0, 12.0, 16.0), K1_cap=1e6):
    """Fit ``|d^n_t d^alpha_x G| <= K1 t^{-(d+|alpha|+2n)/2} exp(-|x-y|^2/(K2 t))``.

    For each ``K2`` the smallest admissible ``K1`` on the probe set is the
    maximum of the scaled derivative.  The reported pair uses the smallest
    ``K2`` whose ``K1`` is finite and below ``K1_cap``.
    """
    ts, X, Y = probes if probes is not None else _default_probes(domain, S)
    d = domain.dimension()
    order = int(alpha) if np.ndim(alpha) == 0 else int(sum(alpha))
    expo = 0.5 * (d + order + 2 * n)
    if d == 1:
        T, Xg = np.meshgrid(ts, X, indexing="ij")
        _, Yg = np.meshgrid(ts, Y, indexing="ij")
        r2 = (Xg - Yg) ** 2
    else:
        T = ts[:, None]
        Xg, Yg = X[None, :, :], Y[None, :, :]
        r2 = np.sum((Xg - Yg) ** 2, axis=-1) + 0.0 * T
    val = np.abs(heat_kernel_derivative(domain, T, Xg, Yg, n=n, alpha=alpha))
    table = {}
    chosen = None
    worst = None
    with np.errstate(over="ignore", invalid="ignore"):
        for K2 in sorted(K2_grid):
            scaled = val * T**expo * np.exp(r2 / (K2 * T))
            scaled = np.where(val == 0, 0.0, scaled)
            K1 = float(np.max(scaled))
            table[K2] = K1
            it, ip = np.unravel_index(np.nanargmax(np.where(np.isnan(scaled), np.inf, scaled)), scaled.shape)
            worst = {"K2": K2, "t": float(ts[it]), "x": np.asarray(X)[ip].tolist(), "y": np.asarray(Y)[ip].tolist()}
            if chosen is None and np.isfinite(K1) and K1 <= K1_cap:
                chosen = (K1, K2)
    if chosen is None:
        return GaussianBoundFit(np.inf, max(K2_grid), False, table, worst)
    return GaussianBoundFit(chosen[0], chosen[1], True, table, None)


def check_normal_derivative_bound(domain, cfg, x, y):
    """Smallest ``C`` with ``|dG/dn_y(x, y)| <= C |x - y|^{1-d}`` (``d > 1``) or
    ``C (1 + log+ |x - y|^{-1})`` (``d = 1``) over the given pairs."""
    g = np.abs(green_normal_derivative(domain, cfg, x, y))
    d = domain.dimension()
    if d == 1:
        r = np.abs(np.asarray(x, float) - np.asarray(y, float))
        ref = 1.0 + np.maximum(np.log(1.0 / r), 0.0)
    else:
        r = np.linalg.norm(np.asarray(x, float) - np.asarray(y, float), axis=-1)
        ref = r ** (1.0 - d)
    return float(np.max(g / ref))


# ---------------------------------------------------------------------------
# self-test


@dataclass(frozen=True)
class SelfTestResult:
    """One kernel invariant: the measured defect and the tolerance it must meet."""

    name: str
    value: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tol)


def _ck_defect(domain, t, s, z, wz, xs, ys):
    lhs = heat_kernel(domain, t, xs[:, None], z[None, :]) * wz @ heat_kernel(domain, s, z[:, None], ys[None, :])
    rhs = heat_kernel(domain, t + s, xs[:, None], ys[None, :])
    return float(np.max(np.abs(lhs - rhs)))


def kernel_selftest():
    """Image/series agreement, symmetry, Chapman--Kolmogorov, sub-Markov mass and Gaussian bound fits.

    Returns a list of :class:`SelfTestResult`.
    """
    from .domains import gauss_legendre

    iv, hl = Interval(0.0, 1.0), HalfLine()
    out = []
    xs = np.linspace(0.03, 0.97, 11)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    ts = np.geomspace(0.05, 1.0, 8)[:, None, None]
    diff = heat_kernel(iv, ts, X, Y, method="images") - heat_kernel(iv, ts, X, Y, method="eigen")
    out.append(SelfTestResult("interval images vs sine series (t >= 0.05)", float(np.max(np.abs(diff))), 1e-10))

    sym = 0.0
    tt = np.geomspace(1e-3, 1.0, 7)[:, None, None]
    for dom, P, Q in (
        (iv, X, Y),
        (hl, 4 * X, 4 * Y),
    ):
        sym = max(sym, float(np.max(np.abs(heat_kernel(dom, tt, P, Q) - heat_kernel(dom, tt, Q, P)))))
    rng = np.random.default_rng(11)
    for dom, pts in (
        (HalfSpace(1), np.column_stack([rng.uniform(0.01, 2, 20), rng.uniform(-2, 2, 20)])),
        (UnitBall(2), rng.uniform(-0.6, 0.6, (20, 2))),
    ):
        for t in (1e-2, 0.1, 1.0):
            G = heat_kernel(dom, t, pts[:, None, :], pts[None, :, :])
            sym = max(sym, float(np.max(np.abs(G - G.T))))
    out.append(SelfTestResult("heat kernel symmetry", sym, 1e-10))

    z, wz = gauss_legendre(0.0, 1.0, 200)
    ck = max(_ck_defect(iv, t, s, z, wz, xs, xs) for t, s in ((0.05, 0.05), (0.1, 0.3), (0.02, 0.5)))
    zh, wh = gauss_legendre(0.0, 30.0, 400)
    ck = max(ck, _ck_defect(hl, 0.2, 0.3, zh, wh, 4 * xs, 4 * xs))
    out.append(SelfTestResult("Chapman-Kolmogorov", ck, 1e-6))

    # composite rule fine enough for the t = 1e-3 Gaussian
    u, wu = np.polynomial.legendre.leggauss(8)
    def panels(b, n):
        e = np.linspace(0.0, b, n + 1)
        h = 0.5 * np.diff(e)
        return ((e[:-1] + h)[:, None] + h[:, None] * u).ravel(), (h[:, None] * wu).ravel()

    zi, wi = panels(1.0, 200)
    zl, wl = panels(30.0, 3000)
    mass = 0.0
    for t in (1e-3, 1e-2, 0.1, 1.0):
        mass = max(mass, float(np.max(heat_kernel(iv, t, xs[:, None], zi[None, :]) @ wi)))
        mass = max(mass, float(np.max(heat_kernel(hl, t, 4 * xs[:, None], zl[None, :]) @ wl)))
    out.append(SelfTestResult("sub-Markov mass - 1", mass - 1.0, 1e-8))

    for dom in (iv, hl):
        for n, alpha in ((0, 0), (0, 1), (1, 0)):
            fit = check_gaussian_bound(dom, n=n, alpha=alpha)
            name = f"Gaussian bound {type(dom).__name__} n={n} |alpha|={alpha} (K1={fit.K1:.4g}, K2={fit.K2:g})"
            out.append(SelfTestResult(name, 0.0 if fit.ok else math.inf, 0.0))
    return out
