"""Dirichlet maps, the weak-solution residual and one-dimensional distributional Laplacians.

The Dirichlet map sends boundary data ``gamma`` to the solution of
``Laplacian u = lam u`` in the domain with ``u = gamma`` on the boundary.  It
is realized as the boundary pairing ``u(x) = sum_i w_i gamma(y_i) dG/dn(x, y_i)``
with the inward normal derivative of the Green kernel, and in closed form
where one is available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import signal, special

from .domains import (
    BoundaryQuadrature,
    HalfLine,
    Interval,
    UnitBall,
    boundary_quadrature,
    gauss_legendre,
    interior_quadrature,
)
from .errors import ConfigurationError, UsageError
from .kernels import check_lambda, green_normal_derivative

__all__ = [
    "BoundaryData",
    "dirichlet_map",
    "TestFunction",
    "test_functions",
    "weak_residual",
    "distributional_laplacian_check",
]


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Boundary values aligned one-to-one with the nodes of a boundary quadrature.

    ``values`` has the node axis first; extra trailing axes hold independent
    data sets (for example Monte Carlo draws).
    """

    quadrature: BoundaryQuadrature
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape[:1] != (len(self.quadrature),):
            raise ConfigurationError(
                f"{values.shape[0] if values.ndim else 0} values for {len(self.quadrature)} nodes"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def interval(cls, domain, gamma0, gamma1):
        return cls(boundary_quadrature(domain, 2), np.array([gamma0, gamma1], dtype=float))

    @classmethod
    def halfline(cls, gamma):
        return cls(boundary_quadrature(HalfLine(), 1), np.array([gamma], dtype=float))

    @classmethod
    def from_function(cls, domain, f, n=256, radius=None):
        q = boundary_quadrature(domain, n, radius)
        return cls(q, np.asarray(f(q.nodes), dtype=float))

    def __add__(self, other):
        return BoundaryData(self.quadrature, self.values + other.values)

    def __rmul__(self, a):
        return BoundaryData(self.quadrature, a * self.values)


def _is_uniform_circle(q):
    n = len(q)
    if q.nodes.ndim != 2 or q.nodes.shape[1] != 2 or n < 3:
        return False
    theta = np.arctan2(q.nodes[:, 1], q.nodes[:, 0])
    expected = 2.0 * np.pi * np.arange(n) / n
    return np.allclose(np.mod(theta - expected + np.pi, 2 * np.pi) - np.pi, 0.0, atol=1e-12) and np.allclose(
        q.weights, 2.0 * np.pi / n, rtol=1e-12
    )


def _disk_nodes_needed(r):
    # the Poisson kernel at radius r has angular width ~(1 - r); 40 nodes per width
    return int(min(2**17, max(64, 2 ** math.ceil(math.log2(40.0 / (1.0 - r))))))


def _disk_kernel_map(domain, cfg, gamma, x):
    """Boundary pairing on the circle with the data upsampled (band-limited) as needed."""
    x = np.asarray(x, dtype=float)
    pts = x.reshape(-1, 2)
    out = np.empty((len(pts),) + gamma.values.shape[1:])
    n0 = len(gamma.quadrature)
    radii = np.linalg.norm(pts, axis=1)
    for i, (p, r) in enumerate(zip(pts, radii)):
        n = max(n0, _disk_nodes_needed(r))
        if n > n0:
            vals = signal.resample(gamma.values, n, axis=0)
            theta = 2.0 * np.pi * np.arange(n) / n
            nodes = np.column_stack([np.cos(theta), np.sin(theta)])
            w = np.full(n, 2.0 * np.pi / n)
        else:
            vals, nodes, w = gamma.values, gamma.quadrature.nodes, gamma.quadrature.weights
        k = green_normal_derivative(domain, cfg, p[None, :], nodes)
        out[i] = np.tensordot(w * k, vals, axes=(0, 0))
    return out.reshape(x.shape[:-1] + gamma.values.shape[1:])


def _disk_spectral_map(cfg, gamma, x):
    """Fourier multiplier ``r^|n|`` (``lam = 0``) or ``I_n(sqrt(lam) r) / I_n(sqrt(lam))``."""
    n = len(gamma.quadrature)
    coeffs = np.fft.fft(gamma.values, axis=0) / n
    freqs = np.fft.fftfreq(n, 1.0 / n)
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[..., 0], x[..., 1])[..., None]
    th = np.arctan2(x[..., 1], x[..., 0])[..., None]
    order = np.abs(freqs)
    if cfg.lam == 0:
        mult = r**order
    else:
        sq = math.sqrt(cfg.lam)
        mult = special.ive(order, sq * r) / special.ive(order, sq) * np.exp(sq * (r - 1.0))
    # the real part keeps the Nyquist term as a cosine
    return np.real(np.tensordot(mult * np.exp(1j * freqs * th), coeffs, axes=(-1, 0)))


def dirichlet_map(domain, cfg, gamma, x, method="auto"):
    """Evaluate ``D gamma(x)``.

    Parameters
    ----------
    domain, cfg : domain and kernel configuration (``cfg.lam`` is the shift).
    gamma : BoundaryData
    x : interior point(s).
    method : ``"closed"`` uses the explicit formulas on the interval and half
        line; ``"kernel"`` evaluates the boundary pairing with the Green
        normal derivative; ``"spectral"`` (unit disk, uniform circle data)
        applies the Fourier multiplier of the harmonic (or Helmholtz)
        extension; ``"auto"`` picks ``closed`` in one dimension and
        ``kernel`` otherwise.
    """
    check_lambda(domain, cfg)
    x = np.asarray(x, dtype=float)
    one_d = isinstance(domain, (Interval, HalfLine))
    if method == "auto":
        method = "closed" if one_d else "kernel"
    if method == "closed":
        if isinstance(domain, Interval):
            g0, g1 = gamma.values[0], gamma.values[1]
            xr = np.expand_dims(x - domain.a, tuple(range(x.ndim, x.ndim + gamma.values.ndim - 1)))
            if cfg.lam == 0:
                return g0 + (g1 - g0) * xr / domain.length
            s = math.sqrt(cfg.lam)
            L = domain.length
            return (g0 * np.sinh(s * (L - xr)) + g1 * np.sinh(s * xr)) / np.sinh(s * L)
        if isinstance(domain, HalfLine):
            xr = np.expand_dims(x, tuple(range(x.ndim, x.ndim + gamma.values.ndim - 1)))
            return gamma.values[0] * np.exp(-math.sqrt(cfg.lam) * xr)
        raise ConfigurationError(f"no closed form for {domain}; use method='kernel'")
    if method == "spectral":
        if not (isinstance(domain, UnitBall) and domain.d == 2 and _is_uniform_circle(gamma.quadrature)):
            raise ConfigurationError("the spectral map needs uniform data on the unit circle")
        return _disk_spectral_map(cfg, gamma, x)
    if method != "kernel":
        raise ConfigurationError(f"unknown method {method!r}")
    if isinstance(domain, UnitBall) and domain.d == 2 and _is_uniform_circle(gamma.quadrature):
        return _disk_kernel_map(domain, cfg, gamma, x)
    q = gamma.quadrature
    if one_d:
        k = green_normal_derivative(domain, cfg, x[..., None], q.nodes)
    else:
        k = green_normal_derivative(domain, cfg, x[..., None, :], q.nodes)
    return np.tensordot(k * q.weights, gamma.values, axes=(-1, 0))


# ---------------------------------------------------------------------------
# weak formulation


@dataclass(frozen=True)
class TestFunction:
    """Test function vanishing on the boundary, with its Laplacian and inward normal derivative."""

    __test__ = False  # not a pytest class

    name: str
    f: Callable
    laplacian: Callable
    normal_derivative: Callable


def _interval_tests(domain):
    a, L = domain.a, domain.length
    out = []
    for k in (1, 2, 3):
        w = k * np.pi / L
        out.append(
            TestFunction(
                f"sin({k} pi (x-a)/L)",
                lambda x, w=w: np.sin(w * (x - a)),
                lambda x, w=w: -(w**2) * np.sin(w * (x - a)),
                # inward derivative: +psi'(a) at a, -psi'(b) at b
                lambda y, w=w, k=k: np.where(np.isclose(y, a), w, -w * (-1.0) ** k),
            )
        )
    out.append(
        TestFunction(
            "(x-a)(b-x)",
            lambda x: (x - a) * (domain.b - x),
            lambda x: -2.0 + 0.0 * x,
            lambda y: np.full_like(np.asarray(y, float), L),
        )
    )
    out.append(
        TestFunction(
            "(x-a)^2(b-x)",
            lambda x: (x - a) ** 2 * (domain.b - x),
            lambda x: 2.0 * (domain.b - x) - 4.0 * (x - a),
            lambda y: np.where(np.isclose(y, a), 0.0, L**2),
        )
    )
    return out


def _disk_tests():
    # (1 - |x|^2) p with p harmonic of degree k: Laplacian -4 (k + 1) p, inward derivative 2 p
    harmonics = [
        ("1", 0, lambda x: np.ones(x.shape[:-1])),
        ("x", 1, lambda x: x[..., 0]),
        ("y", 1, lambda x: x[..., 1]),
        ("x^2-y^2", 2, lambda x: x[..., 0] ** 2 - x[..., 1] ** 2),
        ("xy", 2, lambda x: x[..., 0] * x[..., 1]),
        ("x^3-3xy^2", 3, lambda x: x[..., 0] ** 3 - 3 * x[..., 0] * x[..., 1] ** 2),
    ]
    out = []
    for name, k, p in harmonics:
        out.append(
            TestFunction(
                f"(1-|x|^2)({name})",
                lambda x, p=p: (1.0 - np.sum(x * x, axis=-1)) * p(x),
                lambda x, p=p, k=k: -4.0 * (k + 1) * p(x),
                lambda y, p=p: 2.0 * p(y),
            )
        )
    return out


def _halfline_tests():
    e = np.exp
    return [
        TestFunction("x e^-x", lambda x: x * e(-x), lambda x: (x - 2) * e(-x), lambda y: 1.0 + 0 * y),
        TestFunction(
            "x^2 e^-x", lambda x: x**2 * e(-x), lambda x: (x**2 - 4 * x + 2) * e(-x), lambda y: 0.0 * y
        ),
        TestFunction(
            "sin(x) e^-x", lambda x: np.sin(x) * e(-x), lambda x: -2 * np.cos(x) * e(-x), lambda y: 1.0 + 0 * y
        ),
    ]


def test_functions(domain):
    """Built-in test functions for the weak residual on ``domain``."""
    if isinstance(domain, Interval):
        return _interval_tests(domain)
    if isinstance(domain, UnitBall) and domain.d == 2:
        return _disk_tests()
    if isinstance(domain, HalfLine):
        return _halfline_tests()
    raise ConfigurationError(f"no test functions for {domain}")


test_functions.__test__ = False


def weak_residual(domain, cfg, gamma, psi, n_interior=200, method="auto"):
    """``|(u, Laplacian psi) + (gamma, dpsi/dn) - lam (u, psi)|`` with ``u = D gamma``.

    Interior pairings use :func:`interior_quadrature`; the boundary pairing
    uses the quadrature carried by ``gamma``.  On the unit disk ``u`` is
    evaluated with the spectral map by default (``method="auto"``).
    """
    q = gamma.quadrature
    if np.max(np.abs(psi.f(q.nodes))) > 1e-12:
        raise UsageError(f"test function {psi.name} does not vanish on the boundary")
    pts, w = interior_quadrature(domain, n_interior)
    if method == "auto" and isinstance(domain, UnitBall):
        method = "spectral" if _is_uniform_circle(q) else "kernel"
    u = dirichlet_map(domain, cfg, gamma, pts, method=method)
    interior = np.sum(w * u * (psi.laplacian(pts) - cfg.lam * psi.f(pts)))
    boundary = np.sum(q.weights * gamma.values * psi.normal_derivative(q.nodes))
    return float(abs(interior + boundary))


# ---------------------------------------------------------------------------
# distributional Laplacians in one dimension


_CASES = ("interval_psi1", "interval_psi2", "halfline_exp")


def _default_phi(case):
    if case.startswith("interval"):
        return (
            lambda x: np.sin(np.pi * x),
            lambda x: np.pi * np.cos(np.pi * x),
            lambda x: -(np.pi**2) * np.sin(np.pi * x),
        )
    return (lambda x: x * np.exp(-x), lambda x: (1 - x) * np.exp(-x), lambda x: (x - 2) * np.exp(-x))


def distributional_laplacian_check(case, phi=None, form="printed", n=200):
    """Compare ``int psi phi''`` with the claimed distributional pairing.

    Pairings use ``(delta'_a, phi) = -phi'(a)``.

    ``interval_psi1``: ``psi = 1`` on (0, 1), claimed ``delta'_0 - delta'_1``.
    ``interval_psi2``: ``psi = x`` on (0, 1), claimed ``-delta'_1``.
    ``halfline_exp``: ``psi = exp(-x)`` on (0, inf) with ``lam = 1``; the
    claimed value ``-delta'_0 + psi`` (``form="printed"``) pairs to
    ``phi'(0) + int exp(-x) phi``, whereas integrating by parts twice gives
    ``-phi'(0) + int exp(-x) phi``, i.e. ``delta'_0 + psi``
    (``form="corrected"``).

    Parameters
    ----------
    phi : tuple ``(phi, phi', phi'')`` of callables vanishing at the boundary;
        defaults to ``sin(pi x)`` on the interval and ``x exp(-x)`` on the
        half line.

    Returns
    -------
    (lhs, rhs)
    """
    if case not in _CASES:
        raise UsageError(f"case must be one of {_CASES}")
    if form not in ("printed", "corrected"):
        raise UsageError("form must be 'printed' or 'corrected'")
    f, d1, d2 = _default_phi(case) if phi is None else phi
    dp = lambda a: -d1(a)  # (delta'_a, phi)
    if case.startswith("interval"):
        if abs(f(0.0)) > 1e-12 or abs(f(1.0)) > 1e-12:
            raise UsageError("phi must vanish at 0 and 1")
        x, w = gauss_legendre(0.0, 1.0, n)
        if case == "interval_psi1":
            return float(np.sum(w * d2(x))), float(dp(0.0) - dp(1.0))
        return float(np.sum(w * x * d2(x))), float(-dp(1.0))
    if abs(f(0.0)) > 1e-12:
        raise UsageError("phi must vanish at 0")
    # Gauss-Laguerre handles the exp(-x) weight; integrands are exp(-x) * (x e^-x-type)
    x, w = special.roots_laguerre(n)
    lhs = float(np.sum(w * d2(x)))
    mass = float(np.sum(w * f(x)))
    sign = -1.0 if form == "printed" else 1.0
    return lhs, float(sign * dp(0.0) + mass)
