"""Pointwise solution fields driven by boundary noise, exact variances and pathwise bounds.

Every Gaussian noise is a finite sum of independent modes.  A field at the
points ``x`` is therefore a linear map of the mode coefficients (elliptic) or
of the mode increments (parabolic); the map is computed once as a *mode
pairing matrix* of shape ``(P, K)`` and reused across Monte Carlo draws.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .domains import (
    HalfLine,
    HalfSpace,
    Interval,
    TimeGrid,
    UnitBall,
    boundary_quadrature,
    gauss_legendre,
    interior_quadrature,
    log_gauss_legendre,
)
from .errors import ConfigurationError, DomainError, UsageError
from .kernels import (
    green_normal_derivative,
    halfspace_fourier_normal_derivative,
    halfspace_green_fourier_normal_derivative,
    heat_kernel,
    heat_kernel_normal_derivative,
    heat_normal_derivative_time_integral,
)
from .noise import (
    CylFractionalWiener,
    HomogeneousWiener,
    PoissonMeasure,
    SignedMeasureSeries,
    WhiteNoise,
    basis_matrix,
    path_increments,
)

__all__ = [
    "FieldEstimate",
    "as_points",
    "elliptic_mode_matrix",
    "parabolic_mode_matrix",
    "elliptic_field",
    "parabolic_field_v",
    "ConvolutionPlan",
    "mild_solution",
    "analytic_variance_elliptic",
    "analytic_variance_parabolic",
    "homogeneous_parabolic_quadrature",
    "levy_second_moment",
    "levy_exact_moment",
    "levy_moment_bound",
    "convolve",
    "young_bound",
    "young_I_alpha",
    "young_Lambda_alpha",
    "running_weights",
    "running_mild_solution",
    "SUPPORTED",
]

# (domain kind, family) pairs with an implemented field
SUPPORTED = {
    "interval": ("white", "cylindrical", "signed-measures", "poisson"),
    "halfline": ("white", "cylindrical", "signed-measures", "poisson"),
    "ball": ("white", "cylindrical", "signed-measures", "poisson"),
    "halfspace": ("white", "cylindrical", "signed-measures", "poisson", "homogeneous"),
}


@dataclass
class FieldEstimate:
    """Monte Carlo estimate of a pointwise field statistic."""

    x: object
    mean: float
    second_moment: float
    stderr: float
    N: int
    t: float | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")


def _kind(domain):
    return {Interval: "interval", HalfLine: "halfline", UnitBall: "ball", HalfSpace: "halfspace"}[type(domain)]


def _check_supported(domain, spec):
    fam = spec.family
    if fam not in SUPPORTED[_kind(domain)]:
        matrix = "; ".join(f"{k}: {', '.join(v)}" for k, v in SUPPORTED.items())
        raise ConfigurationError(f"{fam} noise is not supported on {domain}. Supported: {matrix}")


def as_points(domain, x):
    """Reshape ``x`` to a flat array of points, returning it with the output shape."""
    x = np.asarray(x, dtype=float)
    if domain.dimension() == 1:
        return x.reshape(-1), x.shape
    return x.reshape(-1, domain.dimension()), x.shape[:-1]


def _pair(domain, pts, nodes):
    """Broadcast interior points ``(P, ...)`` against boundary nodes ``(n, ...)``."""
    if domain.dimension() == 1:
        return pts[:, None], np.asarray(nodes, float)[None, :]
    return pts[:, None, :], np.asarray(nodes, float)[None, :, :]


def _mode_matrix(domain, spec, kernel):
    """Mode pairings ``(P, K)`` for series families; ``kernel(nodes) -> (P, n)``."""
    if isinstance(spec, (WhiteNoise, CylFractionalWiener)):
        q = spec.quadrature
        return (kernel(q.nodes) * q.weights) @ basis_matrix(spec).T
    if isinstance(spec, SignedMeasureSeries):
        return np.column_stack([kernel(mu.nodes) @ mu.masses for mu in spec.measures])
    raise UsageError(f"{spec.family} noise has no mode pairing of this kind")


def _homogeneous_modes(spec, F):
    """Real mode pairings from complex Fourier values ``F`` of shape ``(P, n_modes)``."""
    _, amp, kind = spec.modes()
    return amp * np.where(kind == 2, F.imag, F.real)


def elliptic_mode_matrix(domain, cfg, spec, x):
    """Pairings of ``dG/dn(x, .)`` (Green kernel) with every noise mode, shape ``(P, K)``."""
    _check_supported(domain, spec)
    pts, _ = as_points(domain, x)
    if isinstance(spec, HomogeneousWiener):
        eta = spec.modes()[0]
        F = halfspace_green_fourier_normal_derivative(cfg, pts[:, None, :], eta[None, :, :])
        return _homogeneous_modes(spec, F)
    return _mode_matrix(domain, spec, lambda y: green_normal_derivative(domain, cfg, *_pair(domain, pts, y)))


def parabolic_mode_matrix(domain, spec, t, x, form="direct"):
    """Pairings of ``dG/dn(t, x, .)`` (heat kernel) with every noise mode, shape ``(P, K)``."""
    _check_supported(domain, spec)
    pts, _ = as_points(domain, x)
    if isinstance(spec, HomogeneousWiener):
        eta = spec.modes()[0]
        F = halfspace_fourier_normal_derivative(t, pts[:, None, :], eta[None, :, :], form=form)
        return _homogeneous_modes(spec, F)
    return _mode_matrix(domain, spec, lambda y: heat_kernel_normal_derivative(domain, t, *_pair(domain, pts, y)))


def _poisson_field(domain, spec, realization, kernel):
    times, idx, marks = realization.points
    pts_vals = kernel(spec.nodes)  # (P, n_nodes)
    return pts_vals[:, idx] @ marks if len(idx) else np.zeros(pts_vals.shape[0])


def elliptic_field(domain, cfg, realization, x):
    """``u(x) = (gamma, dG/dn(x, .))`` for one elliptic noise draw (or a batch of coefficient draws)."""
    spec = realization.spec
    _check_supported(domain, spec)
    pts, shape = as_points(domain, x)
    if isinstance(spec, PoissonMeasure):
        u = _poisson_field(
            domain, spec, realization, lambda y: green_normal_derivative(domain, cfg, *_pair(domain, pts, y))
        )
        return u.reshape(shape)
    A = elliptic_mode_matrix(domain, cfg, spec, pts)
    c = np.asarray(realization.coefficients)
    u = c @ A.T
    return u.reshape(c.shape[:-1] + shape)


def parabolic_field_v(domain, realization, t, x, form="direct"):
    """``v(t, x) = (gamma, dG/dn(t, x, .))`` for a frozen boundary snapshot ``gamma``."""
    if np.any(np.asarray(t) <= 0):
        raise DomainError("t must be positive")
    spec = realization.spec
    pts, shape = as_points(domain, x)
    if isinstance(spec, PoissonMeasure):
        u = _poisson_field(
            domain, spec, realization, lambda y: heat_kernel_normal_derivative(domain, t, *_pair(domain, pts, y))
        )
        return u.reshape(shape)
    A = parabolic_mode_matrix(domain, spec, t, pts, form=form)
    c = np.asarray(realization.coefficients)
    return (c @ A.T).reshape(c.shape[:-1] + shape)


# ---------------------------------------------------------------------------
# stochastic convolution

RULES = ("ito_left_point", "young_riemann_stieltjes", "young_cell_average")


@dataclass(frozen=True, eq=False)
class ConvolutionPlan:
    """Cached kernel weights for ``u(t, x) = sum_j sum_k w[j, p, k] dW_k(s_j)``.

    ``weights`` has shape ``(n_steps, P, K)``.  ``rule`` selects where the
    kernel ``dG/dn(t - s, x, .)`` is sampled on each cell ``[s_{j-1}, s_j]``:
    the left point (Ito), the midpoint (Riemann--Stieltjes) or the cell
    average computed from the exact time antiderivative.

    ``last_cell_share`` is the fraction of the kernel's time integral carried
    by the final cell, the error cap for the singular end of the convolution.
    """

    domain: object
    spec: object
    grid: TimeGrid
    points: np.ndarray
    rule: str
    weights: np.ndarray
    last_cell_share: float | None = None

    @property
    def t(self):
        return self.grid.horizon

    @classmethod
    def build(cls, domain, spec, grid, x, rule=None, refine=True, cap=1e-3, form="direct"):
        """Precompute weights for the points ``x`` at time ``grid.horizon``.

        With ``refine=True`` the last cell is split geometrically while it
        carries more than ``cap`` of the kernel's time integral (where that
        integral is available in closed form).
        """
        H = getattr(spec, "H", 0.5)
        if rule is None:
            rule = "ito_left_point" if H == 0.5 else "young_riemann_stieltjes"
        _check_rule(rule, H)
        pts, _ = as_points(domain, x)
        share = _last_cell_share(domain, spec, grid, pts)
        while refine and share is not None and share > cap:
            s = grid.with_origin
            last = s[-1] - s[-2]
            extra = s[-1] - last * 0.5 ** np.arange(1, 5)
            grid = TimeGrid(np.concatenate([grid.nodes[:-1], extra, [s[-1]]]), grid.scheme)
            share = _last_cell_share(domain, spec, grid, pts)
        t = grid.horizon
        s = grid.with_origin
        if rule == "ito_left_point":
            taus = t - s[:-1]
            W = np.stack([parabolic_mode_matrix(domain, spec, tau, pts, form) for tau in taus])
        elif rule == "young_riemann_stieltjes":
            taus = t - 0.5 * (s[:-1] + s[1:])
            W = np.stack([parabolic_mode_matrix(domain, spec, tau, pts, form) for tau in taus])
        else:
            if isinstance(spec, HomogeneousWiener):
                raise ConfigurationError("cell averages are not available for homogeneous noise")
            A = [_time_integral_modes(domain, spec, tau, pts) for tau in t - s]
            W = np.stack([(A[j] - A[j + 1]) / (s[j + 1] - s[j]) for j in range(len(s) - 1)])
        W.setflags(write=False)
        return cls(domain, spec, grid, pts, rule, W, share)


def _check_rule(rule, H):
    if rule not in RULES:
        raise UsageError(f"rule must be one of {RULES}")
    if H == 0.5 and rule != "ito_left_point":
        raise UsageError("Brownian noise (H = 1/2) needs the Ito left-point rule")
    if H != 0.5 and rule == "ito_left_point":
        raise UsageError("fractional noise (H != 1/2) needs a Young rule")


def _time_integral_modes(domain, spec, tau, pts):
    if tau <= 0:
        return np.zeros((len(pts), spec.K))
    return _mode_matrix(
        domain, spec, lambda y: heat_normal_derivative_time_integral(domain, tau, *_pair(domain, pts, y))
    )


def _last_cell_share(domain, spec, grid, pts):
    if not isinstance(domain, (Interval, HalfLine, HalfSpace)) or isinstance(spec, HomogeneousWiener):
        return None
    s = grid.with_origin
    total = np.abs(_time_integral_modes(domain, spec, grid.horizon, pts))
    last = np.abs(_time_integral_modes(domain, spec, s[-1] - s[-2], pts))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(total > 0, last / total, 0.0)
    return float(np.max(ratio))


def convolve(plan, increments):
    """Apply a plan to increments of shape ``(..., K, n_steps)``; returns ``(..., P)``."""
    return np.einsum("...kj,jpk->...p", increments, plan.weights)


def mild_solution(domain, cfg, xi, u0, t, x, plan=None):
    """Mild solution ``u(t, x)`` of the heat equation with boundary noise ``xi`` and initial value ``u0``.

    ``xi`` is a :class:`NoiseRealization`.  Series and homogeneous noises use
    the increment sum of ``plan`` (the path grid must be the plan grid);
    Poisson noise is summed exactly over its points.  ``u0`` is a callable
    (or ``None``) integrated against the heat kernel by interior quadrature.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    pts, shape = as_points(domain, x)
    spec = xi.spec
    if isinstance(spec, PoissonMeasure):
        times, idx, marks = xi.points
        if times is None:
            raise UsageError("the parabolic field needs a time-indexed Poisson realization")
        u = np.zeros(len(pts))
        active = times < t
        for s, i, mk in zip(times[active], idx[active], marks[active]):
            y = spec.nodes[i]
            if domain.dimension() == 1:
                u += mk * heat_kernel_normal_derivative(domain, t - s, pts, y)
            else:
                u += mk * heat_kernel_normal_derivative(domain, t - s, pts, y[None, :])
        conv = u
    elif xi.paths is None:
        conv = np.zeros(len(pts))
    else:
        if plan is None:
            raise UsageError("a ConvolutionPlan is required for path-driven noise")
        _check_rule(plan.rule, getattr(spec, "H", 0.5))
        if abs(plan.t - t) > 1e-12 or len(plan.grid) != xi.paths.shape[-1]:
            raise UsageError("plan grid and time do not match the realization")
        conv = convolve(plan, path_increments(xi.paths))
    if u0 is not None:
        conv = conv + _initial_term(domain, cfg, u0, t, pts)
    return conv.reshape(conv.shape[:-1] + shape)


def _initial_term(domain, cfg, u0, t, pts, n=200):
    y, w = interior_quadrature(domain, n)
    if domain.dimension() == 1:
        G = heat_kernel(domain, t, pts[:, None], y[None, :], terms=cfg.series_terms)
    else:
        G = heat_kernel(domain, t, pts[:, None, :], y[None, :, :])
    return G @ (w * u0(y))


# ---------------------------------------------------------------------------
# exact second moments


def _refined_circle(q, r_max):
    """Uniform circle rule with enough nodes for kernels at radius ``r_max``, same total mass."""
    from .dirichlet import _disk_nodes_needed, _is_uniform_circle

    if not _is_uniform_circle(q):
        return q
    n = max(len(q), _disk_nodes_needed(r_max))
    if n == len(q):
        return q
    fine = boundary_quadrature(UnitBall(2), n)
    return type(q)(fine.nodes, fine.weights * (q.mass / fine.mass))


def analytic_variance_elliptic(domain, cfg, spec, x, truncated=False):
    """``E u(x)^2`` for Gaussian boundary noise.

    White noise: ``int (dG/dn)^2 dnu`` over the boundary quadrature
    (``truncated=True`` gives the variance of the ``K``-mode truncation,
    ``sum_k (int dG/dn e_k dnu)^2``).  Signed measures:
    ``sum_k (int dG/dn dnu_k)^2``.  Homogeneous: ``sum_j mu_j |F dG/dn(eta_j)|^2``.
    """
    if isinstance(spec, PoissonMeasure):
        raise UsageError("Poisson noise is not Gaussian; use levy_moment_bound or levy_second_moment")
    _check_supported(domain, spec)
    pts, shape = as_points(domain, x)
    if isinstance(spec, (WhiteNoise, CylFractionalWiener)) and not truncated:
        q = spec.quadrature
        if isinstance(domain, UnitBall) and domain.d == 2:
            q = _refined_circle(q, float(np.max(np.linalg.norm(pts, axis=-1))))
        k = green_normal_derivative(domain, cfg, *_pair(domain, pts, q.nodes))
        return (k**2 @ q.weights).reshape(shape)
    if isinstance(spec, HomogeneousWiener):
        eta = spec.atoms
        F = halfspace_green_fourier_normal_derivative(cfg, pts[:, None, :], eta[None, :, :])
        return (np.abs(F) ** 2 @ spec.masses).reshape(shape)
    A = elliptic_mode_matrix(domain, cfg, spec, pts)
    return np.sum(A**2, axis=-1).reshape(shape)


def _time_rule(t, dist, n=16):
    # below dist^2/200 the squared kernel carries a factor exp(-100)
    lo = min(dist**2 / 200.0, t * 1e-3)
    return log_gauss_legendre(lo, t, n)


def analytic_variance_parabolic(domain, spec, t, x, truncated=False, display="printed"):
    """``E u(t, x)^2`` for Brownian (``H = 1/2``) boundary noise.

    White noise: ``int_0^t int (dG/dn(s, x, y))^2 nu(dy) ds`` (``truncated``
    as in :func:`analytic_variance_elliptic`).  Signed measures:
    ``sum_k int_0^t (int dG/dn dnu_k)^2 ds``.  Homogeneous noise on the half
    space: ``int_0^t x_0^2/(4 pi s^3) exp(-x_0^2/2s) sum_j mu_j exp(-g(s)|eta_j|^2) ds``
    with ``g(s) = (2s)^m`` (``display="printed"``) or ``2s`` (``"direct"``).
    The time integral uses a composite Gauss--Legendre rule in ``log s``.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    if isinstance(spec, PoissonMeasure):
        raise UsageError("Poisson noise is not Gaussian; use levy_second_moment")
    if getattr(spec, "H", 0.5) != 0.5:
        raise UsageError("exact variances are available for H = 1/2 only")
    pts, shape = as_points(domain, x)
    dist = float(np.min(domain.dist(pts)))
    s, ws = _time_rule(t, dist)
    if isinstance(spec, HomogeneousWiener):
        x0 = pts[:, 0]
        m = spec.m
        e2 = np.sum(spec.atoms**2, axis=-1)
        g = (2.0 * s) ** m if display == "printed" else 2.0 * s
        spectral = np.exp(-g[:, None] * e2[None, :]) @ spec.masses  # (ns,)
        amp = x0[:, None] ** 2 / (4.0 * np.pi * s[None, :] ** 3) * np.exp(-x0[:, None] ** 2 / (2.0 * s[None, :]))
        return (amp * spectral) @ ws
    out = np.zeros(len(pts))
    for si, wi in zip(s, ws):
        if isinstance(spec, (WhiteNoise, CylFractionalWiener)) and not truncated:
            q = spec.quadrature
            k = heat_kernel_normal_derivative(domain, si, *_pair(domain, pts, q.nodes))
            out += wi * (k**2 @ q.weights)
        else:
            A = parabolic_mode_matrix(domain, spec, si, pts)
            out += wi * np.sum(A**2, axis=-1)
    return out.reshape(shape)


def homogeneous_parabolic_quadrature(spec, t, x, form="printed"):
    """Generic ``int_0^t sum_j mu_j |F dG/dn(s, x, eta_j)|^2 ds`` by time quadrature."""
    x = np.atleast_2d(np.asarray(x, float))
    s, ws = _time_rule(t, float(np.min(x[:, 0])))
    F = halfspace_fourier_normal_derivative(s[:, None, None], x[None, :, None, :], spec.atoms[None, None, :, :], form)
    return np.einsum("s,spj,j->p", ws, np.abs(F) ** 2, spec.masses)


# ---------------------------------------------------------------------------
# Poisson (Levy) noise


def levy_second_moment(f, masses):
    """Exact ``E (int f dpi)^2 = int f^2 dnu + (int f dnu)^2`` for a Poisson measure with atomic intensity."""
    f = np.asarray(f, float)
    masses = np.asarray(masses, float)
    return f**2 @ masses + (f @ masses) ** 2


def _levy_terms(domain, cfg, spec, x, t):
    """``(int f^2 dnu, int f dnu, int |f| dnu)`` with ``f`` the (time-integrated) kernel times rho."""
    pts, shape = as_points(domain, x)
    rho = spec.node_marks
    if t is None:
        f = green_normal_derivative(domain, cfg, *_pair(domain, pts, spec.nodes)) * rho
        return f**2 @ spec.masses, f @ spec.masses, np.abs(f) @ spec.masses, shape
    dist = float(np.min(domain.dist(pts)))
    s, ws = _time_rule(t, dist)
    sq = np.zeros(len(pts))
    for si, wi in zip(s, ws):
        k = heat_kernel_normal_derivative(domain, si, *_pair(domain, pts, spec.nodes))
        sq += wi * ((k * rho) ** 2 @ spec.masses)
    if isinstance(domain, UnitBall):
        lin = np.zeros(len(pts))
        alin = np.zeros(len(pts))
        for si, wi in zip(s, ws):
            k = heat_kernel_normal_derivative(domain, si, *_pair(domain, pts, spec.nodes)) * rho
            lin += wi * (k @ spec.masses)
            alin += wi * (np.abs(k) @ spec.masses)
    else:
        k = heat_normal_derivative_time_integral(domain, t, *_pair(domain, pts, spec.nodes)) * rho
        lin, alin = k @ spec.masses, np.abs(k) @ spec.masses
    return sq, lin, alin, shape


def levy_moment_bound(domain, cfg, spec, x, t=None):
    """``2 [int f^2 dnu + (int |f| dnu)^2]`` with ``f = dG/dn(x, .) rho`` (elliptic, ``t=None``)
    or ``f(s, y) = dG/dn(t - s, x, y) rho(y)`` under ``ds nu(dy)`` on ``(0, t]`` (parabolic)."""
    if not isinstance(spec, PoissonMeasure):
        raise UsageError("levy_moment_bound needs a PoissonMeasure spec")
    sq, _, alin, shape = _levy_terms(domain, cfg, spec, x, t)
    return (2.0 * (sq + alin**2)).reshape(shape)


def levy_exact_moment(domain, cfg, spec, x, t=None):
    """Exact ``E u^2`` for Poisson boundary noise (same integrals, no factor 2, signed mean)."""
    sq, lin, _, shape = _levy_terms(domain, cfg, spec, x, t)
    return (sq + lin**2).reshape(shape)


# ---------------------------------------------------------------------------
# Young integral bound


def _as_callable(f, nodes):
    if callable(f):
        return f
    vals = np.asarray(f, float)
    return lambda s: np.interp(s, nodes, vals)


def young_I_alpha(f, t, alpha, n=64, nodes=None):
    """``I_alpha(f) = int_0^t (|f(r)| r^-alpha + alpha int_0^r |f(r) - f(q)| (r - q)^{-alpha-1} dq) dr``.

    Both singular weights are integrated with Gauss--Jacobi rules; ``f`` is a
    callable or values on ``nodes`` (linearly interpolated).
    """
    f = _as_callable(f, nodes)
    u, w = special.roots_jacobi(n, 0.0, -alpha)  # weight (1 + u)^-alpha
    r = 0.5 * t * (1.0 + u)
    first = (0.5 * t) ** (1.0 - alpha) * np.sum(w * np.abs(f(r)))
    rr, wr = gauss_legendre(0.0, t, n)
    # inner integral over v = r - q in (0, r) with weight v^-alpha
    v = 0.5 * rr[:, None] * (1.0 + u[None, :])
    fr = f(rr)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.abs(fr - f(rr[:, None] - v)) / v
    inner = (0.5 * rr) ** (1.0 - alpha) * np.sum(w * np.nan_to_num(g), axis=1)
    return float(first + alpha * np.sum(wr * inner))


def young_Lambda_alpha(nodes, path, alpha):
    """``Lambda_alpha`` of the piecewise-linear interpolant of ``path`` on ``nodes`` (which start at 0).

    ``sup_{s<t} |(g(s) - g(t))/(t - s)^{1-alpha} + (1 - alpha) int_s^t (g(s) - g(r))/(r - s)^{2-alpha} dr|``
    divided by ``Gamma(1 - alpha) Gamma(alpha)``; the integral is exact for
    piecewise-linear ``g``.  The supremum runs over grid pairs.
    """
    s = np.asarray(nodes, float)
    g = np.asarray(path, float)
    n = len(s)
    slope = np.diff(g) / np.diff(s)
    best = 0.0
    a1 = alpha - 1.0
    for i in range(n - 1):
        U = s[i:] - s[i]  # U_0 = 0
        c = slope[i:]
        A = g[i] - g[i:-1] + c * U[:-1]
        lo, hi = U[:-1], U[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            pow_lo = np.where(lo > 0, lo**a1, 0.0)
        term_a = np.where(lo > 0, A * (hi**a1 - pow_lo) / a1, 0.0)
        term_c = -c * (hi**alpha - lo**alpha) / alpha
        J = np.cumsum(term_a + term_c)
        vals = (g[i] - g[i + 1 :]) / U[1:] ** (1.0 - alpha) + (1.0 - alpha) * J
        best = max(best, float(np.max(np.abs(vals))))
    return best / (special.gamma(1.0 - alpha) * special.gamma(alpha))


def young_bound(f, nodes, path, alpha, H=None, n=64):
    """Pathwise bound ``|int_0^t f dW^H| <= Lambda_alpha(W^H) I_alpha(f)``.

    Parameters
    ----------
    f : callable on ``[0, t]`` or values on ``nodes``.
    nodes : grid including the origin; ``t = nodes[-1]``.
    path : ``W^H`` on ``nodes`` (``path[0] = 0``).
    alpha : in ``(1 - H, 1/2)`` when ``H`` is given.

    Returns
    -------
    (bound, Lambda_alpha, I_alpha)
    """
    if not 0.0 < alpha < 0.5 or (H is not None and not alpha > 1.0 - H):
        raise UsageError(f"alpha must lie in (1 - H, 1/2), got {alpha}")
    nodes = np.asarray(nodes, float)
    I = young_I_alpha(f, nodes[-1], alpha, n=n, nodes=nodes)
    if I == 0.0:
        return 0.0, young_Lambda_alpha(nodes, path, alpha), 0.0
    lam = young_Lambda_alpha(nodes, path, alpha)
    return lam * I, lam, I


def running_weights(domain, spec, grid, x):
    """Cell-averaged kernel weights ``c[p, k, m]`` on a uniform grid.

    ``u(s_i, x_p) = sum_k sum_{j <= i} c[p, k, i - j] dW_k(cell j)``; the cell
    averages use the exact time antiderivative, so kernels much narrower than
    the time step are integrated without loss.
    """
    s = grid.with_origin
    h = np.diff(s)
    if not np.allclose(h, h[0], rtol=1e-10):
        raise ConfigurationError("running convolutions need a uniform grid")
    pts, _ = as_points(domain, x)
    A = np.stack([_time_integral_modes(domain, spec, tau, pts) for tau in h[0] * np.arange(len(s))])
    c = (A[1:] - A[:-1]) / h[0]  # (n, P, K)
    return np.transpose(c, (1, 2, 0))


def running_mild_solution(weights, increments):
    """``u(s_i, x)`` for all grid times: causal convolution of increments ``(..., K, n)`` with ``weights``.

    Returns an array of shape ``(..., P, n)``.
    """
    from scipy.signal import fftconvolve

    n = increments.shape[-1]
    inc = increments[..., None, :, :]  # (..., 1, K, n)
    w = weights.reshape((1,) * (inc.ndim - weights.ndim) + weights.shape)
    full = fftconvolve(inc, w, axes=-1)[..., :n]
    return full.sum(axis=-2)
