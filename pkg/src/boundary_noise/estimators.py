"""Monte Carlo aggregation, blow-up rate fits and the boundary blow-up proposition registry."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .domains import (
    HalfSpace,
    Interval,
    TimeGrid,
    UnitBall,
    boundary_quadrature,
    normal_probe_line,
)
from .errors import DomainError, MonteCarloError
from .fields import (
    ConvolutionPlan,
    FieldEstimate,
    _refined_circle,
    analytic_variance_elliptic,
    analytic_variance_parabolic,
    convolve,
    elliptic_mode_matrix,
    levy_exact_moment,
    running_mild_solution,
    running_weights,
)
from .kernels import KernelConfig
from .noise import (
    DiscreteMeasure,
    HomogeneousWiener,
    PoissonMeasure,
    SignedMeasureSeries,
    WhiteNoise,
    path_increments,
    sample_elliptic_coefficients,
    sample_noise_paths,
)

__all__ = [
    "DEFAULT_PROBES",
    "mc_second_moment",
    "RateReport",
    "fit_blowup",
    "check_bound",
    "check_7E1",
    "ItoCheck",
    "elliptic_ito_check",
    "parabolic_ito_check",
    "Proposition",
    "PROPOSITIONS",
    "coverage_lock",
    "run_proposition",
]

DEFAULT_PROBES = (0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001)


# ---------------------------------------------------------------------------
# Monte Carlo


def _block_moments(sampler, seed, block, size):
    x = np.asarray(sampler([seed, block], size), dtype=float)
    if not np.all(np.isfinite(x)):
        raise MonteCarloError(f"non-finite sample in block {block} (seed {seed})", seed=seed, block=block)
    return size, x.sum(0), (x**2).sum(0), (x**4).sum(0)


def mc_second_moment(sampler, N, seed, block_size=4096, workers=1, x=None, t=None):
    """Estimate mean and second moment of a field sampler.

    ``sampler(rng_seed, size)`` returns ``size`` draws (shape ``(size, ...)``);
    block ``b`` is drawn with ``rng_seed = [seed, b]`` so results do not
    depend on ``workers``.  Block sums are merged in block order.  The
    standard error of the second moment is ``sqrt((m4 - m2^2) / N)``.
    """
    if N < 100:
        raise ValueError("N must be at least 100")
    sizes = [min(block_size, N - b * block_size) for b in range(math.ceil(N / block_size))]
    jobs = [(b, s) for b, s in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _block_moments(sampler, seed, *j), jobs))
    else:
        parts = [_block_moments(sampler, seed, *j) for j in jobs]
    n, s1, s2, s4 = 0, 0.0, 0.0, 0.0
    for c, a, b, d in parts:
        n, s1, s2, s4 = n + c, s1 + a, s2 + b, s4 + d
    m2 = s2 / n
    var4 = np.maximum(s4 / n - m2**2, 0.0)
    return FieldEstimate(x=x, t=t, mean=s1 / n, second_moment=m2, stderr=np.sqrt(var4 / n), N=n)


# ---------------------------------------------------------------------------
# rate fits


@dataclass
class RateReport:
    """Log-log fit of ``values`` against ``distances`` and the bound-constant check."""

    distances: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    bound_constant: float = math.nan
    bound_kind: str = ""
    bound_rhs: np.ndarray | None = None
    ratios: np.ndarray | None = None
    stable: bool | None = None
    log_constant: float | None = None
    stderr: np.ndarray | None = None
    t: float | None = None
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return bool(self.stable)

    def summary(self):
        return {
            "bound_kind": self.bound_kind,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "bound_constant": self.bound_constant,
            "stable": self.stable,
            "log_constant": self.log_constant,
            "t": self.t,
            "notes": list(self.notes),
        }


def _log_bound(d):
    return (1.0 + np.maximum(np.log(1.0 / d), 0.0)) ** 2


def fit_blowup(distances, values, log_bound=False):
    """Least-squares line through ``(log dist, log value)``.

    Nonpositive values are dropped with a warning; at least four points must
    remain.  With ``log_bound=True`` the proportionality constant of
    ``value ~ c (1 + log+ (1/dist))^2`` is also reported.
    """
    d = np.asarray(distances, dtype=float)
    v = np.asarray(values, dtype=float)
    order = np.argsort(-d)
    d, v = d[order], v[order]
    if np.any(np.diff(d) >= 0):
        raise DomainError("distances must be distinct")
    keep = v > 0
    if not np.all(keep):
        warnings.warn(f"dropping {np.sum(~keep)} nonpositive values from the rate fit")
        d, v = d[keep], v[keep]
    if len(d) < 4:
        raise DomainError("a rate fit needs at least four positive values")
    ld, lv = np.log(d), np.log(v)
    if np.ptp(lv) == 0:
        slope, intercept, r2 = 0.0, float(lv[0]), 1.0
    else:
        res = stats.linregress(ld, lv)
        slope, intercept, r2 = float(res.slope), float(res.intercept), float(res.rvalue**2)
    rep = RateReport(d, v, slope, intercept, min(max(r2, 0.0), 1.0))
    if log_bound:
        b = _log_bound(d)
        rep.log_constant = float(np.sum(v * b) / np.sum(b * b))
    return rep


def check_bound(distances, values, rhs, name="", report=None, growth_tol=1.25):
    """Bound constant ``max(value / rhs)`` and its stability toward the boundary.

    ``rhs`` is an array aligned with ``distances`` or a callable of the
    distances.  The check passes when every ratio is finite and the largest
    of the three ratios closest to the boundary exceeds the first of them by
    less than ``growth_tol``.
    """
    d = np.asarray(distances, dtype=float)
    v = np.asarray(values, dtype=float)
    r = np.asarray(rhs(d) if callable(rhs) else rhs, dtype=float)
    order = np.argsort(-d)
    d, v, r = d[order], v[order], r[order]
    if report is None:
        try:
            report = fit_blowup(d, v)
        except DomainError:
            report = RateReport(d, v, math.nan, math.nan, math.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = v / r
    finite = bool(np.all(np.isfinite(ratios)))
    tail = ratios[-3:]
    stable = finite and len(tail) == 3 and tail[0] > 0 and float(np.max(tail) / tail[0]) < growth_tol
    report.bound_kind = name
    report.bound_rhs = r
    report.ratios = ratios
    report.bound_constant = float(np.max(ratios)) if finite else math.inf
    report.stable = bool(stable)
    if not stable:
        report.notes.append(f"{name}: ratio grows toward the boundary: {tail.tolist()}")
    return report


def check_7E1(d, K2, t, r_grid, numeric=True):
    """``int_0^t s^{-d-1} exp(-r^2 / (2 K2 s)) ds`` in closed form and by quadrature.

    Closed form ``(2 K2 / r^2)^d Gamma(d) Q(d, r^2 / (2 K2 t))`` with ``Q`` the
    regularized upper incomplete gamma function.  Returns a dict with the
    closed-form values, the quadrature values (if requested), the scaled
    values ``LHS r^{2d}``, their supremum and the limit ``Gamma(d) (2 K2)^d``.
    """
    r = np.asarray(r_grid, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    a = r**2 / (2.0 * K2)
    closed = a ** (-d) * special.gamma(d) * special.gammaincc(d, a / t)
    out = {"closed": closed, "scaled": closed * r ** (2 * d), "limit": special.gamma(d) * (2.0 * K2) ** d}
    out["sup_scaled"] = float(np.max(out["scaled"]))
    if numeric:
        vals = []
        for ai in a:
            # integrate in u = log s; the integrand peaks at s = ai / (d + 1)
            f = lambda u: math.exp(-d * u - ai * math.exp(-u))
            peak = math.log(ai / (d + 1))
            lo = peak - 8.0
            vals.append(
                integrate.quad(f, lo, math.log(t), epsabs=0, epsrel=1e-13, limit=400, points=[peak] if peak < math.log(t) else None)[0]
            )
        out["numeric"] = np.array(vals)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo against exact second moments


@dataclass
class ItoCheck:
    """Monte Carlo second moments next to their exact values, with z-scores."""

    dist: np.ndarray
    estimate: FieldEstimate
    exact: np.ndarray
    n_sigma: float = 4.0

    @property
    def z(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.estimate.second_moment - self.exact) / self.estimate.stderr

    @property
    def passed(self):
        return bool(np.all(np.abs(self.z) <= self.n_sigma))


def elliptic_ito_check(radii=(0.5, 0.9, 0.99), N=20_000, seed=0, K=2049, nodes=8192, workers=1, block_size=4096):
    """Unit disk, white boundary noise: Monte Carlo ``E u(r, 0)^2`` against ``(1 + r^2) / (2 pi (1 - r^2))``."""
    ball = UnitBall(2)
    spec = WhiteNoise(boundary_quadrature(ball, nodes), K)
    r = np.asarray(radii, float)
    pts = np.column_stack([r, np.zeros_like(r)])
    A = elliptic_mode_matrix(ball, KernelConfig(0.0), spec, pts)

    def sampler(rng_seed, size):
        return sample_elliptic_coefficients(spec, rng_seed, size).coefficients @ A.T

    est = mc_second_moment(sampler, N, seed, block_size=block_size, workers=workers, x=pts)
    exact = (1.0 + r**2) / (2.0 * np.pi * (1.0 - r**2))
    return ItoCheck(1.0 - r, est, exact)


def parabolic_ito_check(x=(0.1, 0.25, 0.5), t=0.1, N=100_000, seed=0, steps=512, workers=1, block_size=4096):
    """Unit interval with independent Brownian motions at both ends: Monte Carlo ``E u(t, x)^2``
    from the left-point stochastic convolution against the exact time integral."""
    iv = Interval(0.0, 1.0)
    spec = WhiteNoise(boundary_quadrature(iv, 2), 2)
    x = np.asarray(x, float)
    plan = ConvolutionPlan.build(iv, spec, TimeGrid.uniform(t, steps), x)
    grid = plan.grid

    def sampler(rng_seed, size):
        return convolve(plan, path_increments(sample_noise_paths(spec, grid, rng_seed, size).paths))

    est = mc_second_moment(sampler, N, seed, block_size=block_size, workers=workers, x=x, t=t)
    exact = analytic_variance_parabolic(iv, spec, t, x)
    return ItoCheck(np.minimum(x, 1.0 - x), est, exact)


# ---------------------------------------------------------------------------
# proposition registry


@dataclass(frozen=True)
class Proposition:
    """One boundary blow-up estimate: noise family, domain, right-hand side and anchor text."""

    key: str
    problem: str
    family: str
    domains: tuple
    bound: str
    anchor: str


PROPOSITIONS = (
    Proposition("elliptic-white", "elliptic", "white", ("ball2", "interval"),
                "int |x-y|^(2-2d) nu(dy) for d > 1; [1 + log+ 1/dist]^2 for d = 1",
                "Poisson equation with Gaussian white boundary noise"),
    Proposition("elliptic-signed", "elliptic", "signed-measures", ("ball2",),
                "dist^(2-2d)", "Poisson equation with a Gaussian series of signed boundary measures"),
    Proposition("elliptic-homogeneous", "elliptic", "homogeneous", ("halfspace1",),
                "int (x0^-2 1{|y|<=1} + x0^-4 |y|^(-1/m) 1{|y|>1}) nu(dy)",
                "Poisson equation on the half space with spatially homogeneous boundary noise"),
    Proposition("elliptic-levy", "elliptic", "poisson", ("ball2",),
                "int |x-y|^(2-2d) rho^2 nu(dy) + (int |x-y|^(1-d) |rho| nu(dy))^2",
                "Poisson equation with Poisson random measure boundary data"),
    Proposition("parabolic-white", "parabolic", "white", ("interval",),
                "int |x-y|^(-2d) nu(dy)", "heat equation with cylindrical Brownian boundary noise (Ito isometry)"),
    Proposition("parabolic-signed", "parabolic", "signed-measures", ("halfspace1",),
                "dist^(-2d)", "heat equation with Brownian series of signed boundary measures"),
    Proposition("parabolic-homogeneous", "parabolic", "homogeneous", ("halfspace1",),
                "e^t int (x0^-2 1{|y|<=1} + x0^-4 |y|^(-1/m) 1{|y|>1}) nu(dy)",
                "heat equation on the half space with spatially homogeneous boundary noise"),
    Proposition("parabolic-levy", "parabolic", "poisson", ("halfspace1",),
                "int |x-y|^(-2d) rho^2 nu(dy) + (int |x-y|^(-d-1) |rho| nu(dy))^2",
                "heat equation with Poisson random measure boundary noise, d > 1"),
    Proposition("fractional-sup", "parabolic", "signed-measures fBM H > 1/2", ("interval",),
                "dist^(2(1-d-alpha)) for E sup_t |u(t,x)|^2",
                "heat equation with fractional signed-measure noise, pathwise Young bound"),
)


def coverage_lock(registry=None):
    """Fail unless every proposition has exactly one registered case builder."""
    registry = CASES if registry is None else registry
    keys = [p.key for p in PROPOSITIONS]
    missing = [k for k in keys if k not in registry]
    extra = [k for k in registry if k not in keys]
    if missing or extra or len(set(keys)) != len(keys):
        raise RuntimeError(f"proposition coverage broken: missing {missing}, unregistered {extra}")
    return True


def _probe_points(domain, anchor, distances):
    return normal_probe_line(domain, anchor, distances)


def _circle_integral(domain, pts, q, power, weights=None):
    q = _refined_circle(q, float(np.max(np.linalg.norm(pts, axis=-1)))) if isinstance(domain, UnitBall) else q
    w = q.weights if weights is None else weights(q)
    dist = np.linalg.norm(pts[:, None, :] - q.nodes[None, :, :], axis=-1)
    return dist**power @ w


def _homogeneous_rhs(spec, x0):
    m = spec.m
    e = np.linalg.norm(spec.atoms, axis=-1)
    low = spec.masses[e <= 1].sum()
    high = (spec.masses[e > 1] * e[e > 1] ** (-1.0 / m)).sum()
    return x0**-2 * low + x0**-4 * high


def _case_elliptic_white(distances, opts):
    reports = []
    ball = UnitBall(2)
    q = boundary_quadrature(ball, opts.get("nodes", 1024))
    spec = WhiteNoise(q, opts.get("K", 513))
    pts = _probe_points(ball, np.array([1.0, 0.0]), distances)
    cfg = KernelConfig(0.0)
    vals = analytic_variance_elliptic(ball, cfg, spec, pts)
    rhs = _circle_integral(ball, pts, q, -2.0)
    reports.append(("ball2", check_bound(distances, vals, rhs, "elliptic-white d=2")))
    iv = Interval(0.0, 1.0)
    spec1 = WhiteNoise(boundary_quadrature(iv, 2), 2)
    x = np.asarray(distances, float)
    vals1 = analytic_variance_elliptic(iv, cfg, spec1, x)
    rep = fit_blowup(x, vals1, log_bound=True)
    reports.append(("interval", check_bound(x, vals1, _log_bound(x), "elliptic-white d=1", report=rep)))
    return reports


def _signed_ball_spec():
    measures = (
        DiscreteMeasure(np.array([[1.0, 0.0]]), [1.0]),
        DiscreteMeasure(np.array([[0.0, 1.0], [0.0, -1.0]]), [0.5, -0.5]),
        DiscreteMeasure(np.array([[-1.0, 0.0]]), [0.25]),
    )
    return SignedMeasureSeries(measures)


def _case_elliptic_signed(distances, opts):
    ball = UnitBall(2)
    spec = _signed_ball_spec()
    pts = _probe_points(ball, np.array([1.0, 0.0]), distances)
    vals = analytic_variance_elliptic(ball, KernelConfig(0.0), spec, pts)
    rhs = np.asarray(distances, float) ** (2 - 2 * 2)
    return [("ball2", check_bound(distances, vals, rhs, "elliptic-signed dist^(2-2d)"))]


def _homogeneous_spec(opts):
    if "spectral" in opts:
        data = np.load(opts["spectral"])
        return HomogeneousWiener(data["atoms"], data["masses"])
    return HomogeneousWiener.white(1, opts.get("cutoff", 8.0), opts.get("atoms", 64))


def _case_elliptic_homogeneous(distances, opts):
    hs = HalfSpace(1)
    spec = _homogeneous_spec(opts)
    pts = _probe_points(hs, np.array([0.0, 0.0]), distances)
    vals = analytic_variance_elliptic(hs, KernelConfig(opts.get("lam", 1.0)), spec, pts)
    rhs = _homogeneous_rhs(spec, pts[:, 0])
    return [("halfspace1", check_bound(distances, vals, rhs, "elliptic-homogeneous"))]


def _levy_rho(y):
    return 1.0 + 0.5 * y[-1]


def _case_elliptic_levy(distances, opts):
    ball = UnitBall(2)
    q = boundary_quadrature(ball, opts.get("nodes", 64))
    spec = PoissonMeasure.from_quadrature(q, opts.get("rate", 1.0), _levy_rho)
    pts = _probe_points(ball, np.array([1.0, 0.0]), distances)
    vals = levy_exact_moment(ball, KernelConfig(0.0), spec, pts)
    rho = np.abs(spec.node_marks)
    dist = np.linalg.norm(pts[:, None, :] - spec.nodes[None, :, :], axis=-1)
    rhs = dist ** (2 - 2 * 2) @ (rho**2 * spec.masses) + (dist ** (1 - 2) @ (rho * spec.masses)) ** 2
    return [("ball2", check_bound(distances, vals, rhs, "elliptic-levy two-term"))]


def _case_parabolic_white(distances, opts):
    iv = Interval(0.0, 1.0)
    spec = WhiteNoise(boundary_quadrature(iv, 2), 2)
    x = np.asarray(distances, float)
    t = opts.get("t", 0.1)
    vals = analytic_variance_parabolic(iv, spec, t, x)
    rhs = x**-2.0 + (1.0 - x) ** -2.0
    rep = check_bound(x, vals, rhs, "parabolic-white int |x-y|^(-2d)")
    rep.t = t
    return [("interval", rep)]


def _signed_halfspace_spec(H=0.5):
    measures = (
        DiscreteMeasure(np.array([[0.0, 0.0]]), [1.0]),
        DiscreteMeasure(np.array([[0.0, 0.5], [0.0, -1.0]]), [0.5, -0.5]),
    )
    return SignedMeasureSeries(measures, H=H)


def _case_parabolic_signed(distances, opts):
    hs = HalfSpace(1)
    spec = _signed_halfspace_spec()
    pts = _probe_points(hs, np.array([0.0, 0.0]), distances)
    t = opts.get("t", 0.5)
    vals = analytic_variance_parabolic(hs, spec, t, pts)
    rhs = np.asarray(distances, float) ** (-2 * 2)
    rep = check_bound(distances, vals, rhs, "parabolic-signed dist^(-2d)")
    rep.t = t
    return [("halfspace1", rep)]


def _case_parabolic_homogeneous(distances, opts):
    hs = HalfSpace(1)
    spec = _homogeneous_spec(opts)
    t = opts.get("t", 0.5)
    pts = _probe_points(hs, np.array([0.0, 0.0]), distances)
    vals = analytic_variance_parabolic(hs, spec, t, pts)
    rhs = math.exp(t) * _homogeneous_rhs(spec, pts[:, 0])
    rep = check_bound(distances, vals, rhs, "parabolic-homogeneous")
    rep.t = t
    return [("halfspace1", rep)]


def _case_parabolic_levy(distances, opts):
    hs = HalfSpace(1)
    nodes = np.array([[0.0, 0.0], [0.0, 1.0], [0.0, -0.5]])
    spec = PoissonMeasure(nodes, np.array([1.0, 0.5, 0.5]), _levy_rho)
    pts = _probe_points(hs, np.array([0.0, 0.0]), distances)
    t = opts.get("t", 0.5)
    vals = levy_exact_moment(hs, KernelConfig(1.0), spec, pts, t=t)
    rho = np.abs(spec.node_marks)
    d = 2
    dist = np.linalg.norm(pts[:, None, :] - nodes[None, :, :], axis=-1)
    rhs = dist ** (-2 * d) @ (rho**2 * spec.masses) + (dist ** (-d - 1) @ (rho * spec.masses)) ** 2
    rep = check_bound(distances, vals, rhs, "parabolic-levy two-term")
    rep.t = t
    return [("halfspace1", rep)]


def _case_fractional_sup(distances, opts):
    iv = Interval(0.0, 1.0)
    H, alpha = opts.get("H", 0.75), opts.get("alpha", 0.3)
    measures = (
        DiscreteMeasure(np.array([0.0]), [1.0]),
        DiscreteMeasure(np.array([1.0]), [1.0]),
        DiscreteMeasure(np.array([0.0, 1.0]), [0.5, -0.5]),
    )
    spec = SignedMeasureSeries(measures, H=H)
    grid = TimeGrid.uniform(opts.get("T", 1.0), opts.get("steps", 256))
    x = np.asarray(distances, float)
    weights = running_weights(iv, spec, grid, x)

    def sampler(seed, size):
        paths = sample_noise_paths(spec, grid, seed, size).paths
        u = running_mild_solution(weights, path_increments(paths))
        return np.max(np.abs(u), axis=-1)

    est = mc_second_moment(sampler, opts.get("N", 1000), opts.get("seed", 7), block_size=250,
                           workers=opts.get("workers", 1), x=x)
    rhs = x ** (2 * (1 - 1 - alpha))
    rep = check_bound(x, est.second_moment, rhs, "fractional-sup dist^(2(1-d-alpha))")
    rep.stderr = np.asarray(est.stderr)[np.argsort(-x)]
    rep.t = grid.horizon
    return [("interval", rep)]


CASES = {
    "elliptic-white": _case_elliptic_white,
    "elliptic-signed": _case_elliptic_signed,
    "elliptic-homogeneous": _case_elliptic_homogeneous,
    "elliptic-levy": _case_elliptic_levy,
    "parabolic-white": _case_parabolic_white,
    "parabolic-signed": _case_parabolic_signed,
    "parabolic-homogeneous": _case_parabolic_homogeneous,
    "parabolic-levy": _case_parabolic_levy,
    "fractional-sup": _case_fractional_sup,
}


def run_proposition(key, distances=DEFAULT_PROBES, **opts):
    """Evaluate one registered proposition on the probe distances.

    Returns a list of ``(domain label, RateReport)``, one per branch.
    """
    if key not in CASES:
        raise KeyError(f"unknown proposition {key!r}; known: {sorted(CASES)}")
    return CASES[key](tuple(distances), opts)
