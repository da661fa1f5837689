import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundary_noise.dirichlet import BoundaryData, dirichlet_map
from boundary_noise.domains import HalfLine, HalfSpace, Interval, TimeGrid, UnitBall, boundary_quadrature
from boundary_noise.errors import ConfigurationError, DomainError, UsageError
from boundary_noise.estimators import mc_second_moment
from boundary_noise.fields import (
    ConvolutionPlan,
    FieldEstimate,
    analytic_variance_elliptic,
    analytic_variance_parabolic,
    convolve,
    elliptic_field,
    homogeneous_parabolic_quadrature,
    levy_exact_moment,
    levy_moment_bound,
    levy_second_moment,
    mild_solution,
    parabolic_field_v,
    running_mild_solution,
    running_weights,
    young_bound,
    young_I_alpha,
    young_Lambda_alpha,
)
from boundary_noise.kernels import KernelConfig, green_normal_derivative, heat_kernel_normal_derivative
from boundary_noise.noise import (
    DiscreteMeasure,
    HomogeneousWiener,
    NoiseRealization,
    PoissonMeasure,
    SignedMeasureSeries,
    WhiteNoise,
    path_increments,
    sample_elliptic_coefficients,
    sample_fbm_paths,
    sample_noise_paths,
    sample_poisson_measure,
)

IV, HL, HS, BALL = Interval(0.0, 1.0), HalfLine(), HalfSpace(1), UnitBall(2)
# int_0^0.1 (dG/dn(s, 0.5, 0))^2 ds on the unit interval, 30-digit quadrature of the image series (half the two-endpoint value)
PARABOLIC_VAR_ONE_END_X05 = 1.63304327689105198467687375904 / 2


def _two_point_white():
    return WhiteNoise(boundary_quadrature(IV, 2), 2)


def _delta0(H=0.5):
    return SignedMeasureSeries((DiscreteMeasure(np.array([0.0]), [1.0]),), H=H)


def test_elliptic_poisson_single_atom():
    y0 = np.array([[0.0, 1.0]])
    spec = PoissonMeasure(y0, np.array([3.0]))
    real = sample_poisson_measure(spec, None, 5)
    x = np.array([[0.2, 0.3]])
    u = elliptic_field(BALL, KernelConfig(0.0), real, x)
    k = green_normal_derivative(BALL, KernelConfig(0.0), x, y0)
    assert u[0] == pytest.approx(k[0] * len(real.points[1]), rel=1e-14)


def test_elliptic_halfline_matches_dirichlet_map():
    spec = _delta0()
    real = NoiseRealization(spec, coefficients=np.array([1.7]))
    x = np.array([0.3, 1.0, 2.0])
    u = elliptic_field(HL, KernelConfig(1.0), real, x)
    np.testing.assert_allclose(u, dirichlet_map(HL, KernelConfig(1.0), BoundaryData.halfline(1.7), x), rtol=1e-13)


def test_zero_realization_gives_zero():
    spec = _two_point_white()
    real = NoiseRealization(spec, coefficients=np.zeros(2))
    assert np.all(elliptic_field(IV, KernelConfig(0.0), real, [0.3, 0.6]) == 0)
    assert np.all(parabolic_field_v(IV, real, 0.2, [0.3, 0.6]) == 0)


def test_unsupported_combination():
    spec = HomogeneousWiener.white(1, 2.0, 4)
    with pytest.raises(ConfigurationError, match="Supported"):
        elliptic_field(BALL, KernelConfig(0.0), NoiseRealization(spec, coefficients=np.zeros(4)), [[0.1, 0.0]])


def test_parabolic_v_point_mass_and_decay():
    real = NoiseRealization(_delta0(), coefficients=np.array([1.0]))
    assert parabolic_field_v(IV, real, 0.1, 0.3) == pytest.approx(heat_kernel_normal_derivative(IV, 0.1, 0.3, 0.0))
    v5 = parabolic_field_v(IV, real, 5.0, 0.3)
    assert abs(v5) < 2 * np.pi * np.exp(-(np.pi**2) * 5) * 1.01
    with pytest.raises(DomainError):
        parabolic_field_v(IV, real, 0.0, 0.3)


def test_mild_solution_eigenfunction_initial_value():
    real = NoiseRealization(_delta0(), paths=None)
    x = np.array([0.2, 0.5, 0.9])
    u = mild_solution(IV, KernelConfig(0.0), real, lambda y: np.sin(np.pi * y), 0.3, x)
    np.testing.assert_allclose(u, np.exp(-(np.pi**2) * 0.3) * np.sin(np.pi * x), atol=1e-10)


def test_mild_solution_single_poisson_jump():
    spec = PoissonMeasure(np.array([[0.0, 0.2]]), np.array([1.0]))
    real = NoiseRealization(spec, points=(np.array([0.3]), np.array([0]), np.array([1.0])))
    x = np.array([[0.4, 0.0], [0.1, 0.5]])
    u = mild_solution(HS, KernelConfig(1.0), real, None, 0.5, x)
    ref = heat_kernel_normal_derivative(HS, 0.2, x, np.array([0.0, 0.2]))
    np.testing.assert_allclose(u, ref, rtol=1e-14)
    assert np.all(mild_solution(HS, KernelConfig(1.0), real, None, 0.25, x) == 0)


def test_rule_must_match_hurst():
    g = TimeGrid.uniform(0.1, 8)
    with pytest.raises(UsageError):
        ConvolutionPlan.build(IV, _two_point_white(), g, [0.3], rule="young_riemann_stieltjes")
    with pytest.raises(UsageError):
        ConvolutionPlan.build(IV, _delta0(0.7), g, [0.3], rule="ito_left_point")


def test_plan_refines_last_cell():
    plan = ConvolutionPlan.build(IV, _two_point_white(), TimeGrid.uniform(0.1, 64), [0.05, 0.3])
    assert plan.last_cell_share <= 1e-3
    assert plan.weights.shape == (len(plan.grid), 2, 2)


def test_convolution_linear_in_noise():
    spec = _two_point_white()
    plan = ConvolutionPlan.build(IV, spec, TimeGrid.uniform(0.1, 32), [0.2, 0.5])
    inc = path_increments(sample_noise_paths(spec, plan.grid, 3, size=4).paths)
    np.testing.assert_array_equal(convolve(plan, 2.0 * inc), 2.0 * convolve(plan, inc))


def test_ball_elliptic_variance_closed_form():
    spec = WhiteNoise(boundary_quadrature(BALL, 512), 255)
    r = np.array([0.0, 0.5, 0.9, 0.99])
    pts = np.column_stack([r, 0 * r])
    v = analytic_variance_elliptic(BALL, KernelConfig(0.0), spec, pts)
    np.testing.assert_allclose(v, (1 + r**2) / (2 * np.pi * (1 - r**2)), rtol=1e-10)


def test_interval_elliptic_variance_two_points():
    x = np.linspace(0.05, 0.95, 7)
    v = analytic_variance_elliptic(IV, KernelConfig(0.0), _two_point_white(), x)
    np.testing.assert_allclose(v, (1 - x) ** 2 + x**2, rtol=1e-13)


def test_zero_measures_zero_variance():
    spec = SignedMeasureSeries((DiscreteMeasure(np.array([[1.0, 0.0]]), [0.0]),))
    assert analytic_variance_elliptic(BALL, KernelConfig(0.0), spec, [[0.3, 0.1]])[0] == 0.0


def test_poisson_variance_redirect():
    with pytest.raises(UsageError):
        analytic_variance_elliptic(BALL, KernelConfig(0.0), PoissonMeasure(np.array([[1.0, 0.0]]), [1.0]), [[0.1, 0.0]])


def test_parabolic_variance_one_endpoint_frozen():
    v = analytic_variance_parabolic(IV, _delta0(), 0.1, 0.5)
    assert v == pytest.approx(PARABOLIC_VAR_ONE_END_X05, rel=1e-9)


def test_parabolic_variance_monotone_in_t():
    ts = [1e-3, 0.01, 0.05, 0.1, 0.5]
    v = [analytic_variance_parabolic(IV, _two_point_white(), t, 0.3) for t in ts]
    assert np.all(np.diff(v) > 0) and v[0] >= 0
    with pytest.raises(DomainError):
        analytic_variance_parabolic(IV, _two_point_white(), 0.0, 0.3)


def test_homogeneous_display_matches_generic_quadrature():
    spec = HomogeneousWiener.white(1, 6.0, 32)
    x = np.array([[0.3, 0.2]])
    a = analytic_variance_parabolic(HS, spec, 0.5, x, display="direct")
    b = homogeneous_parabolic_quadrature(spec, 0.5, x, form="direct")
    assert a[0] == pytest.approx(b[0], rel=1e-6)


def test_levy_bounds():
    spec0 = PoissonMeasure(np.array([[0.0, 0.0]]), np.array([2.0]), rho=lambda y: 0.0)
    x = np.array([[0.4, 0.1]])
    assert levy_moment_bound(HS, KernelConfig(1.0), spec0, x)[0] == 0.0
    mu0 = 0.7
    spec = PoissonMeasure(np.array([[0.0, 0.0]]), np.array([mu0]))
    f = green_normal_derivative(HS, KernelConfig(1.0), x[0], np.array([0.0, 0.0]))
    b = levy_moment_bound(HS, KernelConfig(1.0), spec, x)[0]
    assert b == pytest.approx(2 * (mu0 * f**2 + mu0**2 * f**2), rel=1e-12)
    assert levy_second_moment([f], [mu0]) == pytest.approx(mu0 * f**2 + mu0**2 * f**2)


def test_levy_monte_carlo_below_bound():
    q = boundary_quadrature(BALL, 16)
    spec = PoissonMeasure.from_quadrature(q, 0.5, rho=lambda y: 1 + 0.5 * y[1])
    x = np.array([[0.5, 0.0], [0.9, 0.0], [0.0, -0.95]])
    cfg = KernelConfig(0.0)
    u = np.array([elliptic_field(BALL, cfg, sample_poisson_measure(spec, None, [1, i]), x) for i in range(10_000)])
    m2 = np.mean(u**2, axis=0)
    assert np.all(m2 <= levy_moment_bound(BALL, cfg, spec, x))
    exact = levy_exact_moment(BALL, cfg, spec, x)
    se = np.std(u**2, axis=0) / np.sqrt(len(u))
    assert np.all(np.abs(m2 - exact) < 4 * se)


def test_young_zero_function():
    g = TimeGrid.uniform(1.0, 32).with_origin
    path = sample_fbm_paths(0.75, TimeGrid.uniform(1.0, 32), 1, 0)[0]
    bound, lam, I = young_bound(lambda s: 0 * s, g, np.concatenate([[0.0], path]), 0.3, H=0.75)
    assert bound == 0.0 and I == 0.0 and lam > 0


@pytest.mark.parametrize("alpha", [0.26, 0.3, 0.45])
def test_young_I_alpha_constant(alpha):
    assert young_I_alpha(lambda s: np.ones_like(s), 1.0, alpha) == pytest.approx(1 / (1 - alpha), abs=1e-12)


def test_young_alpha_range():
    with pytest.raises(UsageError):
        young_bound(lambda s: s, np.linspace(0, 1, 5), np.zeros(5), 0.2, H=0.75)


def test_young_lambda_linear_path():
    # for g(s) = s the fractional derivative is constant; Lambda is finite and positive
    s = np.linspace(0, 1, 65)
    lam = young_Lambda_alpha(s, s, 0.3)
    assert np.isfinite(lam) and lam > 0


def test_running_convolution_matches_direct_sum():
    spec = _delta0(0.75)
    grid = TimeGrid.uniform(1.0, 16)
    x = np.array([0.1, 0.4])
    c = running_weights(IV, spec, grid, x)
    inc = path_increments(sample_fbm_paths(0.75, grid, 1, 3, size=2))
    u = running_mild_solution(c, inc)
    direct = np.einsum("nkj,pkj->np", inc[..., :5], c[..., :5][..., ::-1])
    np.testing.assert_allclose(u[..., 4], direct, rtol=1e-10, atol=1e-12)


def test_elliptic_monte_carlo_matches_variance():
    spec = WhiteNoise(boundary_quadrature(BALL, 256), 127)
    x = np.array([[0.5, 0.0], [0.0, 0.8]])
    cfg = KernelConfig(0.0)
    est = mc_second_moment(
        lambda s, n: elliptic_field(BALL, cfg, sample_elliptic_coefficients(spec, s, n), x), 20_000, 1
    )
    exact = analytic_variance_elliptic(BALL, cfg, spec, x)
    assert np.all(np.abs(est.second_moment - exact) < 4 * est.stderr)


def test_parabolic_grid_convergence():
    spec = _two_point_white()
    x = np.array([0.25])
    vals = []
    for n in (128, 256):
        plan = ConvolutionPlan.build(IV, spec, TimeGrid.uniform(0.1, n), x)
        est = mc_second_moment(
            lambda s, m: convolve(plan, path_increments(sample_noise_paths(spec, plan.grid, s, m).paths)), 20_000, 4
        )
        vals.append(est)
    assert abs(vals[0].second_moment[0] - vals[1].second_moment[0]) < 4 * vals[1].stderr[0]


def test_field_estimate_requires_samples():
    with pytest.raises(ValueError):
        FieldEstimate(x=0.1, mean=0.0, second_moment=0.0, stderr=0.0, N=0)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-10, 10), seed=st.integers(0, 1000))
def test_elliptic_field_linear(a, seed):
    spec = _two_point_white()
    c = sample_elliptic_coefficients(spec, seed).coefficients
    x = np.array([0.2, 0.7])
    u1 = elliptic_field(IV, KernelConfig(0.0), NoiseRealization(spec, coefficients=a * c), x)
    u2 = elliptic_field(IV, KernelConfig(0.0), NoiseRealization(spec, coefficients=c), x)
    np.testing.assert_allclose(u1, a * u2, rtol=1e-12, atol=1e-12)
