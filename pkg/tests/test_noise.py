import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundary_noise.domains import Interval, TimeGrid, UnitBall, boundary_quadrature
from boundary_noise.errors import ConfigurationError, DomainError, UsageError
from boundary_noise.noise import (
    CylFractionalWiener,
    DiscreteMeasure,
    HomogeneousWiener,
    PoissonMeasure,
    SignedMeasureSeries,
    WhiteNoise,
    basis_matrix,
    fbm_cholesky,
    fbm_covariance,
    path_increments,
    sample_elliptic_white,
    sample_fbm_paths,
    sample_homogeneous_coeffs,
    sample_noise_paths,
    sample_poisson_measure,
)


def _white(K=3, n=64):
    return WhiteNoise(boundary_quadrature(UnitBall(2), n), K)


def test_elliptic_white_determinism():
    spec = _white()
    a = sample_elliptic_white(spec, 42).coefficients
    b = sample_elliptic_white(spec, 42).coefficients
    assert a.shape == (3,)
    np.testing.assert_array_equal(a, b)


def test_elliptic_white_moments():
    c = sample_elliptic_white(_white(), 1, size=100_000).coefficients
    assert abs(c[:, 0].mean()) < 3 / np.sqrt(1e5)
    assert c[:, 0].var() == pytest.approx(1.0, rel=0.02)


def test_elliptic_white_covariance_identity():
    N = 100_000
    c = sample_elliptic_white(_white(K=4), 3, size=N).coefficients
    cov = c.T @ c / N
    # stderr of a product of independent unit normals is 1/sqrt(N), of a square sqrt(2/N)
    se = np.where(np.eye(4, dtype=bool), np.sqrt(2 / N), np.sqrt(1 / N))
    assert np.all(np.abs(cov - np.eye(4)) < 4 * se)


def test_elliptic_white_wrong_family():
    spec = SignedMeasureSeries((DiscreteMeasure(np.array([[1.0, 0.0]]), [1.0]),))
    with pytest.raises(UsageError):
        sample_elliptic_white(spec, 0)


def test_fourier_basis_orthonormal():
    spec = _white(K=33, n=128)
    E = basis_matrix(spec)
    np.testing.assert_allclose((E * spec.quadrature.weights) @ E.T, np.eye(33), atol=1e-12)


def test_indicator_basis_orthonormal():
    spec = WhiteNoise(boundary_quadrature(Interval(0, 1), 2), 2)
    E = basis_matrix(spec)
    np.testing.assert_allclose((E * spec.quadrature.weights) @ E.T, np.eye(2))


def test_fourier_basis_too_large():
    with pytest.raises(ConfigurationError):
        _white(K=64, n=64)


def test_hurst_range():
    q = boundary_quadrature(UnitBall(2), 16)
    with pytest.raises(DomainError):
        CylFractionalWiener(q, 3, H=1.0)


def test_signed_series_variation_sum():
    s = SignedMeasureSeries(
        (DiscreteMeasure(np.array([0.0]), [1.0]), DiscreteMeasure(np.array([0.0, 1.0]), [0.5, -0.5])), H=0.7
    )
    assert s.variation_sq_sum == pytest.approx(2.0)
    assert s.K == 2


def test_signed_series_rejects_infinite_variation():
    with pytest.raises(ConfigurationError):
        SignedMeasureSeries((DiscreteMeasure(np.array([0.0]), [np.inf]),))


def test_fbm_brownian_variance():
    g = TimeGrid.uniform(2.0, 4)
    W = sample_fbm_paths(0.5, g, 1, 5, size=100_000)[:, 0]
    np.testing.assert_allclose(W.var(axis=0), g.nodes, rtol=0.03)


def test_fbm_cross_moment_h075():
    # E W(1) W(2) = (1 + 2^1.5 - 1) / 2 = sqrt(2)
    g = TimeGrid(np.array([1.0, 2.0]))
    W = sample_fbm_paths(0.75, g, 1, 9, size=100_000)[:, 0]
    prod = W[:, 0] * W[:, 1]
    assert abs(prod.mean() - np.sqrt(2)) < 4 * prod.std() / np.sqrt(len(prod))


def test_fbm_long_range_dependence_sign():
    g = TimeGrid(np.array([1.0, 2.0, 3.0, 4.0]))
    C = fbm_covariance(0.75, g.nodes[:, None], g.nodes[None, :])
    # Cov(W(2)-W(1), W(4)-W(3))
    c = C[1, 3] - C[1, 2] - C[0, 3] + C[0, 2]
    assert c > 0
    W = sample_fbm_paths(0.75, g, 1, 2, size=100_000)[:, 0]
    a, b = W[:, 1] - W[:, 0], W[:, 3] - W[:, 2]
    assert np.mean(a * b) > 0


def test_fbm_cholesky_jitter_bounded():
    _, jitter = fbm_cholesky(0.9, TimeGrid.uniform(1.0, 512))
    assert jitter <= 1e-12


def test_fbm_paths_deterministic_and_shaped():
    g = TimeGrid.uniform(1.0, 8)
    a = sample_fbm_paths(0.6, g, 3, 11)
    assert a.shape == (3, 8)
    np.testing.assert_array_equal(a, sample_fbm_paths(0.6, g, 3, 11))


def test_path_increments_start_at_zero():
    p = np.array([[1.0, 3.0, 2.0]])
    np.testing.assert_array_equal(path_increments(p), [[1.0, 2.0, -1.0]])


def test_poisson_mean_count():
    q = boundary_quadrature(Interval(0, 1), 2)
    spec = PoissonMeasure.from_quadrature(q, 1.0)  # total mass 2
    counts = [len(sample_poisson_measure(spec, 1.0, [3, i]).points[1]) for i in range(20_000)]
    assert np.mean(counts) == pytest.approx(2.0, rel=0.03)


def test_poisson_zero_and_single_atom():
    empty = PoissonMeasure(np.array([0.0]), np.array([0.0]))
    assert len(sample_poisson_measure(empty, 1.0, 0).points[1]) == 0
    one = PoissonMeasure(np.array([[0.0, 0.3]]), np.array([5.0]), rho=lambda y: 2.0)
    times, idx, marks = sample_poisson_measure(one, 2.0, 4).points
    assert len(idx) > 0 and np.all(idx == 0) and np.all(marks == 2.0)
    assert np.all((times > 0) & (times <= 2.0)) and np.all(np.diff(times) >= 0)


def test_poisson_infinite_mass_rejected():
    with pytest.raises(ConfigurationError):
        PoissonMeasure(np.array([0.0]), np.array([np.inf]))


def test_homogeneous_white_is_flat_and_symmetric():
    spec = HomogeneousWiener.white(1, 4.0, 8)
    np.testing.assert_allclose(spec.masses, (8.0 / 8) * (2 * np.pi) ** -0.5)
    np.testing.assert_allclose(np.sort(spec.atoms[:, 0]), -np.sort(spec.atoms[:, 0])[::-1])


def test_homogeneous_asymmetric_rejected():
    with pytest.raises(ConfigurationError):
        HomogeneousWiener(np.array([[1.0], [2.0]]), np.array([1.0, 1.0]))


def test_homogeneous_origin_atom_constant_mode():
    spec = HomogeneousWiener(np.array([[0.0]]), np.array([1.0]))
    eta, amp, kind = spec.modes()
    assert kind.tolist() == [0] and amp[0] == 1.0


def test_homogeneous_paths_independent_increments():
    spec = HomogeneousWiener.white(1, 2.0, 4)
    g = TimeGrid.uniform(1.0, 4)
    P = sample_homogeneous_coeffs(spec, g, 0, size=50_000).paths
    d = path_increments(P)
    r = np.corrcoef(d[:, 0, 0], d[:, 0, 2])[0, 1]
    assert abs(r) < 4 / np.sqrt(50_000)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), H=st.sampled_from([0.5, 0.6, 0.8]))
def test_samplers_pure_in_seed(seed, H):
    spec = SignedMeasureSeries((DiscreteMeasure(np.array([0.0]), [1.0]),), H=H)
    g = TimeGrid.uniform(1.0, 16)
    a = sample_noise_paths(spec, g, seed, size=2).paths
    b = sample_noise_paths(spec, g, seed, size=2).paths
    np.testing.assert_array_equal(a, b)
