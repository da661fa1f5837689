import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundary_noise.domains import (
    HalfLine,
    HalfSpace,
    Interval,
    TimeGrid,
    UnitBall,
    boundary_quadrature,
    dist_to_boundary,
    log_gauss_legendre,
    normal_probe_line,
    sphere_area,
)
from boundary_noise.errors import ConfigurationError, DomainError


def test_dimensions():
    assert Interval(0, 1).dimension() == 1
    assert HalfLine().dimension() == 1
    assert HalfSpace(2).dimension() == 3
    assert UnitBall(3).dimension() == 3


def test_interval_requires_order():
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)


@pytest.mark.parametrize(
    "domain, x, expected",
    [
        (Interval(0, 1), 0.25, 0.25),
        (UnitBall(2), np.array([0.6, 0.0]), 0.4),
        (HalfSpace(1), np.array([0.01, 7.3]), 0.01),
        (HalfLine(), 3.0, 3.0),
    ],
)
def test_dist_to_boundary(domain, x, expected):
    assert dist_to_boundary(domain, x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("domain, x", [(Interval(0, 1), 1.0), (UnitBall(2), np.array([1.2, 0.0])), (HalfLine(), -1.0)])
def test_dist_outside_raises(domain, x):
    with pytest.raises(DomainError):
        dist_to_boundary(domain, x)


def test_circle_quadrature_four_nodes():
    q = boundary_quadrature(UnitBall(2), 4)
    np.testing.assert_allclose(q.nodes, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    np.testing.assert_allclose(q.weights, np.full(4, np.pi / 2))


def test_interval_and_halfline_quadrature():
    q = boundary_quadrature(Interval(0, 1), 17)
    np.testing.assert_array_equal(q.nodes, [0.0, 1.0])
    np.testing.assert_array_equal(q.weights, [1.0, 1.0])
    h = boundary_quadrature(HalfLine(), 5)
    np.testing.assert_array_equal(h.nodes, [0.0])
    np.testing.assert_array_equal(h.weights, [1.0])


@pytest.mark.parametrize("n", [3, 64, 1000])
def test_circle_mass(n):
    assert boundary_quadrature(UnitBall(2), n).mass == pytest.approx(2 * np.pi, abs=1e-12)


@pytest.mark.parametrize("m, R", [(1, 20.0), (2, 5.0)])
def test_halfspace_quadrature_mass(m, R):
    q = boundary_quadrature(HalfSpace(m), 32, radius=R)
    assert q.mass == pytest.approx(R**m * math.pi ** (m / 2) / math.gamma(m / 2 + 1), rel=1e-10)
    assert np.all(q.nodes[:, 0] == 0.0)


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * np.pi)
    assert sphere_area(3) == pytest.approx(4 * np.pi)


def test_normal_probe_line_examples():
    np.testing.assert_allclose(normal_probe_line(UnitBall(2), np.array([1.0, 0.0]), [0.1, 0.01]), [[0.9, 0], [0.99, 0]])
    np.testing.assert_allclose(normal_probe_line(HalfSpace(1), np.array([0.0, 0.0]), [0.5]), [[0.5, 0.0]])
    np.testing.assert_allclose(normal_probe_line(Interval(0, 1), 0.0, [0.25]), [0.25])
    np.testing.assert_allclose(normal_probe_line(Interval(0, 1), 1.0, [0.25]), [0.75])


def test_probe_beyond_domain_raises():
    with pytest.raises(DomainError):
        normal_probe_line(Interval(0, 1), 0.0, [1.5])
    with pytest.raises(DomainError):
        normal_probe_line(UnitBall(2), np.array([1.0, 0.0]), [2.5])


@settings(max_examples=60, deadline=None)
@given(s=st.floats(1e-6, 0.999), theta=st.floats(0, 2 * np.pi), y1=st.floats(-10, 10))
def test_probe_distance_roundtrip(s, theta, y1):
    cases = [
        (Interval(0, 1), 0.0, 0.5 * s),
        (Interval(0, 1), 1.0, 0.5 * s),
        (HalfLine(), 0.0, 50 * s),
        (HalfSpace(1), np.array([0.0, y1]), 5 * s),
        (UnitBall(2), np.array([np.cos(theta), np.sin(theta)]), s),
    ]
    for dom, anchor, d in cases:
        x = normal_probe_line(dom, anchor, [d])[0]
        assert dist_to_boundary(dom, x) == pytest.approx(d, abs=1e-12)


def test_time_grid_invariants():
    g = TimeGrid.uniform(1.0, 4)
    np.testing.assert_allclose(g.nodes, [0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(g.steps, 0.25)
    assert g.horizon == 1.0
    lg = TimeGrid.log_spaced(1.0, 5, 1e-4)
    assert lg.nodes[0] == pytest.approx(1e-4) and np.all(np.diff(lg.nodes) > 0)
    with pytest.raises(DomainError):
        TimeGrid(np.array([0.0, 1.0]))
    with pytest.raises(DomainError):
        TimeGrid(np.array([0.5, 0.4]))
    with pytest.raises(ConfigurationError):
        TimeGrid(np.array([0.5]), "chebyshev")


def test_log_gauss_legendre_integrates_power():
    t, w = log_gauss_legendre(1e-6, 1.0, 16)
    assert np.sum(w * t**-0.5) == pytest.approx(2 * (1 - 1e-3), rel=1e-12)
