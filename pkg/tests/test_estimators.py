import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundary_noise.domains import Interval, TimeGrid, UnitBall, boundary_quadrature
from boundary_noise.errors import DomainError, MonteCarloError
from boundary_noise.estimators import (
    DEFAULT_PROBES,
    PROPOSITIONS,
    check_7E1,
    check_bound,
    coverage_lock,
    fit_blowup,
    mc_second_moment,
    run_proposition,
)
from boundary_noise.fields import ConvolutionPlan, analytic_variance_elliptic, convolve
from boundary_noise.kernels import KernelConfig
from boundary_noise.noise import WhiteNoise, path_increments, sample_noise_paths

# int_0^1 s^-2 exp(-1/(2s)) ds, 30-digit quadrature
E71_D1_K1_R1_T1 = 1.21306131942526684720759906998


def _normal(seed, size):
    return np.random.default_rng(seed).standard_normal(size)


def test_constant_sampler():
    est = mc_second_moment(lambda s, n: np.full(n, 3.0), 1000, 0)
    assert est.second_moment == 9.0 and est.stderr == 0.0 and est.mean == 3.0 and est.N == 1000


def test_standard_normal_second_moment():
    est = mc_second_moment(_normal, 100_000, 12)
    assert abs(est.second_moment - 1.0) < 4 * est.stderr
    assert est.stderr == pytest.approx(math.sqrt(2 / 1e5), rel=0.05)


def test_determinism_and_worker_invariance():
    a = mc_second_moment(_normal, 10_000, 5, block_size=1000)
    b = mc_second_moment(_normal, 10_000, 5, block_size=1000)
    c = mc_second_moment(_normal, 10_000, 5, block_size=1000, workers=4)
    assert a.second_moment == b.second_moment == c.second_moment
    assert a.stderr == c.stderr and a.mean == c.mean


def test_non_finite_sample_reports_seed():
    def bad(seed, size):
        x = np.ones(size)
        if seed[1] == 2:
            x[3] = np.nan
        return x

    with pytest.raises(MonteCarloError) as info:
        mc_second_moment(bad, 500, 77, block_size=100)
    assert info.value.seed == 77 and info.value.block == 2


def test_minimum_sample_size():
    with pytest.raises(ValueError):
        mc_second_moment(_normal, 99, 0)


@pytest.mark.parametrize("p", [-4, -2, -1, 0])
def test_power_law_recovery(p):
    d = np.array(DEFAULT_PROBES)
    rep = fit_blowup(d, d**p)
    assert rep.slope == pytest.approx(p, abs=1e-12)
    assert rep.r_squared == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(rep.distances) < 0)


def test_fit_excludes_nonpositive_with_warning():
    d = np.array(DEFAULT_PROBES)
    v = d**-2.0
    v[0] = -1.0
    with pytest.warns(UserWarning):
        rep = fit_blowup(d, v)
    assert len(rep.distances) == len(d) - 1 and rep.slope == pytest.approx(-2, abs=1e-12)
    with pytest.raises(DomainError), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit_blowup(d[:5], np.array([1.0, 1.0, 1.0, -1.0, 0.0]))


def test_fit_log_bound_constant():
    d = np.array(DEFAULT_PROBES)
    v = 0.3 * (1 + np.maximum(np.log(1 / d), 0)) ** 2
    assert fit_blowup(d, v, log_bound=True).log_constant == pytest.approx(0.3, rel=1e-12)


def test_ball_white_slope_tends_to_minus_one():
    d = np.array([0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001])
    spec = WhiteNoise(boundary_quadrature(UnitBall(2), 256), 127)
    pts = np.column_stack([1 - d, 0 * d])
    v = analytic_variance_elliptic(UnitBall(2), KernelConfig(0.0), spec, pts)
    np.testing.assert_allclose(v, (1 + (1 - d) ** 2) / (2 * np.pi * (1 - (1 - d) ** 2)), rtol=1e-10)
    assert fit_blowup(d, v).slope == pytest.approx(-1.0, abs=0.03)


def test_check_bound_synthetic_half():
    d = np.array(DEFAULT_PROBES)
    rep = check_bound(d, 0.5 * d**-2, lambda x: x**-2, "synthetic")
    assert rep.bound_constant == pytest.approx(0.5) and rep.stable


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_check_bound_reports_growth():
    d = np.array(DEFAULT_PROBES)
    rep = check_bound(d, d**-3, d**-2, "too-steep")
    assert not rep.stable and "too-steep" in rep.notes[0]
    rep = check_bound(d, np.where(d < 0.01, np.inf, 1.0), np.ones_like(d), "blows")
    assert not rep.stable and rep.bound_constant == math.inf


def test_interval_parabolic_monte_carlo_bound():
    iv = Interval(0.0, 1.0)
    spec = WhiteNoise(boundary_quadrature(iv, 2), 2)
    d = np.array([0.5, 0.2, 0.1, 0.05, 0.02, 0.01])
    plan = ConvolutionPlan.build(iv, spec, TimeGrid.uniform(0.1, 128), d)
    est = mc_second_moment(
        lambda s, n: convolve(plan, path_increments(sample_noise_paths(spec, plan.grid, s, n).paths)), 4000, 3
    )
    rep = check_bound(d, est.second_moment, d**-2.0, "parabolic-white")
    assert rep.stable and np.isfinite(rep.bound_constant)


def test_7E1_closed_form_matches_quadrature():
    out = check_7E1(1, 1.0, 1.0, [1.0])
    assert out["closed"][0] == pytest.approx(E71_D1_K1_R1_T1, abs=1e-12)
    assert out["numeric"][0] == pytest.approx(E71_D1_K1_R1_T1, abs=1e-10)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_7E1_large_t_limit(d):
    out = check_7E1(d, 2.0, 1e12, [0.5, 1.0], numeric=False)
    np.testing.assert_allclose(out["scaled"], math.gamma(d) * 4.0**d, rtol=1e-9)
    r = np.geomspace(1e-3, 10, 50)
    assert check_7E1(d, 2.0, 1.0, r, numeric=False)["sup_scaled"] <= math.gamma(d) * 4.0**d * (1 + 1e-12)


def test_7E1_rejects_nonpositive_r():
    with pytest.raises(DomainError):
        check_7E1(1, 1.0, 1.0, [0.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 3), t1=st.floats(0.01, 5), t2=st.floats(0.01, 5), r=st.floats(0.01, 3))
def test_7E1_monotone_in_t(d, t1, t2, r):
    lo, hi = sorted((t1, t2))
    a = check_7E1(d, 1.5, lo, [r], numeric=False)["closed"][0]
    b = check_7E1(d, 1.5, hi, [r], numeric=False)["closed"][0]
    assert a <= b * (1 + 1e-12)


def test_coverage_lock():
    assert coverage_lock()
    reg = {p.key: None for p in PROPOSITIONS}
    reg.pop("parabolic-levy")
    with pytest.raises(RuntimeError, match="parabolic-levy"):
        coverage_lock(reg)
    assert len({p.key for p in PROPOSITIONS}) == len(PROPOSITIONS) == 9


@pytest.mark.parametrize("key", [p.key for p in PROPOSITIONS])
def test_every_proposition_stable(key):
    opts = {"N": 500} if key == "fractional-sup" else {}
    for label, rep in run_proposition(key, **opts):
        assert rep.stable, (key, label, rep.ratios)
        assert np.isfinite(rep.bound_constant)
        assert 0.0 <= rep.r_squared <= 1.0


@settings(max_examples=30, deadline=None)
@given(p=st.floats(-5, 1), c=st.floats(1e-3, 1e3))
def test_slope_recovery_property(p, c):
    d = np.array(DEFAULT_PROBES)
    assert fit_blowup(d, c * d**p).slope == pytest.approx(p, abs=1e-9)
