"""Observability-constant estimator and exponential-sum quadrature."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import fracheat as fh


def anti(c, mu, t):
    """Antiderivative of sum c_k e^(-mu_k t)."""
    return float(-(c / mu) @ np.exp(-mu * t))


def test_exponential_sum_validation():
    with pytest.raises(ValueError, match="equal length"):
        fh.ExponentialSum([1.0, 2.0], [1.0], 1.0)
    with pytest.raises(ValueError, match="increasing"):
        fh.ExponentialSum([1.0, 2.0], [2.0, 1.0], 1.0)
    with pytest.raises(ValueError, match="increasing"):
        fh.ExponentialSum([1.0], [-1.0], 1.0)
    with pytest.raises(ValueError, match="horizon"):
        fh.ExponentialSum([1.0], [1.0], 0.0)


def test_exponential_sum_evaluation():
    es = fh.ExponentialSum([2.0, -1.0], [1.0, 3.0], 2.0)
    t = np.array([0.0, 0.5, 1.0])
    assert es(t) == pytest.approx(2.0 * np.exp(-t) - np.exp(-3.0 * t))


def test_l1_norm_single_exponential():
    # integral of c e^(-mu t) over [0, T] is c (1 - e^(-mu T)) / mu
    es = fh.ExponentialSum([3.0], [2.5], 1.7)
    exact = 3.0 * (1.0 - math.exp(-2.5 * 1.7)) / 2.5
    assert fh.l1_norm_exp_sum(es, 64) == pytest.approx(exact, rel=1e-13)


def test_l1_norm_with_sign_change():
    # F(t) = e^(-2t) - e^(-t)/2 crosses zero at t = ln 2; split the
    # analytic antiderivative there
    c = np.array([1.0, -0.5])
    mu = np.array([2.0, 1.0])
    # constructor requires increasing exponents
    es = fh.ExponentialSum(c[::-1], mu[::-1], 3.0)
    t_star = math.log(2.0)
    exact = abs(anti(c, mu, t_star) - anti(c, mu, 0.0)) + abs(
        anti(c, mu, 3.0) - anti(c, mu, t_star)
    )
    assert fh.l1_norm_exp_sum(es, 128) == pytest.approx(exact, rel=1e-12)


def test_l1_norm_quadrature_floor():
    es = fh.ExponentialSum([1.0], [1.0], 1.0)
    with pytest.raises(ValueError, match="n_quad"):
        fh.l1_norm_exp_sum(es, 32)


def test_estimator_validation():
    mu = np.array([1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="K"):
        fh.estimate_observability_constant(mu, 1.0, 0)
    with pytest.raises(ValueError, match="K"):
        fh.estimate_observability_constant(mu, 1.0, 4)
    with pytest.raises(ValueError, match="T"):
        fh.estimate_observability_constant(mu, -1.0, 2)
    with pytest.raises(ValueError, match="increasing"):
        fh.estimate_observability_constant(np.array([2.0, 1.0]), 1.0, 2)


def test_estimator_single_mode_closed_form():
    # with one exponent the ratio is scale invariant and every witness
    # yields mu e^(-mu T) / (1 - e^(-mu T))
    mu = np.array([1.8])
    T = 0.7
    est = fh.estimate_observability_constant(mu, T, 1, n_random=10)
    exact = 1.8 * math.exp(-1.8 * T) / (1.0 - math.exp(-1.8 * T))
    assert est.lower_bound_C == pytest.approx(exact, rel=1e-10)
    assert est.T == T
    assert "gram_cancellation" in est.strategy_log


def test_estimator_bound_is_certified_by_witness():
    mu = fh.lambda_asymptotic(np.arange(1, 5), 0.8)
    est = fh.estimate_observability_constant(mu, 0.5, 4, n_random=20)
    c = est.witness_coeffs
    numer = float(np.abs(c) @ np.exp(-mu * est.T))
    denom = fh.l1_norm_exp_sum(fh.ExponentialSum(c, mu, est.T), 256)
    assert est.lower_bound_C == pytest.approx(numer / denom, rel=1e-12)


def test_estimator_nondecreasing_in_K():
    mu = fh.lambda_asymptotic(np.arange(1, 5), 0.8)
    prev = 0.0
    for K in (1, 2, 3, 4):
        est = fh.estimate_observability_constant(mu, 0.4, K, n_random=20)
        assert est.lower_bound_C >= prev - 1e-12
        prev = est.lower_bound_C


def test_blowup_curve_validation():
    mu = np.array([1.0, 2.0])
    with pytest.raises(ValueError, match="three"):
        fh.blowup_curve(mu, [1.0, 0.5], 2)
    with pytest.raises(ValueError, match="decreasing"):
        fh.blowup_curve(mu, [0.5, 1.0, 2.0], 2)
    with pytest.raises(ValueError, match="positive"):
        fh.blowup_curve(mu, [1.0, 0.5, -0.1], 2)


def test_blowup_curve_envelope_and_slope():
    mu = fh.lambda_asymptotic(np.arange(1, 5), 0.8)
    curve = fh.blowup_curve(mu, [2.0, 1.0, 0.5, 0.2, 0.1], 4, n_random=20)
    assert curve.T_values == pytest.approx([2.0, 1.0, 0.5, 0.2, 0.1])
    # the envelope is the running max toward small horizons
    assert np.all(np.diff(curve.C_envelope) >= 0)
    assert np.all(curve.C_envelope >= curve.C_lower)
    # constants blow up as T decreases: positive slope of log C vs 1/T
    assert curve.slope_fit > 0
    assert curve.C_envelope[-1] > 10 * curve.C_envelope[0]


@given(
    st.lists(st.floats(-5.0, 5.0, allow_nan=False), min_size=1, max_size=5),
    st.floats(0.2, 3.0),
)
def test_l1_norm_dominates_plain_integral(coeffs, T):
    # triangle inequality: the L1 norm bounds |integral of F|
    c = np.array(coeffs)
    if not np.abs(c).max() > 0:
        c[0] = 1.0
    mu = 0.5 + np.arange(c.size, dtype=float)
    es = fh.ExponentialSum(c, mu, T)
    plain = abs(float((c / mu) @ (1.0 - np.exp(-mu * T))))
    assert fh.l1_norm_exp_sum(es, 64) >= plain - 1e-12 * max(plain, 1.0)


def test_adjoint_observability_ratio(op20_unit):
    basis = fh.eigendecompose(op20_unit, k_max=4)
    a = np.array([1.0, -0.5, 0.25])
    r = fh.adjoint_observability_ratio(basis, (-0.3, 0.8), 0.5, a, 200)
    assert r > 0
    # degree-0 homogeneity: doubling the datum is exact in floating point
    r2 = fh.adjoint_observability_ratio(basis, (-0.3, 0.8), 0.5, 2.0 * a, 200)
    assert r2 == r
    with pytest.raises(ValueError, match="nonzero"):
        fh.adjoint_observability_ratio(basis, (-0.3, 0.8), 0.5, np.zeros(3), 200)
    with pytest.raises(ValueError, match="at most"):
        fh.adjoint_observability_ratio(basis, (-0.3, 0.8), 0.5, np.ones(9), 200)


def test_adjoint_ratio_single_mode_closed_numerator(op20_unit):
    basis = fh.eigendecompose(op20_unit, k_max=2)
    lam1 = basis.eigenvalues[0]
    T = 0.4
    r = fh.adjoint_observability_ratio(basis, (-0.3, 0.8), T, np.array([1.0]), 400)
    # reconstruct the denominator directly
    w = fh.trapezoid_weights(op20_unit.grid, (-0.3, 0.8))
    phi_obs = float(w @ np.abs(basis.eigenvectors[:, 0]))
    times = np.linspace(0.0, T, 401)
    f = phi_obs * np.exp(-lam1 * times)
    denom = np.trapezoid(f, times)
    assert r == pytest.approx(math.exp(-2.0 * lam1 * T) / denom**2, rel=1e-12)


def test_blowup_curve_to_csv(tmp_path):
    mu = np.array([1.0, 3.0, 6.0])
    curve = fh.blowup_curve(mu, [1.0, 0.5, 0.25], 3, n_random=10)
    path = tmp_path / "curve.csv"
    fh.blowup_curve_to_csv(curve, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "T,C_lower,slope_fit"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (3, 3)
    assert data[:, 0] == pytest.approx(curve.T_values)
    assert data[:, 1] == pytest.approx(curve.C_lower)
    assert data[:, 2] == pytest.approx(curve.slope_fit)
