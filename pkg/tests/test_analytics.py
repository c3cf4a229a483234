import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, linalg

from mlqueue.analytics import (
    QueueAnalyticsParams,
    arrival_prob,
    critical_rho,
    equilibrium_pmf,
    eulerian_numbers,
    fpp_mgf,
    invert_laplace,
    kolmogorov_matrix,
    lt_mgf,
    lt_moment,
    lt_p00,
    lt_p0n,
    lt_p0n_vector,
    mixing_time,
    p00_asymptotic,
    p00_time_domain,
    roots_r,
    solve_fractional_kolmogorov,
    stehfest,
    talbot,
    tv_distance_to_equilibrium,
)
from mlqueue.errors import DivergenceError, DomainError, InversionError
from mlqueue.mlf import ml_e

Q = QueueAnalyticsParams


def mm1_p0(p, t, n=200):
    """P(L(t) = k) for the lazy walk at rate one, by matrix exponential."""
    return linalg.expm(t * kolmogorov_matrix(p, n))[:, 0]


def spectral_arrival_prob(alpha, beta, rho):
    # S_beta(t) = int_0^inf exp(-r t) K_beta(r) dr, so P(X_alpha/rho < X_beta) = E S_beta(X_alpha/rho)
    sb, cb = math.sin(math.pi * beta), math.cos(math.pi * beta)

    def f(y):
        r = math.exp(y)
        k = sb / math.pi * r**beta / (r ** (2 * beta) + 2 * r**beta * cb + 1)
        return k / (1 + (r / rho) ** alpha)

    lo, hi = -60 / beta, 60 / beta
    return integrate.quad(f, lo, hi, limit=2000, epsabs=1e-13, epsrel=1e-13)[0]


# equilibrium


def test_equilibrium_pmf():
    assert equilibrium_pmf(1 / 3, 0) == pytest.approx(0.5)
    assert equilibrium_pmf(1 / 3, 1) == pytest.approx(0.25)
    assert equilibrium_pmf(0.3, np.arange(1001)).sum() == pytest.approx(1.0, abs=1e-12)
    for p in (0.5, 0.7):
        with pytest.raises(DomainError):
            equilibrium_pmf(p, 0)


# roots


def test_roots_examples():
    r1, r2 = roots_r(1.0, 0.5, 1.0)
    assert r1 * r2 == pytest.approx(1.0, abs=1e-12)
    p, a, s = 0.3, 0.7, 0.5
    r1, r2 = roots_r(s, p, a)
    assert r1 > 1 > r2 > 0
    assert r1 + r2 == pytest.approx((1 + s**a) / p, abs=1e-10)
    assert r1 * r2 == pytest.approx((1 - p) / p, abs=1e-10)
    assert (1 - r1) * (1 - r2) == pytest.approx(-(s**a) / p, abs=1e-10)


@pytest.mark.parametrize("p", [0.3, 0.7])
def test_small_root_limit(p):
    # at s = 0 the quadratic has roots 1 and (1-p)/p
    _, r2 = roots_r(1e-8, p, 0.7)
    assert r2 == pytest.approx(min(1.0, (1 - p) / p), abs=1e-4)


@settings(max_examples=1000, deadline=None)
@given(s=st.floats(1e-6, 1e6), p=st.floats(0.01, 0.99), alpha=st.floats(0.05, 1.0))
def test_root_identities(s, p, alpha):
    r1, r2 = roots_r(s, p, alpha)
    sa = s**alpha
    assert r1 > 1 > r2 > 0
    assert (r1 + r2) == pytest.approx((1 + sa) / p, rel=1e-10)
    assert r1 * r2 == pytest.approx((1 - p) / p, rel=1e-10)
    assert (1 - r1) * (1 - r2) == pytest.approx(-sa / p, rel=1e-9, abs=1e-10)


def test_roots_domain():
    with pytest.raises(DomainError):
        roots_r(-1.0, 0.3, 0.5)
    with pytest.raises(DomainError):
        roots_r(1.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        Q(0.3, 1.2)


# transforms


def test_p00_limits():
    s = 1e-6
    assert s * lt_p00(s, Q(1 / 3, 0.8)) == pytest.approx(0.5, abs=1e-2)
    assert 1e6 * lt_p00(1e6, Q(0.5, 1.0)) == pytest.approx(1.0, abs=1e-2)


def test_p00_three_forms_agree():
    s, p, a = 0.7, 0.3, 0.6
    r1, r2 = roots_r(s, p, a)
    f1 = s ** (a - 1) / (p * (1 - r2) * r1)
    f2 = r2 * s ** (a - 1) / ((1 - p) * (1 - r2))
    f3 = 1 / s - p / (1 - p) * r2 / s
    for f in (f1, f2):
        assert f == pytest.approx(f3, rel=1e-10)
    assert lt_p00(s, Q(p, a)) == pytest.approx(f3, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(s=st.floats(1e-4, 1e4), p=st.floats(0.01, 0.99), alpha=st.floats(0.05, 1.0))
def test_p00_is_a_probability_transform(s, p, alpha):
    v = s * lt_p00(s, Q(p, alpha))
    assert 0 < v <= 1


def test_p0n_examples():
    P = Q(0.3, 0.7)
    assert lt_p0n(1.0, P, 0) == lt_p00(1.0, P)
    vals = np.array([lt_p0n(1.0, P, n) for n in range(201)])
    assert vals.sum() == pytest.approx(1.0, abs=1e-8)
    assert np.all(np.diff(vals) < 0)
    r1, _ = roots_r(1.0, 0.3, 0.7)
    assert vals[5] / vals[4] == pytest.approx(1 / r1, rel=1e-14)
    np.testing.assert_allclose(lt_p0n_vector(np.array([1.0]), P, 200)[0], vals, rtol=1e-12)


def test_lambda_scaling():
    P1, P3 = Q(0.4, 0.6, 1.0), Q(0.4, 0.6, 3.0)
    s = 0.8
    assert lt_p00(s, P3) == pytest.approx(lt_p00(s / 3, P1) / 3, rel=1e-14)
    t = 5.0
    assert p00_time_domain(t, P3) == pytest.approx(p00_time_domain(3 * t, P1), abs=1e-10)


def test_mgf_examples():
    P = Q(0.3, 0.7)
    assert lt_mgf(0.0, 2.0, P) == pytest.approx(0.5, rel=1e-12)
    z, s = 0.1, 1.0
    series = np.sum([lt_p0n(s, P, k) * math.exp(k * z) for k in range(400)])
    assert lt_mgf(z, s, P) == pytest.approx(series, abs=1e-8)
    r1, _ = roots_r(s, 0.3, 0.7)
    with pytest.raises(DivergenceError):
        lt_mgf(math.log(r1), s, P)
    with pytest.raises(DivergenceError):
        lt_mgf(math.log(r1) + 0.1, s, P)


@settings(max_examples=100, deadline=None)
@given(
    s=st.floats(0.01, 100.0),
    p=st.floats(0.05, 0.95),
    alpha=st.floats(0.1, 1.0),
    frac=st.floats(-1.0, 0.9),
)
def test_mgf_matches_probability_series(s, p, alpha, frac):
    P = Q(p, alpha)
    r1, _ = roots_r(s, p, alpha)
    z = frac * math.log(r1)
    ratio = math.exp(z) / r1
    n = int(math.ceil(math.log(1e-14) / math.log(ratio))) + 1
    series = lt_p00(s, P) * np.sum(ratio ** np.arange(n))
    assert lt_mgf(z, s, P) == pytest.approx(series, rel=1e-8)


def test_eulerian_numbers():
    assert eulerian_numbers(1) == [1]
    assert eulerian_numbers(3) == [1, 4, 1]
    assert eulerian_numbers(4) == [1, 11, 11, 1]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_moment_matches_series(k):
    P = Q(0.3, 0.7)
    r1, _ = roots_r(1.0, 0.3, 0.7)
    n = np.arange(2000, dtype=float)
    series = lt_p00(1.0, P) * np.sum(n**k * (1 / r1) ** n)
    assert lt_moment(k, 1.0, P) == pytest.approx(series, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(s=st.floats(1e-3, 1e3), p=st.floats(0.05, 0.95), alpha=st.floats(0.1, 1.0))
def test_mean_and_second_moment_identities(s, p, alpha):
    P = Q(p, alpha)
    r1, _ = roots_r(s, p, alpha)
    p00 = lt_p00(s, P)
    mean = (2 * p - 1) / s ** (1 + alpha) + (1 - p) * s**-alpha * p00
    assert lt_moment(1, s, P) == pytest.approx(mean, rel=1e-8, abs=1e-10 * abs(1 / s ** (1 + alpha)))
    second = p00 * r1 * (1 + r1) / (r1 - 1) ** 3
    assert lt_moment(2, s, P) == pytest.approx(second, rel=1e-8)


def test_mean_limit():
    s = 1e-6
    assert s * lt_moment(1, s, Q(0.3, 0.7)) == pytest.approx(0.75, abs=1e-2)
    with pytest.raises(DomainError):
        lt_moment(0, 1.0, Q(0.3, 0.7))


def test_transforms_accept_mpmath():
    P = Q(0.3, 0.6)
    assert float(lt_p00(mpmath.mpf(2), P)) == pytest.approx(lt_p00(2.0, P), rel=1e-14)
    assert float(lt_moment(2, mpmath.mpf(2), P)) == pytest.approx(lt_moment(2, 2.0, P), rel=1e-13)


# FPP moment generating function


def test_fpp_mgf():
    assert fpp_mgf(0.0, 0.5, 1.0, 4.0) == 1.0
    h = 1e-5
    d = (fpp_mgf(h, 0.5, 1.0, 4.0) - fpp_mgf(-h, 0.5, 1.0, 4.0)) / (2 * h)
    assert d == pytest.approx(2 / math.gamma(1.5), abs=1e-3)
    assert fpp_mgf(0.2, 1.0, 1.0, 3.0) == pytest.approx(math.exp(3 * math.expm1(0.2)), abs=1e-9)
    with pytest.raises(DomainError):
        fpp_mgf(5.0, 0.5, 1.0, 1e4)


# inversion


def test_invert_trivial_transforms():
    for t in (0.01, 1.0, 37.0, 1e4):
        assert invert_laplace(lambda s: 1 / s, t) == pytest.approx(1.0, abs=1e-10)
    assert invert_laplace(lambda s: 1 / (1 + s**1.0), 1.0) == pytest.approx(math.exp(-1), abs=1e-10)


def test_invert_ml_relaxation():
    # 1/(s (1 + s**-a)) = s**(a-1)/(s**a + 1) inverts to E_a(-t**a)
    a = 0.6
    f = lambda s: s ** (a - 1) / (s**a + 1)
    for t in (0.5, 5.0, 500.0):
        assert invert_laplace(f, t) == pytest.approx(ml_e(a, 1.0, -(t**a)), abs=1e-9)


def test_inversion_matches_mm1():
    assert p00_time_domain(5.0, Q(0.3, 1.0)) == pytest.approx(mm1_p0(0.3, 5.0)[0], abs=1e-6)


def test_talbot_vector_and_trailing_axes():
    P = Q(0.3, 0.7)
    t = np.array([1.0, 10.0, 100.0])
    scalar = [talbot(lambda s: lt_p00(s, P), ti) for ti in t]
    np.testing.assert_allclose(talbot(lambda s: lt_p00(s, P), t), scalar, rtol=1e-14)
    vec = talbot(lambda s: lt_p0n_vector(s, P, 300), t)
    assert vec.shape == (3, 301)
    np.testing.assert_allclose(vec[:, 0], scalar, rtol=1e-10)
    np.testing.assert_allclose(vec.sum(axis=1), 1.0, atol=1e-9)


def test_stehfest_agrees_with_talbot():
    P = Q(0.7, 0.6)
    f = lambda s: lt_p00(s, P)
    for t in (1.0, 100.0):
        assert stehfest(f, t) == pytest.approx(talbot(f, t), abs=1e-9)


def test_inversion_error_on_disagreement():
    # the multiprecision branch describes a different function
    def inconsistent(s):
        return 2 / s if isinstance(s, mpmath.mpf) else 1 / s

    with pytest.raises(InversionError):
        invert_laplace(inconsistent, 1.0)


def test_inversion_domain():
    with pytest.raises(DomainError):
        invert_laplace(lambda s: 1 / s, 0.0)
    with pytest.raises(DomainError):
        talbot(lambda s: 1 / s, 1.0, nodes=1)


# time-domain laws


def test_p00_regimes():
    assert p00_time_domain(1e4, Q(0.3, 0.7)) == pytest.approx(4 / 7, abs=1e-2)
    v = p00_time_domain(1e4, Q(0.7, 0.6))
    assert v * 1e4**0.6 == pytest.approx(1 / (0.4 * math.gamma(0.4)), rel=0.10)
    v = p00_time_domain(1e4, Q(0.5, 0.8))
    assert v * 1e4**0.4 == pytest.approx(math.sqrt(2) / math.gamma(0.6), rel=0.10)


@pytest.mark.parametrize("p,alpha", [(0.3, 0.7), (0.5, 0.8), (0.7, 0.6)])
def test_p00_asymptotic_ratio_tends_to_one(p, alpha):
    P = Q(p, alpha)
    t = np.array([1e3, 1e5, 1e7])
    gaps = np.abs(p00_time_domain(t, P, cross_check=False) / p00_asymptotic(t, P) - 1)
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 0.02


def test_p00_in_unit_interval_and_starts_at_one():
    P = Q(0.6, 0.5)
    t = np.logspace(-4, 6, 41)
    v = p00_time_domain(t, P, cross_check=False)
    assert np.all((v >= 0) & (v <= 1))
    assert v[0] == pytest.approx(1.0, abs=1e-2)


def test_tv_examples():
    P = Q(0.3, 0.7)
    assert tv_distance_to_equilibrium(1e4, P) < 0.05
    assert tv_distance_to_equilibrium(0.0, Q(1 / 3, 0.7)) == pytest.approx(0.5)
    t = np.array([1e2, 1e3, 1e4])
    slope = np.polyfit(np.log(t), np.log(tv_distance_to_equilibrium(t, P)), 1)[0]
    assert slope == pytest.approx(-0.7, abs=0.1)


@pytest.mark.parametrize("alpha", [0.4, 0.7, 1.0])
def test_tv_decreasing(alpha):
    v = tv_distance_to_equilibrium(np.logspace(-3, 5, 60), Q(0.3, alpha))
    assert np.all((v >= 0) & (v <= 1))
    # nonincreasing up to the inversion noise floor
    assert np.all(np.diff(v) <= 1e-10)


def test_tv_matches_mm1():
    probs = mm1_p0(0.3, 4.0, 300)
    pi = equilibrium_pmf(0.3, np.arange(301))
    want = 0.5 * np.abs(probs - pi).sum()
    assert tv_distance_to_equilibrium(4.0, Q(0.3, 1.0), trunc=300) == pytest.approx(want, abs=1e-8)


def test_tv_domain():
    with pytest.raises(DomainError):
        tv_distance_to_equilibrium(1.0, Q(0.5, 0.7))
    with pytest.raises(DomainError):
        tv_distance_to_equilibrium(1.0, Q(0.45, 0.7), trunc=20)


def test_mixing_time_examples():
    P = Q(0.3, 0.7)
    assert mixing_time(1.0, P) == 0.0
    assert mixing_time(0.5, P) == 0.0  # already within 1 - pi_0 at t = 0
    t1, t05 = mixing_time(0.1, P), mixing_time(0.05, P)
    assert t05 >= t1 > 0
    assert tv_distance_to_equilibrium(t1, P) <= 0.1
    assert tv_distance_to_equilibrium(t1 * (1 - 1e-4), P) > 0.1
    with pytest.raises(DomainError):
        mixing_time(1e-9, P)


def test_mixing_slope():
    P = Q(0.3, 0.7)
    eps = np.array([0.1, 0.05, 0.02, 0.01])
    T = np.array([mixing_time(e, P) for e in eps])
    slope = np.polyfit(np.log(1 / eps), np.log(T), 1)[0]
    assert slope == pytest.approx(1 / 0.7, rel=0.15)


# fractional forward equations


def test_kolmogorov_alpha_one_is_mm1():
    sol = solve_fractional_kolmogorov(Q(0.3, 1.0), 0.0, 200, [5.0])
    np.testing.assert_allclose(sol[0], mm1_p0(0.3, 5.0), atol=1e-6)


def test_kolmogorov_matches_inversion():
    P = Q(0.3, 0.7)
    sol = solve_fractional_kolmogorov(P, 0.0, 100, [1.0, 10.0, 50.0])
    np.testing.assert_allclose(sol[:, 0], p00_time_domain(np.array([1.0, 10.0, 50.0]), P), atol=1e-3)
    assert np.all(sol >= 0)
    assert np.all(sol.sum(axis=1) <= 1 + 1e-12)


def test_kolmogorov_lazy_holding_slows_time():
    # holding with probability beta thins the clock: same law at lam (1-beta)**(1/alpha)
    a, beta = 0.6, 0.5
    lazy = solve_fractional_kolmogorov(Q(0.4, a), beta, 60, [20.0])
    thinned = Q(0.4, a, (1 - beta) ** (1 / a))
    assert lazy[0, 0] == pytest.approx(p00_time_domain(20.0, thinned), abs=1e-3)


def test_kolmogorov_first_row_is_initial_law():
    sol = solve_fractional_kolmogorov(Q(0.3, 0.5), 0.0, 20, [0.0, 1.0])
    assert sol[0, 0] == 1.0 and sol[0, 1:].sum() == 0.0


def test_kolmogorov_domain():
    with pytest.raises(DomainError):
        solve_fractional_kolmogorov(Q(0.3, 0.7), 0.0, 5, [1.0])
    with pytest.raises(DomainError):
        solve_fractional_kolmogorov(Q(0.3, 0.7), 0.0, 20, [2.0, 1.0])
    with pytest.raises(DomainError):
        # drift upwards pushes mass past a short ladder
        solve_fractional_kolmogorov(Q(0.9, 0.9), 0.0, 10, [50.0])


# competing clocks


def test_arrival_prob_examples():
    for a in (0.3, 0.5, 0.8):
        assert arrival_prob(a, a, 1.0) == pytest.approx(0.5, abs=1e-3)
    assert arrival_prob(1.0, 0.5, 0.5) == pytest.approx(math.sqrt(0.5) / (1 + math.sqrt(0.5)), abs=1e-6)
    rho = np.linspace(0.1, 10, 25)
    vals = [arrival_prob(0.4, 0.7, r) for r in rho]
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize(
    "alpha,beta,rho", [(0.3, 0.7, 0.3), (0.8, 0.2, 2.0), (0.5, 0.5, 5.0), (0.9, 0.9, 0.1), (1.0, 0.6, 3.0)]
)
def test_arrival_prob_matches_spectral_oracle(alpha, beta, rho):
    assert arrival_prob(alpha, beta, rho) == pytest.approx(spectral_arrival_prob(alpha, beta, rho), abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.1, 1.0), beta=st.floats(0.1, 1.0), rho=st.floats(0.05, 20.0))
def test_arrival_prob_exchange_symmetry(alpha, beta, rho):
    assert arrival_prob(alpha, beta, rho) + arrival_prob(beta, alpha, 1 / rho) == pytest.approx(1.0, abs=1e-6)


def test_critical_rho():
    for b in (0.4, 0.8):
        assert critical_rho(1.0, b) == pytest.approx(1.0, abs=1e-4)
    assert critical_rho(0.6, 0.6) == pytest.approx(1.0, abs=1e-3)
    assert critical_rho(0.4, 0.9) == pytest.approx(1.0, abs=1e-3)


def test_arrival_prob_domain():
    with pytest.raises(DomainError):
        arrival_prob(0.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        arrival_prob(0.5, 0.5, -1.0)
