import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from cmgf.errors import DomainError, ParameterError
from cmgf.mgf import (Strip, exponential_mgf, nig_from_standardized, nig_mgf, normal_mgf,
                      poisson_mgf)
from cmgf.moments import (MomentResult, MomentSpec, absolute_moment, cdf, cross_moments,
                          default_abscissa, expected_shortfall, integer_moment, lattice_kernel,
                          moment_summary, nonneg_moment, quantile, reciprocal_gamma,
                          summary_from_raw, tail_moment, vanishing_integral)

N01 = normal_mgf()
NIG_A = nig_mgf(nig_from_standardized(0.5, -1 / 3))
NIG_B = nig_mgf(nig_from_standardized(1 / 8, -1 / 16))


def normal_abs(r):
    return math.gamma((r + 1) / 2) * 2 ** (r / 2) / math.sqrt(math.pi)


@pytest.mark.parametrize("r", [-0.5, 0.5, 1, 1.5, 2, 3, 4])
def test_normal_absolute(r):
    assert absolute_moment(N01, MomentSpec(r)) == pytest.approx(normal_abs(r), rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", range(1, 7))
def test_exponential_identity(lam, k):
    v = nonneg_moment(exponential_mgf(lam), MomentSpec(k))
    assert v == pytest.approx(math.factorial(k) * lam ** -k, rel=1e-12)


@pytest.mark.parametrize("m,xc", [(NIG_A, (0.5, -1 / 3)), (NIG_B, (1 / 8, -1 / 16))])
def test_nig_known(m, xc):
    xi, chi = xc
    assert absolute_moment(m, MomentSpec(2)) == pytest.approx(1.0, rel=1e-12)
    assert absolute_moment(m, MomentSpec(4)) == pytest.approx(3 * (1 + 4 * chi ** 2) / (1 - xi ** 2),
                                                              rel=1e-12)


def test_full_output_and_default_abscissa():
    res = absolute_moment(N01, MomentSpec(2.0), full_output=True)
    assert isinstance(res, MomentResult)
    assert res.s == default_abscissa(N01) == 1.0
    assert res.err_estimate < 1e-10
    assert default_abscissa(NIG_A) == pytest.approx(0.5 * (-NIG_A.strip.s_min))


@given(st.floats(0.05, 1.0), st.sampled_from([-0.5, 0.5, 1.0, 1.5, 2.0, 3.0]))
@settings(max_examples=30, deadline=None)
def test_s_invariance_normal(s, r):
    a = absolute_moment(N01, MomentSpec(r, contour_s=s))
    assert a == pytest.approx(normal_abs(r), rel=1e-9)


@given(st.floats(0.1, 0.95), st.sampled_from([-0.5, 0.5, 1.5, 3.0]), st.floats(-1, 1))
@settings(max_examples=30, deadline=None)
def test_s_invariance_nig(frac, r, xi):
    s_max = 0.5 * min(-NIG_A.strip.s_min, NIG_A.strip.s_max)
    a = absolute_moment(NIG_A, MomentSpec(r, xi, contour_s=frac * 2 * s_max * 0.99))
    b = absolute_moment(NIG_A, MomentSpec(r, xi))
    assert a == pytest.approx(b, rel=1e-8)


@pytest.mark.parametrize("m", [exponential_mgf(1.3), poisson_mgf(2.5)], ids=["exp", "pois"])
@pytest.mark.parametrize("r", [0.5, 1.0, 1.5, 2.0])
def test_formula_agreement(m, r):
    xi = -0.5 if m.lattice_span else 0.0
    a = absolute_moment(m, MomentSpec(r, xi))
    b = nonneg_moment(m, MomentSpec(r, xi))
    assert a == pytest.approx(b, rel=1e-8)
    if float(r).is_integer():
        assert integer_moment(m, int(r), xi) == pytest.approx(b, rel=1e-8)


@pytest.mark.parametrize("m", [N01, NIG_A, NIG_B, exponential_mgf(2.0)])
@pytest.mark.parametrize("k", [2, 4])
def test_even_bridge(m, k):
    assert integer_moment(m, k, 0.3) == pytest.approx(absolute_moment(m, MomentSpec(k, 0.3)),
                                                      rel=1e-8)


def test_poisson_against_pmf():
    lam = 3.2
    m = poisson_mgf(lam)
    k = np.arange(200)
    pk = stats.poisson.pmf(k, lam)
    for r in (0.5, 1.0, 1.5, 2.0):
        assert nonneg_moment(m, MomentSpec(r)) == pytest.approx(np.sum(pk * k ** r), rel=1e-10)
    assert absolute_moment(m, MomentSpec(0.5, 1.3)) == pytest.approx(
        np.sum(pk * np.abs(k - 1.3) ** 0.5), rel=1e-10)
    assert integer_moment(m, 3, 1.5) == pytest.approx(np.sum(pk * (k - 1.5) ** 3), rel=1e-10)
    assert integer_moment(m, 2) == pytest.approx(lam + lam * lam, rel=1e-12)


def test_lattice_kernel_direct_sum():
    a = np.array([0.5 + 0.3j])
    L, q = 2 * math.pi, 2.5
    w = np.exp(0.7j)
    n = np.arange(1, 200000)
    direct = np.sum(w ** n * (a[0] + 1j * n * L) ** -q)
    assert abs(lattice_kernel(a, w, L, q)[0] - direct) < 1e-9
    direct1 = np.sum((a[0] + 1j * n * L) ** -q)
    assert abs(lattice_kernel(a, 1.0, L, q)[0] - direct1) < 1e-9


@pytest.mark.parametrize("x", [-0.5, -2.0])
@pytest.mark.parametrize("s", [0.5, 1.0])
@pytest.mark.parametrize("r", [0.5, 2.0])
def test_vanishing_integral(x, s, r):
    assert abs(vanishing_integral(x, s, r)) < 1e-9


def test_vanishing_integral_positive_x_is_not_zero():
    # for x > 0 the same integral gives pi x^r / Gamma(r+1)
    v = vanishing_integral(1.5, 1.0, 2.0)
    assert v == pytest.approx(math.pi * 1.5 ** 2 / 2.0, rel=1e-9)


@pytest.mark.parametrize("xi", [-1.0, 0.0, 1.0])
def test_gil_pelaez_vs_tail(xi):
    below = tail_moment(N01, 1, xi, "below") + xi * cdf(N01, xi)
    assert below == pytest.approx(-stats.norm.pdf(xi), abs=1e-8)
    above = tail_moment(N01, 1, xi, "above")
    assert above == pytest.approx(stats.norm.pdf(xi) - xi * stats.norm.sf(xi), abs=1e-10)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_tails_add_up(k):
    m = NIG_A
    tot = tail_moment(m, k, 0.2, "above") + tail_moment(m, k, 0.2, "below")
    assert tot == pytest.approx(integer_moment(m, k, 0.2), rel=1e-9, abs=1e-12)


def test_lyapunov():
    grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    for m in (N01, NIG_A, NIG_B):
        v = {r: absolute_moment(m, MomentSpec(r)) for r in grid}
        for a in grid:
            for b in grid:
                mid = 0.5 * (a + b)
                if mid in v:
                    assert v[mid] <= math.sqrt(v[a] * v[b]) + 1e-10


@pytest.mark.parametrize("r", [-0.5, 0.0, 1.0, 2.0, 2.5])
def test_reciprocal_gamma(r):
    assert abs(reciprocal_gamma(r) - 1 / math.gamma(r / 2 + 1)) < 1e-12


def test_cdf_values():
    assert cdf(N01, 1.96) == pytest.approx(stats.norm.cdf(1.96), abs=1e-12)
    assert cdf(exponential_mgf(1.0), math.log(2)) == pytest.approx(0.5, abs=1e-10)
    res = cdf(N01, 0.0, full_output=True)
    assert res.value == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(DomainError):
        cdf(poisson_mgf(1.0), 0.5)


@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.5])
def test_quantile_es_normal(alpha):
    q, es = expected_shortfall(N01, alpha, full_output=True)
    zq = stats.norm.ppf(alpha)
    assert q == pytest.approx(zq, abs=1e-9)
    assert es == pytest.approx(stats.norm.pdf(zq) / alpha, abs=1e-8)
    assert expected_shortfall(N01, alpha) == pytest.approx(es)


def test_quantile_domain():
    for a in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            quantile(N01, a)


def test_summary():
    assert moment_summary(exponential_mgf(1.0)) == pytest.approx((1, 1, 2, 9), rel=1e-10)
    mu, sd, sk, ku = moment_summary(normal_mgf(0.7, 2.0))
    assert (mu, sd, sk, ku) == pytest.approx((0.7, 2.0, 0.0, 3.0), abs=1e-9)
    raw = (1.0, 2.0, 5.0, 15.0)  # Poisson(1)
    assert summary_from_raw(*raw) == pytest.approx((1, 1, 1, 4))


def test_cross_moments_bivariate_normal():
    rho, s1, s2, m1, m2_ = 0.6, 1.0, 1.5, 0.3, -0.2
    c = rho * s1 * s2

    def m2(z1, z2):
        return np.exp(m1 * z1 + m2_ * z2 + 0.5 * (s1 ** 2 * z1 ** 2 + 2 * c * z1 * z2
                                                  + s2 ** 2 * z2 ** 2))

    inf = Strip(-math.inf, math.inf)
    e12, e122 = cross_moments(m2, [inf] * 4)
    assert e12 == pytest.approx(c + m1 * m2_, rel=1e-10)
    # E[X1 X2^2] for a bivariate normal
    ref = m1 * (s2 ** 2 + m2_ ** 2) + 2 * m2_ * c
    assert e122 == pytest.approx(ref, rel=1e-9)
    with pytest.raises(ParameterError):
        cross_moments(m2)


def test_complex_order():
    v = absolute_moment(exponential_mgf(1.0), MomentSpec(1.5 + 0.5j))
    assert abs(v - complex(mpmath.gamma(2.5 + 0.5j))) < 1e-12
    w = absolute_moment(N01, MomentSpec(1.0 + 0.3j))
    r = 1.0 + 0.3j
    ref = complex(mpmath.gamma((r + 1) / 2) * mpmath.power(2, r / 2) / mpmath.sqrt(mpmath.pi))
    assert abs(w - ref) < 1e-11


def test_preconditions():
    with pytest.raises(DomainError, match="Re\\(r\\) > -1 required"):
        absolute_moment(N01, MomentSpec(-1.5))
    with pytest.raises(DomainError, match="atom"):
        nonneg_moment(poisson_mgf(1.0), MomentSpec(0.0))
    with pytest.raises(DomainError, match="atom"):
        absolute_moment(poisson_mgf(1.0), MomentSpec(-0.5, 2.0))
    with pytest.raises(DomainError):
        nonneg_moment(N01, MomentSpec(1.0))
    with pytest.raises(DomainError):
        tail_moment(N01, 2)
    with pytest.raises(ParameterError):
        tail_moment(N01, 1, side="left")
    with pytest.raises(DomainError):
        integer_moment(N01, 0)
    with pytest.raises(DomainError):
        absolute_moment(NIG_A, MomentSpec(1.0, contour_s=5.0))
