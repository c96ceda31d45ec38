import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmgf.dynamic import (PROBE_MARGIN, ArpParams, ArpState, HargParams, HargState, HngParams,
                          HngState, _arp_real_ok, _harg_real_ok, _hng_real_ok, arp_mgf,
                          arp_probe, build_model, harg_coefficients, harg_mgf, harg_probe,
                          hng_coefficients, hng_mgf, hng_probe, term_structure)
from cmgf.errors import DomainError, ParameterError
from cmgf.moments import MomentSpec, integer_moment, nonneg_moment
from cmgf.oracle import two_step_arp, two_step_harg, two_step_hng

HNG = HngParams(omega=1.15e-14, beta=0.7593, alpha=5.67e-6, gamma=185.5, lambda_rp=1.9781)
HARG = HargParams(0.4896, 0.2789, 0.0357, 0.0053, 0.9644)
ARP = ArpParams(0.1548, 0.7473, 0.2043)
LAGS = [HARG.mean / 10] * 22
POINTS = [0.5 + 0.3j, 1 + 5j, 0.2 - 2j, -0.7 + 1j, 1.5 + 20j]


def models(H):
    return [hng_mgf(HNG, HngState(HNG.mean_variance, H)),
            harg_mgf(HARG, HargState(LAGS, H)),
            arp_mgf(ARP, ArpState(ARP.mean / 10, H))]


def test_fixture_derived_quantities():
    assert HNG.persistence == pytest.approx(0.7593 + 5.67e-6 * 185.5 ** 2)
    assert HNG.mean_variance == pytest.approx(1.2436e-4, rel=1e-3)
    assert HARG.mean == pytest.approx(0.0261048, rel=1e-5)
    assert ARP.mean == pytest.approx(3.19835, rel=1e-5)
    phi = HARG.phi
    assert phi.size == 22 and phi[0] == 0.4896
    assert np.allclose(phi[1:5], 0.2789 / 4) and np.allclose(phi[5:], 0.0357 / 17)
    assert phi.sum() == pytest.approx(HARG.persistence)


def test_harg_from_intensity():
    p = HargParams.from_intensity(0.4896 / 0.0053, 0.2789 / 0.0053, 0.0357 / 0.0053, 0.0053, 0.9644)
    assert p.phi_d == pytest.approx(HARG.phi_d)
    assert p.mean == pytest.approx(HARG.mean)


@pytest.mark.parametrize("H", [1, 2, 21, 90])
def test_m0_and_hermitian(H):
    for m in models(H):
        assert abs(m(0.0) - 1.0) < 1e-14
        lo, hi = m.strip
        for z in (0.5 * hi + 3j, 0.5 * lo - 7j):
            assert abs(m(np.conj(z)) - np.conj(m(z))) <= 1e-12 * abs(m(z))


@pytest.mark.parametrize("z", POINTS)
def test_two_step_brute_force(z):
    h0 = HNG.mean_variance
    assert abs(hng_mgf(HNG, HngState(h0, 2))(z) / two_step_hng(HNG, h0, z) - 1) < 1e-8
    assert abs(harg_mgf(HARG, HargState(LAGS, 2))(z) / two_step_harg(HARG, LAGS, z) - 1) < 1e-8
    lam = ARP.mean / 10
    assert abs(arp_mgf(ARP, ArpState(lam, 2))(z) / two_step_arp(ARP, lam, z) - 1) < 1e-8


def test_harg_one_step_mean():
    m = harg_mgf(HARG, HargState(LAGS, 1))
    ref = HARG.eta * HARG.delta + float(np.dot(HARG.phi, LAGS))
    assert abs(integer_moment(m, 1) - ref) < 1e-9


def test_plain_arg():
    p = HargParams(0.5, 0.0, 0.0, 0.01, 2.0, p=1)
    m = harg_mgf(p, HargState([0.04], 3))
    # AR(1) mean forecast
    mu = p.eta * p.delta
    x = 0.04
    for _ in range(3):
        x = mu + 0.5 * x
    assert integer_moment(m, 1) == pytest.approx(x, rel=1e-10)


@pytest.mark.parametrize("H", [1, 10, 50])
def test_arp_stationary(H):
    m = arp_mgf(ARP, ArpState(ARP.mean, H))
    assert abs(nonneg_moment(m, MomentSpec(1.0)) - ARP.mean) < 1e-9


def test_arp_mean_forecast():
    lam0 = 1.0
    H = 7
    lam, tot = lam0, 0.0
    for _ in range(H):
        tot += lam
        lam = ARP.omega + (ARP.beta + ARP.alpha) * lam
    m = arp_mgf(ARP, ArpState(lam0, H))
    assert integer_moment(m, 1) == pytest.approx(tot / H, rel=1e-10)


def test_hng_mean():
    # E[R] = H (lambda - 1/2) E[h] at the stationary variance (r_f = 0)
    H = 21
    m = hng_mgf(HNG, HngState(HNG.mean_variance, H))
    ref = H * (HNG.lambda_rp - 0.5) * HNG.mean_variance
    assert integer_moment(m, 1) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("probe,ok,params", [
    (hng_probe, _hng_real_ok, (HngParams(1e-6, 0.6, 0.05, 2.0, 2.0),)),
    (harg_probe, _harg_real_ok, (HargParams(0.45, 0.3, 0.2, 0.5, 1.0),)),
])
@pytest.mark.parametrize("H", [5, 60])
def test_probe_postcondition(probe, ok, params, H):
    strip = probe(*params, H)
    for edge, sign in ((strip.s_max, 1), (strip.s_min, -1)):
        raw = edge / PROBE_MARGIN
        if abs(raw) >= 2.0 - 1e-9:
            continue  # capped
        assert ok(*params, H, raw * (1 - 1e-6))
        assert not ok(*params, H, raw * (1 + 1e-6) + sign * 1e-9)


def test_probes_cached_and_fixture_strips():
    assert hng_probe(HNG, 21) is hng_probe(HNG, 21)
    for m in models(126):
        lo, hi = m.strip
        assert lo == pytest.approx(-1.8) and hi == pytest.approx(1.8)


def test_arp_probe_overflow():
    p = ArpParams(5.0, 0.5, 0.45)
    strip = arp_probe(p, 200, 50.0)
    assert strip.s_max < 1.8
    assert not _arp_real_ok(p, 200, 50.0, strip.s_max / PROBE_MARGIN * 1.01)


def test_hng_recursion_domain_error():
    p = HngParams(1e-6, 0.6, 0.05, 2.0, 2.0)
    with pytest.raises(DomainError, match="h="):
        hng_coefficients(p, 30, np.array([2.0]))


def test_harg_recursion_domain_error():
    with pytest.raises(DomainError):
        harg_coefficients(HARG, 3, np.array([1.0 / HARG.eta + 1.0]))


def test_overflow_policy():
    m = arp_mgf(ArpParams(0.1548, 0.7473, 0.2043), ArpState(3e3, 5))
    with pytest.raises(DomainError, match="700"):
        m.log_evaluate(np.array([1.0]))


@given(st.floats(-1.5, 1.5), st.floats(-30, 30), st.sampled_from([1, 5, 30]))
@settings(max_examples=40, deadline=None)
def test_hermitian_property(s, t, H):
    for m in models(H):
        z = complex(s, t)
        a = m(z)
        assert abs(m(np.conj(z)) - np.conj(a)) <= 1e-12 * abs(a) + 1e-300


def test_state_validation():
    with pytest.raises(ParameterError):
        HngState(-1.0, 5)
    with pytest.raises(ParameterError):
        HngState(1e-4, 0)
    with pytest.raises(ParameterError):
        HargState([-1.0] * 22, 1)
    with pytest.raises(ParameterError):
        ArpState(1.0, 2.5)
    with pytest.raises(ParameterError):
        harg_mgf(HARG, HargState([0.01] * 5, 1))
    with pytest.raises(ParameterError):
        ArpParams(0.0, 0.5, 0.2)
    with pytest.raises(ParameterError):
        build_model("garch", HNG, 1.0, 1)
    with pytest.warns(RuntimeWarning):
        ArpParams(0.1, 0.6, 0.5)


def test_term_structure_arp_constant():
    ts = term_structure("arp", ARP, ARP.mean, [1.0], range(1, 11))
    vals = [c.value for c in ts.cells]
    assert np.allclose(vals, ARP.mean, rtol=1e-9)
    assert [c.horizon for c in ts.cells] == list(range(1, 11))
    assert ts.value(5, 1.0) == vals[4]
    assert ts.as_array().shape == (10, 4)


def test_term_structure_summary_and_threads():
    a = term_structure("hng", HNG, HNG.mean_variance, [2.0], [21, 63], summary=True)
    b = term_structure("hng", HNG, HNG.mean_variance, [2.0], [63, 21], summary=True, threads=2)
    assert [c.value for c in a.cells] == [c.value for c in b.cells]
    mu, sd, skew, kurt = a.summary[21]
    assert sd > 0 and skew < 0 and kurt > 3


def test_term_structure_cell_errors():
    ts = term_structure("hng", HNG, HNG.mean_variance, [1.5], [21], variant="integer")
    assert ts.cells[0].error and math.isnan(ts.cells[0].value)
    with pytest.raises(ParameterError):
        term_structure("arp", ARP, 1.0, [1.0], [])
