import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmgf.errors import DomainError, ParameterError
from cmgf.mgf import (MgfModel, NigParams, Strip, bivariate_slices, exponential_mgf,
                      nig_from_standardized, nig_mgf, normal_mgf, poisson_mgf)

NIG_SETS = [(0.5, -1 / 3), (1 / 8, -1 / 16)]


def builtin():
    return [normal_mgf(0.3, 1.2), exponential_mgf(1.5), poisson_mgf(2.0)] + \
        [nig_mgf(nig_from_standardized(*xc)) for xc in NIG_SETS]


def test_normal_examples():
    m = normal_mgf(0, 1)
    assert m(0) == 1
    assert m(1.0) == pytest.approx(1.6487212707, rel=1e-10)
    assert m(1j) == pytest.approx(0.6065306597, rel=1e-10)


@pytest.mark.parametrize("m", builtin(), ids=lambda m: m.descriptor)
def test_m0_is_one(m):
    assert abs(m(0.0) - 1.0) < 1e-14


@pytest.mark.parametrize("m", builtin(), ids=lambda m: m.descriptor)
@given(u=st.floats(-0.9, 0.9), t=st.floats(-50, 50))
@settings(max_examples=50, deadline=None)
def test_hermitian(m, u, t):
    lo, hi = m.strip
    bound = 0.9 * min(abs(lo), hi, 5.0)
    z = complex(u * bound, t)
    a, b = m(z), m(np.conj(z))
    assert abs(b - np.conj(a)) <= 1e-12 * max(abs(a), 1e-300)


def test_strip_invariants():
    with pytest.raises(ParameterError):
        Strip(0.0, 1.0)
    s = Strip(-1.0, 2.0)
    assert s.contains(1.5) and not s.contains(2.0) and not s.contains(2.0 - 1e-13)
    assert tuple(s) == (-1.0, 2.0)


def test_strip_rejected_outside():
    m = exponential_mgf(1.0)
    with pytest.raises(DomainError):
        m(1.0 + 0.5j)
    with pytest.raises(DomainError):
        m(np.array([0.2, 1.0 - 1e-13]))


def test_parameter_errors():
    with pytest.raises(ParameterError):
        normal_mgf(0, 0)
    with pytest.raises(ParameterError):
        exponential_mgf(-1)
    with pytest.raises(ParameterError):
        poisson_mgf(0)
    with pytest.raises(ParameterError):
        NigParams(0, 1, 1, 2)
    with pytest.raises(ParameterError):
        NigParams(0, -1, 2, 1)
    with pytest.raises(ParameterError):
        nig_from_standardized(0.5, 0.6)


@pytest.mark.parametrize("xc", NIG_SETS)
def test_nig_standardized_mean_variance(xc):
    p = nig_from_standardized(*xc)
    assert p.mean == pytest.approx(0.0, abs=1e-14)
    assert p.variance == pytest.approx(1.0, rel=1e-14)
    m = nig_mgf(p)
    # numerical derivatives of the log-MGF at zero
    h = 1e-4
    k = lambda x: np.log(m(x).real)
    mean = (k(h) - k(-h)) / (2 * h)
    var = (k(h) - 2 * k(0.0) + k(-h)) / (h * h)
    assert abs(mean) < 1e-6
    assert abs(var - 1.0) < 1e-5


def test_nig_strip_and_log():
    p = nig_from_standardized(0.5, -1 / 3)
    m = nig_mgf(p)
    assert tuple(m.strip) == pytest.approx((-p.tail - p.asym, p.tail - p.asym))
    z = np.array([0.3 + 2j, -0.4 - 7j])
    assert np.allclose(np.exp(m.log_evaluate(z)), m(z), rtol=1e-14)


def test_poisson_lattice_and_atoms():
    m = poisson_mgf(3.0)
    assert m.lattice_span == 1.0 and m.support_min == 0.0
    assert m.has_atom(0.0) and m.has_atom(2.0) and not m.has_atom(0.5)
    assert not normal_mgf().has_atom(0.0)
    # periodic along vertical lines
    assert m(0.5 + 1j) == pytest.approx(m(0.5 + 1j + 2j * math.pi), rel=1e-13)


def test_model_without_log_func():
    m = MgfModel(lambda z: np.exp(0.5 * z * z), Strip(-math.inf, math.inf))
    assert m.log_evaluate(1.0) == pytest.approx(0.5)


def test_bivariate_slices():
    # independent N(0,1) and N(0,4)
    m2 = lambda z1, z2: np.exp(0.5 * z1 * z1 + 2.0 * z2 * z2)
    inf = (-math.inf, math.inf)
    sl = bivariate_slices(m2, [inf] * 4)
    assert sl.sum(1.0) == pytest.approx(math.exp(2.5))
    assert sl.difference(1.0) == pytest.approx(math.exp(2.5))
    assert sl.marginal2(1.0) == pytest.approx(math.exp(2.0))
    with pytest.raises(ParameterError):
        bivariate_slices(m2, [inf] * 3)
