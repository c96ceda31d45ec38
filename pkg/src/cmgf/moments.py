"""Moments, tail moments, CDF, quantiles and expected shortfall from an MGF.

Every routine integrates the complex-extended MGF along the vertical line
``z = s + it``. For real orders the half-line form

    E|X - xi|^r = Gamma(r+1)/pi * int_0^inf Re[(e^{-xi z} M(z) + e^{xi z} M(-z)) / z^{r+1}] dt

is used; complex orders use the full-line form with prefactor
``Gamma(r+1) / (2 pi)``.

Laws on a lattice have ``t -> M(s + it)`` periodic, so the integrand never
decays beyond the ``z^{-(r+1)}`` factor. For those the line is folded onto a
single period and the periodic images are summed analytically in a kernel
(direct sum plus an Euler-Maclaurin or Boole-type tail).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.optimize import brentq

from .errors import ComputationError, ConvergenceError, DomainError, ParameterError, RootError
from .mgf import BivariateSlices, MgfModel, bivariate_slices
from .quadrature import QuadConfig, _half_line, integrate_half_line, integrate_interval_vec
from .special import gamma_fn

DEFAULT_QUAD = QuadConfig(abs_tol=1e-13, rel_tol=1e-11)

@dataclass(frozen=True)
class MomentSpec:
    """Order, shift and contour settings for a moment computation.

    Parameters
    ----------
    order : float or complex
        Moment order ``r``.
    shift : float
        Centre ``xi``.
    contour_s : float, optional
        Abscissa override; the default comes from :func:`default_abscissa`.
    quad : QuadConfig
    """

    order: Union[float, complex]
    shift: float = 0.0
    contour_s: Optional[float] = None
    quad: QuadConfig = field(default_factory=lambda: DEFAULT_QUAD)


class MomentResult(NamedTuple):
    value: Union[float, complex]
    err_estimate: float
    s: float
    panels: int
    clamped: bool = False


def default_abscissa(m: MgfModel) -> float:
    """Contour abscissa ``min(1, s_max/2, -s_min/2)``.

    Both ``s`` and ``-s`` are then inside the strip, as the two-sided
    formulas need.
    """
    s_min, s_max = m.strip
    if not s_max > 0:
        raise DomainError(f"{m.descriptor}: strip has no positive part")
    return float(min(1.0, 0.5 * s_max, -0.5 * s_min))


def _as_order(r):
    if isinstance(r, complex) or np.iscomplexobj(r):
        r = complex(r)
        if r.imag == 0.0:
            return r.real, False
        return r, True
    return float(r), False


def _check_order(m, r, xi):
    re = r.real if isinstance(r, complex) else r
    if not re > -1.0:
        raise DomainError(f"Re(r) > -1 required, got r={r}")
    if m.has_atom(xi) and not re > 0.0:
        raise DomainError(f"Re(r) > 0 required when the law has an atom at xi={xi:g}")


def _feasible(m, s, both):
    if not m.strip.contains(s):
        raise DomainError(f"abscissa s={s:g} outside strip ({m.strip.s_min:g}, {m.strip.s_max:g})")
    if both and not m.strip.contains(-s):
        raise DomainError(f"abscissa -s={-s:g} outside strip ({m.strip.s_min:g}, {m.strip.s_max:g})")


def _pow_neg(z, q):
    # z^{-q} on the principal branch
    return np.exp(-q * np.log(z))


def _terms_value(m, terms, xi, z):
    """Sum of ``c * exp(-sigma xi z) M(sigma z)`` over ``terms``."""
    out = 0.0
    for coef, sigma in terms:
        zz = sigma * z
        val = m.func(zz)
        if xi != 0.0:
            val = val * np.exp(-xi * zz)
        out = out + coef * val
    return out


def _re_terms_pow(m, terms, xi, z, q):
    """``Re[sum c e^{-sigma xi z} M(sigma z) z^{-q}]`` for real ``q``.

    With a log-MGF available the exponents are summed first and
    ``Re e^E = e^{Re E} cos(Im E)`` avoids the imaginary half of each
    complex exponential.
    """
    if m.log_func is None:
        return np.real(_terms_value(m, terms, xi, z) * _pow_neg(z, q))
    lz = -q * np.log(z)
    out = 0.0
    for coef, sigma in terms:
        zz = z if sigma == 1 else -z
        e = m.log_func(zz) + lz
        if xi != 0.0:
            e = e - xi * zz
        out = out + coef * (np.exp(e.real) * np.cos(e.imag))
    return out


# ---------------------------------------------------------------- lattice fold

_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730,
              7.0 / 6, -3617.0 / 510)
_FOLD_MAX_N = 4096


def _falling(q, m):
    out = 1.0
    for j in range(m):
        out *= (-q - j)
    return out


def _boole_coefs(w, count):
    c = [1.0 / (1.0 - w)]
    ratio = w / (1.0 - w)
    for m in range(1, count):
        c.append(ratio * sum(c[m - k] / math.factorial(k) for k in range(1, m + 1)))
    return c


def lattice_kernel(a, w, L, q):
    """``K(a) = sum_{n >= 1} w^n (a + i n L)^{-q}`` for an array ``a``.

    ``w`` is a unit-modulus complex number. For ``w = 1`` the tail beyond a
    direct sum uses Euler-Maclaurin (needs ``Re q > 1``); otherwise a
    Boole-type expansion in derivatives of ``x -> (a + i x L)^{-q}``.
    Returns ``None`` when ``w`` is so close to one that neither applies.
    """
    a = np.asarray(a, dtype=complex)
    iL = 1j * L
    theta = abs(np.angle(w))
    if theta < 1e-14:
        if not np.real(q) > 1.0:
            raise DomainError("lattice kernel diverges for Re(q) <= 1 at an atom")
        n_direct = 16
        ns = np.arange(1, n_direct)
        tot = _pow_neg(a[..., None] + iL * ns, q).sum(axis=-1)
        base = a + iL * n_direct
        tot = tot + np.exp((1.0 - q) * np.log(base)) / ((q - 1.0) * iL)
        tot = tot + 0.5 * _pow_neg(base, q)
        for j, b2j in enumerate(_BERNOULLI, start=1):
            m = 2 * j - 1
            deriv = _falling(q, m) * iL ** m * _pow_neg(base, q + m)
            tot = tot - b2j / math.factorial(2 * j) * deriv
        return tot
    n_direct = max(16, int(math.ceil((abs(q) + 30.0) / (0.3 * theta))))
    if n_direct > _FOLD_MAX_N:
        return None
    ns = np.arange(1, n_direct)
    tot = (w ** ns * _pow_neg(a[..., None] + iL * ns, q)).sum(axis=-1)
    base = a + iL * n_direct
    coefs = _boole_coefs(w, 24)
    tail = 0.0
    for m, c in enumerate(coefs):
        term = c * _falling(q, m) * iL ** m * _pow_neg(base, q + m)
        tail = tail + term
        if m > 4 and np.all(np.abs(term) <= 1e-17 * np.abs(tail)):
            break
    return tot + w ** n_direct * tail


def _fold_weights(m, terms, xi):
    L = 2.0 * math.pi / m.lattice_span
    ws = []
    for _, sigma in terms:
        k = (xi - m.support_min) / m.lattice_span
        if abs(k - round(k)) < 1e-12 * max(1.0, abs(k)):
            ws.append(1.0 + 0.0j)
        else:
            ws.append(complex(np.exp(-1j * sigma * L * (xi - m.support_min))))
    return L, ws


def _folded(m, terms, xi, s, q, quad, full):
    """Line integral folded onto one period; ``None`` if the kernel is unusable."""
    L, ws = _fold_weights(m, terms, xi)
    probe = np.array([s + 0.5j])
    for w in ws:
        if lattice_kernel(probe, w, L, q) is None:
            return None
        if full and lattice_kernel(probe, 1.0 / w, -L, q) is None:
            return None

    def parts(u):
        z = s + 1j * u
        out = 0.0
        for (coef, sigma), w in zip(terms, ws):
            f = coef * m.func(sigma * z)
            if xi != 0.0:
                f = f * np.exp(-xi * sigma * z)
            k = lattice_kernel(z, w, L, q)
            if full:
                k = k + lattice_kernel(z, 1.0 / w, -L, q)
            out = out + f * k
        return out

    def g(u):
        z = s + 1j * u
        zc = s - 1j * u
        if full:
            v = parts(u) + parts(-u) + _terms_value(m, terms, xi, z) * _pow_neg(z, q) \
                + _terms_value(m, terms, xi, zc) * _pow_neg(zc, q)
            return np.stack([v.real, v.imag])
        v = parts(u) + parts(-u) + _terms_value(m, terms, xi, z) * _pow_neg(z, q)
        return v.real

    vals, res = integrate_interval_vec(g, 0.0, 0.5 * L, quad)
    value = complex(vals[0], vals[1]) if full else float(vals[0])
    return value, res


# ---------------------------------------------------------------- line integral

def _line_integral(m, terms, xi, s, q, quad, full, period=None):
    """``int_0^inf Re[T(z) z^{-q}] dt`` (or the full-line complex integral).

    ``T(z) = sum c * exp(-sigma xi z) M(sigma z)``.
    """
    if m.lattice_span is not None:
        out = _folded(m, terms, xi, s, q, quad, full)
        if out is not None:
            return out
        period = 2.0 * math.pi / m.lattice_span
    if period is None and xi != 0.0:
        period = 2.0 * math.pi / abs(xi)
    hint = float(np.real(q))
    # the pole of z^{-q} sits at distance |s| from the line: match the first panel to it
    cfg = quad.replace(period=period, tail_exponent_hint=hint if hint > 1.0 else None,
                       base=min(quad.base, abs(s)))

    if full:
        def g(t):
            z = s + 1j * t
            zc = s - 1j * t
            v = _terms_value(m, terms, xi, z) * _pow_neg(z, q) \
                + _terms_value(m, terms, xi, zc) * _pow_neg(zc, q)
            return np.stack([v.real, v.imag])
        vals, res = _half_line(g, cfg)
        return complex(vals[0], vals[1]), res

    def g(t):
        return _re_terms_pow(m, terms, xi, s + 1j * t, q)

    res = integrate_half_line(g, cfg)
    return res.value, res


def _run(m, terms, xi, s, q, quad, full, prefactor, user_s, both):
    """Integrate with automatic abscissa shrinking on recursion-domain errors."""
    tries = 1 if user_s else 4
    for attempt in range(tries):
        try:
            _feasible(m, s, both and s > 0)
            val, res = _line_integral(m, terms, xi, s, q, quad, full)
            break
        except DomainError:
            if attempt == tries - 1:
                raise
            s = 0.5 * s
    value = prefactor * val
    err = abs(prefactor) * float(res.err_estimate)
    return MomentResult(value, err, float(s), int(res.panels_used))


def _finish(res, full_output):
    return res if full_output else res.value


def absolute_moment(m: MgfModel, spec: MomentSpec, full_output=False):
    """Absolute moment ``E|X - xi|^r`` for real or complex ``r``.

    Parameters
    ----------
    m : MgfModel
    spec : MomentSpec
    full_output : bool
        Return a :class:`MomentResult` with the error estimate.

    Raises
    ------
    DomainError
        ``Re(r) <= -1``, ``Re(r) <= 0`` at an atom, or an infeasible abscissa.
    ConvergenceError
        Propagated from the quadrature.
    """
    r, is_complex = _as_order(spec.order)
    xi = float(spec.shift)
    _check_order(m, r, xi)
    s = spec.contour_s if spec.contour_s is not None else default_abscissa(m)
    if is_complex:
        pref = gamma_fn(r + 1) / (2.0 * math.pi)
    else:
        pref = gamma_fn(r + 1.0) / math.pi
    terms = ((1.0, 1), (1.0, -1))
    res = _run(m, terms, xi, s, r + 1, spec.quad, is_complex, pref,
               spec.contour_s is not None, True)
    return _finish(res, full_output)


def nonneg_moment(m: MgfModel, spec: MomentSpec, full_output=False):
    """Moment ``E[(X - xi)^r]`` of a variable with ``X >= xi`` almost surely."""
    r, is_complex = _as_order(spec.order)
    xi = float(spec.shift)
    if not m.support_min >= xi:
        raise DomainError(
            f"non-negative moment needs Pr(X >= xi) = 1; support starts at {m.support_min:g} < xi={xi:g}"
        )
    _check_order(m, r, xi)
    if spec.contour_s is not None:
        s = spec.contour_s
    else:
        s = float(min(1.0, 0.5 * m.strip.s_max))
    if is_complex:
        pref = gamma_fn(r + 1) / (2.0 * math.pi)
    else:
        pref = gamma_fn(r + 1.0) / math.pi
    res = _run(m, ((1.0, 1),), xi, s, r + 1, spec.quad, is_complex, pref,
               spec.contour_s is not None, False)
    return _finish(res, full_output)


def _check_k(k, odd=False):
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    k = int(k)
    if odd and k % 2 == 0:
        raise DomainError(f"tail moments need an odd k, got {k}")
    return k


def integer_moment(m: MgfModel, k: int, xi: float = 0.0, quad=None, s=None, full_output=False):
    """Integer moment ``E[(X - xi)^k]`` from both sides of the contour."""
    k = _check_k(k)
    quad = quad or DEFAULT_QUAD
    s_val = s if s is not None else default_abscissa(m)
    terms = ((1.0, 1), (float((-1) ** k), -1))
    pref = math.factorial(k) / math.pi
    res = _run(m, terms, float(xi), s_val, float(k + 1), quad, False, pref, s is not None, True)
    return _finish(res, full_output)


def tail_moment(m: MgfModel, k: int, xi: float = 0.0, side: str = "above", quad=None, s=None,
                full_output=False):
    """Tail moment ``E[(X - xi)^k 1{X > xi}]`` or ``E[(X - xi)^k 1{X < xi}]``.

    The upper tail uses the contour at ``+s`` and the lower tail the mirror
    contour at ``-s``, each with the single term ``e^{-xi z} M(z)``.
    """
    k = _check_k(k, odd=True)
    if side not in ("above", "below"):
        raise ParameterError(f"side must be 'above' or 'below', got {side!r}")
    quad = quad or DEFAULT_QUAD
    s_val = s if s is not None else default_abscissa(m)
    pref = math.factorial(k) / math.pi
    if side == "below":
        pref = -pref
        s_val = -abs(s_val)
    res = _run(m, ((1.0, 1),), float(xi), s_val, float(k + 1), quad, False, pref, s is not None,
               False)
    return _finish(res, full_output)


# ---------------------------------------------------------------- distribution

def cdf(m: MgfModel, x: float, quad=None, full_output=False):
    """Distribution function by Gil-Pelaez inversion of ``M(it)``.

    Results within the quadrature tolerance outside ``[0, 1]`` are clamped
    and flagged in the full output; larger overshoot raises.
    """
    if not m.continuous:
        raise DomainError(f"{m.descriptor}: Gil-Pelaez inversion needs a continuous law")
    quad = quad or DEFAULT_QUAD
    x = float(x)
    period = 2.0 * math.pi / abs(x) if x != 0.0 else None
    cfg = quad.replace(period=period, tail_exponent_hint=None)

    def g(t):
        z = 1j * t
        return np.real(m.func(z) * np.exp(-x * z) / z)

    res = integrate_half_line(g, cfg)
    value = 0.5 - res.value / math.pi
    err = res.err_estimate / math.pi
    tol = max(quad.abs_tol, quad.rel_tol * abs(value), err)
    clamped = False
    if value < 0.0 or value > 1.0:
        over = -value if value < 0.0 else value - 1.0
        if over > tol:
            raise ConvergenceError(f"cdf overshoot {over:.3g} exceeds tolerance", value=value,
                                   err_estimate=err)
        value = min(1.0, max(0.0, value))
        clamped = True
    out = MomentResult(value, err, 0.0, res.panels_used, clamped)
    return _finish(out, full_output)


def _mean_sd(m, quad):
    mu = integer_moment(m, 1, 0.0, quad)
    var = integer_moment(m, 2, mu, quad)
    if not var > 0:
        raise ComputationError(f"non-positive variance {var:g}")
    return mu, math.sqrt(var)


def quantile(m: MgfModel, alpha: float, quad=None) -> float:
    """``alpha``-quantile: Brent's method on the CDF inside ``mean +- 20 sd``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    quad = quad or DEFAULT_QUAD
    mu, sd = _mean_sd(m, quad)

    def f(x):
        return cdf(m, x, quad) - alpha

    lo, hi = mu - 20.0 * sd, mu + 20.0 * sd
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise RootError(f"quantile bracket [{lo:g}, {hi:g}] does not contain alpha={alpha}")
    x = brentq(f, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(f(x)) >= 1e-9:
        raise RootError(f"quantile refinement stalled: |F(x) - alpha| = {abs(f(x)):.3g}")
    return float(x)


def expected_shortfall(m: MgfModel, alpha: float, quad=None, full_output=False):
    """Expected shortfall ``-(1/alpha) E[X 1{X < q_alpha}]``.

    Returns the value, or ``(quantile, es)`` with ``full_output``.
    """
    quad = quad or DEFAULT_QUAD
    q = quantile(m, alpha, quad)
    below = tail_moment(m, 1, q, "below", quad)
    es = -below / alpha - q
    if full_output:
        return q, es
    return es


def moment_summary(m: MgfModel, quad=None):
    """Mean, standard deviation, skewness and kurtosis from raw moments.

    Uses ``E[X^k]``, ``k = 1..4``, and

        skew = (E3 - mu^3)/sigma^3 - 3 mu/sigma
        kurt = (E4 - mu^4)/sigma^4 - 4 (mu/sigma) skew - 6 mu^2/sigma^2
    """
    quad = quad or DEFAULT_QUAD
    e1, e2, e3, e4 = (integer_moment(m, k, 0.0, quad) for k in (1, 2, 3, 4))
    return summary_from_raw(e1, e2, e3, e4)


def summary_from_raw(e1, e2, e3, e4):
    """(mean, sd, skew, kurt) from the first four raw moments."""
    var = e2 - e1 * e1
    if not var > 0:
        raise ComputationError(f"non-positive variance {var:g} from raw moments")
    sd = math.sqrt(var)
    mu = e1
    skew = (e3 - mu ** 3) / sd ** 3 - 3.0 * mu / sd
    kurt = (e4 - mu ** 4) / sd ** 4 - 4.0 * (mu / sd) * skew - 6.0 * mu * mu / (sd * sd)
    return mu, sd, skew, kurt


def cross_moments(m2, strips=None, quad=None):
    """``(E[X1 X2], E[X1 X2^2])`` from one-dimensional slices of a joint MGF.

    ``E[X1 X2]`` uses the polarisation identity
    ``(E(X1+X2)^2 - E X1^2 - E X2^2) / 2``; ``E[X1 X2^2]`` uses
    ``(E(X1-X2)^3 + E(X1+X2)^3 - 2 E X1^3) / 6``.

    Parameters
    ----------
    m2 : callable or BivariateSlices
        Joint MGF ``(z1, z2) -> E[exp(z1 X1 + z2 X2)]``, or prebuilt slices.
    strips : sequence of four Strip, optional
        Needed when ``m2`` is a callable.
    """
    quad = quad or DEFAULT_QUAD
    if isinstance(m2, BivariateSlices):
        sl = m2
    else:
        if strips is None:
            raise ParameterError("strips are required for a bivariate MGF callable")
        sl = bivariate_slices(m2, strips)
    e_sum2 = integer_moment(sl.sum, 2, 0.0, quad)
    e_x1 = integer_moment(sl.marginal1, 2, 0.0, quad)
    e_x2 = integer_moment(sl.marginal2, 2, 0.0, quad)
    c12 = 0.5 * (e_sum2 - e_x1 - e_x2)
    e_diff3 = integer_moment(sl.difference, 3, 0.0, quad)
    e_sum3 = integer_moment(sl.sum, 3, 0.0, quad)
    e_x1_3 = integer_moment(sl.marginal1, 3, 0.0, quad)
    c122 = (e_diff3 + e_sum3 - 2.0 * e_x1_3) / 6.0
    return c12, c122


def reciprocal_gamma(r: float, quad=None, s: float = 1.0) -> float:
    """``1/Gamma(r/2 + 1)`` as ``2^{r/2}/pi * int e^{z^2/2} z^{-(r+1)} dt``."""
    if not r > -1.0:
        raise DomainError(f"r > -1 required, got {r}")
    quad = quad or DEFAULT_QUAD
    q = r + 1.0
    cfg = quad.replace(tail_exponent_hint=None, period=None)

    def g(t):
        z = s + 1j * t
        return np.real(np.exp(0.5 * z * z) * _pow_neg(z, q))

    res = integrate_half_line(g, cfg)
    return 2.0 ** (0.5 * r) / math.pi * 2.0 * res.value


def vanishing_integral(x: float, s: float, r: float, quad=None) -> float:
    """``int_0^inf Re[e^{zx} z^{-(r+1)}] dt`` on ``z = s + it``.

    Zero for ``x < 0``, ``s > 0`` and ``r > -1``: the Laplace inversion of
    ``x^r`` vanishes on the negative half-line. Used as a self-check.
    """
    if not s > 0:
        raise DomainError(f"s > 0 required, got {s}")
    if not r > -1.0:
        raise DomainError(f"r > -1 required, got {r}")
    quad = quad or DEFAULT_QUAD
    q = r + 1.0
    period = 2.0 * math.pi / abs(x) if x != 0.0 else None
    cfg = quad.replace(period=period, tail_exponent_hint=q if q > 1.0 else None,
                       base=min(quad.base, s))

    def g(t):
        z = s + 1j * t
        return _re_pow_exp(z, x, q)

    return integrate_half_line(g, cfg).value


def _re_pow_exp(z, x, q):
    e = x * z - q * np.log(z)
    return np.exp(e.real) * np.cos(e.imag)
