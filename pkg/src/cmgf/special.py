"""Gamma function and principal-branch complex power."""

import math

import numpy as np

from .errors import DomainError

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _lanczos(z):
    # valid for Re(z) >= 0.5
    z = z - 1.0
    x = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        x = x + _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * t ** (z + 0.5) * np.exp(-t) * x


def _sinpi(z):
    # sin(pi z) with the integer part of Re(z) removed exactly first, so the
    # result keeps full relative accuracy next to the poles
    n = np.round(np.real(z))
    sign = np.where(np.fmod(n, 2.0) == 0.0, 1.0, -1.0)
    return sign * np.sin(np.pi * (z - n))


def _is_pole(z):
    z = np.asarray(z)
    re = np.real(z)
    return (np.imag(z) == 0) & (re <= 0) & (re == np.round(re))


def gamma_fn(r):
    """Gamma function for real or complex arguments.

    Uses the Lanczos approximation on ``Re(r) >= 0.5`` and the reflection
    formula ``Gamma(r) Gamma(1 - r) = pi / sin(pi r)`` elsewhere. Real
    scalars go through :func:`math.gamma`; real input gives real output and
    positive integers up to 170 are returned exactly.

    Raises
    ------
    DomainError
        If ``r`` is a non-positive integer.
    """
    if isinstance(r, (int, float, np.floating, np.integer)) and not isinstance(r, bool):
        x = float(r)
        if x <= 0 and x == math.floor(x):
            raise DomainError(f"gamma function has a pole at {r!r}")
        if x == int(x) and 0 < x <= 171:
            return float(math.factorial(int(x) - 1))
        # the C library gamma is accurate to a few ulp on the reals
        return math.gamma(x)
    scalar = np.ndim(r) == 0
    arr = np.asarray(r)
    if np.any(_is_pole(arr)):
        raise DomainError(f"gamma function has a pole at {r!r}")
    is_complex = np.iscomplexobj(arr)
    z = arr.astype(complex)
    out = np.empty_like(z)
    left = np.real(z) < 0.5
    if np.any(~left):
        out[~left] = _lanczos(z[~left])
    if np.any(left):
        zl = z[left]
        out[left] = np.pi / (_sinpi(zl) * _lanczos(1.0 - zl))
    if not is_complex:
        out = out.real
    if scalar:
        return complex(out) if is_complex else float(out)
    return out


def complex_power(z, w):
    """Principal-branch power ``z**w = exp(w (ln|z| + i Arg z))``.

    ``Arg`` takes values in ``(-pi, pi]``. Works elementwise on arrays.

    Raises
    ------
    DomainError
        If any ``z`` is zero.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("complex_power: base must be non-zero")
    out = np.exp(w * np.log(z))
    if out.ndim == 0:
        return complex(out)
    return out
