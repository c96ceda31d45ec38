"""Complex-extended moment-generating functions and built-in distributions.

An :class:`MgfModel` wraps a vectorised map ``z -> E[exp(z X)]`` together with
its strip of regularity and the handful of distributional facts the moment
routines need (lower support bound, lattice span).
"""

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, ParameterError

# Evaluation closer than this to a strip endpoint is rejected.
STRIP_MARGIN = 1e-12


@dataclass(frozen=True)
class Strip:
    """Open real interval ``(s_min, s_max)`` containing zero."""

    s_min: float
    s_max: float

    def __post_init__(self):
        if not (self.s_min < 0.0 < self.s_max):
            raise ParameterError(
                f"strip must satisfy s_min < 0 < s_max, got ({self.s_min}, {self.s_max})"
            )

    def contains(self, s, margin=STRIP_MARGIN):
        return (self.s_min + margin < s) and (s < self.s_max - margin)

    def __iter__(self):
        yield self.s_min
        yield self.s_max


@dataclass(frozen=True, eq=False)
class MgfModel:
    """Evaluable MGF with a declared strip of regularity.

    Parameters
    ----------
    func : callable
        Vectorised ``z -> M(z)`` on complex arrays. Called only with
        arguments whose real parts lie inside ``strip``.
    strip : Strip
        Real-part interval on which ``M`` is finite.
    descriptor : str
        Human-readable model identity.
    support_min : float
        Lower bound of the support (``-inf`` for unbounded variables).
    lattice_span : float or None
        If the law lives on ``support_min + span * {0, 1, 2, ...}`` this is
        ``span``; then ``t -> M(s + it)`` is periodic with period
        ``2 pi / span``. ``None`` for continuous laws.
    log_func : callable, optional
        Any branch of ``log M(z)``; lets integrands combine exponents before
        exponentiating.
    """

    func: Callable
    strip: Strip
    descriptor: str = "mgf"
    support_min: float = -math.inf
    lattice_span: Optional[float] = None
    meta: dict = field(default_factory=dict, compare=False)
    log_func: Optional[Callable] = None

    @property
    def continuous(self):
        return self.lattice_span is None

    def has_atom(self, xi):
        """True if the law puts positive mass on ``xi`` (declared, not inferred)."""
        if self.lattice_span is None or xi < self.support_min:
            return False
        k = (xi - self.support_min) / self.lattice_span
        return abs(k - round(k)) < 1e-12 * max(1.0, abs(k))

    def check(self, z):
        re = np.real(z)
        lo, hi = self.strip.s_min + STRIP_MARGIN, self.strip.s_max - STRIP_MARGIN
        if np.any(re <= lo) or np.any(re >= hi):
            bad = float(np.max(re) if np.any(re >= hi) else np.min(re))
            raise DomainError(
                f"{self.descriptor}: Re(z)={bad:g} outside strip "
                f"({self.strip.s_min:g}, {self.strip.s_max:g})"
            )

    def evaluate(self, z, check=True):
        """Return ``M(z)``; scalar in, scalar out."""
        z = np.asarray(z, dtype=complex)
        if check:
            self.check(z)
        out = self.func(z)
        if np.ndim(out) == 0:
            return complex(out)
        return out

    __call__ = evaluate

    def log_evaluate(self, z):
        """A branch of ``log M(z)`` (no strip check)."""
        if self.log_func is not None:
            return self.log_func(np.asarray(z, dtype=complex))
        return np.log(self.func(np.asarray(z, dtype=complex)))


def normal_mgf(mu=0.0, sigma=1.0):
    """MGF of ``N(mu, sigma**2)``."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    mu, sigma = float(mu), float(sigma)
    half_var = 0.5 * sigma * sigma

    def log_func(z):
        return mu * z + half_var * z * z

    def func(z):
        return np.exp(log_func(z))

    return MgfModel(func, Strip(-math.inf, math.inf), f"normal(mu={mu:g}, sigma={sigma:g})",
                    meta={"family": "normal", "mu": mu, "sigma": sigma}, log_func=log_func)


def exponential_mgf(lam):
    """MGF ``lam / (lam - z)`` of the exponential law with rate ``lam``."""
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    lam = float(lam)

    log_lam = math.log(lam)

    def func(z):
        return lam / (lam - z)

    def log_func(z):
        return log_lam - np.log(lam - z)

    return MgfModel(func, Strip(-math.inf, lam), f"exponential(lambda={lam:g})",
                    support_min=0.0, meta={"family": "exponential", "lam": lam},
                    log_func=log_func)


def poisson_mgf(lam):
    """MGF ``exp(lam (e^z - 1))`` of the Poisson law."""
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    lam = float(lam)

    def log_func(z):
        return lam * np.expm1(z)

    def func(z):
        return np.exp(log_func(z))

    return MgfModel(func, Strip(-math.inf, math.inf), f"poisson(lambda={lam:g})",
                    support_min=0.0, lattice_span=1.0,
                    meta={"family": "poisson", "lam": lam}, log_func=log_func)


@dataclass(frozen=True)
class NigParams:
    """Normal-inverse Gaussian parameters.

    ``loc`` is the location, ``scale`` the scale (delta), ``tail`` the tail
    heaviness (alpha) and ``asym`` the asymmetry (beta).
    """

    loc: float
    scale: float
    tail: float
    asym: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError(f"NIG scale must be positive, got {self.scale}")
        if not self.tail > abs(self.asym):
            raise ParameterError(
                f"NIG requires tail > |asym|, got tail={self.tail}, asym={self.asym}"
            )

    @property
    def gamma(self):
        return math.sqrt(self.tail ** 2 - self.asym ** 2)

    @property
    def strip(self):
        return Strip(-self.tail - self.asym, self.tail - self.asym)

    @property
    def mean(self):
        return self.loc + self.scale * self.asym / self.gamma

    @property
    def variance(self):
        return self.scale * self.tail ** 2 / self.gamma ** 3


def nig_from_standardized(xi, chi):
    """Zero-mean, unit-variance NIG parameters from the shape pair ``(xi, chi)``.

    ``xi`` controls tail heaviness and ``chi`` asymmetry, with
    ``0 <= |chi| < xi < 1``. With ``zeta = sqrt(1 - xi^2) / (xi^2 - chi^2)``
    the map is ``alpha = xi zeta``, ``beta = chi zeta``,
    ``delta = zeta (xi^2 - chi^2)^{3/2} / xi^2`` and
    ``loc = -delta beta / gamma``.
    """
    if not (0.0 <= abs(chi) < xi < 1.0):
        raise ParameterError(f"need 0 <= |chi| < xi < 1, got xi={xi}, chi={chi}")
    d2 = xi * xi - chi * chi
    zeta = math.sqrt(1.0 - xi * xi) / d2
    tail = xi * zeta
    asym = chi * zeta
    scale = zeta * d2 ** 1.5 / (xi * xi)
    gamma = zeta * math.sqrt(d2)
    loc = -scale * asym / gamma
    return NigParams(loc=loc, scale=scale, tail=tail, asym=asym)


def nig_mgf(p):
    """MGF ``exp(loc z + delta (gamma - sqrt(alpha^2 - (beta + z)^2)))``.

    The principal square root is used; the strip is
    ``(-alpha - beta, alpha - beta)``.
    """
    a2 = p.tail ** 2
    b = p.asym
    gamma = p.gamma
    loc, delta = p.loc, p.scale

    dg = delta * gamma

    def log_func(z):
        u = b + z
        return loc * z + dg - delta * np.sqrt(a2 - u * u)

    def func(z):
        return np.exp(log_func(z))

    return MgfModel(func, p.strip,
                    f"nig(loc={loc:g}, scale={delta:g}, tail={p.tail:g}, asym={b:g})",
                    meta={"family": "nig", "params": p}, log_func=log_func)


class BivariateSlices(NamedTuple):
    sum: MgfModel
    difference: MgfModel
    marginal1: MgfModel
    marginal2: MgfModel


def bivariate_slices(m2, strips, descriptor="bivariate"):
    """Univariate MGFs of ``X1 + X2``, ``X1 - X2``, ``X1`` and ``X2``.

    Parameters
    ----------
    m2 : callable
        Vectorised joint MGF ``(z1, z2) -> E[exp(z1 X1 + z2 X2)]``.
    strips : sequence of four Strip
        Strips for the sum, difference, marginal-1 and marginal-2 slices, in
        that order.
    """
    if len(strips) != 4:
        raise ParameterError("bivariate_slices needs four strips")
    maps = (
        ("sum", lambda z: m2(z, z)),
        ("difference", lambda z: m2(z, -z)),
        ("marginal1", lambda z: m2(z, np.zeros_like(z))),
        ("marginal2", lambda z: m2(np.zeros_like(z), z)),
    )
    models = [
        MgfModel(fn, Strip(*st), f"{descriptor}[{name}]")
        for (name, fn), st in zip(maps, strips)
    ]
    return BivariateSlices(*models)
