"""Conditional MGFs of three affine time-series models.

Each model's conditional MGF has the form ``exp(A(H, z) + B(H, z) . state)``
with ``A`` and ``B`` obtained by a backward recursion over the horizon:

* HNG: Heston-Nandi GARCH, cumulative log-return over ``H`` days given the
  next conditional variance ``h_{T+1}``.
* HARG: heterogeneous autoregressive gamma, realised variance ``X_{T+H}``
  given the last 22 observations.
* ARP: autoregressive Poisson, average count over ``H`` periods given the
  next intensity ``lambda_{T+1}``.

Recursions run in complex arithmetic, vectorised over the quadrature nodes.
The strip of each conditional MGF is found by a bisection probe of the
real-axis recursion and cached per (parameters, horizon).
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np

from .errors import CmgfError, DomainError, ParameterError
from .mgf import MgfModel, Strip
from .moments import (DEFAULT_QUAD, MomentSpec, absolute_moment, integer_moment,
                      nonneg_moment, summary_from_raw)

HARG_LAGS = 22
PROBE_CAP = 2.0
PROBE_MARGIN = 0.9
EXP_LIMIT = 700.0


# ---------------------------------------------------------------- parameters

@dataclass(frozen=True)
class HngParams:
    """Heston-Nandi GARCH parameters (daily units).

    ``h_{t+1} = omega + beta h_t + alpha (z_t - gamma sqrt(h_t))^2`` and
    ``r_{t+1} = r_f + (lambda_rp - 1/2) h_{t+1} + sqrt(h_{t+1}) z_{t+1}``.
    """

    omega: float
    beta: float
    alpha: float
    gamma: float
    lambda_rp: float
    r_f: float = 0.0

    def __post_init__(self):
        if self.omega < 0 or self.beta < 0:
            raise ParameterError("HNG needs omega >= 0 and beta >= 0")
        if not self.alpha >= 0:
            raise ParameterError(f"HNG needs alpha >= 0, got {self.alpha}")
        if self.persistence >= 1:
            warnings.warn(f"HNG persistence {self.persistence:.4f} >= 1", RuntimeWarning)

    @property
    def persistence(self):
        return self.beta + self.alpha * self.gamma ** 2

    @property
    def mean_variance(self):
        """Unconditional mean of ``h_t``."""
        return (self.omega + self.alpha) / (1.0 - self.persistence)


@dataclass(frozen=True)
class HngState:
    h_next: float
    horizon: int

    def __post_init__(self):
        if not self.h_next > 0:
            raise ParameterError(f"h_next must be positive, got {self.h_next}")
        _check_horizon(self.horizon)


def _harg_weights(d, w, m, p=HARG_LAGS):
    if p == 1:
        return np.array([d + w + m])
    if p != HARG_LAGS:
        raise ParameterError("HARG lag structure needs p = 22 (or p = 1 for plain ARG)")
    phi = np.empty(p)
    phi[0] = d
    phi[1:5] = w / 4.0
    phi[5:22] = m / 17.0
    return phi


@dataclass(frozen=True)
class HargParams:
    """HARG parameters in AR-coefficient form.

    ``phi_d``, ``phi_w``, ``phi_m`` are the daily, weekly and monthly
    coefficients of the conditional mean, i.e. ``eta`` times the intensity
    loadings ``beta_*``; ``eta`` is the gamma scale and ``delta`` its shape.
    ``p = 1`` collapses the lags into a plain autoregressive gamma.
    """

    phi_d: float
    phi_w: float
    phi_m: float
    eta: float
    delta: float
    p: int = HARG_LAGS

    def __post_init__(self):
        if min(self.phi_d, self.phi_w, self.phi_m) < 0:
            raise ParameterError("HARG coefficients must be non-negative")
        if not self.eta > 0 or not self.delta > 0:
            raise ParameterError("HARG needs eta > 0 and delta > 0")
        if self.persistence >= 1:
            warnings.warn(f"HARG persistence {self.persistence:.4f} >= 1", RuntimeWarning)

    @classmethod
    def from_intensity(cls, beta_d, beta_w, beta_m, eta, delta, p=HARG_LAGS):
        """Build from the intensity loadings ``beta_*`` (``phi = eta beta``)."""
        return cls(eta * beta_d, eta * beta_w, eta * beta_m, eta, delta, p)

    @property
    def phi(self):
        return _harg_weights(self.phi_d, self.phi_w, self.phi_m, self.p)

    @property
    def persistence(self):
        return self.phi_d + self.phi_w + self.phi_m

    @property
    def mean(self):
        """Stationary mean ``eta delta / (1 - sum phi)``."""
        return self.eta * self.delta / (1.0 - self.persistence)


@dataclass(frozen=True)
class HargState:
    lags: tuple
    horizon: int

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        if lags.ndim != 1 or np.any(lags < 0) or not np.all(np.isfinite(lags)):
            raise ParameterError("HARG lags must be finite and non-negative")
        object.__setattr__(self, "lags", tuple(float(v) for v in lags))
        _check_horizon(self.horizon)


@dataclass(frozen=True)
class ArpParams:
    """Autoregressive Poisson: ``lambda_{t+1} = omega + beta lambda_t + alpha Y_t``."""

    omega: float
    beta: float
    alpha: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ParameterError(f"ARP needs omega > 0, got {self.omega}")
        if self.beta < 0 or self.alpha < 0:
            raise ParameterError("ARP needs beta >= 0 and alpha >= 0")
        if self.beta + self.alpha >= 1:
            warnings.warn(f"ARP persistence {self.beta + self.alpha:.4f} >= 1", RuntimeWarning)

    @property
    def mean(self):
        return self.omega / (1.0 - self.beta - self.alpha)


@dataclass(frozen=True)
class ArpState:
    lambda_next: float
    horizon: int

    def __post_init__(self):
        if not self.lambda_next > 0:
            raise ParameterError(f"lambda_next must be positive, got {self.lambda_next}")
        _check_horizon(self.horizon)


def _check_horizon(H):
    if isinstance(H, bool) or int(H) != H or H < 1:
        raise ParameterError(f"horizon must be a positive integer, got {H}")


# ---------------------------------------------------------------- recursions

def hng_coefficients(p: HngParams, H: int, z):
    """``A(H, z)`` and ``B(H, z)`` of the HNG recursion.

    Raises DomainError naming the first horizon where ``Re(1 - 2 alpha B)``
    is not positive.
    """
    z = np.asarray(z, dtype=complex)
    lam = p.lambda_rp - 0.5
    B = z * lam + 0.5 * z * z
    A = z * p.r_f
    persist = p.beta + p.alpha * p.gamma ** 2
    for h in range(1, H):
        d = 1.0 - 2.0 * p.alpha * B
        if np.any(d.real <= 0):
            raise DomainError(f"HNG recursion invalid at horizon h={h}: 1 - 2 alpha B <= 0")
        c = z - 2.0 * p.alpha * p.gamma * B
        A = A + z * p.r_f + B * p.omega - 0.5 * np.log(d)
        B = z * lam + B * persist + c * c / (2.0 * d)
    return A, B


def harg_coefficients(p: HargParams, H: int, z):
    """``A(H, z)`` and the lag loadings ``B_j(H, z)``, shape ``(p,) + z.shape``."""
    z = np.asarray(z, dtype=complex)
    phi = p.phi.reshape((-1,) + (1,) * z.ndim)
    eta = p.eta
    d = 1.0 - eta * z
    if np.any(d.real <= 0):
        raise DomainError("HARG recursion invalid at horizon h=1: 1 - eta z <= 0")
    B = (z / d) * phi
    A = -p.delta * np.log(d)
    for h in range(1, H):
        b1 = B[0]
        d = 1.0 - eta * b1
        if np.any(d.real <= 0):
            raise DomainError(f"HARG recursion invalid at horizon h={h}: 1 - eta B_1 <= 0")
        A = A - p.delta * np.log(d)
        nb = (b1 / d) * phi
        nb[:-1] += B[1:]
        B = nb
    return A, B


def arp_coefficients(p: ArpParams, H: int, z):
    """``A(H, z)``, ``B(H, z)`` for the MGF of the ``H``-period average count."""
    z = np.asarray(z, dtype=complex)
    u = z / H
    B = np.expm1(u)
    A = np.zeros_like(B)
    for h in range(1, H):
        arg = u + p.alpha * B
        if np.any(arg.real > EXP_LIMIT):
            raise DomainError(f"ARP recursion overflows at horizon h={h}; use a smaller s")
        A = A + p.omega * B
        B = p.beta * B + np.expm1(arg)
    return A, B


def _checked(x, what):
    if np.any(np.abs(x.real) > EXP_LIMIT) or not np.all(np.isfinite(x)):
        raise DomainError(f"{what}: |Re(A + B state)| exceeds {EXP_LIMIT:g}; use a smaller s")
    return x


# ---------------------------------------------------------------- probes

def _bisect_edge(ok, sign):
    """Largest ``x`` in (0, cap] with ``ok(sign * x)``, then a 10% margin."""
    if ok(sign * PROBE_CAP):
        return sign * PROBE_CAP * PROBE_MARGIN
    lo, hi = 0.0, PROBE_CAP
    if not ok(sign * 1e-8):
        raise DomainError("degenerate strip: no feasible abscissa above 1e-8")
    lo = 1e-8
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(sign * mid):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return sign * lo * PROBE_MARGIN


def _hng_real_ok(p, H, s):
    lam = p.lambda_rp - 0.5
    B = s * lam + 0.5 * s * s
    bound = math.inf if p.alpha == 0 else 0.5 / p.alpha
    persist = p.persistence
    for h in range(1, H + 1):
        if not (math.isfinite(B) and B < bound and 1.0 - 2.0 * p.alpha * B > 0):
            return False
        if h == H:
            break
        d = 1.0 - 2.0 * p.alpha * B
        c = s - 2.0 * p.alpha * p.gamma * B
        B = s * lam + B * persist + c * c / (2.0 * d)
    return True


@lru_cache(maxsize=512)
def hng_probe(p: HngParams, H: int) -> Strip:
    """Strip on which the HNG recursion is valid for every ``h <= H``.

    Bisection over ``s`` in ``(0, 2]`` and ``[-2, 0)`` for
    ``B(h, s) < 1/(2 alpha)``, shrunk by 10%.
    """
    _check_horizon(H)
    return Strip(_bisect_edge(lambda s: _hng_real_ok(p, H, s), -1),
                 _bisect_edge(lambda s: _hng_real_ok(p, H, s), 1))


def _harg_real_ok(p, H, s):
    phi = p.phi
    bound = 1.0 / p.eta
    if not s < bound:
        return False
    B = s / (1.0 - p.eta * s) * phi
    for h in range(1, H + 1):
        if not (np.all(np.isfinite(B)) and B[0] < bound):
            return False
        if h == H:
            break
        b1 = B[0]
        nb = b1 / (1.0 - p.eta * b1) * phi
        nb[:-1] += B[1:]
        B = nb
    return True


@lru_cache(maxsize=512)
def harg_probe(p: HargParams, H: int) -> Strip:
    """Strip on which ``B_1(h, s) < 1/eta`` for every ``h <= H``."""
    _check_horizon(H)
    return Strip(_bisect_edge(lambda s: _harg_real_ok(p, H, s), -1),
                 _bisect_edge(lambda s: _harg_real_ok(p, H, s), 1))


def _arp_real_ok(p, H, s, lam_next):
    try:
        A, B = arp_coefficients(p, H, np.array([s]))
    except DomainError:
        return False
    x = A[0] + B[0] * lam_next
    return bool(np.isfinite(x.real) and abs(x.real) < EXP_LIMIT)


@lru_cache(maxsize=512)
def arp_probe(p: ArpParams, H: int, lambda_next: float = 1.0) -> Strip:
    """Strip on which the ARP recursion stays clear of overflow."""
    _check_horizon(H)
    return Strip(_bisect_edge(lambda s: _arp_real_ok(p, H, s, lambda_next), -1),
                 _bisect_edge(lambda s: _arp_real_ok(p, H, s, lambda_next), 1))


# ---------------------------------------------------------------- models

def hng_mgf(p: HngParams, st: HngState) -> MgfModel:
    """Conditional MGF of the ``H``-day cumulative log-return."""
    H, h_next = int(st.horizon), float(st.h_next)

    def log_func(z):
        A, B = hng_coefficients(p, H, z)
        return _checked(A + B * h_next, "HNG")

    def func(z):
        return np.exp(log_func(z))

    return MgfModel(func, hng_probe(p, H), f"hng(H={H}, h_next={h_next:g})",
                    meta={"family": "hng", "params": p, "state": st}, log_func=log_func)


def harg_mgf(p: HargParams, st: HargState) -> MgfModel:
    """Conditional MGF of ``X_{T+H}`` given ``X_T, ..., X_{T-p+1}``."""
    H = int(st.horizon)
    lags = np.asarray(st.lags, dtype=float)
    if lags.size != p.p:
        raise ParameterError(f"HARG state needs {p.p} lags, got {lags.size}")

    def log_func(z):
        A, B = harg_coefficients(p, H, z)
        return _checked(A + np.tensordot(lags, B, axes=(0, 0)), "HARG")

    def func(z):
        return np.exp(log_func(z))

    return MgfModel(func, harg_probe(p, H), f"harg(H={H})", support_min=0.0,
                    meta={"family": "harg", "params": p, "state": st}, log_func=log_func)


def arp_mgf(p: ArpParams, st: ArpState) -> MgfModel:
    """Conditional MGF of the average count ``(1/H) sum_{h=1}^H Y_{T+h}``.

    The average lives on the lattice ``{0, 1/H, 2/H, ...}`` with an atom at 0.
    """
    H, lam = int(st.horizon), float(st.lambda_next)

    def log_func(z):
        A, B = arp_coefficients(p, H, z)
        return _checked(A + B * lam, "ARP")

    def func(z):
        return np.exp(log_func(z))

    return MgfModel(func, arp_probe(p, H, lam), f"arp(H={H}, lambda_next={lam:g})",
                    support_min=0.0, lattice_span=1.0 / H,
                    meta={"family": "arp", "params": p, "state": st}, log_func=log_func)


FAMILIES = ("hng", "harg", "arp")


def build_model(family, params, state_value, H):
    """Conditional model for ``family`` at horizon ``H``.

    ``state_value`` is ``h_next`` (HNG), the lag vector (HARG) or
    ``lambda_next`` (ARP).
    """
    if family == "hng":
        return hng_mgf(params, HngState(float(state_value), H))
    if family == "harg":
        return harg_mgf(params, HargState(tuple(state_value), H))
    if family == "arp":
        return arp_mgf(params, ArpState(float(state_value), H))
    raise ParameterError(f"unknown model family {family!r}; expected one of {FAMILIES}")


# ---------------------------------------------------------------- term structure

@dataclass
class TermCell:
    horizon: int
    order: float
    value: float = math.nan
    err_estimate: float = math.nan
    error: Optional[str] = None


@dataclass
class TermStructure:
    """Conditional moments indexed by horizon and order.

    ``cells`` are sorted by (horizon, order). ``summary`` maps a horizon to
    (mean, sd, skew, kurt) when requested.
    """

    family: str
    variant: str
    cells: List[TermCell] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def value(self, H, r):
        for c in self.cells:
            if c.horizon == H and c.order == r:
                return c.value
        raise KeyError((H, r))

    def as_array(self):
        """Rows ``(H, r, value, err_estimate)``."""
        return np.array([[c.horizon, c.order, c.value, c.err_estimate] for c in self.cells])


def _default_variant(family, r):
    if family == "hng":
        return "integer" if float(r).is_integer() and r >= 1 else "absolute"
    return "nonneg"


def _cell(model, family, variant, r, quad, s):
    v = variant or _default_variant(family, r)
    if v == "integer":
        if not float(r).is_integer():
            raise DomainError(f"integer variant needs an integer order, got {r}")
        res = integer_moment(model, int(r), 0.0, quad, s, full_output=True)
    elif v == "absolute":
        res = absolute_moment(model, MomentSpec(r, 0.0, s, quad), full_output=True)
    elif v == "nonneg":
        res = nonneg_moment(model, MomentSpec(r, 0.0, s, quad), full_output=True)
    else:
        raise ParameterError(f"unknown variant {v!r}")
    return res


def term_structure(family, params, state, orders: Sequence[float], horizons: Sequence[int],
                   quad=None, variant=None, summary=False, s=None, threads=1):
    """Table of conditional moments ``E_T[X^r]`` over horizons and orders.

    One model (one recursion setup and strip probe) is built per horizon and
    reused for every order. Per-cell failures are recorded in
    ``TermCell.error`` and do not stop the table. With ``summary`` the raw
    moments ``k = 1..4`` also give (mean, sd, skew, kurt) per horizon.
    """
    if not horizons:
        raise ParameterError("horizons list is empty")
    if not orders and not summary:
        raise ParameterError("orders list is empty")
    quad = quad or DEFAULT_QUAD
    horizons = sorted(set(int(h) for h in horizons))
    orders = sorted(set(float(r) for r in orders))
    for H in horizons:
        _check_horizon(H)

    def work(H):
        cells = []
        summ = None
        try:
            model = build_model(family, params, state, H)
        except CmgfError as exc:
            return [TermCell(H, r, error=f"{type(exc).__name__}: {exc}") for r in orders], None
        for r in orders:
            try:
                res = _cell(model, family, variant, r, quad, s)
                cells.append(TermCell(H, r, float(np.real(res.value)), float(res.err_estimate)))
            except CmgfError as exc:
                cells.append(TermCell(H, r, error=f"{type(exc).__name__}: {exc}"))
        if summary:
            try:
                raw = [integer_moment(model, k, 0.0, quad, s) for k in (1, 2, 3, 4)]
                summ = summary_from_raw(*raw)
            except CmgfError as exc:
                summ = f"{type(exc).__name__}: {exc}"
        return cells, summ

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, horizons))
    else:
        results = [work(H) for H in horizons]
    ts = TermStructure(family, variant or "default")
    for H, (cells, summ) in zip(horizons, results):
        ts.cells.extend(cells)
        if summ is not None:
            ts.summary[H] = summ
    return ts
