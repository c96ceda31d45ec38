"""Adaptive Gauss-Kronrod quadrature on the half line.

The half line is cut into geometrically growing panels ``[0, b], [b, 2b],
[2b, 4b], ...`` (``b = QuadConfig.base``). Inside the current set of panels a
globally adaptive 10/21-point Gauss-Kronrod scheme bisects the subintervals
carrying the largest error until the summed error estimate is below tolerance.
Panels are appended until the tail is negligible, judged either by an
envelope bound or by convergence of Wynn's epsilon extrapolation of the
partial sums over panels.

Integrands are called with 1-d arrays of abscissae and must return an array
of the same shape (one component) or of shape ``(k, n)`` for ``k``
simultaneous components. Scalar-only callables are accepted and looped over.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import legendre as _leg

from .errors import ConvergenceError, IntegrandError, ParameterError

_EPS = np.finfo(float).eps
_MAX_EDGE = 1e300


def _kronrod_rule(n):
    """Nodes and weights of the (n, 2n+1) Gauss-Kronrod pair on [-1, 1].

    The n+1 Kronrod nodes are the zeros of the Stieltjes polynomial, found
    in the Legendre basis from its orthogonality against ``P_n``.
    """
    xg, wg = _leg.leggauss(n)
    xq, wq = _leg.leggauss(3 * n + 10)

    def p(k, x):
        return _leg.legval(x, [0.0] * k + [1.0])

    ks = [k for k in range(n + 1) if k % 2 == (n + 1) % 2]
    pn = p(n, xq)
    a = np.array([[np.sum(wq * pn * p(k, xq) * p(j, xq)) for k in ks] for j in ks])
    rhs = -np.array([np.sum(wq * pn * p(n + 1, xq) * p(j, xq)) for j in ks])
    coef = np.zeros(n + 2)
    coef[n + 1] = 1.0
    coef[ks] = np.linalg.solve(a, rhs)
    xk = np.sort(np.real(_leg.legroots(coef)))
    x = np.sort(np.concatenate([xg, xk]))
    # exact symmetry
    x = 0.5 * (x - x[::-1])
    vander = np.array([p(j, x) for j in range(2 * n + 1)])
    moments = np.zeros(2 * n + 1)
    moments[0] = 2.0
    w = np.linalg.solve(vander, moments)
    w = 0.5 * (w + w[::-1])
    gauss_idx = np.arange(1, 2 * n + 1, 2)
    wg = 0.5 * (wg + wg[::-1])
    return x, w, gauss_idx, wg


_RULES = {"gk21": _kronrod_rule(10), "gk15": _kronrod_rule(7)}


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and limits for the half-line integrator.

    ``max_panels`` caps the number of Gauss-Kronrod subintervals.
    ``tail_exponent_hint`` is ``p`` in an assumed ``|g(t)| <~ C t^-p`` tail;
    for ``p > 1`` it enables an analytic tail bound. ``base`` is the width of
    the first panel. ``period`` declares a known oscillation period of the
    tail; panels then stop growing at half a period so that the panel sums
    alternate and extrapolate well.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_panels: int = 2 ** 20
    panel_rule: str = "gk21"
    tail_exponent_hint: Optional[float] = None
    base: float = 1.0
    period: Optional[float] = None

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ParameterError("abs_tol must be positive")
        if not self.rel_tol >= 0:
            raise ParameterError("rel_tol must be non-negative")
        if not self.max_panels >= 1:
            raise ParameterError("max_panels must be at least 1")
        if self.panel_rule not in _RULES:
            raise ParameterError(f"unknown panel_rule {self.panel_rule!r}")
        if not self.base > 0:
            raise ParameterError("base must be positive")
        if self.period is not None and not self.period > 0:
            raise ParameterError("period must be positive")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class QuadResult:
    value: float
    err_estimate: float
    panels_used: int
    truncation_point: float
    extrapolated: bool = False


def _call(g, t):
    try:
        y = np.asarray(g(t))
    except (TypeError, ValueError):
        y = None
    if y is None or not (y.shape == t.shape or (y.ndim == 2 and y.shape[1] == t.size)):
        y = np.array([g(ti) for ti in t])
        if y.ndim == 2:
            y = y.T
    if y.ndim == 1:
        y = y[None, :]
    if y.dtype.kind == "c":
        raise IntegrandError("integrand must be real-valued; use integrate_full_line")
    if not np.isfinite(y.sum()):
        bad = np.nonzero(~np.all(np.isfinite(y), axis=0))[0]
        if bad.size:
            raise IntegrandError(f"integrand is not finite at t={t[bad[0]]!r}", t=float(t[bad[0]]))
    return y


# column layout of the subinterval table
_LO, _HI, _PANEL, _ERR, _FLOOR, _L1, _AMAX, _VAL = range(8)


class _Pool:
    """Subintervals under global adaptive refinement.

    One row per subinterval in ``self.tab``: bounds, owning panel, error
    estimate, roundoff floor, L1 mass, max |g| and the integral of each
    component.
    """

    def __init__(self, g, rule, hint):
        self.g = g
        x, w, gi, wg = _RULES[rule]
        self.x = x
        self.w = w
        # Kronrod weights, Gauss weights scattered onto the 2n+1 nodes
        wboth = np.zeros((x.size, 2))
        wboth[:, 0] = w
        wboth[gi, 1] = wg
        self.wboth = wboth
        self.hint = hint
        self.tab = None
        self.evaluations = 0

    def _rule(self, lo, hi):
        c = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        t = c[:, None] + h[:, None] * self.x
        f = _call(self.g, t.ravel())
        ncomp = f.shape[0]
        n = lo.size
        f = f.reshape(ncomp * n, self.x.size)
        self.evaluations += t.size
        hh = np.tile(h, ncomp)
        kg = f @ self.wboth
        kron = kg[:, 0] * hh
        af = np.abs(f)
        resabs = (af @ self.w) * hh
        resasc = (np.abs(f - 0.5 * kg[:, :1]) @ self.w) * hh
        err = np.abs(kron - kg[:, 1] * hh)
        pos = (resasc > 0) & (err > 0)
        ratio = 200.0 * err / np.where(pos, resasc, 1.0)
        err = np.where(pos, resasc * np.minimum(1.0, ratio * np.sqrt(ratio)), err)
        floor = 50.0 * _EPS * resabs
        err = np.maximum(err, floor)
        amax = af.max(axis=1)
        rows = np.empty((n, _VAL + ncomp))
        rows[:, _LO] = lo
        rows[:, _HI] = hi
        if ncomp == 1:
            rows[:, _ERR] = err
            rows[:, _FLOOR] = floor
            rows[:, _L1] = resabs
            rows[:, _AMAX] = amax
            rows[:, _VAL] = kron
        else:
            rows[:, _ERR] = err.reshape(ncomp, n).sum(axis=0)
            rows[:, _FLOOR] = floor.reshape(ncomp, n).sum(axis=0)
            rows[:, _L1] = resabs.reshape(ncomp, n).sum(axis=0)
            rows[:, _AMAX] = amax.reshape(ncomp, n).max(axis=0)
            rows[:, _VAL:] = kron.reshape(ncomp, n).T
        return rows

    def add(self, lo, hi, panel):
        rows = self._rule(lo, hi)
        rows[:, _PANEL] = panel
        self.tab = rows if self.tab is None else np.concatenate([self.tab, rows])

    @property
    def size(self):
        return self.tab.shape[0]

    def col(self, j):
        return self.tab[:, j]

    def total(self):
        return self.tab[:, _VAL:].sum(axis=0)

    def refine(self, abs_tol, rel_tol, budget):
        while True:
            tot = self.total()
            tol = max(abs_tol, rel_tol * float(np.max(np.abs(tot))))
            err = self.tab[:, _ERR]
            total_err = float(err.sum())
            if total_err <= 0.5 * tol:
                return
            reducible = err - self.tab[:, _FLOOR]
            refinable = reducible > 0.01 * err
            if not np.any(refinable) or reducible[refinable].sum() <= 0.5 * tol * 1e-3:
                return  # roundoff limited
            idx = np.nonzero(refinable)[0]
            order = idx[np.argsort(-err[idx], kind="stable")]
            cum = np.cumsum(err[order])
            k = int(np.searchsorted(cum, total_err - 0.25 * tol)) + 1
            pick = np.sort(order[:min(k, order.size)])
            if self.size + pick.size > budget:
                raise ConvergenceError(
                    f"quadrature budget of {budget} subintervals exhausted",
                    value=tot, err_estimate=total_err,
                )
            old = self.tab[pick]
            keep = np.ones(self.size, dtype=bool)
            keep[pick] = False
            self.tab = self.tab[keep]
            lo, hi, pan = old[:, _LO], old[:, _HI], old[:, _PANEL]
            mid = 0.5 * (lo + hi)
            self.add(np.concatenate([lo, mid]), np.concatenate([mid, hi]),
                     np.concatenate([pan, pan]))


def wynn_epsilon(seq):
    """Wynn's epsilon extrapolation of a sequence; returns the limit estimate."""
    s = [float(v) for v in seq]
    n = len(s)
    if n < 3:
        return s[-1]
    if n % 2 == 0:
        s = s[1:]
        n -= 1
    prev = [0.0] * (n + 1)
    cur = s
    best = s[-1]
    for j in range(1, n):
        nxt = []
        for k in range(len(cur) - 1):
            d = cur[k + 1] - cur[k]
            if d == 0.0 or not math.isfinite(d):
                return best if j % 2 == 1 else cur[k + 1]
            nxt.append(prev[k + 1] + 1.0 / d)
        prev, cur = cur, nxt
        if j % 2 == 0:
            best = cur[-1]
    return best


def _next_edges(last, count, cfg):
    """``count`` edges following ``last`` (geometric, capped at half a period)."""
    out = []
    cap = None if cfg.period is None else 0.5 * cfg.period
    for _ in range(count):
        width = last if last > 0 else cfg.base
        if cap is not None and width >= cap:
            width = cap
        last = last + width
        out.append(last)
    return np.array(out)


def _half_line(g, cfg):
    """Vector-valued half-line integration; returns (values, QuadResult)."""
    pool = _Pool(g, cfg.panel_rule, cfg.tail_exponent_hint)
    npan = 8
    edges = np.concatenate([[0.0], _next_edges(0.0, npan, cfg)])
    # two subintervals per initial panel: one evaluation round is far cheaper
    # than an extra refinement pass for typical smooth integrands
    mids = 0.5 * (edges[:-1] + edges[1:])
    pool.add(np.concatenate([edges[:-1], mids]), np.concatenate([mids, edges[1:]]),
             np.tile(np.arange(npan), 2))
    uniform = cfg.period is not None
    history = []
    while True:
        pool.refine(cfg.abs_tol, cfg.rel_tol, cfg.max_panels)
        values = pool.total()
        tol = max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(values))))
        panel = pool.col(_PANEL).astype(int)
        pv = np.stack([np.bincount(panel, weights=pool.col(_VAL + c), minlength=npan)
                       for c in range(values.size)])
        pa = np.bincount(panel, weights=pool.col(_L1), minlength=npan)
        big_t = edges[-1]
        last = pa[-1]
        hint = cfg.tail_exponent_hint
        if hint is not None and hint > 1:
            sel = panel == npan - 1
            cmax = float(np.max(pool.col(_AMAX)[sel] * pool.col(_HI)[sel] ** hint))
            envelope = cmax * big_t ** (1.0 - hint) / (hint - 1.0)
        else:
            # geometric extrapolation of the panel masses
            rho = pa[-1] / pa[-2] if pa[-2] > 0 else (0.0 if pa[-1] == 0 else math.inf)
            envelope = last * rho / (1.0 - rho) if rho < 1.0 else math.inf
        err_quad = float(pool.col(_ERR).sum())
        if last < 0.25 * tol and envelope < 0.25 * tol:
            return values, QuadResult(float(values[0]), err_quad + last + envelope,
                                      pool.size, float(big_t))
        partial = np.cumsum(pv, axis=1)
        window = partial[:, -(21 if uniform else 11):]
        est = np.array([wynn_epsilon(window[c]) for c in range(values.size)])
        history.append(est)
        decaying = npan >= 12 and (uniform or pa[-1] < pa[-2] < pa[-3])
        if decaying and len(history) >= 3:
            d1 = float(np.max(np.abs(history[-1] - history[-2])))
            d2 = float(np.max(np.abs(history[-2] - history[-3])))
            tol = max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(est))))
            if d1 <= 0.25 * tol and d2 <= 0.5 * tol:
                return est, QuadResult(float(est[0]), err_quad + d1 + d2,
                                       pool.size, float(big_t), extrapolated=True)
        if big_t > _MAX_EDGE:
            raise ConvergenceError("tail did not become negligible before t=1e300",
                                   value=values, err_estimate=err_quad + envelope)
        add = 4 if uniform else 2
        if pool.size + add > cfg.max_panels:
            raise ConvergenceError(
                f"quadrature budget of {cfg.max_panels} subintervals exhausted",
                value=values, err_estimate=err_quad + envelope,
            )
        new = _next_edges(big_t, add, cfg)
        pool.add(np.concatenate([[big_t], new[:-1]]), new, np.arange(npan, npan + add))
        edges = np.concatenate([edges, new])
        npan += add


def integrate_half_line(g, cfg=None):
    """Integrate a real function over ``(0, inf)``.

    Parameters
    ----------
    g : callable
        Real integrand, vectorised over a 1-d array of ``t``.
    cfg : QuadConfig, optional

    Returns
    -------
    QuadResult

    Raises
    ------
    ConvergenceError
        Budget exhausted or tail never becomes negligible; carries the partial
        value and error estimate.
    IntegrandError
        ``g`` returned a non-finite value; carries the offending ``t``.
    """
    cfg = cfg or QuadConfig()
    _, res = _half_line(g, cfg)
    return res


def integrate_full_line(g, cfg=None, full_output=False):
    """Integrate a complex function over the real line.

    The negative half is reflected onto the positive one and the real and
    imaginary parts of ``g(t) + g(-t)`` are integrated together.
    """
    cfg = cfg or QuadConfig()

    def both(t):
        v = np.asarray(g(t), dtype=complex) + np.asarray(g(-t), dtype=complex)
        return np.stack([v.real, v.imag])

    values, res = _half_line(both, cfg)
    out = complex(values[0], values[1])
    if full_output:
        return out, res
    return out


def integrate_interval_vec(g, a, b, cfg=None):
    """Multi-component version of :func:`integrate_interval`; returns (values, result)."""
    cfg = cfg or QuadConfig()
    if not b > a:
        raise ParameterError("integrate_interval needs b > a")
    pool = _Pool(g, cfg.panel_rule, None)
    pool.add(np.array([float(a)]), np.array([float(b)]), np.array([0]))
    pool.refine(cfg.abs_tol, cfg.rel_tol, cfg.max_panels)
    v = pool.total()
    return v, QuadResult(float(v[0]), float(pool.col(_ERR).sum()), pool.size, float(b))


def integrate_interval(g, a, b, cfg=None):
    """Integrate a real function over the finite interval ``[a, b]``."""
    return integrate_interval_vec(g, a, b, cfg)[1]
