"""Self-check suites over the built-in models, with a JSON-ready report.

Suites: s-invariance, agreement of the absolute, non-negative and integer
moment formulas, the even-order bridge, the reciprocal-gamma identity,
vanishing contour integrals, normal tail moments, Lyapunov log-convexity,
MGF symmetry, two-step recursion checks and Monte-Carlo agreement.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional

import numpy as np
from scipy import stats

from .config import load_fixture, harg_params, nig_params
from .dynamic import ArpParams, HngParams, build_model
from .errors import CmgfError
from .mgf import exponential_mgf, normal_mgf, poisson_mgf, nig_mgf
from .moments import (DEFAULT_QUAD, MomentSpec, absolute_moment, cdf, default_abscissa,
                      integer_moment, nonneg_moment, reciprocal_gamma, tail_moment,
                      vanishing_integral)
from .oracle import (mc_moment, simulate_arp, simulate_harg, simulate_hng, two_step_arp,
                     two_step_harg, two_step_hng)

S_INVARIANCE_ORDERS = (-0.5, 0.5, 1.0, 1.5, 2.0, 3.0)
AGREEMENT_ORDERS = (0.5, 1.0, 1.5, 2.0)
RECIPROCAL_GAMMA_ORDERS = (-0.5, 0.0, 1.0, 2.0, 2.5)
TWO_STEP_POINTS = (0.3 + 0.0j, 0.2 + 0.7j, -0.4 + 1.3j, 0.5 - 2.0j, -0.1 + 4.0j)


@dataclass
class Entry:
    """One built-in model: name, MGF and the moment form it supports."""

    name: str
    model: object
    kind: str  # "real" (two-sided), "nonneg" or "lattice"
    shift: float = 0.0


@dataclass
class Suite:
    name: str
    tolerance: float
    checks: int = 0
    failures: List[dict] = field(default_factory=list)
    max_error: float = 0.0

    def record(self, err, **info):
        self.checks += 1
        err = float(err) if err is not None else math.inf
        if not math.isfinite(err) or err > self.tolerance:
            self.failures.append({**info, "error": err if math.isfinite(err) else None})
        if math.isfinite(err):
            self.max_error = max(self.max_error, err)

    def run(self, fn: Callable, **info):
        try:
            self.record(fn(), **info)
        except CmgfError as exc:
            self.checks += 1
            self.failures.append({**info, "error": None, "reason": f"{type(exc).__name__}: {exc}"})

    @property
    def passed(self):
        return not self.failures and self.checks > 0

    def as_dict(self):
        return {"passed": self.passed, "checks": self.checks, "tolerance": self.tolerance,
                "max_error": self.max_error, "failures": self.failures}


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def fixture_params():
    hng = HngParams(**load_fixture("hng_fitted")["params"])
    harg = harg_params(load_fixture("harg_fitted")["params"])
    arp = ArpParams(**load_fixture("arp_fitted")["params"])
    return hng, harg, arp


def builtin_models():
    """The static laws and the three dynamic fixtures at representative horizons."""
    hng, harg, arp = fixture_params()
    out = [
        Entry("normal(0,1)", normal_mgf(0.0, 1.0), "real"),
        Entry("exponential(1)", exponential_mgf(1.0), "nonneg"),
        Entry("poisson(3)", poisson_mgf(3.0), "lattice", shift=-0.5),
    ]
    for name in ("nig_standard_a", "nig_standard_b"):
        out.append(Entry(name, nig_mgf(nig_params(load_fixture(name)["params"])), "real"))
    out.append(Entry("hng(H=21)", build_model("hng", hng, hng.mean_variance, 21), "real"))
    out.append(Entry("harg(H=30)", build_model("harg", harg, [harg.mean] * 22, 30), "nonneg"))
    H = 30
    out.append(Entry("arp(H=30)", build_model("arp", arp, arp.mean, H), "lattice",
                     shift=-0.5 / H))
    return out


def _moment(e: Entry, r, s=None, quad=DEFAULT_QUAD):
    if e.kind == "real":
        return absolute_moment(e.model, MomentSpec(r, e.shift, s, quad))
    return nonneg_moment(e.model, MomentSpec(r, e.shift, s, quad))


def suite_s_invariance(entries, tol):
    su = Suite("s_invariance", tol)
    for e in entries:
        s1 = default_abscissa(e.model) if e.kind == "real" else \
            min(1.0, 0.5 * e.model.strip.s_max)
        s2 = 0.5 * s1
        for r in S_INVARIANCE_ORDERS:
            su.run(lambda: _rel(_moment(e, r, s2), _moment(e, r, s1)), model=e.name, r=r)
    return su


def suite_formula_agreement(entries, tol):
    su = Suite("formula_agreement", tol)
    for e in entries:
        if e.kind == "real":
            continue
        for r in AGREEMENT_ORDERS:
            su.run(lambda: _rel(absolute_moment(e.model, MomentSpec(r, e.shift)),
                                nonneg_moment(e.model, MomentSpec(r, e.shift))),
                   model=e.name, r=r)
        for k in (1, 2):
            ref = nonneg_moment(e.model, MomentSpec(float(k), e.shift))
            su.run(lambda: _rel(integer_moment(e.model, k, e.shift), ref), model=e.name, k=k)
    return su


def suite_even_bridge(entries, tol):
    su = Suite("even_bridge", tol)
    for e in entries:
        for k in (2, 4):
            su.run(lambda: _rel(integer_moment(e.model, k, e.shift),
                                absolute_moment(e.model, MomentSpec(float(k), e.shift))),
                   model=e.name, k=k)
    return su


def suite_reciprocal_gamma(tol):
    su = Suite("reciprocal_gamma", tol)
    for r in RECIPROCAL_GAMMA_ORDERS:
        su.run(lambda: abs(reciprocal_gamma(r) - 1.0 / math.gamma(0.5 * r + 1.0)), r=r)
    return su


def suite_vanishing_integral(tol):
    su = Suite("vanishing_integral", tol)
    for x in (-0.5, -2.0):
        for s in (0.5, 1.0):
            for r in (0.5, 2.0):
                su.run(lambda: abs(vanishing_integral(x, s, r)), x=x, s=s, r=r)
    return su


def suite_normal_tail(tol):
    su = Suite("normal_tail", tol)
    m = normal_mgf()
    for x in (-1.0, 0.0, 1.0):
        # E[X 1{X < x}] = E[(X - x) 1{X < x}] + x F(x), F by Gil-Pelaez inversion
        su.run(lambda: abs(tail_moment(m, 1, x, "below") + x * cdf(m, x) + stats.norm.pdf(x)),
               xi=x)
    return su


def suite_lyapunov(entries, slack):
    su = Suite("lyapunov", slack)
    grid = (0.5, 1.0, 1.5, 2.0, 3.0)
    for e in entries:
        if e.kind != "real":
            continue
        vals = {r: _moment(e, r) for r in grid}
        for a in grid:
            for b in grid:
                if b <= a:
                    continue
                mid = 0.5 * (a + b)
                lhs = vals[mid] if mid in vals else _moment(e, mid)
                excess = lhs - math.sqrt(vals[a] * vals[b])
                su.record(max(excess, 0.0), model=e.name, a=a, b=b)
    return su


def suite_symmetry(entries, tol):
    su = Suite("mgf_symmetry", tol)
    rng = np.random.default_rng(12345)
    for e in entries:
        lo, hi = e.model.strip
        bound = 0.9 * min(abs(lo), hi, 1.5)
        z = rng.uniform(-bound, bound, 8) + 1j * rng.uniform(-5, 5, 8)
        a = e.model(z)
        b = e.model(np.conj(z))
        su.record(float(np.max(np.abs(b - np.conj(a)) / np.abs(a))), model=e.name, check="hermitian")
        su.record(abs(e.model(0.0) - 1.0), model=e.name, check="M(0)=1")
    return su


def suite_two_step(tol):
    su = Suite("two_step", tol)
    hng, harg, arp = fixture_params()
    h0 = hng.mean_variance
    lags = [harg.mean / 10.0] * 22
    lam = arp.mean / 10.0
    cases = (
        ("hng", build_model("hng", hng, h0, 2), lambda z: two_step_hng(hng, h0, z)),
        ("harg", build_model("harg", harg, lags, 2), lambda z: two_step_harg(harg, lags, z)),
        ("arp", build_model("arp", arp, lam, 2), lambda z: two_step_arp(arp, lam, z)),
    )
    for name, m, brute in cases:
        for z in TWO_STEP_POINTS:
            zz = complex(min(max(z.real, 0.5 * m.strip.s_min), 0.5 * m.strip.s_max), z.imag)
            su.run(lambda: abs(m(zz) - brute(zz)) / abs(brute(zz)), model=name, z=str(zz))
    return su


# grids for the Monte-Carlo comparison
MC_GRIDS = {
    "hng": ((1, 2, 3, 4), (21, 63, 126)),
    "harg": ((-0.5, 0.5, 1.5, 2.0), (1, 30, 90, 180)),
    "arp": ((0.5, 1.0, 1.5, 2.0), (1, 30, 90, 180)),
}


@lru_cache(maxsize=None)
def _mc_reference(family, H, r, quad):
    # CMGF side of an MC cell; independent of the seed
    hng, harg, arp = fixture_params()
    if family == "hng":
        return integer_moment(build_model("hng", hng, hng.mean_variance, H), int(r), 0.0, quad)
    p, state = (harg, [harg.mean / 10.0] * 22) if family == "harg" else (arp, arp.mean / 10.0)
    return nonneg_moment(build_model(family, p, state, H), MomentSpec(float(r), 0.0, None, quad))


def mc_cells(family, n, seed, threads=1, quad=DEFAULT_QUAD):
    """(family, H, r, cmgf, mc estimate, std err) for the Monte-Carlo grid of ``family``.

    HNG compares integer moments; HARG and ARP non-negative fractional
    moments. The HARG lags and the ARP intensity start at a tenth of their
    stationary means; HNG starts at its mean variance.
    """
    hng, harg, arp = fixture_params()
    orders, horizons = MC_GRIDS[family]
    if family == "hng":
        state, p = hng.mean_variance, hng
        paths = simulate_hng(hng, state, max(horizons), n, seed, record=horizons, threads=threads)
    elif family == "harg":
        state, p = [harg.mean / 10.0] * 22, harg
        paths = simulate_harg(harg, state, max(horizons), n, seed, record=horizons, threads=threads)
    else:
        state, p = arp.mean / 10.0, arp
        paths = simulate_arp(arp, state, max(horizons), n, seed, record=horizons, threads=threads)
    out = []
    for H in horizons:
        for r in orders:
            v = _mc_reference(family, H, r, quad)
            mc = mc_moment(paths[H], r, 0.0, "integer" if family == "hng" else "nonneg", seed)
            out.append((family, H, r, v, mc.estimate, mc.std_err))
    return out


def suite_mc(n, seed, threads, k_se=4.0):
    su = Suite("mc_agreement", k_se)
    for fam in MC_GRIDS:
        try:
            cells = mc_cells(fam, n, seed, threads)
        except CmgfError as exc:
            su.checks += 1
            su.failures.append({"model": fam, "reason": f"{type(exc).__name__}: {exc}"})
            continue
        for fam_, H, r, v, est, se in cells:
            su.record(abs(v - est) / se if se > 0 else abs(v - est), model=fam_, H=H, r=r)
    return su


def run_all(tolerance: Optional[float] = None, mc_draws=50_000, seed=0, threads=1,
            extra: Optional[List[Entry]] = None):
    """Run every suite; returns ``(passed, report_dict)``.

    ``tolerance`` replaces the default relative/absolute tolerances of the
    deterministic suites (not the 4-SE Monte-Carlo band). ``extra`` adds
    models to the model-wide suites.
    """
    entries = builtin_models() + list(extra or [])

    def t(default):
        return default if tolerance is None else float(tolerance)

    suites = [
        suite_s_invariance(entries, t(1e-7)),
        suite_formula_agreement(entries, t(1e-8)),
        suite_even_bridge(entries, t(1e-8)),
        suite_reciprocal_gamma(t(1e-8)),
        suite_vanishing_integral(t(1e-9)),
        suite_normal_tail(t(1e-8)),
        suite_lyapunov(entries, t(1e-10)),
        suite_symmetry(entries, t(1e-12)),
        suite_two_step(t(1e-8)),
    ]
    if mc_draws > 0:
        suites.append(suite_mc(mc_draws, seed, threads))
    report = {"passed": all(s.passed for s in suites),
              "suites": {s.name: s.as_dict() for s in suites}}
    return report["passed"], report

