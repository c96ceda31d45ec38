"""Independent checks: Monte-Carlo simulators, the NIG density and brute-force MGFs.

Random streams are split into fixed-size blocks of paths. Block ``b`` of a
run with seed ``seed`` draws from ``Philox(SeedSequence(seed, spawn_key=(b,)))``,
so the output does not depend on how many threads process the blocks.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import special

from .dynamic import ArpParams, HargParams, HngParams
from .errors import DomainError, ParameterError
from .mgf import NigParams
from .quadrature import QuadConfig, integrate_half_line

BLOCK = 1 << 15


class McResult(NamedTuple):
    estimate: float
    std_err: float
    n: int
    seed: Optional[int]


def _block_gen(seed, b):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(b,))))


def _blocked(n, seed, threads, fn):
    """Run ``fn(rng, size)`` per block and concatenate along the last axis."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    sizes = [min(BLOCK, n - i) for i in range(0, n, BLOCK)]

    def job(b):
        return fn(_block_gen(seed, b), sizes[b])

    if threads and threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    if isinstance(parts[0], dict):
        return {k: np.concatenate([p[k] for p in parts], axis=-1) for k in parts[0]}
    return np.concatenate(parts, axis=-1)


def _horizons(H, record):
    if record is None:
        return [int(H)]
    rec = sorted(set(int(h) for h in record))
    if rec[0] < 1 or rec[-1] > H:
        raise ParameterError(f"recorded horizons must lie in [1, {H}]")
    return rec


# ---------------------------------------------------------------- samplers

def sample_nig(p: NigParams, n: int, seed: int, threads: int = 1):
    """NIG draws ``X = loc + beta V + sqrt(V) Z`` with ``V ~ IG(delta/gamma, delta^2)``."""
    mu_ig = p.scale / p.gamma
    shape_ig = p.scale ** 2

    def fn(rng, size):
        v = rng.wald(mu_ig, shape_ig, size)
        return p.loc + p.asym * v + np.sqrt(v) * rng.standard_normal(size)

    return _blocked(n, seed, threads, fn)


def simulate_hng(p: HngParams, h_next, H, n, seed, record=None, threads=1):
    """Cumulative log-return ``R_{T,H}`` paths of the Heston-Nandi GARCH.

    With ``record`` a dict ``{h: samples}`` for each listed horizon is
    returned from one simulation run.
    """
    hs = _horizons(H, record)

    def fn(rng, size):
        h = np.full(size, float(h_next))
        R = np.zeros(size)
        out = {}
        for t in range(1, hs[-1] + 1):
            z = rng.standard_normal(size)
            sq = np.sqrt(h)
            R += p.r_f + (p.lambda_rp - 0.5) * h + sq * z
            if t in hs:
                out[t] = R.copy()
            h = p.omega + p.beta * h + p.alpha * (z - p.gamma * sq) ** 2
        return out

    res = _blocked(n, seed, threads, fn)
    return res if record is not None else res[hs[-1]]


def simulate_harg(p: HargParams, lags, H, n, seed, record=None, threads=1):
    """``X_{T+H}`` paths of the HARG model.

    Each step draws ``K ~ Poisson(theta_t)`` with
    ``theta_t = sum_j (phi_j/eta) X_{t-j}`` and then ``X ~ Gamma(delta + K, eta)``.
    """
    hs = _horizons(H, record)
    lags = np.asarray(lags, dtype=float)
    if lags.size != p.p:
        raise ParameterError(f"HARG state needs {p.p} lags, got {lags.size}")
    beta = p.phi / p.eta
    P = p.p

    def fn(rng, size):
        # circular buffer: row (pos - j) mod P holds X_{t-j}; the weights are
        # rotated instead of the (P, size) buffer
        buf = np.repeat(lags[::-1, None], size, axis=1)  # oldest first
        pos = P - 1
        w = np.empty(P)
        out = {}
        for t in range(1, hs[-1] + 1):
            w[(pos - np.arange(P)) % P] = beta
            theta = w @ buf
            k = rng.poisson(theta)
            x = p.eta * rng.standard_gamma(p.delta + k)
            pos = (pos + 1) % P
            buf[pos] = x
            if t in hs:
                out[t] = x.copy()
        return out

    res = _blocked(n, seed, threads, fn)
    return res if record is not None else res[hs[-1]]


def simulate_arp(p: ArpParams, lambda_next, H, n, seed, record=None, threads=1):
    """Average-count ``(1/H) sum_h Y_{T+h}`` paths of the autoregressive Poisson model."""
    hs = _horizons(H, record)

    def fn(rng, size):
        lam = np.full(size, float(lambda_next))
        S = np.zeros(size)
        out = {}
        for t in range(1, hs[-1] + 1):
            y = rng.poisson(lam)
            S += y
            if t in hs:
                out[t] = S / t
            lam = p.omega + p.beta * lam + p.alpha * y
        return out

    res = _blocked(n, seed, threads, fn)
    return res if record is not None else res[hs[-1]]


# ---------------------------------------------------------------- estimates

def mc_moment(samples, r, xi=0.0, variant="absolute", seed=None) -> McResult:
    """Sample moment with its standard error.

    ``variant`` is ``absolute`` (``|x - xi|^r``), ``nonneg`` (``(x - xi)^r``,
    base must be non-negative for fractional ``r``), ``integer``
    (``(x - xi)^k``), ``tail_above`` or ``tail_below``
    (``(x - xi)^k`` restricted to one side of ``xi``).
    """
    x = np.asarray(samples, dtype=float) - xi
    n = x.size
    if n < 1:
        raise ParameterError("no samples")
    if variant == "absolute":
        v = np.abs(x) ** r
    elif variant == "nonneg":
        if np.any(x < 0) and not float(r).is_integer():
            raise DomainError("negative base with a fractional order; use the absolute variant")
        v = x ** r
    elif variant == "integer":
        if not float(r).is_integer():
            raise DomainError(f"integer variant needs an integer order, got {r}")
        v = x ** int(r)
    elif variant in ("tail_above", "tail_below"):
        if not float(r).is_integer():
            raise DomainError(f"tail variant needs an integer order, got {r}")
        mask = x > 0 if variant == "tail_above" else x < 0
        v = np.where(mask, x, 0.0) ** int(r)
    else:
        raise ParameterError(f"unknown variant {variant!r}")
    est = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McResult(est, se, n, seed)


def accurate_digits(sigma_r, n):
    """Accurate decimal places ``-log10(sigma_r / sqrt(n))`` of an MC mean."""
    if not sigma_r > 0:
        raise DomainError(f"sigma must be positive, got {sigma_r}")
    if not n >= 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return -math.log10(sigma_r / math.sqrt(n))


# ---------------------------------------------------------------- density baseline

def nig_density(p: NigParams, x):
    """NIG density ``alpha delta K1(alpha q) / (pi q) * exp(delta gamma + beta (x - loc))``.

    ``q = sqrt(delta^2 + (x - loc)^2)``; ``K1`` comes in exponentially scaled
    form so the exponent is combined before exponentiation.
    """
    x = np.asarray(x, dtype=float)
    d = x - p.loc
    q = np.hypot(p.scale, d)
    y = p.tail * q
    out = p.tail * p.scale * special.k1e(y) / (math.pi * q) \
        * np.exp(p.scale * p.gamma + p.asym * d - y)
    return out if out.ndim else float(out)


def density_moment(p: NigParams, r, xi=0.0, quad=None):
    """``E|X - xi|^r`` by integrating ``|x - xi|^r f(x)`` on both sides of ``xi``.

    For ``r < 0`` the substitution ``u = v^{1/(r+1)}`` removes the endpoint
    singularity.
    """
    if not r > -1:
        raise DomainError(f"r > -1 required, got {r}")
    quad = quad or QuadConfig(abs_tol=1e-13, rel_tol=1e-11)
    if r == 0:
        return 1.0
    if r < 0:
        e = 1.0 / (r + 1.0)

        def g(v):
            u = v ** e
            return e * (nig_density(p, xi + u) + nig_density(p, xi - u))
        # decay in v is exp(-c v^{1/(r+1)}): stretch the first panel
        return integrate_half_line(g, quad.replace(base=max(1.0, 0.5 ** (r + 1.0)))).value

    def g(u):
        return u ** r * (nig_density(p, xi + u) + nig_density(p, xi - u))

    return integrate_half_line(g, quad).value


# ---------------------------------------------------------------- two-step brute force

def two_step_hng(p: HngParams, h_next, z, nodes=80):
    """HNG two-day return MGF by Gauss-Hermite over the first day's shock."""
    z = complex(z)
    x, w = special.roots_hermite(nodes)
    eps = math.sqrt(2.0) * x
    h1 = float(h_next)
    sq = math.sqrt(h1)
    r1 = p.r_f + (p.lambda_rp - 0.5) * h1 + sq * eps
    h2 = p.omega + p.beta * h1 + p.alpha * (eps - p.gamma * sq) ** 2
    one_day = z * p.r_f + (z * (p.lambda_rp - 0.5) + 0.5 * z * z) * h2
    return complex(np.sum(w * np.exp(z * r1 + one_day)) / math.sqrt(math.pi))


def two_step_harg(p: HargParams, lags, z, nodes=60, tail=1e-14):
    """HARG two-step MGF of ``X_{T+2}``.

    Sums over the Poisson count of the first step (to ``tail`` mass) and
    integrates the gamma law by generalised Gauss-Laguerre quadrature.
    """
    z = complex(z)
    lags = np.asarray(lags, dtype=float)
    phi = p.phi
    theta = float(phi @ lags) / p.eta
    d = 1.0 - p.eta * z
    b = (z / d) * phi  # one-step loadings on X_{T+2-j}
    a = -p.delta * np.log(d)
    rest = a + np.dot(b[1:], lags[:-1])  # X_{T+1} enters through b[0]
    u = b[0]
    kmax = int(special.pdtrik(tail, theta)) + 10 if theta > 0 else 0
    ks = np.arange(kmax + 1)
    pk = np.exp(-theta + ks * math.log(theta) - special.gammaln(ks + 1)) if theta > 0 else np.array([1.0])
    total = 0.0
    for k, w_k in zip(ks, pk):
        shape = p.delta + k
        y, wy = special.roots_genlaguerre(nodes, shape - 1.0)
        integral = np.sum(wy * np.exp(u * p.eta * y)) / special.gamma(shape)
        total += w_k * integral
    return complex(np.exp(rest) * total)


def two_step_arp(p: ArpParams, lambda_next, z, tail=1e-14):
    """ARP two-period average-count MGF by summing over the first count."""
    z = complex(z)
    lam1 = float(lambda_next)
    ymax = int(special.pdtrik(tail, lam1)) + 10
    y = np.arange(ymax + 1)
    pk = np.exp(-lam1 + y * math.log(lam1) - special.gammaln(y + 1))
    lam2 = p.omega + p.beta * lam1 + p.alpha * y
    u = 0.5 * z
    return complex(np.sum(pk * np.exp(u * y + lam2 * np.expm1(u))))
