"""Run configuration: one flat JSON object per run.

Example::

    {"task": "term-structure", "fixture": "arp_fitted",
     "orders": [1], "horizons": [1, 2, 3], "state_scale": 1.0}

``fixture`` loads a shipped parameter set; ``family``/``params``/``state``
given next to it override the fixture. Unknown keys are rejected.
"""

import json
from dataclasses import dataclass, field, fields
from importlib import resources
from typing import List, Optional

from .dynamic import ArpParams, HargParams, HngParams, build_model
from .errors import ParameterError
from .mgf import (NigParams, exponential_mgf, nig_from_standardized, nig_mgf, normal_mgf,
                  poisson_mgf)
from .quadrature import QuadConfig

TASKS = ("moment", "term-structure", "risk", "validate", "bench")
STATIC = ("normal", "exponential", "poisson", "nig")
DYNAMIC = ("hng", "harg", "arp")
VARIANTS = ("absolute", "nonneg", "integer", "tail_above", "tail_below")

_PARAM_KEYS = {
    "normal": ({"mu", "sigma"}, set()),
    "exponential": ({"lam"}, set()),
    "poisson": ({"lam"}, set()),
    "hng": ({"omega", "beta", "alpha", "gamma", "lambda_rp"}, {"r_f"}),
    "arp": ({"omega", "beta", "alpha"}, set()),
}


@dataclass
class RunConfig:
    """Everything one CLI invocation needs.

    ``state`` is ``"at_mean"``, a number (``h_next`` / ``lambda_next``, or a
    common value for all HARG lags) or a list of 22 HARG lags; it is
    multiplied by ``state_scale``.
    """

    task: Optional[str] = None
    fixture: Optional[str] = None
    family: Optional[str] = None
    params: dict = field(default_factory=dict)
    state: object = "at_mean"
    state_scale: float = 1.0
    orders: List[object] = field(default_factory=list)
    shift: float = 0.0
    variant: Optional[str] = None
    horizon: Optional[int] = None
    horizons: List[int] = field(default_factory=list)
    summary: bool = False
    alphas: List[float] = field(default_factory=lambda: [0.01, 0.05])
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    s: Optional[float] = None
    seed: int = 0
    threads: int = 1
    format: str = "csv"
    output: Optional[str] = None
    timing: bool = False
    # validate
    tolerance: Optional[float] = None
    mc_draws: int = 50_000
    # bench
    repetitions: int = 100
    warmup: int = 5
    sim_draws: int = 1_000_000
    sim_repetitions: int = 3

    def quad(self):
        return QuadConfig(abs_tol=self.abs_tol, rel_tol=self.rel_tol)


_FIELDS = {f.name for f in fields(RunConfig)}


def fixture_names():
    root = resources.files("cmgf") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_fixture(name):
    """Parsed fixture ``name`` (without ``.json``)."""
    path = resources.files("cmgf") / "fixtures" / f"{name}.json"
    if not path.is_file():
        raise ParameterError(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    data = json.loads(path.read_text())
    if "version" not in data:
        raise ParameterError(f"fixture {name!r} has no version")
    return data


def _parse_order(v):
    if isinstance(v, bool):
        raise ParameterError(f"order must be a number, got {v!r}")
    if isinstance(v, complex):
        return v if v.imag != 0.0 else v.real
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            z = complex(v.replace(" ", ""))
        except ValueError:
            raise ParameterError(f"cannot parse order {v!r}") from None
        return z if z.imag != 0.0 else z.real
    raise ParameterError(f"order must be a number, got {v!r}")


def from_dict(data: dict) -> RunConfig:
    """Validate a raw mapping and build a :class:`RunConfig`."""
    if not isinstance(data, dict):
        raise ParameterError("config must be a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    cfg = RunConfig()
    if data.get("fixture"):
        fx = load_fixture(data["fixture"])
        cfg.family = fx["family"]
        cfg.params = dict(fx["params"])
        if "state" in fx:
            cfg.state = fx["state"]
    for k, v in data.items():
        if k == "params" and cfg.params and v is not None:
            merged = dict(cfg.params)
            merged.update(v)
            v = merged
        setattr(cfg, k, v)
    return validate_config(cfg)


def validate_config(cfg: RunConfig) -> RunConfig:
    if cfg.task is not None and cfg.task not in TASKS:
        raise ParameterError(f"unknown task {cfg.task!r}; expected one of {TASKS}")
    if cfg.family is not None and cfg.family not in STATIC + DYNAMIC:
        raise ParameterError(f"unknown family {cfg.family!r}")
    if not isinstance(cfg.params, dict):
        raise ParameterError("params must be an object")
    if cfg.variant is not None and cfg.variant not in VARIANTS:
        raise ParameterError(f"unknown variant {cfg.variant!r}; expected one of {VARIANTS}")
    if cfg.format not in ("csv", "json"):
        raise ParameterError(f"format must be csv or json, got {cfg.format!r}")
    cfg.orders = [_parse_order(v) for v in cfg.orders]
    try:
        cfg.horizons = [int(h) for h in cfg.horizons]
        cfg.alphas = [float(a) for a in cfg.alphas]
        cfg.shift = float(cfg.shift)
        cfg.state_scale = float(cfg.state_scale)
        cfg.abs_tol, cfg.rel_tol = float(cfg.abs_tol), float(cfg.rel_tol)
        cfg.seed, cfg.threads = int(cfg.seed), int(cfg.threads)
        cfg.repetitions, cfg.warmup = int(cfg.repetitions), int(cfg.warmup)
        cfg.sim_draws, cfg.sim_repetitions = int(cfg.sim_draws), int(cfg.sim_repetitions)
        cfg.mc_draws = int(cfg.mc_draws)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"bad config value: {exc}") from None
    if cfg.horizon is not None:
        cfg.horizon = int(cfg.horizon)
    if not (cfg.seed >= 0 and cfg.seed < 2 ** 64):
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {cfg.seed}")
    if cfg.threads < 1:
        raise ParameterError(f"threads must be at least 1, got {cfg.threads}")
    cfg.quad()  # tolerance checks
    return cfg


def load(path) -> RunConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    return from_dict(data)


# ---------------------------------------------------------------- models

def _require(family, params, need, allow=frozenset()):
    missing = sorted(need - set(params))
    extra = sorted(set(params) - need - set(allow))
    if missing:
        raise ParameterError(f"{family} params missing: {', '.join(missing)}")
    if extra:
        raise ParameterError(f"{family} params not recognised: {', '.join(extra)}")


def nig_params(params) -> NigParams:
    """NIG parameters from ``xi``/``chi`` (standardized) or ``loc``/``scale``/``tail``/``asym``."""
    if "xi" in params or "chi" in params:
        _require("nig", params, {"xi", "chi"})
        return nig_from_standardized(float(params["xi"]), float(params["chi"]))
    _require("nig", params, {"loc", "scale", "tail", "asym"})
    return NigParams(*(float(params[k]) for k in ("loc", "scale", "tail", "asym")))


def harg_params(params) -> HargParams:
    """HARG parameters from AR coefficients ``phi_*`` or intensity loadings ``beta_*``."""
    opt = {"p"}
    if any(k.startswith("beta_") for k in params):
        _require("harg", params, {"beta_d", "beta_w", "beta_m", "eta", "delta"}, opt)
        return HargParams.from_intensity(*(float(params[k]) for k in
                                           ("beta_d", "beta_w", "beta_m", "eta", "delta")),
                                         p=int(params.get("p", 22)))
    _require("harg", params, {"phi_d", "phi_w", "phi_m", "eta", "delta"}, opt)
    return HargParams(*(float(params[k]) for k in ("phi_d", "phi_w", "phi_m", "eta", "delta")),
                      p=int(params.get("p", 22)))


def dynamic_params(cfg: RunConfig):
    fam, prm = cfg.family, cfg.params
    if fam == "harg":
        return harg_params(prm)
    need, allow = _PARAM_KEYS[fam]
    _require(fam, prm, need, allow)
    vals = {k: float(v) for k, v in prm.items()}
    return HngParams(**vals) if fam == "hng" else ArpParams(**vals)


def state_value(cfg: RunConfig, params):
    """Conditioning state: ``h_next``, ``lambda_next`` or the HARG lag vector."""
    st = cfg.state
    if st == "at_mean":
        if cfg.family == "hng":
            base = params.mean_variance
        else:
            base = params.mean
        if cfg.family == "harg":
            return [cfg.state_scale * base] * params.p
        return cfg.state_scale * base
    if isinstance(st, (int, float)) and not isinstance(st, bool):
        if cfg.family == "harg":
            return [cfg.state_scale * float(st)] * params.p
        return cfg.state_scale * float(st)
    if isinstance(st, list) and cfg.family == "harg":
        return [cfg.state_scale * float(v) for v in st]
    raise ParameterError(f"cannot interpret state {st!r} for family {cfg.family!r}")


def static_model(cfg: RunConfig):
    fam, prm = cfg.family, cfg.params
    if fam == "nig":
        return nig_mgf(nig_params(prm))
    need, allow = _PARAM_KEYS[fam]
    _require(fam, prm, need, allow)
    if fam == "normal":
        return normal_mgf(float(prm["mu"]), float(prm["sigma"]))
    if fam == "exponential":
        return exponential_mgf(float(prm["lam"]))
    return poisson_mgf(float(prm["lam"]))


def make_model(cfg: RunConfig, H=None):
    """MGF model described by ``cfg``; dynamic families need a horizon."""
    if cfg.family is None:
        raise ParameterError("config names no model (set fixture or family)")
    if cfg.family in STATIC:
        return static_model(cfg)
    H = H if H is not None else cfg.horizon
    if H is None:
        raise ParameterError(f"{cfg.family} needs a horizon")
    p = dynamic_params(cfg)
    return build_model(cfg.family, p, state_value(cfg, p), H)
