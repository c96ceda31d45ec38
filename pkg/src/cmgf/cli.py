"""Command-line interface: ``cmgf {moment,term-structure,risk,validate,bench}``.

Exit codes: 0 ok, 2 usage/parameter/domain error, 3 convergence failure,
4 validation failure. Errors print one line ``error: <Kind>: <reason>`` on
stderr.
"""

import argparse
import csv
import io
import json
import math
import sys
import time

from . import config as config_mod
from .bench import NIG_GRID, nig_benchmark
from .dynamic import term_structure
from .errors import (CmgfError, ComputationError, ConvergenceError, DomainError,
                     IntegrandError, ParameterError, RootError)
from .moments import (MomentSpec, absolute_moment, expected_shortfall, integer_moment,
                      nonneg_moment, tail_moment)
from .validate import Entry, run_all

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_VALIDATION = 0, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- output

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def render(columns, rows, fmt, extra=None):
    """CSV (17 significant digits) or JSON text for a table."""
    if fmt == "json":
        doc = {"columns": list(columns), "rows": [dict(zip(columns, r)) for r in rows]}
        if extra:
            doc.update(extra)
        return json.dumps(_json_safe(doc), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _emit(text, cfg):
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def _split(v):
    if isinstance(v, complex):
        return v.real, v.imag
    return float(v), None


def cmd_moment(cfg):
    """One row per (order, shift, variant)."""
    if not cfg.orders:
        raise ParameterError("orders list is empty")
    m = config_mod.make_model(cfg)
    quad = cfg.quad()
    variant = cfg.variant or ("nonneg" if m.support_min >= cfg.shift else "absolute")
    xi = cfg.shift
    is_complex = any(isinstance(r, complex) for r in cfg.orders)
    rows = []
    for r in cfg.orders:
        t0 = time.perf_counter()
        if variant == "absolute":
            res = absolute_moment(m, MomentSpec(r, xi, cfg.s, quad), full_output=True)
        elif variant == "nonneg":
            res = nonneg_moment(m, MomentSpec(r, xi, cfg.s, quad), full_output=True)
        else:
            if isinstance(r, complex) or not float(r).is_integer():
                raise DomainError(f"{variant} variant needs an integer order, got {r}")
            if variant == "integer":
                res = integer_moment(m, int(r), xi, quad, cfg.s, full_output=True)
            else:
                side = "above" if variant == "tail_above" else "below"
                res = tail_moment(m, int(r), xi, side, quad, cfg.s, full_output=True)
        us = (time.perf_counter() - t0) * 1e6
        re_, im_ = _split(res.value)
        order_re, order_im = _split(r)
        row = [order_re] + ([order_im or 0.0] if is_complex else []) + [xi, variant, re_]
        if is_complex:
            row.append(im_ or 0.0)
        row.append(float(res.err_estimate))
        if cfg.timing:
            row.append(us)
        rows.append(row)
    cols = ["r"] + (["r_imag"] if is_complex else []) + ["xi", "variant", "value"]
    cols += (["value_imag"] if is_complex else []) + ["err_estimate"]
    if cfg.timing:
        cols.append("time_us")
    return cols, rows, None


def cmd_term_structure(cfg):
    if cfg.family not in config_mod.DYNAMIC:
        raise ParameterError("term-structure needs a dynamic model (hng, harg or arp)")
    if not cfg.horizons:
        raise ParameterError("horizons list is empty")
    p = config_mod.dynamic_params(cfg)
    state = config_mod.state_value(cfg, p)
    if any(isinstance(r, complex) for r in cfg.orders):
        raise DomainError("term structures take real orders")
    ts = term_structure(cfg.family, p, state, cfg.orders, cfg.horizons, cfg.quad(),
                        cfg.variant, cfg.summary, cfg.s, cfg.threads)
    if cfg.summary:
        cols = ["H", "mean", "sd", "skew", "kurt", "error"]
        rows = []
        for H in sorted(ts.summary):
            v = ts.summary[H]
            if isinstance(v, str):
                rows.append([H, math.nan, math.nan, math.nan, math.nan, v])
            else:
                rows.append([H, *map(float, v), ""])
        return cols, rows, None
    cols = ["H", "r", "value", "err_estimate", "error"]
    rows = [[c.horizon, c.order, c.value, c.err_estimate, c.error or ""] for c in ts.cells]
    return cols, rows, None


def cmd_risk(cfg):
    m = config_mod.make_model(cfg)
    if not cfg.alphas:
        raise ParameterError("alphas list is empty")
    rows = []
    for a in cfg.alphas:
        if not 0.0 < a < 1.0:
            raise DomainError(f"alpha must be in (0, 1), got {a}")
        q, es = expected_shortfall(m, a, cfg.quad(), full_output=True)
        rows.append([a, q, es])
    return ["alpha", "quantile", "es"], rows, None


def cmd_validate(cfg):
    extra = []
    if cfg.family is not None:
        m = config_mod.make_model(cfg, cfg.horizon or (1 if cfg.family in config_mod.DYNAMIC else None))
        kind = "real" if m.support_min == -math.inf else ("lattice" if m.lattice_span else "nonneg")
        shift = -0.5 * m.lattice_span if m.lattice_span else 0.0
        extra.append(Entry(f"config:{m.descriptor}", m, kind, shift))
    passed, report = run_all(cfg.tolerance, cfg.mc_draws, cfg.seed, cfg.threads, extra)
    cols = ["suite", "passed", "checks", "max_error", "failures"]
    rows = [[k, v["passed"], v["checks"], v["max_error"], len(v["failures"])]
            for k, v in report["suites"].items()]
    return cols, rows, {"report": report, "passed": passed}


def cmd_bench(cfg):
    if cfg.repetitions < 1 or cfg.sim_repetitions < 1:
        raise ParameterError("repetitions must be at least 1")
    if cfg.family is not None:
        if cfg.family != "nig":
            raise ParameterError("bench runs on NIG parameters")
        params = [config_mod.nig_params(cfg.params)]
        labels = [cfg.fixture or "nig"]
    else:
        names = ["nig_standard_a", "nig_standard_b"]
        params = [config_mod.nig_params(config_mod.load_fixture(n)["params"]) for n in names]
        labels = names
    orders = [float(r) for r in cfg.orders] if cfg.orders else list(NIG_GRID)
    rep = nig_benchmark(params, orders, cfg.repetitions, cfg.warmup, cfg.sim_draws,
                        cfg.sim_repetitions, cfg.seed, cfg.quad(), labels)
    cols = ["params", "method", "r", "median_us", "value", "abs_error"]
    rows = [[r.label, r.method, r.order, r.median_us, r.value, r.abs_error] for r in rep.rows]
    for label, g in rep.grid.items():
        for method in ("cmgf", "density", "simulation"):
            rows.append([label, method, "grid", g[f"{method}_us"], None, None])
    return cols, rows, {"grid": rep.grid, "ordering": rep.ordering()}


COMMANDS = {
    "moment": cmd_moment,
    "term-structure": cmd_term_structure,
    "risk": cmd_risk,
    "validate": cmd_validate,
    "bench": cmd_bench,
}


# ---------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    ap = _Parser(prog="cmgf", description="Moments from complex-extended moment-generating functions.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--fixture", help="shipped parameter set (overrides the config model)")
        sp.add_argument("--output", help="write the table here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--abs-tol", type=float, dest="abs_tol")
        sp.add_argument("--rel-tol", type=float, dest="rel_tol")
        sp.add_argument("--s", type=float, help="contour abscissa override")
        sp.add_argument("--timing", action="store_true", help="add wall-time columns")
    return ap


def _config(args):
    data = {}
    if args.config:
        data = dict(config_mod.load(args.config).__dict__)
    if args.fixture:
        fx = config_mod.load_fixture(args.fixture)
        data.update(fixture=args.fixture, family=fx["family"], params=dict(fx["params"]),
                    state=fx.get("state", "at_mean"))
    for key in ("output", "format", "seed", "threads", "abs_tol", "rel_tol", "s"):
        v = getattr(args, key)
        if v is not None:
            data[key] = v
    if args.timing:
        data["timing"] = True
    data["task"] = args.command
    cfg = config_mod.RunConfig(**data)
    return config_mod.validate_config(cfg)


def _fail(exc, code):
    msg = " ".join(str(exc).split())
    print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        cols, rows, extra = COMMANDS[args.command](cfg)
        text = render(cols, rows, cfg.format, extra)
        _emit(text, cfg)
        if args.command == "validate" and not extra["passed"]:
            failed = [k for k, v in extra["report"]["suites"].items() if not v["passed"]]
            print(f"error: ValidationFailure: suites failed: {', '.join(failed)}", file=sys.stderr)
            return EXIT_VALIDATION
        return EXIT_OK
    except (UsageError, ParameterError, DomainError) as exc:
        return _fail(exc, EXIT_USAGE)
    except (ConvergenceError, IntegrandError, RootError, ComputationError) as exc:
        return _fail(exc, EXIT_CONVERGENCE)
    except (CmgfError, OSError) as exc:
        return _fail(exc, EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
