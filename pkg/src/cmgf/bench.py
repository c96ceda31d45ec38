"""Timing harness: CMGF against density integration and simulation on NIG.

Every timing is the median wall time over repeated calls after a warm-up,
reported in microseconds.
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ParameterError
from .mgf import NigParams, nig_mgf
from .moments import DEFAULT_QUAD, MomentSpec, absolute_moment
from .oracle import density_moment, mc_moment, sample_nig

NIG_GRID = (-0.5, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)


def median_time_us(fn, repetitions=100, warmup=5):
    """Median wall time of ``fn()`` in microseconds."""
    if repetitions < 1:
        raise ParameterError(f"repetitions must be at least 1, got {repetitions}")
    for _ in range(max(0, warmup)):
        fn()
    times = np.empty(repetitions)
    for i in range(repetitions):
        t0 = time.perf_counter_ns()
        fn()
        times[i] = time.perf_counter_ns() - t0
    return float(np.median(times)) * 1e-3


def nig_truth(p: NigParams, r):
    """Closed-form ``E|X|^r`` of a zero-mean NIG where known (r = 0, 2, 4)."""
    if abs(p.mean) > 1e-12:
        return None
    var = p.variance
    if r == 0:
        return 1.0
    if r == 2:
        return var
    if r == 4:
        # excess kurtosis 3 (1 + 4 beta^2/alpha^2) / (delta gamma)
        ex = 3.0 * (1.0 + 4.0 * p.asym ** 2 / p.tail ** 2) / (p.scale * p.gamma)
        return var * var * (3.0 + ex)
    return None


@dataclass
class BenchRow:
    label: str
    method: str
    order: float
    median_us: float
    value: float
    abs_error: Optional[float]


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)
    grid: dict = field(default_factory=dict)

    def ordering(self):
        """Per parameter set: CMGF grid time < density grid time, and CMGF < simulation/100."""
        out = {}
        for label, g in self.grid.items():
            out[label] = {
                "cmgf_faster_than_density": g["cmgf_us"] < g["density_us"],
                "cmgf_under_1pct_of_simulation": g["cmgf_us"] < g["simulation_us"] / 100.0,
                "density_over_cmgf": g["density_us"] / g["cmgf_us"],
                "simulation_over_cmgf": g["simulation_us"] / g["cmgf_us"],
            }
        return out


def _err(value, truth):
    return None if truth is None else abs(value - truth)


def nig_benchmark(params, orders=NIG_GRID, repetitions=100, warmup=5, sim_draws=1_000_000,
                  sim_repetitions=3, seed=0, quad=None, labels=None):
    """Time the three NIG moment methods.

    Parameters
    ----------
    params : sequence of NigParams
    orders : sequence of float
        Absolute-moment orders about zero.
    repetitions, warmup : int
        Timing repetitions for CMGF and density integration.
    sim_draws, sim_repetitions : int
        Simulation size and its (smaller) repetition count.

    Returns
    -------
    BenchReport
        One row per (parameter set, method, order) plus grid totals: the
        median time of computing the whole order grid with each method.
    """
    if repetitions < 1 or sim_repetitions < 1:
        raise ParameterError("repetitions must be at least 1")
    quad = quad or DEFAULT_QUAD
    labels = labels or [f"nig{i}" for i in range(len(params))]
    rep = BenchReport()
    for label, p in zip(labels, params):
        m = nig_mgf(p)
        specs = [MomentSpec(float(r), quad=quad) for r in orders]
        for r, spec in zip(orders, specs):
            truth = nig_truth(p, r)
            v = absolute_moment(m, spec)
            t = median_time_us(lambda: absolute_moment(m, spec), repetitions, warmup)
            rep.rows.append(BenchRow(label, "cmgf", r, t, v, _err(v, truth)))
            v = density_moment(p, r, 0.0, quad)
            t = median_time_us(lambda: density_moment(p, r, 0.0, quad), repetitions, warmup)
            rep.rows.append(BenchRow(label, "density", r, t, v, _err(v, truth)))

            def sim():
                return mc_moment(sample_nig(p, sim_draws, seed), r).estimate

            v = sim()
            t = median_time_us(sim, sim_repetitions, 0)
            rep.rows.append(BenchRow(label, "simulation", r, t, v, _err(v, truth)))

        def cm_grid():
            for spec in specs:
                absolute_moment(m, spec)

        def de_grid():
            for r in orders:
                density_moment(p, r, 0.0, quad)

        sim_times = [row.median_us for row in rep.rows if row.label == label
                     and row.method == "simulation"]
        rep.grid[label] = {
            "cmgf_us": median_time_us(cm_grid, repetitions, warmup),
            "density_us": median_time_us(de_grid, repetitions, warmup),
            "simulation_us": float(np.sum(sim_times)),
        }
    return rep
