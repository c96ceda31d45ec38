"""Moments of random variables from complex-extended moment-generating functions.

A moment ``E|X - xi|^r`` is recovered by integrating ``M(s + it)`` along a
vertical line inside the strip where the MGF is finite. The package covers
static laws (normal, exponential, Poisson, NIG), affine dynamic models
(Heston-Nandi GARCH, HARG, autoregressive Poisson) through their MGF
recursions, and Monte-Carlo and density baselines for checking.
"""

from .dynamic import (ArpParams, ArpState, HargParams, HargState, HngParams, HngState,
                      arp_mgf, build_model, harg_mgf, hng_mgf, term_structure)
from .errors import (CmgfError, ComputationError, ConvergenceError, DomainError,
                     IntegrandError, ParameterError, RootError)
from .mgf import (MgfModel, NigParams, Strip, bivariate_slices, exponential_mgf,
                  nig_from_standardized, nig_mgf, normal_mgf, poisson_mgf)
from .moments import (MomentResult, MomentSpec, absolute_moment, cdf, cross_moments,
                      default_abscissa, expected_shortfall, integer_moment, moment_summary,
                      nonneg_moment, quantile, reciprocal_gamma, summary_from_raw, tail_moment)
from .quadrature import QuadConfig, QuadResult, integrate_full_line, integrate_half_line
from .special import complex_power, gamma_fn

__version__ = "0.1.0"

__all__ = [
    "ArpParams", "ArpState", "HargParams", "HargState", "HngParams", "HngState",
    "arp_mgf", "build_model", "harg_mgf", "hng_mgf", "term_structure",
    "CmgfError", "ComputationError", "ConvergenceError", "DomainError", "IntegrandError",
    "ParameterError", "RootError",
    "MgfModel", "NigParams", "Strip", "bivariate_slices", "exponential_mgf",
    "nig_from_standardized", "nig_mgf", "normal_mgf", "poisson_mgf",
    "MomentResult", "MomentSpec", "absolute_moment", "cdf", "cross_moments",
    "default_abscissa", "expected_shortfall", "integer_moment", "moment_summary",
    "nonneg_moment", "quantile", "reciprocal_gamma", "summary_from_raw", "tail_moment",
    "QuadConfig", "QuadResult", "integrate_full_line", "integrate_half_line",
    "complex_power", "gamma_fn",
]
