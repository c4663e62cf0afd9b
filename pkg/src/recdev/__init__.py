"""Deviation rates and exact distributions for weak record counts of
skip-free lattice random walks."""

from . import errors, ladder, montecarlo, oracle, power_series, rates, walk_model
from .ladder import LadderGF, build_ladder_gf, f0_point, f0_series, h_point, h_series, return_prob_series
from .montecarlo import SimConfig, SimResult, empirical_pmf, estimate_tail, run_simulation, simulate_path
from .oracle import TailTable, chernoff_bound, convergence_table, occupation_dp, record_tail_exact, y_pmf
from .power_series import ScaledFloat, ScaledSeries, conv_multiply, poly_apply, reciprocal_one_minus
from .rates import (
    HParams,
    RateResult,
    assumption_h_exact,
    assumption_h_fit,
    g_inverse,
    lambda_eval,
    ldp_rate,
    legendre,
    mdp_rate,
    tauberian_constant,
)
from .walk_model import Kind, Side, StepLaw, builtin_law, law_to_json, pgf_coefficients, pgf_eval, validate_law

__version__ = "0.1.0"

__all__ = [
    "errors",
    "walk_model",
    "power_series",
    "ladder",
    "rates",
    "oracle",
    "montecarlo",
    "Side",
    "Kind",
    "StepLaw",
    "validate_law",
    "builtin_law",
    "law_to_json",
    "pgf_eval",
    "pgf_coefficients",
    "ScaledFloat",
    "ScaledSeries",
    "conv_multiply",
    "reciprocal_one_minus",
    "poly_apply",
    "LadderGF",
    "h_point",
    "h_series",
    "f0_point",
    "f0_series",
    "return_prob_series",
    "build_ladder_gf",
    "HParams",
    "RateResult",
    "lambda_eval",
    "g_inverse",
    "legendre",
    "ldp_rate",
    "mdp_rate",
    "assumption_h_exact",
    "assumption_h_fit",
    "tauberian_constant",
    "TailTable",
    "y_pmf",
    "record_tail_exact",
    "occupation_dp",
    "chernoff_bound",
    "convergence_table",
    "SimConfig",
    "SimResult",
    "simulate_path",
    "run_simulation",
    "estimate_tail",
    "empirical_pmf",
    "__version__",
]
