"""Numerical laboratory for single-sample posted-price broker mechanisms."""
from .analytic import (
    Benchmarks,
    Metrics,
    expected_gft_single_sample,
    expected_profit_single_sample,
    expected_sw_single_sample,
    first_best,
)
from .distributions import Distribution, DistributionSpec, HParams, make_h, make_power, make_uniform
from .errors import BrokerLabError, NumericalError, ParameterError, PreconditionError
from .mechanism import Setting, TradeInstance
from .montecarlo import compare, estimate

__version__ = "0.1.0"

__all__ = [
    "Benchmarks",
    "BrokerLabError",
    "Distribution",
    "DistributionSpec",
    "HParams",
    "Metrics",
    "NumericalError",
    "ParameterError",
    "PreconditionError",
    "Setting",
    "TradeInstance",
    "compare",
    "estimate",
    "expected_gft_single_sample",
    "expected_profit_single_sample",
    "expected_sw_single_sample",
    "first_best",
    "make_h",
    "make_power",
    "make_uniform",
]
