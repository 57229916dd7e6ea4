"""quadprice: precision-aware quadrature and option pricing.

A semi-closed stochastic-volatility jump-diffusion pricer whose integrand
can silently lose all of its binary64 digits in a small-vol-of-vol corner,
a cheap decision rule that spots those cases before integrating, and the
machinery around them: five quadrature schemes with honest error estimates
and evaluation counters, an adversarial integrand family that defeats the
Gauss-Kronrod estimator, a two-stage calibration pipeline, and sampling
censuses over the parameter box.
"""

from .model import (
    LogNormalJumps,
    LogUniformJumps,
    MarketQuote,
    ModelParams,
    afsvjd,
    bates,
    heston,
)
from .precision import DEFAULT_DIGITS, WORKING, extended
from .failure import analytic_E0, blowup_profile, build_failure_fn
from .pricing import (
    PriceResult,
    params_from_vector,
    price_call,
    price_call_reduced,
)
from .quadrature import (
    AdaptiveLobatto,
    AdaptiveSimpson,
    GaussKronrod715,
    GaussLegendre,
    QuadSpec,
    QuadratureResult,
    Trapezoid,
    integrate,
    integrate_semi_infinite,
)
from .switching import (
    Auto,
    ExtendedFull,
    Optimized,
    SwitchDecision,
    WorkingOnly,
    decide,
    make_evaluator,
)
from .census import (
    SamplingPlan,
    StudyReport,
    run_problematic_census,
    run_switch_census,
)
from .calibration import (
    CalibrationReport,
    CalibrationSettings,
    OptionChain,
    calibrate,
    make_synthetic_chain,
)
from .chainio import (
    ChainParseError,
    dump_report,
    load_report,
    read_chain,
    write_chain,
)

__version__ = "0.1.0"

__all__ = [
    "LogNormalJumps", "LogUniformJumps", "MarketQuote", "ModelParams",
    "afsvjd", "bates", "heston",
    "DEFAULT_DIGITS", "WORKING", "extended",
    "QuadSpec", "QuadratureResult", "integrate", "integrate_semi_infinite",
    "Trapezoid", "GaussLegendre", "AdaptiveSimpson", "AdaptiveLobatto",
    "GaussKronrod715",
    "Auto", "ExtendedFull", "Optimized", "SwitchDecision", "WorkingOnly",
    "decide", "make_evaluator",
    "PriceResult", "price_call", "price_call_reduced", "params_from_vector",
    "analytic_E0", "blowup_profile", "build_failure_fn",
    "SamplingPlan", "StudyReport", "run_switch_census",
    "run_problematic_census",
    "CalibrationReport", "CalibrationSettings", "OptionChain", "calibrate",
    "make_synthetic_chain",
    "ChainParseError", "read_chain", "write_chain", "dump_report",
    "load_report",
    "__version__",
]
