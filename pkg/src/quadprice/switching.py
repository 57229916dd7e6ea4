"""Regime switching between binary64 and extended-precision evaluation.

The transform term C = kappa*theta*(Y*tau - C1*C2) subtracts a huge product
C1*C2 (C1 ~ 2/B^2 with B tiny) from a moderate Y*tau. When the decimal
orders of C1 and C2 sit more than ~16 decades apart, binary64 has no digits
left for the difference and the integrand is silently wrong. The decision
rule below detects that from two cheap order-of-magnitude probes plus one
working-precision integrand evaluation, and picks an evaluation strategy:

  WorkingOnly    everything binary64
  ExtendedFull   entire integrand at extended digits, lowered at the end
  Optimized      only the C term extended (it is the sole casualty), the
                 rest binary64
  Auto           run the decision once per (params, quote); switch to
                 Optimized only when it fires

The o > omega0 gate uses omega0 = 22, not 16: binary64 carries ~16 digits,
and the remaining ~6 decades of slack absorb how far the integral's scale,
the strike factor K e^{-r tau}/pi, and a small f0 can amplify a relative
error of 10^(o-16) into the final price. The two correction terms make that
slack explicit: omega1 charges for strikes below 3 (where the price scale
stops shrinking with K), omega2 credits nothing for f0 >= 1 and tightens
the gate as f0 falls toward the 10^-3 floor.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import model
from .model import MarketQuote, ModelParams
from .precision import DEFAULT_DIGITS, WORKING, extended

__all__ = [
    "OMEGA0",
    "SwitchDecision",
    "WorkingOnly",
    "ExtendedFull",
    "Optimized",
    "Auto",
    "EvalStrategy",
    "order_difference",
    "omega1",
    "omega2",
    "decide",
    "make_evaluator",
    "strategy_for_mode",
    "SWITCH_MODES",
]

# Decision threshold in decimal decades. Exposed for experts; the tables,
# censuses, and the pricing pipeline all use the default.
OMEGA0 = 22.0

F0_FLOOR = 1e-3


@dataclass(frozen=True)
class SwitchDecision:
    """Everything the decision rule measured, plus the verdict.

    o may be +inf (Re C2 underflowed to zero: total cancellation), in which
    case par depends only on the f0 gate. threshold = omega0 + omega1 - omega2
    is always >= omega0.
    """

    o1: float
    o2: float
    o: float
    f0: float
    omega1: float
    omega2: float
    threshold: float
    par: bool

    def as_dict(self) -> dict:
        return {
            "o1": self.o1, "o2": self.o2, "o": self.o, "f0": self.f0,
            "omega1": self.omega1, "omega2": self.omega2,
            "threshold": self.threshold, "par": self.par,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SwitchDecision":
        return cls(o1=d["o1"], o2=d["o2"], o=d["o"], f0=d["f0"],
                   omega1=d["omega1"], omega2=d["omega2"],
                   threshold=d["threshold"], par=d["par"])


def _log10_abs(x: float) -> float:
    ax = abs(x)
    return math.log10(ax) if ax > 0.0 else -math.inf


def order_difference(params: ModelParams, tau: float) -> tuple[float, float, float]:
    """Decimal orders (o1, o2, o1 - o2) of Re C1 and Re C2 at the contour
    origin k = i/2, measured in binary64 (the precision whose failure is
    being predicted). log10(0) counts as -inf, so total cancellation of C2
    reports o = +inf."""
    terms = model.transform_terms(params, tau, 0.5j, WORKING)
    c1 = terms.C1
    o1 = _log10_abs(c1.real if isinstance(c1, complex) else c1)
    o2 = _log10_abs(terms.C2.real)
    o = o1 - o2
    if math.isnan(o):  # both orders -inf; nothing measurable cancels
        o = -math.inf
    return o1, o2, o


def omega1(strike: float) -> float:
    """Strike correction: min(5, max(4 - log10(K/3), 0)).

    Zero for K >= 3*10^4, grows as the strike falls below that, capped at 5."""
    if strike <= 0:
        raise ValueError(f"strike must be positive, got {strike}")
    return min(5.0, max(4.0 - math.log10(strike / 3.0), 0.0))


def omega2(f0: float) -> float:
    """Integrand-scale correction: min(log10 f0, 0); f0 = 0 maps to -inf."""
    if f0 < 0:
        raise ValueError(f"f0 is an absolute value, got {f0}")
    if f0 == 0.0:
        return -math.inf
    return min(math.log10(f0), 0.0)


def decide(params: ModelParams, quote: MarketQuote, *,
           omega0: float = OMEGA0) -> SwitchDecision:
    """The switching decision for one (params, quote) pair.

    Costs exactly one working-precision integrand evaluation (for f0) and
    one transform evaluation at k = i/2 (for the orders); no extended
    arithmetic is touched.
    """
    o1, o2, o = order_difference(params, quote.tau)
    f0 = model.f_zero(params, quote, WORKING)
    w1 = omega1(quote.strike)
    w2 = omega2(f0)
    threshold = omega0 + w1 - w2
    par = (f0 > F0_FLOOR) and (o > omega0) and (o > threshold)
    return SwitchDecision(o1=o1, o2=o2, o=o, f0=f0,
                          omega1=w1, omega2=w2, threshold=threshold, par=par)


@dataclass(frozen=True)
class WorkingOnly:
    """Everything in binary64."""

    @property
    def label(self) -> str:
        return "working"


@dataclass(frozen=True)
class ExtendedFull:
    """Whole integrand at extended digits; values lowered to binary64."""

    digits: int = DEFAULT_DIGITS

    @property
    def label(self) -> str:
        return "extended"


@dataclass(frozen=True)
class Optimized:
    """Only the cancellation-prone C term at extended digits."""

    digits: int = DEFAULT_DIGITS

    @property
    def label(self) -> str:
        return "opt"


@dataclass(frozen=True)
class Auto:
    """Decide once per (params, quote); Optimized when the rule fires."""

    digits: int = DEFAULT_DIGITS

    @property
    def label(self) -> str:
        return "auto"


EvalStrategy = WorkingOnly | ExtendedFull | Optimized | Auto


class IntegrandEvaluator:
    """Callable f(x) -> complex under a fixed concrete strategy.

    `strategy` is the concrete strategy actually evaluated (never Auto);
    `decision` is the switching measurement, recorded for every strategy so
    diagnostics stay honest even when the choice was forced by the caller.
    """

    def __init__(self, params: ModelParams, quote: MarketQuote,
                 strategy, decision: Optional[SwitchDecision]):
        self.params = params
        self.quote = quote
        self.strategy = strategy
        self.decision = decision
        if isinstance(strategy, WorkingOnly):
            self._mode = "working"
        elif isinstance(strategy, ExtendedFull):
            self._mode = "extended"
            self._ctx = extended(strategy.digits)
        elif isinstance(strategy, Optimized):
            self._mode = "opt"
            self._ctx = extended(strategy.digits)
        else:
            raise TypeError(f"not a concrete strategy: {strategy!r}")

    def __call__(self, x: float) -> complex:
        if self._mode == "working":
            return model.integrand(self.params, self.quote, x, WORKING)
        if self._mode == "extended":
            val = model.integrand(self.params, self.quote, x, self._ctx)
            return self._ctx.lower_complex(val)
        return self._opt_scalar(x)

    def eval_many(self, xs) -> np.ndarray:
        """Vectorized evaluation; same values as mapping __call__ up to
        binary64 libm ulps on the working factors."""
        xs = np.asarray(xs, dtype=float)
        if self._mode == "working":
            return model.integrand_many(self.params, self.quote, xs)
        if self._mode == "extended":
            return np.array([self(float(x)) for x in np.atleast_1d(xs)], dtype=complex)
        return self._opt_many(np.atleast_1d(xs))

    def _c_extended(self, x: float) -> complex:
        k = self._ctx.make_complex(self._ctx.lift(float(x)), self._ctx.lift(0.5))
        terms = model.transform_terms(self.params, self.quote.tau, k, self._ctx)
        return self._ctx.lower_complex(terms.C)

    def _opt_scalar(self, x: float) -> complex:
        # f with only C upgraded = f_working * exp(C_ext - C_working); the
        # patch form keeps every non-C factor bit-identical to WorkingOnly
        p, q = self.params, self.quote
        base = model.integrand(p, q, float(x), WORKING)
        t = model.transform_terms(p, q.tau, complex(float(x), 0.5), WORKING)
        return base * cmath.exp(self._c_extended(x) - t.C)

    def _opt_many(self, xs: np.ndarray) -> np.ndarray:
        # per-point scalar path, not a vectorized base: the patch only cancels
        # the C-noise that the base actually carries, and the numpy-vector
        # working base rounds C differently from the scalar one in exactly the
        # cancellation regimes the patch exists for
        return np.array([self._opt_scalar(float(x)) for x in xs],
                        dtype=complex)


def resolve(strategy: EvalStrategy, params: ModelParams,
            quote: MarketQuote) -> tuple[object, SwitchDecision]:
    """Concrete strategy + recorded decision for a possibly-Auto strategy."""
    decision = decide(params, quote)
    if isinstance(strategy, Auto):
        concrete = Optimized(strategy.digits) if decision.par else WorkingOnly()
    else:
        concrete = strategy
    return concrete, decision


def make_evaluator(strategy: EvalStrategy, params: ModelParams,
                   quote: MarketQuote) -> IntegrandEvaluator:
    """Integrand evaluator under `strategy`, with the decision attached."""
    concrete, decision = resolve(strategy, params, quote)
    return IntegrandEvaluator(params, quote, concrete, decision)


SWITCH_MODES = ("auto", "on", "off", "opt")


def strategy_for_mode(mode: str, decision: SwitchDecision,
                      digits: int = DEFAULT_DIGITS):
    """Map a switch-mode name to the concrete strategy it selects.

    off: binary64 always. on: full extended when the decision fired.
    opt and auto: the optimized partial-extended evaluation when it fired.
    """
    if mode not in SWITCH_MODES:
        raise ValueError(f"unknown switch mode {mode!r}; expected one of {SWITCH_MODES}")
    if mode == "off":
        return WorkingOnly()
    if not decision.par:
        return WorkingOnly()
    if mode == "on":
        return ExtendedFull(digits)
    return Optimized(digits)
