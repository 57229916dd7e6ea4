"""European call pricing through the contour integral.

Composes the integrand evaluator (with its precision strategy), the
semi-infinite quadrature, and the discounting arithmetic into one call,
and keeps every diagnostic: the quadrature record, the switch decision,
and which strategy actually ran. Quadrature non-convergence is flagged on
the result rather than raised so batch callers can penalize and continue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import JumpSpec, LogNormalJumps, MarketQuote, ModelParams
from .quadrature import QuadSpec, QuadratureResult, integrate_semi_infinite
from .switching import (
    Auto,
    EvalStrategy,
    IntegrandEvaluator,
    SwitchDecision,
    make_evaluator,
)

__all__ = [
    "PriceResult",
    "price_call",
    "price_call_reduced",
    "params_from_vector",
    "vector_from_params",
    "vector_bounds",
    "MODEL_DIMS",
]

MODEL_DIMS = {"heston": 5, "bates": 8, "afsvjd": 9}


@dataclass(frozen=True)
class PriceResult:
    price: float
    integral: float
    quad: QuadratureResult
    decision: SwitchDecision
    strategy_used: str   # concrete label: working | extended | opt

    @property
    def converged(self) -> bool:
        return self.quad.converged

    def as_dict(self) -> dict:
        return {
            "price": self.price,
            "integral": self.integral,
            "quad": self.quad.as_dict(),
            "decision": self.decision.as_dict(),
            "strategy_used": self.strategy_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PriceResult":
        return cls(price=d["price"], integral=d["integral"],
                   quad=QuadratureResult.from_dict(d["quad"]),
                   decision=SwitchDecision.from_dict(d["decision"]),
                   strategy_used=d["strategy_used"])


class _RealPart:
    """Real part of a complex integrand, with vectorization passed through."""

    __slots__ = ("_ev",)

    def __init__(self, ev: IntegrandEvaluator):
        self._ev = ev

    def __call__(self, x: float) -> float:
        return self._ev(x).real

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        return self._ev.eval_many(xs).real


def price_call(params: ModelParams, quote: MarketQuote,
               spec: Optional[QuadSpec] = None,
               strategy: Optional[EvalStrategy] = None) -> PriceResult:
    """Price a European call; integral over [0, oo) on the Im k = 1/2 contour."""
    if spec is None:
        spec = QuadSpec()
    if strategy is None:
        strategy = Auto()
    if quote.tau <= 0.0:
        raise ValueError(f"cannot price an expired option (tau={quote.tau})")
    ev = make_evaluator(strategy, params, quote)
    res = integrate_semi_infinite(_RealPart(ev), 0.0, spec)
    price = (quote.spot
             - quote.strike * math.exp(-quote.rate * quote.tau)
             * res.value / math.pi)
    return PriceResult(price=price, integral=res.value, quad=res,
                       decision=ev.decision, strategy_used=ev.strategy.label)


def params_from_vector(model: str, values: Sequence[float],
                       epsilon: float = 1e-6) -> ModelParams:
    """Model parameters from a flat vector.

    heston: (v0, kappa, theta, sigma, rho)
    bates:  + (lam, mu_j, sigma_j), lognormal jump sizes
    afsvjd: + hurst
    """
    key = model.lower()
    if key not in MODEL_DIMS:
        raise ValueError(f"unknown model {model!r}; expected one of {sorted(MODEL_DIMS)}")
    vals = [float(v) for v in values]
    want = MODEL_DIMS[key]
    if len(vals) != want:
        raise ValueError(f"{key} takes {want} parameters, got {len(vals)}")
    v0, kappa, theta, sigma, rho = vals[:5]
    lam = 0.0
    jump: Optional[JumpSpec] = None
    hurst = 0.5
    if key in ("bates", "afsvjd"):
        lam = vals[5]
        jump = LogNormalJumps(mu_j=vals[6], sigma_j=vals[7])
    if key == "afsvjd":
        hurst = vals[8]
    return ModelParams(v0=v0, kappa=kappa, theta=theta, sigma=sigma, rho=rho,
                       lam=lam, jump=jump, hurst=hurst, epsilon=epsilon)


def vector_from_params(model: str, params: ModelParams) -> np.ndarray:
    """Inverse of params_from_vector for the given model's dimensionality."""
    key = model.lower()
    if key not in MODEL_DIMS:
        raise ValueError(f"unknown model {model!r}")
    head = [params.v0, params.kappa, params.theta, params.sigma, params.rho]
    if key == "heston":
        return np.array(head)
    jump = params.jump
    mu_j = jump.mu_j if isinstance(jump, LogNormalJumps) else 0.0
    sigma_j = jump.sigma_j if isinstance(jump, LogNormalJumps) else 0.0
    if key == "bates":
        return np.array(head + [params.lam, mu_j, sigma_j])
    return np.array(head + [params.lam, mu_j, sigma_j, params.hurst])


def vector_bounds(model: str, sigma_lb: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Box bounds for the flat parameter vector of `model`.

    The volatility-of-variance lower bound defaults to one basis point;
    raise it to reproduce coarser comparisons.
    """
    key = model.lower()
    if key not in MODEL_DIMS:
        raise ValueError(f"unknown model {model!r}")
    if not 0 < sigma_lb < 4.0:
        raise ValueError(f"sigma lower bound {sigma_lb} outside (0, 4)")
    lo = [0.0, 0.0, 0.0, sigma_lb, -1.0]
    hi = [1.0, 150.0, 1.0, 4.0, 1.0]
    if key in ("bates", "afsvjd"):
        lo += [0.0, -10.0, 0.0]
        hi += [100.0, 5.0, 4.0]
    if key == "afsvjd":
        lo += [0.5]
        hi += [1.0]
    return np.array(lo), np.array(hi)


def price_call_reduced(model: str, values: Sequence[float], quote: MarketQuote,
                       spec: Optional[QuadSpec] = None,
                       strategy: Optional[EvalStrategy] = None,
                       epsilon: float = 1e-6) -> PriceResult:
    """price_call for a named reduced model and its flat parameter vector."""
    params = params_from_vector(model, values, epsilon=epsilon)
    return price_call(params, quote, spec=spec, strategy=strategy)
