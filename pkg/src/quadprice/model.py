"""Stochastic-volatility jump-diffusion pricing integrand.

The call value is S - K e^{-r tau} (1/pi) * integral over x >= 0 of the real
part of f(x + i/2), where f combines a volatility transform exp(C + D v0),
a compound-Poisson jump factor phi(-k), and the payoff kernel
e^{-ikX} / (k^2 - ik). The contour offset 1/2 sits inside the strip of
regularity for calls; k^2 - ik equals 1/4 there, so the kernel has no pole
on the contour.

Everything here is written against the precision facade: the same code path
evaluates in binary64 and in extended precision. The transform's C term is
the cancellation hotspot (C1 ~ 1/sigma^2 huge against C2 tiny), which is why
the grouping C = kappa*theta*(Y*tau - C1*C2) is kept exactly as written:
this factored form is the numerically stable one, and folding C1 into the
logarithm's argument would change the failure profile this package exists
to detect.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .precision import WORKING, WorkingContext

__all__ = [
    "LogNormalJumps",
    "LogUniformJumps",
    "JumpSpec",
    "ModelParams",
    "MarketQuote",
    "TransformTerms",
    "heston",
    "bates",
    "afsvjd",
    "jump_fourier",
    "beta",
    "char_fn",
    "transform_terms",
    "integrand",
    "integrand_many",
    "f_zero",
    "PARAM_BOUNDS",
]

# Box constraints for the nine model parameters (calibration searches this box;
# constructors validate against it).
PARAM_BOUNDS = {
    "v0": (0.0, 1.0),
    "kappa": (0.0, 150.0),
    "theta": (0.0, 1.0),
    "sigma": (0.0, 4.0),
    "rho": (-1.0, 1.0),
    "lam": (0.0, 100.0),
    "mu_j": (-10.0, 5.0),
    "sigma_j": (0.0, 4.0),
    "hurst": (0.5, 1.0),
}

# Typical market-data ranges; quotes outside them warn but are not rejected.
QUOTE_RANGES = {
    "tau": (0.0, 5.0),
    "spot": (0.0, 30_000.0),
    "strike": (0.0, 90_000.0),
    "rate": (0.0, 0.05),
}


@dataclass(frozen=True)
class LogNormalJumps:
    """ln(1+Y) ~ Normal(mu_j, sigma_j^2)."""

    mu_j: float
    sigma_j: float


@dataclass(frozen=True)
class LogUniformJumps:
    """ln(1+Y) ~ Uniform[a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"log-uniform support needs b > a, got [{self.a}, {self.b}]")


JumpSpec = Union[LogNormalJumps, LogUniformJumps, None]


def _check_bound(name: str, value: float):
    lo, hi = PARAM_BOUNDS[name]
    if not lo <= value <= hi:
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class ModelParams:
    """Model state chi = (v0, kappa, theta, sigma, rho, lambda, jump, H) plus
    the approximation parameter epsilon of the fractional-kernel flattening."""

    v0: float
    kappa: float
    theta: float
    sigma: float
    rho: float
    lam: float = 0.0
    jump: JumpSpec = None
    hurst: float = 0.5
    epsilon: float = 1e-6

    def __post_init__(self):
        for name in ("v0", "kappa", "theta", "sigma", "rho", "lam", "hurst"):
            _check_bound(name, getattr(self, name))
        if isinstance(self.jump, LogNormalJumps):
            _check_bound("mu_j", self.jump.mu_j)
            _check_bound("sigma_j", self.jump.sigma_j)
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def with_sigma(self, sigma: float) -> "ModelParams":
        """Same model at a different vol-of-vol; the knob every sweep turns."""
        return ModelParams(self.v0, self.kappa, self.theta, float(sigma), self.rho,
                           self.lam, self.jump, self.hurst, self.epsilon)


def heston(v0, kappa, theta, sigma, rho, *, epsilon: float = 1e-6) -> ModelParams:
    """Pure-diffusion reduction: no jumps, H = 1/2."""
    return ModelParams(v0, kappa, theta, sigma, rho, 0.0, None, 0.5, epsilon)


def bates(v0, kappa, theta, sigma, rho, lam, mu_j, sigma_j, *,
          epsilon: float = 1e-6) -> ModelParams:
    """Jump-diffusion reduction: log-normal jumps, H = 1/2."""
    return ModelParams(v0, kappa, theta, sigma, rho, lam,
                       LogNormalJumps(mu_j, sigma_j), 0.5, epsilon)


def afsvjd(v0, kappa, theta, sigma, rho, lam, mu_j, sigma_j, hurst,
           *, epsilon: float = 1e-6) -> ModelParams:
    """Full nine-parameter model with log-normal jumps."""
    return ModelParams(v0, kappa, theta, sigma, rho, lam,
                       LogNormalJumps(mu_j, sigma_j), hurst, epsilon)


@dataclass(frozen=True)
class MarketQuote:
    """One option quote psi = (tau, K, r, S), optionally with bid/ask."""

    tau: float
    strike: float
    rate: float
    spot: float
    bid: Optional[float] = None
    ask: Optional[float] = None
    mid: Optional[float] = None

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.strike <= 0 or self.spot <= 0:
            raise ValueError("strike and spot must be positive")
        if (self.bid is None) != (self.ask is None):
            raise ValueError("bid and ask must be given together")
        if self.bid is not None:
            if not (self.ask >= self.bid > 0):
                raise ValueError(f"need ask >= bid > 0, got bid={self.bid} ask={self.ask}")
        if self.mid is not None and not self.mid > 0:
            raise ValueError(f"mid price must be positive, got {self.mid}")
        out = []
        for name in ("tau", "spot", "strike", "rate"):
            lo, hi = QUOTE_RANGES[name]
            v = getattr(self, name)
            if not lo < v <= hi:
                out.append(f"{name}={v}")
        if out:
            warnings.warn(
                "quote outside typical market ranges: " + ", ".join(out),
                stacklevel=2,
            )

    @property
    def spread(self) -> Optional[float]:
        if self.bid is None:
            return None
        return self.ask - self.bid


@dataclass(frozen=True)
class TransformTerms:
    """Sub-terms of the volatility transform exp(C + D v0) at one k.

    B is the effective vol-of-vol epsilon^(H-1/2) * sigma; b, d, g, Y the
    usual Riccati quantities; C1 = 2/B^2 and C2 the log term whose product
    cancels catastrophically against Y*tau when B is tiny.
    """

    B: object
    b: object
    d: object
    g: object
    Y: object
    C1: object
    C2: object
    C: object
    D: object
    digits: Optional[int]  # None marks binary64


def _real_is(z) -> bool:
    # exact test: gmpy2.mpc and complex both expose .imag comparable to 0
    return z.imag == 0


def transform_terms(params: ModelParams, tau: float, k, ctx=WORKING) -> TransformTerms:
    """All transform sub-terms at complex k, at the context's precision.

    Principal branches throughout. When an intermediate is exactly real
    (as happens on the contour origin k = i/2) the real-axis sqrt/log is
    taken directly, which keeps the working-precision digit-loss profile
    identical across platforms' complex libm shims.
    """
    if params.sigma == 0.0:
        raise ValueError("sigma = 0 leaves C1 = 2/B^2 undefined; use sigma > 0")
    ctx.activate()
    one = ctx.lift(1.0)
    I = ctx.make_complex(0.0, 1.0)
    kl = ctx.lift_complex(k)
    taul = ctx.lift(tau)

    B = ctx.lift(params.epsilon) ** (ctx.lift(params.hurst) - ctx.lift(0.5)) * ctx.lift(params.sigma)
    w = kl * kl - I * kl
    b = ctx.lift(params.kappa) + I * kl * ctx.lift(params.rho) * B
    d2 = b * b + B * B * w
    if _real_is(d2) and d2.real >= 0:
        d = ctx.make_complex(ctx.sqrt(d2.real), 0.0)
    else:
        d = ctx.sqrt(d2)
    bpd = b + d
    if bpd == 0:
        raise ValueError("b + d vanished; transform not evaluable at this k")
    g = (b - d) / bpd
    Y = -w / bpd
    C1 = ctx.lift(2.0) / (B * B)
    ee = ctx.exp(-d * taul)
    denom = one - g
    if denom == 0:
        raise ValueError("1 - g vanished; transform not evaluable at this k")
    ratio = (one - g * ee) / denom
    if _real_is(ratio) and ratio.real > 0:
        C2 = ctx.make_complex(ctx.log(ratio.real), 0.0)
    else:
        C2 = ctx.log(ratio)
    # the factored grouping below is the stable form; do not fold C1 into the log
    C = ctx.lift(params.kappa) * ctx.lift(params.theta) * (Y * taul - C1 * C2)
    D = Y * (one - ee) / (one - g * ee)
    return TransformTerms(B=B, b=b, d=d, g=g, Y=Y, C1=C1, C2=C2, C=C, D=D,
                          digits=ctx.digits)


def jump_fourier(jump: JumpSpec, k, ctx=WORKING):
    """Fourier transform of ln(1+Y): the single-jump factor phi-hat(k)."""
    ctx.activate()
    if jump is None:
        return ctx.make_complex(1.0, 0.0)
    I = ctx.make_complex(0.0, 1.0)
    kl = ctx.lift_complex(k)
    if isinstance(jump, LogNormalJumps):
        mu = ctx.lift(jump.mu_j)
        sj = ctx.lift(jump.sigma_j)
        return ctx.exp(I * mu * kl - ctx.lift(0.5) * sj ** 2 * kl * kl)
    a = ctx.lift(jump.a)
    bb = ctx.lift(jump.b)
    if kl == 0:
        return ctx.make_complex(1.0, 0.0)  # removable singularity
    return (ctx.exp(I * kl * bb) - ctx.exp(I * kl * a)) / ((bb - a) * I * kl)


def beta(jump: JumpSpec, ctx=WORKING):
    """Mean relative jump size E[Y] = phi-hat(-i) - 1."""
    ctx.activate()
    if jump is None:
        return ctx.lift(0.0)
    if isinstance(jump, LogNormalJumps):
        return ctx.exp(ctx.lift(jump.mu_j) + ctx.lift(0.5) * ctx.lift(jump.sigma_j) ** 2) - ctx.lift(1.0)
    a = ctx.lift(jump.a)
    bb = ctx.lift(jump.b)
    return (ctx.exp(bb) - ctx.exp(a)) / (bb - a) - ctx.lift(1.0)


def char_fn(jump: JumpSpec, lam: float, tau: float, k, ctx=WORKING):
    """Compound-Poisson factor phi(k), compensated so e^X stays a martingale.

    Single exponential of the whole exponent; splitting it into a product of
    exponentials would overflow for deep-negative mean jumps at high
    intensity, where the two factors are huge and tiny.
    """
    ctx.activate()
    if lam == 0.0 or tau == 0.0:
        return ctx.make_complex(1.0, 0.0)
    I = ctx.make_complex(0.0, 1.0)
    kl = ctx.lift_complex(k)
    laml = ctx.lift(lam)
    taul = ctx.lift(tau)
    bet = beta(jump, ctx)
    return ctx.exp(-I * laml * bet * kl * taul
                   + laml * taul * (jump_fourier(jump, k, ctx) - ctx.lift(1.0)))


def _kernel_and_payoff(params, quote, kl, ctx):
    I = ctx.make_complex(0.0, 1.0)
    taul = ctx.lift(quote.tau)
    X = ctx.log(ctx.lift(quote.spot) / ctx.lift(quote.strike)) + ctx.lift(quote.rate) * taul
    w = kl * kl - I * kl
    terms = transform_terms(params, quote.tau, kl, ctx)
    Fhat = ctx.exp(terms.C + terms.D * ctx.lift(params.v0))
    phi = char_fn(params.jump, params.lam, quote.tau, -kl, ctx)
    return ctx.exp(-I * kl * X) * Fhat / w * phi


def integrand(params: ModelParams, quote: MarketQuote, x: float, ctx=WORKING):
    """f(x + i/2): the pricing integrand on the call contour.

    Returns a ctx-native complex (python complex in working mode)."""
    ctx.activate()
    kl = ctx.make_complex(ctx.lift(x), ctx.lift(0.5))
    return _kernel_and_payoff(params, quote, kl, ctx)


def f_zero(params: ModelParams, quote: MarketQuote, ctx=WORKING) -> float:
    """f0 = |Re f(0 + i/2)|, the contour-origin magnitude gate."""
    val = integrand(params, quote, 0.0, ctx)
    return abs(ctx.lower(val.real))


def integrand_many(params: ModelParams, quote: MarketQuote, xs) -> np.ndarray:
    """Vectorized binary64 evaluation of f(x + i/2) over an abscissa array.

    Same formulas as the scalar working path; used by the quadrature engines
    so bulk evaluation stays at numpy speed. Agreement with the scalar route
    is at the libm-ulp level, far below any tolerance used downstream.
    """
    if params.sigma == 0.0:
        raise ValueError("sigma = 0 leaves C1 = 2/B^2 undefined; use sigma > 0")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    k = xs + 0.5j
    tau = quote.tau
    B = params.epsilon ** (params.hurst - 0.5) * params.sigma
    w = k * k - 1j * k
    b = params.kappa + 1j * k * (params.rho * B)
    d2 = b * b + (B * B) * w
    d = np.sqrt(d2)
    real_d2 = (d2.imag == 0.0) & (d2.real >= 0.0)
    if np.any(real_d2):
        d[real_d2] = np.sqrt(d2.real[real_d2])
    bpd = b + d
    g = (b - d) / bpd
    Y = -w / bpd
    C1 = 2.0 / (B * B)
    ee = np.exp(-d * tau)
    ratio = (1.0 - g * ee) / (1.0 - g)
    C2 = np.log(ratio)
    real_ratio = (ratio.imag == 0.0) & (ratio.real > 0.0)
    if np.any(real_ratio):
        C2[real_ratio] = np.log(ratio.real[real_ratio])
    C = params.kappa * params.theta * (Y * tau - C1 * C2)
    D = Y * (1.0 - ee) / (1.0 - g * ee)
    Fhat = np.exp(C + D * params.v0)

    X = math.log(quote.spot / quote.strike) + quote.rate * tau
    mk = -k
    if params.lam == 0.0 or tau == 0.0 or params.jump is None:
        phi = np.ones_like(k)  # no jumps, or a degenerate exponent of exactly zero
    else:
        j = params.jump
        if isinstance(j, LogNormalJumps):
            bet = math.exp(j.mu_j + 0.5 * j.sigma_j ** 2) - 1.0
            phihat = np.exp(1j * j.mu_j * mk - 0.5 * j.sigma_j ** 2 * mk * mk)
        else:
            bet = (math.exp(j.b) - math.exp(j.a)) / (j.b - j.a) - 1.0
            with np.errstate(invalid="ignore", divide="ignore"):
                phihat = (np.exp(1j * mk * j.b) - np.exp(1j * mk * j.a)) / ((j.b - j.a) * 1j * mk)
            phihat = np.where(mk == 0, 1.0 + 0.0j, phihat)
        phi = np.exp(-1j * params.lam * bet * mk * tau + params.lam * tau * (phihat - 1.0))
    return np.exp(-1j * k * X) * Fhat / w * phi
