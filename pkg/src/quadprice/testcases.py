"""Named parameter sets used across the benchmark tables and demos.

tc1: deep cancellation showcase. Heavy mean reversion, near-unit Hurst
exponent, and a flattening parameter of 1e-3 drive C1 = 2/B^2 through the
roof as sigma shrinks; the integrand's working-precision digits visibly rot
along the sigma sweep while the extended value stays put at 2.13695817...

tc2: jump-dominated deep-out-of-the-money regime. Intense small jumps
(lambda = 60, mean log-jump -9) push f0 down to 0.12, exercising the
omega2 correction of the switching rule.

hundred-dollar: a strike-12500 call whose binary64 price is off by about a
hundred currency units while every intermediate looks plausible; the
flagship demonstration that the switch pays for itself.

All three share or resemble the index-option quote (tau ~ 44 days,
K = 6250, r = 0.9%, S = 6721.8) unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import LogNormalJumps, MarketQuote, ModelParams

__all__ = [
    "TestCase",
    "TC_QUOTE",
    "TC1_SIGMAS",
    "TC1_LEDGER_SIGMAS",
    "TC2_SIGMAS",
    "get",
    "names",
    "parse_case_name",
]

TC_QUOTE = MarketQuote(tau=0.120548, strike=6250.0, rate=0.009, spot=6721.8)

# sigma sweep of the integrand-error table (tc1)
TC1_SIGMAS = (0.1, 0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001, 0.00005, 0.00001)
# sigma rows of the switch-decision ledger
TC1_LEDGER_SIGMAS = (0.001, 0.0005, 0.0001, 0.00005, 0.00001, 0.000001)
TC2_SIGMAS = (0.0001, 0.00005, 0.00001, 0.000001)

_TC1_BASE = dict(v0=0.97, kappa=17.6, theta=0.95, rho=-0.86, lam=11.7,
                 jump=LogNormalJumps(-6.66, 1.007), hurst=0.96, epsilon=1e-3)
_TC2_BASE = dict(v0=0.3, kappa=5.0, theta=0.1, rho=-0.5, lam=60.0,
                 jump=LogNormalJumps(-9.0, 1.1), hurst=0.6, epsilon=1e-6)


@dataclass(frozen=True)
class TestCase:
    name: str
    params: ModelParams
    quote: MarketQuote
    description: str

    def with_sigma(self, sigma: float) -> "TestCase":
        return TestCase(name=f"{self.name}-sigma={sigma:g}",
                        params=self.params.with_sigma(sigma),
                        quote=self.quote,
                        description=self.description)


def _tc1(sigma: float = 0.001) -> TestCase:
    return TestCase(
        name="tc1",
        params=ModelParams(sigma=sigma, **_TC1_BASE),
        quote=TC_QUOTE,
        description="severe C1*C2 cancellation as sigma shrinks; reference integral 0.77681478",
    )


def _tc2(sigma: float = 0.0001) -> TestCase:
    return TestCase(
        name="tc2",
        params=ModelParams(sigma=sigma, **_TC2_BASE),
        quote=TC_QUOTE,
        description="jump-heavy regime with f0 = 0.12193; reference integral 0.00695940",
    )


def _hundred_dollar() -> TestCase:
    return TestCase(
        name="hundred-dollar",
        params=ModelParams(v0=0.98, kappa=8.0, theta=0.8, sigma=1e-6, rho=-0.75,
                           lam=0.75, jump=LogNormalJumps(1.4, 0.2), hurst=0.9,
                           epsilon=1e-6),
        quote=MarketQuote(tau=0.34, strike=12500.0, rate=0.017, spot=10000.0),
        description="binary64 misprices this call by ~109 currency units; extended price 3999.17",
    )


_REGISTRY = {
    "tc1": _tc1,
    "tc2": _tc2,
    "hundred-dollar": _hundred_dollar,
}


def names() -> tuple[str, ...]:
    return tuple(_REGISTRY)


def get(name: str, sigma: float | None = None) -> TestCase:
    """Look up a named case; `sigma` overrides the vol-of-vol where it applies."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown test case {name!r}; known: {', '.join(_REGISTRY)}") from None
    case = factory()
    if sigma is not None:
        case = TestCase(name=case.name, params=case.params.with_sigma(sigma),
                        quote=case.quote, description=case.description)
    return case


def parse_case_name(spec: str) -> TestCase:
    """Parse 'tc1-sigma=0.001' style names: base case plus optional sigma."""
    base, sep, rest = spec.partition("-sigma=")
    if not sep:
        return get(spec)
    try:
        sigma = float(rest)
    except ValueError:
        raise ValueError(f"bad sigma in case name {spec!r}: {rest!r}") from None
    return get(base, sigma=sigma)
