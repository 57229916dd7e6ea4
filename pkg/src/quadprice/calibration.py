"""Fit reduced-model parameters to an option chain.

Weighted nonlinear least squares in two stages: a genetic global search
over the parameter box, then a bound-clamped Levenberg-Marquardt polish.
Weights are normalized inverse-square bid-ask spreads. Prices that fail
to converge contribute a flat penalty instead of aborting the fit, and
every price evaluation feeds the switch telemetry in the final report.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .model import MarketQuote
from .pricing import params_from_vector, price_call, vector_bounds
from .quadrature import NonFiniteIntegrandError, QuadSpec
from .switching import (DEFAULT_DIGITS, SWITCH_MODES, Auto, ExtendedFull,
                        WorkingOnly, decide)

__all__ = [
    "OptionChain",
    "CalibrationSettings",
    "CalibrationReport",
    "GAResult",
    "weights",
    "objective",
    "error_metrics",
    "global_stage",
    "local_stage",
    "calibrate",
    "make_synthetic_chain",
    "PENALTY_RESIDUAL",
]

PENALTY_RESIDUAL = 1000.0    # squared = the 1e6 per-option penalty


@dataclass(frozen=True)
class OptionChain:
    """N quoted options; every quote needs mid, bid, ask with bid < ask."""

    quotes: tuple[MarketQuote, ...]

    def __post_init__(self):
        if len(self.quotes) < 1:
            raise ValueError("option chain needs at least one quote")
        for i, q in enumerate(self.quotes):
            if q.mid is None or q.bid is None or q.ask is None:
                raise ValueError(f"quote {i} is missing mid/bid/ask")
            if not q.ask - q.bid > 0:
                raise ValueError(
                    f"quote {i} has zero spread (bid={q.bid}, ask={q.ask}); "
                    "weights need ask > bid")

    def __len__(self) -> int:
        return len(self.quotes)

    @property
    def spreads(self) -> np.ndarray:
        return np.array([q.ask - q.bid for q in self.quotes])

    @property
    def targets(self) -> np.ndarray:
        return np.array([q.mid for q in self.quotes])

    @property
    def weights(self) -> np.ndarray:
        return weights(self.spreads)


def weights(spreads: Sequence[float]) -> np.ndarray:
    """Normalized inverse-square spread weights, summing to one."""
    d = np.asarray(spreads, dtype=float)
    if d.size == 0:
        raise ValueError("no spreads given")
    if np.any(d <= 0):
        bad = int(np.argmax(d <= 0))
        raise ValueError(f"spread {bad} is {d[bad]}; all spreads must be positive")
    inv = d ** -2.0
    return inv / inv.sum()


def error_metrics(prices: Sequence[float], targets: Sequence[float]) -> tuple[float, float]:
    """Average and maximum absolute relative pricing error."""
    p = np.asarray(prices, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        return 0.0, 0.0
    if np.any(t <= 0):
        bad = int(np.argmax(t <= 0))
        raise ValueError(f"market price {bad} is {t[bad]}; relative error needs > 0")
    rel = np.abs(p - t) / t
    return float(rel.mean()), float(rel.max())


@dataclass(frozen=True)
class CalibrationSettings:
    """Everything the two-stage fit needs besides the chain itself."""

    model: str = "afsvjd"
    switch_mode: str = "auto"          # auto | on | off | opt
    sigma_lb: float = 1e-4             # vol-of-vol floor, one basis point
    epsilon: float = 1e-6              # kernel-flattening parameter, held fixed
    population: int = 200
    generations: int = 20
    elite_fraction: float = 0.05
    crossover_fraction: float = 0.8
    mutation_scale: float = 0.10       # of box width, decaying linearly
    seed: int = 0
    digits: int = DEFAULT_DIGITS
    quad: QuadSpec = field(default_factory=QuadSpec)
    lsq_tol: float = 1e-9
    lsq_max_iters: int = 200
    threads: int = 1
    bounds: Optional[tuple] = None     # ((lo...), (hi...)) sub-box override

    def __post_init__(self):
        if self.switch_mode not in SWITCH_MODES:
            raise ValueError(
                f"switch_mode {self.switch_mode!r} not one of {SWITCH_MODES}")
        if self.population < 2 or self.population % 2:
            raise ValueError(f"population must be even and >= 2, got {self.population}")
        if self.generations < 1:
            raise ValueError(f"generations must be >= 1, got {self.generations}")
        if not 0 < self.elite_fraction < 1:
            raise ValueError(f"elite_fraction must be in (0,1), got {self.elite_fraction}")
        if not 0 <= self.crossover_fraction <= 1:
            raise ValueError(f"crossover_fraction must be in [0,1], got {self.crossover_fraction}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        full_lo, full_hi = vector_bounds(self.model, self.sigma_lb)
        if self.bounds is not None:
            lo, hi = (np.asarray(b, dtype=float) for b in self.bounds)
            if lo.shape != full_lo.shape or hi.shape != full_hi.shape:
                raise ValueError(
                    f"bounds override needs shape {full_lo.shape}, "
                    f"got {lo.shape} and {hi.shape}")
            if np.any(lo >= hi):
                raise ValueError("bounds override needs lo < hi per coordinate")
            if np.any(lo < full_lo) or np.any(hi > full_hi):
                raise ValueError("bounds override must stay inside the model box")
            object.__setattr__(self, "bounds",
                               (tuple(float(x) for x in lo),
                                tuple(float(x) for x in hi)))

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.bounds is not None:
            return (np.array(self.bounds[0]), np.array(self.bounds[1]))
        return vector_bounds(self.model, self.sigma_lb)


_PRICE_ERRORS = (ValueError, ZeroDivisionError, OverflowError,
                 FloatingPointError, NonFiniteIntegrandError)


class _ChainPricer:
    """Prices the whole chain at one parameter vector, counting decisions.

    Thread-safe tallies: the decision count and switch count only ever
    grow, so the telemetry conservation check stays exact no matter how
    objective evaluations are scheduled.
    """

    def __init__(self, chain: OptionChain, settings: CalibrationSettings):
        self.chain = chain
        self.settings = settings
        self.decisions_total = 0
        self.switched_to_extended = 0
        self._lock = threading.Lock()
        mode = settings.switch_mode
        if mode == "off":
            self._strategy = WorkingOnly()
        elif mode in ("auto", "opt"):
            self._strategy = Auto(settings.digits)
        else:
            self._strategy = None      # "on": full extended when the rule fires

    def price_all(self, chi: np.ndarray) -> tuple[np.ndarray, int]:
        """(prices with NaN where penalized, number penalized)."""
        s = self.settings
        params = params_from_vector(s.model, chi, epsilon=s.epsilon)
        prices = np.full(len(self.chain), np.nan)
        calls = 0
        switched = 0
        penalized = 0
        for i, q in enumerate(self.chain.quotes):
            try:
                if self._strategy is None:
                    d = decide(params, q)
                    strat = ExtendedFull(s.digits) if d.par else WorkingOnly()
                else:
                    strat = self._strategy
                res = price_call(params, q, spec=s.quad, strategy=strat)
                calls += 1
                switched += res.strategy_used != "working"
                if res.converged:
                    prices[i] = res.price
                else:
                    penalized += 1
            except _PRICE_ERRORS:
                calls += 1
                penalized += 1
        with self._lock:
            self.decisions_total += calls
            self.switched_to_extended += switched
        return prices, penalized

    def residuals(self, chi: np.ndarray) -> np.ndarray:
        prices, _ = self.price_all(chi)
        sqrt_w = np.sqrt(self.chain.weights)
        r = sqrt_w * (prices - self.chain.targets)
        return np.where(np.isnan(prices), PENALTY_RESIDUAL, r)


def objective(chi: Sequence[float], chain: OptionChain,
              settings: CalibrationSettings,
              pricer: Optional[_ChainPricer] = None) -> float:
    """G(chi) = sum_i w_i (C_i - C*_i)^2, penalty 1e6 per failed price."""
    if pricer is None:
        pricer = _ChainPricer(chain, settings)
    r = pricer.residuals(np.asarray(chi, dtype=float))
    return float(r @ r)


@dataclass(frozen=True)
class GAResult:
    chi: np.ndarray
    objective: float
    trace: tuple[float, ...]     # best objective after init and each generation
    evals: int


def global_stage(chain: Optional[OptionChain],
                 settings: CalibrationSettings,
                 objective_fn: Optional[Callable[[np.ndarray], float]] = None,
                 bounds: Optional[tuple[np.ndarray, np.ndarray]] = None,
                 pricer: Optional[_ChainPricer] = None) -> GAResult:
    """Genetic search over the box; returns the best individual found.

    Elites are copied unchanged, 80% of the rest come from intermediate
    crossover with per-coordinate blend factors in [-0.25, 1.25], and the
    remainder from Gaussian mutation whose scale decays linearly to zero
    over the run. All randomness is drawn in fixed-order batches from a
    counter-based generator, so a threaded objective cannot change the
    result for a given seed. `objective_fn`/`bounds` exist so tests can
    drop in an analytic objective; by default the chain objective is used.
    """
    s = settings
    if objective_fn is None:
        if chain is None:
            raise ValueError("need a chain when no objective_fn is given")
        if pricer is None:
            pricer = _ChainPricer(chain, s)
        chain_pricer = pricer

        def objective_fn(x):
            r = chain_pricer.residuals(x)
            return float(r @ r)
    lo, hi = bounds if bounds is not None else s.box()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = lo.size
    P = s.population
    n_elite = max(1, int(round(s.elite_fraction * P)))
    n_rest = P - n_elite
    n_cross = int(round(s.crossover_fraction * n_rest))
    n_mut = n_rest - n_cross
    rng = np.random.Generator(np.random.Philox(key=[s.seed, 0]))

    def evaluate(pop: np.ndarray) -> np.ndarray:
        if s.threads > 1:
            with ThreadPoolExecutor(max_workers=s.threads) as ex:
                return np.fromiter(ex.map(objective_fn, pop), dtype=float,
                                   count=len(pop))
        return np.fromiter((objective_fn(x) for x in pop), dtype=float,
                           count=len(pop))

    pop = lo + rng.random((P, dim)) * (hi - lo)
    fit = evaluate(pop)
    evals = P
    trace = [float(fit.min())]
    for gen in range(s.generations):
        order = np.argsort(fit, kind="stable")
        elite = pop[order[:n_elite]]
        pairs = rng.integers(0, P, size=(n_cross, 2))
        u = rng.uniform(-0.25, 1.25, size=(n_cross, dim))
        mut_src = rng.integers(0, P, size=n_mut)
        noise = rng.standard_normal((n_mut, dim))
        pa, pb = pop[pairs[:, 0]], pop[pairs[:, 1]]
        children = pa + u * (pb - pa)
        scale = s.mutation_scale * (hi - lo) * (1.0 - gen / s.generations)
        mutants = pop[mut_src] + noise * scale
        pop = np.clip(np.vstack([elite, children, mutants]), lo, hi)
        fit = np.concatenate([fit[order[:n_elite]],
                              evaluate(pop[n_elite:])])
        evals += P - n_elite
        trace.append(float(fit.min()))
    best = int(np.argmin(fit))
    return GAResult(chi=pop[best].copy(), objective=float(fit[best]),
                    trace=tuple(trace), evals=evals)


def _fd_jacobian(residual_fn, chi, r0, lo, hi):
    """Forward differences, flipped to backward at an upper bound."""
    m, n = r0.size, chi.size
    J = np.empty((m, n))
    width = hi - lo
    for j in range(n):
        h = 1e-6 * max(abs(chi[j]), 1e-3 * width[j])
        if chi[j] + h > hi[j]:
            h = -h
        x = chi.copy()
        x[j] += h
        J[:, j] = (residual_fn(x) - r0) / h
    return J


def _levenberg_marquardt(residual_fn, chi0, lo, hi, tol, max_iters):
    """Damped least squares clamped to the box; never accepts an ascent.

    Returns (chi, G, iterations, trace). A Jacobian that comes back
    non-finite is treated like a rejected step: raise the damping and
    try again from the same point.
    """
    chi = np.clip(np.asarray(chi0, dtype=float), lo, hi)
    r = residual_fn(chi)
    G = float(r @ r)
    mu = 1e-3
    trace = [G]
    iters = 0
    for iters in range(1, max_iters + 1):
        J = _fd_jacobian(residual_fn, chi, r, lo, hi)
        if not np.all(np.isfinite(J)):
            mu *= 10.0
            trace.append(G)
            if mu > 1e12:
                break
            continue
        A = J.T @ J
        g = J.T @ r
        D = np.diag(np.maximum(np.diag(A), 1e-12))
        moved = False
        while mu <= 1e12:
            try:
                delta = np.linalg.solve(A + mu * D, -g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            cand = np.clip(chi + delta, lo, hi)
            r_new = residual_fn(cand)
            G_new = float(r_new @ r_new)
            if G_new <= G:
                step = float(np.linalg.norm(cand - chi))
                drop = G - G_new
                chi, r, G = cand, r_new, G_new
                mu = max(mu / 10.0, 1e-12)
                moved = True
                trace.append(G)
                if step < tol * (1.0 + float(np.linalg.norm(chi))):
                    return chi, G, iters, trace
                if drop < tol * (1.0 + G):
                    return chi, G, iters, trace
                break
            mu *= 10.0
        if not moved:
            break
    return chi, G, iters, trace


@dataclass(frozen=True)
class CalibrationReport:
    """Outcome of a fit: the solution, its quality, and what it cost."""

    model: str
    switch_mode: str
    seed: int
    chi_star: tuple[float, ...]
    G: float
    aare: float
    mare: float
    residuals: tuple[float, ...]
    trace: tuple[dict, ...]
    switch_stats: dict
    penalized_final: int
    iterations_local: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.aare > self.mare + 1e-15:
            raise ValueError(f"average error {self.aare} exceeds max {self.mare}")

    @property
    def params(self):
        eps = self.metadata.get("epsilon", 1e-6)
        return params_from_vector(self.model, self.chi_star, epsilon=eps)

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "switch_mode": self.switch_mode,
            "seed": self.seed,
            "chi_star": list(self.chi_star),
            "G": self.G,
            "aare": self.aare,
            "mare": self.mare,
            "residuals": list(self.residuals),
            "trace": [dict(t) for t in self.trace],
            "switch_stats": dict(self.switch_stats),
            "penalized_final": self.penalized_final,
            "iterations_local": self.iterations_local,
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationReport":
        return cls(model=d["model"], switch_mode=d["switch_mode"],
                   seed=d["seed"], chi_star=tuple(d["chi_star"]),
                   G=d["G"], aare=d["aare"], mare=d["mare"],
                   residuals=tuple(d["residuals"]),
                   trace=tuple(dict(t) for t in d["trace"]),
                   switch_stats=dict(d["switch_stats"]),
                   penalized_final=d["penalized_final"],
                   iterations_local=d["iterations_local"],
                   metadata=dict(d.get("metadata", {})))


def _settings_metadata(s: CalibrationSettings) -> dict:
    # records the solver choices that are free knobs, not model content
    return {
        "epsilon": s.epsilon,
        "sigma_lb": s.sigma_lb,
        "population": s.population,
        "generations": s.generations,
        "digits": s.digits,
        "free_choices": {
            "crossover_u_interval": [-0.25, 1.25],
            "mutation": "gaussian, 10% box width, linear decay",
            "bounds_handling": "clamp projection in both stages",
        },
    }


def local_stage(chi0: Sequence[float], chain: OptionChain,
                settings: CalibrationSettings,
                pricer: Optional[_ChainPricer] = None,
                ga_trace: Sequence[float] = ()) -> CalibrationReport:
    """Polish chi0 with damped least squares and assemble the report."""
    s = settings
    if pricer is None:
        pricer = _ChainPricer(chain, s)
    lo, hi = s.box()
    chi, G, iters, lm_trace = _levenberg_marquardt(
        pricer.residuals, np.asarray(chi0, dtype=float), lo, hi,
        s.lsq_tol, s.lsq_max_iters)
    prices, penalized = pricer.price_all(chi)
    ok = ~np.isnan(prices)
    aare, mare = error_metrics(prices[ok], chain.targets[ok])
    sqrt_w = np.sqrt(chain.weights)
    resid = np.where(ok, sqrt_w * (prices - chain.targets), PENALTY_RESIDUAL)
    trace = tuple(
        [{"stage": "global", "iteration": i, "objective": g}
         for i, g in enumerate(ga_trace)]
        + [{"stage": "local", "iteration": i, "objective": g}
           for i, g in enumerate(lm_trace)])
    return CalibrationReport(
        model=s.model, switch_mode=s.switch_mode, seed=s.seed,
        chi_star=tuple(float(x) for x in chi), G=G,
        aare=aare, mare=mare,
        residuals=tuple(float(x) for x in resid),
        trace=trace,
        switch_stats={"decisions_total": pricer.decisions_total,
                      "switched_to_extended": pricer.switched_to_extended},
        penalized_final=penalized, iterations_local=iters,
        metadata=_settings_metadata(s))


def calibrate(chain: OptionChain, settings: CalibrationSettings) -> CalibrationReport:
    """Global genetic search, then local polish, with shared telemetry."""
    pricer = _ChainPricer(chain, settings)
    ga = global_stage(chain, settings, pricer=pricer)
    return local_stage(ga.chi, chain, settings, pricer=pricer, ga_trace=ga.trace)


def make_synthetic_chain(model: str, chi_true: Sequence[float], *,
                         n: int = 20, seed: int = 0, spot: float = 100.0,
                         rate: float = 0.01, epsilon: float = 1e-6,
                         rel_spread: tuple[float, float] = (0.01, 0.05),
                         quad: Optional[QuadSpec] = None,
                         strategy=None) -> OptionChain:
    """Chain priced exactly at chi_true; mids are model prices.

    Mids come from full extended-precision integration so they stay
    trustworthy even where binary64 evaluation falls apart; a chain
    generator is an oracle, not a consumer of the switching policy.
    Strikes stay inside +-20% moneyness and maturities in [0.1, 1.5] so
    every mid is comfortably positive. Spreads are a random 1-5% of mid.
    """
    if quad is None:
        quad = QuadSpec(abs_tol=1e-11, rel_tol=1e-9)
    if strategy is None:
        strategy = ExtendedFull()
    params = params_from_vector(model, chi_true, epsilon=epsilon)
    rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
    quotes = []
    for _ in range(n):
        tau = rng.uniform(0.1, 1.5)
        strike = spot * rng.uniform(0.8, 1.2)
        q = MarketQuote(tau=tau, strike=strike, rate=rate, spot=spot)
        res = price_call(params, q, spec=quad, strategy=strategy)
        if not res.converged or not res.price > 0:
            continue
        mid = res.price
        half = 0.5 * mid * rng.uniform(*rel_spread)
        quotes.append(MarketQuote(tau=tau, strike=strike, rate=rate, spot=spot,
                                  bid=mid - half, ask=mid + half, mid=mid))
    return OptionChain(quotes=tuple(quotes))
