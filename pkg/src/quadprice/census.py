"""Random-sampling studies over the parameter box.

Two census kinds: a cheap one that only runs the switch decision on each
draw and histograms the order difference, and an expensive one that also
integrates each draw at working and extended precision to classify which
draws working precision actually gets wrong. Draw i is generated from a
counter-based generator keyed by (seed, i), so results are identical no
matter how draws are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .model import LogNormalJumps, MarketQuote, ModelParams
from .pricing import _RealPart
from .quadrature import QuadSpec, integrate_semi_infinite
from .switching import ExtendedFull, SwitchDecision, WorkingOnly, decide, make_evaluator
from .testcases import TC_QUOTE

__all__ = [
    "SamplingPlan",
    "StudyReport",
    "run_switch_census",
    "run_problematic_census",
    "F0_GATE",
    "ERR_THRESHOLD",
    "FEVALS_THRESHOLD",
]

F0_GATE = 1e-3
ERR_THRESHOLD = 1e-8
FEVALS_THRESHOLD = 10_000


@dataclass(frozen=True)
class SamplingPlan:
    """How to draw random (parameters, quote) pairs for a census."""

    n: int
    sigma_range: tuple[float, float]
    epsilon: float = 1e-6
    log_sigma: bool = False          # default uniform in [lo, hi]
    quote_source: str = "sampled"    # "sampled" market ranges or "fixed"
    fixed_quote: Optional[MarketQuote] = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"sample count must be >= 0, got {self.n}")
        lo, hi = self.sigma_range
        if not (0 < lo < hi):
            raise ValueError(f"need 0 < lo < hi in sigma_range, got {self.sigma_range}")
        if self.quote_source not in ("sampled", "fixed"):
            raise ValueError(f"quote_source must be 'sampled' or 'fixed', got {self.quote_source!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def quote_for(self, rng: np.random.Generator) -> MarketQuote:
        if self.quote_source == "fixed":
            return self.fixed_quote if self.fixed_quote is not None else TC_QUOTE
        # half-open flip keeps the draws inside (0, hi]
        tau = (1.0 - rng.uniform()) * 5.0
        spot = (1.0 - rng.uniform()) * 3e4
        strike = (1.0 - rng.uniform()) * 9e4
        rate = rng.uniform() * 0.05
        return MarketQuote(tau=tau, strike=strike, rate=rate, spot=spot)

    def draw(self, i: int) -> tuple[ModelParams, MarketQuote]:
        """Deterministic draw i: parameters, then sigma, then the quote."""
        rng = np.random.Generator(np.random.Philox(key=[self.seed, i]))
        v0 = rng.uniform(0.0, 1.0)
        kappa = rng.uniform(0.0, 150.0)
        theta = rng.uniform(0.0, 1.0)
        rho = rng.uniform(-1.0, 1.0)
        lam = rng.uniform(0.0, 100.0)
        mu_j = rng.uniform(-10.0, 5.0)
        sigma_j = rng.uniform(0.0, 4.0)
        hurst = rng.uniform(0.5, 1.0)
        lo, hi = self.sigma_range
        if self.log_sigma:
            sigma = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        else:
            sigma = rng.uniform(lo, hi)
        params = ModelParams(v0=v0, kappa=kappa, theta=theta, sigma=sigma,
                             rho=rho, lam=lam,
                             jump=LogNormalJumps(mu_j=mu_j, sigma_j=sigma_j),
                             hurst=hurst, epsilon=self.epsilon)
        return params, self.quote_for(rng)


@dataclass
class StudyReport:
    """Census outcome: the o histogram plus decision and problem counts."""

    total: int
    switch_on: int
    f0_gate_failed: int
    bin_counts: dict[str, int] = field(default_factory=dict)
    problematic: Optional[dict[str, int]] = None
    crosstab: Optional[dict[str, int]] = None
    findings: tuple[str, ...] = ()

    @property
    def switch_fraction(self) -> float:
        return self.switch_on / self.total if self.total else 0.0

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "switch_on": self.switch_on,
            "f0_gate_failed": self.f0_gate_failed,
            "bin_counts": dict(self.bin_counts),
            "problematic": None if self.problematic is None else dict(self.problematic),
            "crosstab": None if self.crosstab is None else dict(self.crosstab),
            "findings": list(self.findings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudyReport":
        return cls(total=d["total"], switch_on=d["switch_on"],
                   f0_gate_failed=d["f0_gate_failed"],
                   bin_counts=dict(d["bin_counts"]),
                   problematic=None if d.get("problematic") is None else dict(d["problematic"]),
                   crosstab=None if d.get("crosstab") is None else dict(d["crosstab"]),
                   findings=tuple(d.get("findings", ())))


def _bin_label(o: float) -> str:
    if o == math.inf:
        return "+inf"
    if o == -math.inf:
        return "-inf"
    return str(int(math.floor(o)))


def _merge_bins(into: dict[str, int], label: str) -> None:
    into[label] = into.get(label, 0) + 1


def _chunks(n: int, pieces: int):
    size = max(1, -(-n // pieces))
    for start in range(0, n, size):
        yield range(start, min(start + size, n))


def run_switch_census(plan: SamplingPlan, threads: int = 1) -> StudyReport:
    """Decision-only census: sample, decide, bin the order difference."""

    def scan(idx) -> list[tuple[str, bool, bool]]:
        out = []
        for i in idx:
            params, quote = plan.draw(i)
            d: SwitchDecision = decide(params, quote)
            out.append((_bin_label(d.o), d.par, d.f0 <= F0_GATE))
        return out

    if plan.n == 0:
        return StudyReport(total=0, switch_on=0, f0_gate_failed=0)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(scan, _chunks(plan.n, threads * 4)))
        rows = [r for part in parts for r in part]
    else:
        rows = scan(range(plan.n))
    bins: dict[str, int] = {}
    switch_on = 0
    f0_failed = 0
    for label, par, gate_failed in rows:
        _merge_bins(bins, label)
        switch_on += par
        f0_failed += gate_failed
    return StudyReport(total=plan.n, switch_on=switch_on,
                       f0_gate_failed=f0_failed, bin_counts=bins)


def run_problematic_census(plan: SamplingPlan,
                           spec: Optional[QuadSpec] = None,
                           threads: int = 1) -> StudyReport:
    """Dual-integration census: which draws does working precision get wrong.

    Each draw is integrated with the working-only strategy (evaluation
    budget clamped to the problematic-case threshold) and with full
    extended precision as the reference. A draw is problematic when the
    working answer is off by more than 1e-8 or working integration ran
    out of budget. Problematic draws the decision rule did NOT flag are
    reported as findings rather than raised.
    """
    if spec is None:
        spec = QuadSpec(abs_tol=1e-10, rel_tol=1e-9)
    spec_w = replace(spec, max_fevals=min(spec.max_fevals, FEVALS_THRESHOLD))

    def scan(idx):
        out = []
        for i in idx:
            params, quote = plan.draw(i)
            d = decide(params, quote)
            ev_w = make_evaluator(WorkingOnly(), params, quote)
            res_w = integrate_semi_infinite(_RealPart(ev_w), 0.0, spec_w)
            ev_e = make_evaluator(ExtendedFull(), params, quote)
            res_e = integrate_semi_infinite(_RealPart(ev_e), 0.0, spec)
            err = abs(res_w.value - res_e.value)
            exhausted = any("budget" in w for w in res_w.warnings)
            out.append((i, _bin_label(d.o), d.par, d.f0 <= F0_GATE,
                        err > ERR_THRESHOLD,
                        exhausted or res_w.fevals > FEVALS_THRESHOLD, err))
        return out

    if plan.n == 0:
        return StudyReport(total=0, switch_on=0, f0_gate_failed=0,
                           problematic={"err_gt_1e-8": 0, "fevals_gt_1e4": 0,
                                        "either": 0},
                           crosstab={})
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(scan, _chunks(plan.n, threads * 4)))
        rows = [r for part in parts for r in part]
        rows.sort(key=lambda r: r[0])
    else:
        rows = scan(range(plan.n))

    bins: dict[str, int] = {}
    switch_on = f0_failed = n_err = n_fev = n_prob = 0
    crosstab = {"par&problematic": 0, "par&clean": 0,
                "nopar&problematic": 0, "nopar&clean": 0}
    findings: list[str] = []
    for i, label, par, gate_failed, bad_err, bad_fev, err in rows:
        _merge_bins(bins, label)
        switch_on += par
        f0_failed += gate_failed
        prob = bad_err or bad_fev
        n_err += bad_err
        n_fev += bad_fev
        n_prob += prob
        key = ("par" if par else "nopar") + ("&problematic" if prob else "&clean")
        crosstab[key] += 1
        if prob and not par:
            findings.append(
                f"draw {i}: problematic (err={err:.3e}, budget={bad_fev}) "
                f"but the decision rule did not flag it")
    return StudyReport(total=plan.n, switch_on=switch_on,
                       f0_gate_failed=f0_failed, bin_counts=bins,
                       problematic={"err_gt_1e-8": n_err,
                                    "fevals_gt_1e4": n_fev, "either": n_prob},
                       crosstab=crosstab, findings=tuple(findings))
