"""Quadrature engines with uniform instrumentation.

Five methods behind one entry point: composite trapezoid, single-shot
Gauss-Legendre, adaptive Simpson, adaptive Lobatto-Kronrod, and the
workhorse adaptive Gauss-Kronrod(7,15). Every engine reports the number of
scalar integrand evaluations it consumed, the subinterval count, an error
estimate, and whether it believes its own answer; none of them ever spends
past spec.max_fevals.

The integrand is real-valued. Functions may expose an `eval_many(xs)`
method for vectorized evaluation; the engines batch their abscissas when it
exists, which changes nothing about the counts (one array entry is one
evaluation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .rules import (
    _legendre_pair,
    gauss_legendre_rule,
    kronrod_extension,
    lobatto_kronrod_rule,
    map_to_panel,
)

__all__ = [
    "Trapezoid",
    "GaussLegendre",
    "AdaptiveSimpson",
    "AdaptiveLobatto",
    "GaussKronrod715",
    "QuadSpec",
    "QuadratureResult",
    "NonFiniteIntegrandError",
    "integrate",
    "integrate_semi_infinite",
    "method_from_name",
    "METHOD_NAMES",
]

MAX_DEPTH = 50

TRUNCATION_START = 200.0
TRUNCATION_CAP = 1e4


@dataclass(frozen=True)
class Trapezoid:
    """Composite trapezoid with uniform step h; the last panel is shortened."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"trapezoid step must be positive, got {self.h}")

    name = "trapezoid"


@dataclass(frozen=True)
class GaussLegendre:
    """Single application of the n-point Gauss-Legendre rule."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"Gauss-Legendre size must be >= 1, got {self.n}")

    name = "gauss-legendre"


@dataclass(frozen=True)
class AdaptiveSimpson:
    name = "simpson"


@dataclass(frozen=True)
class AdaptiveLobatto:
    name = "lobatto"


@dataclass(frozen=True)
class GaussKronrod715:
    name = "gk715"


Method = Union[Trapezoid, GaussLegendre, AdaptiveSimpson, AdaptiveLobatto,
               GaussKronrod715]

METHOD_NAMES = ("trapezoid", "gauss-legendre", "simpson", "lobatto", "gk715")


def method_from_name(name: str) -> Method:
    """Parse 'gk715', 'simpson', 'lobatto', 'trapezoid:h', 'gl:n' spellings."""
    base, _, arg = name.partition(":")
    base = base.strip().lower()
    if base in ("gk715", "gk", "kronrod"):
        return GaussKronrod715()
    if base == "simpson":
        return AdaptiveSimpson()
    if base == "lobatto":
        return AdaptiveLobatto()
    if base in ("trapezoid", "trapz"):
        return Trapezoid(h=float(arg) if arg else 1e-3)
    if base in ("gauss-legendre", "gl", "legendre"):
        return GaussLegendre(n=int(arg) if arg else 128)
    raise ValueError(f"unknown quadrature method {name!r}")


@dataclass(frozen=True)
class QuadSpec:
    """What to run and how hard to try."""

    method: Method = field(default_factory=GaussKronrod715)
    abs_tol: float = 1e-10
    rel_tol: float = 1e-6
    max_fevals: int = 10_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_fevals < 1:
            raise ValueError("max_fevals must be at least 1")


@dataclass
class QuadratureResult:
    """One integration's outcome: the number and what it cost."""

    value: float
    error_estimate: float
    fevals: int
    subintervals: int
    converged: bool
    truncation_upper: Optional[float] = None
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "fevals": self.fevals,
            "subintervals": self.subintervals,
            "converged": self.converged,
            "truncation_upper": self.truncation_upper,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuadratureResult":
        return cls(value=d["value"], error_estimate=d["error_estimate"],
                   fevals=d["fevals"], subintervals=d["subintervals"],
                   converged=d["converged"],
                   truncation_upper=d.get("truncation_upper"),
                   warnings=tuple(d.get("warnings", ())))


class NonFiniteIntegrandError(ValueError):
    """The integrand produced NaN or +-Inf; carries the offending abscissa."""

    def __init__(self, abscissa: float, value):
        self.abscissa = abscissa
        self.value = value
        super().__init__(
            f"integrand returned non-finite value {value!r} at x={abscissa!r}")


class _BudgetExhausted(Exception):
    pass


class _Counter:
    """Budgeted evaluation wrapper; all engine evaluations flow through here."""

    def __init__(self, f, max_fevals: int):
        self._f = f
        self._many = getattr(f, "eval_many", None)
        self.max_fevals = max_fevals
        self.count = 0

    def can_afford(self, n: int) -> bool:
        return self.count + n <= self.max_fevals

    def one(self, x: float) -> float:
        if not self.can_afford(1):
            raise _BudgetExhausted()
        self.count += 1
        if self._many is None:
            v = float(self._f(x))
        else:
            v = float(np.asarray(self._many(np.array([x])))[0])
        if not math.isfinite(v):
            raise NonFiniteIntegrandError(x, v)
        return v

    def many(self, xs: np.ndarray) -> np.ndarray:
        n = len(xs)
        if not self.can_afford(n):
            raise _BudgetExhausted()
        self.count += n
        if self._many is not None:
            vs = np.asarray(self._many(xs), dtype=float)
        else:
            vs = np.array([float(self._f(float(x))) for x in xs])
        bad = ~np.isfinite(vs)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NonFiniteIntegrandError(float(xs[i]), float(vs[i]))
        return vs


def _tol_scale(spec: QuadSpec, running_value: float) -> float:
    return max(spec.abs_tol, spec.rel_tol * abs(running_value))


# ----------------------------------------------------------------- trapezoid

def _run_trapezoid(counter: _Counter, a: float, b: float, spec: QuadSpec,
                   h: float) -> QuadratureResult:
    panels = max(1, int(math.ceil((b - a) / h - 1e-12)))
    edges = np.minimum(a + h * np.arange(panels + 1), b)
    edges[-1] = b
    total = 0.0
    est = 0.0
    first_slope = last_slope = None
    done = 0
    warns: list[str] = []
    converged = True
    CHUNK = 65536
    prev_edge_val: Optional[float] = None
    for start in range(0, panels, CHUNK):
        stop = min(start + CHUNK, panels)
        if prev_edge_val is None:
            xs = edges[start:stop + 1]
        else:
            xs = edges[start + 1:stop + 1]
        try:
            vs = counter.many(xs)
        except _BudgetExhausted:
            converged = False
            warns.append("evaluation budget exhausted; partial trapezoid sum returned")
            break
        if prev_edge_val is not None:
            vs = np.concatenate([[prev_edge_val], vs])
        widths = np.diff(edges[start:stop + 1])
        total += float(np.sum(0.5 * widths * (vs[:-1] + vs[1:])))
        if first_slope is None:
            first_slope = (vs[1] - vs[0]) / widths[0]
        last_slope = (vs[-1] - vs[-2]) / widths[-1]
        prev_edge_val = float(vs[-1])
        done = stop
    if first_slope is not None and last_slope is not None:
        # Euler-Maclaurin leading term: E ~ (h^2/12) |f'(b) - f'(a)|
        est = (h * h / 12.0) * abs(last_slope - first_slope)
    return QuadratureResult(value=total, error_estimate=est,
                            fevals=counter.count,
                            subintervals=panels if converged else done,
                            converged=converged, warnings=tuple(warns))


# ------------------------------------------------------------ Gauss-Legendre

def _run_gauss_legendre(counter: _Counter, a: float, b: float, spec: QuadSpec,
                        n: int) -> QuadratureResult:
    rule = gauss_legendre_rule(n)
    half = 0.5 * (b - a)
    xs = map_to_panel(a, b, rule.nodes)
    try:
        vs = counter.many(xs)
    except _BudgetExhausted:
        return QuadratureResult(value=0.0, error_estimate=math.inf,
                                fevals=counter.count, subintervals=0,
                                converged=False,
                                warnings=("budget below the rule size; nothing evaluated",))
    value = half * float(np.dot(rule.weights, vs))
    if n >= 2:
        # tail estimate from the highest resolvable Legendre mode: project
        # the samples onto P_{n-1} and take that mode's L2 contribution
        p, _ = _legendre_pair(n - 1, rule.nodes)
        a_last = (2 * (n - 1) + 1) / 2.0 * float(np.dot(rule.weights, vs * p))
        est = abs(a_last) * 2.0 / (2 * n - 1) * half
        est = max(est, np.finfo(float).eps * abs(value))  # roundoff floor
    else:
        est = math.inf
    return QuadratureResult(value=value, error_estimate=est,
                            fevals=counter.count, subintervals=1,
                            converged=est <= _tol_scale(spec, value))


# ---------------------------------------------------------- adaptive Simpson

def _run_simpson(counter: _Counter, a: float, b: float,
                 spec: QuadSpec) -> QuadratureResult:
    warns: list[str] = []

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    try:
        m0 = 0.5 * (a + b)
        fa, fm, fb = counter.one(a), counter.one(m0), counter.one(b)
    except _BudgetExhausted:
        return QuadratureResult(0.0, math.inf, counter.count, 0, False,
                                warnings=("budget exhausted during initialization",))
    whole = simpson(a, b, fa, fm, fb)
    tol0 = _tol_scale(spec, whole)

    total = 0.0
    est_total = 0.0
    leaves = 0
    aborted = False

    # explicit stack, left-first, mirrors the recursive formulation
    stack = [(a, b, fa, fm, fb, whole, tol0, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, S, tol, depth = stack.pop()
        m = 0.5 * (lo + hi)
        lm = 0.5 * (lo + m)
        rm = 0.5 * (m + hi)
        if lm <= lo or lm >= m or rm <= m or rm >= hi:
            warns.append("subinterval narrowed to machine width; accepted as-is")
            total += S
            leaves += 1
            continue
        try:
            flm, frm = counter.one(lm), counter.one(rm)
        except _BudgetExhausted:
            aborted = True
            total += S
            est_total = math.inf
            leaves += 1
            continue
        Sl = simpson(lo, m, flo, flm, fmid)
        Sr = simpson(m, hi, fmid, frm, fhi)
        diff = (Sl + Sr) - S
        if abs(diff) <= 15.0 * tol or depth >= MAX_DEPTH:
            if abs(diff) > 15.0 * tol:
                warns.append("depth cap reached; panel accepted above tolerance")
            total += (Sl + Sr) + diff / 15.0  # Richardson
            est_total += abs(diff) / 15.0
            leaves += 1
        else:
            stack.append((m, hi, fmid, frm, fhi, Sr, tol / 2.0, depth + 1))
            stack.append((lo, m, flo, flm, fmid, Sl, tol / 2.0, depth + 1))
    if aborted:
        warns.append("evaluation budget exhausted; unrefined panels kept")
    return QuadratureResult(value=total, error_estimate=est_total,
                            fevals=counter.count, subintervals=leaves,
                            converged=not aborted,
                            warnings=tuple(dict.fromkeys(warns)))


# ---------------------------------------------------------- adaptive Lobatto

def _run_lobatto(counter: _Counter, a: float, b: float,
                 spec: QuadSpec) -> QuadratureResult:
    rule = lobatto_kronrod_rule()
    interior = rule.nodes[1:-1]           # 5 inner nodes; endpoints passed in
    w_high = rule.weights_high
    w_low = rule.weights_low
    warns: list[str] = []

    try:
        fa, fb = counter.one(a), counter.one(b)
    except _BudgetExhausted:
        return QuadratureResult(0.0, math.inf, counter.count, 0, False,
                                warnings=("budget exhausted during initialization",))

    total = 0.0
    est_total = 0.0
    leaves = 0
    aborted = False

    # tol is None only on the root panel; fixed there from the first estimate
    stack = [(a, b, fa, fb, None, 0)]
    while stack:
        lo, hi, flo, fhi, tol, depth = stack.pop()
        half = 0.5 * (hi - lo)
        xs = map_to_panel(lo, hi, interior)
        if xs[0] <= lo or xs[-1] >= hi:
            warns.append("subinterval narrowed to machine width; accepted as-is")
            total += half * (flo + fhi)  # endpoint trapezoid; best available
            leaves += 1
            continue
        try:
            inner = counter.many(xs)
        except _BudgetExhausted:
            aborted = True
            total += half * (flo + fhi)
            est_total = math.inf
            leaves += 1
            continue
        vals = np.concatenate([[flo], inner, [fhi]])
        i_high = half * float(np.dot(w_high, vals))
        i_low = half * float(np.dot(w_low, vals[rule.low_indices]))
        if tol is None:
            tol = _tol_scale(spec, i_high)
        err = abs(i_high - i_low)
        if err <= tol or depth >= MAX_DEPTH:
            if err > tol:
                warns.append("depth cap reached; panel accepted above tolerance")
            total += i_high
            est_total += err
            leaves += 1
        else:
            mid = float(xs[2])  # center node is the panel midpoint
            fmid = float(inner[2])
            stack.append((mid, hi, fmid, fhi, tol / 2.0, depth + 1))
            stack.append((lo, mid, flo, fmid, tol / 2.0, depth + 1))
    if aborted:
        warns.append("evaluation budget exhausted; unrefined panels kept")
    return QuadratureResult(value=total, error_estimate=est_total,
                            fevals=counter.count, subintervals=leaves,
                            converged=not aborted,
                            warnings=tuple(dict.fromkeys(warns)))


# ----------------------------------------------------- adaptive Gauss-Kronrod

@dataclass
class _GKPanel:
    lo: float
    hi: float
    depth: int
    k15: float = 0.0
    err: float = 0.0
    forced: bool = False  # kept as a leaf because of a depth or width cap


def _run_gk(counter: _Counter, a: float, b: float,
            spec: QuadSpec) -> QuadratureResult:
    rule = kronrod_extension(7)
    nn = rule.npoints
    warns: list[str] = []
    span = b - a

    def evaluate(panels: list[_GKPanel]) -> bool:
        """Fill k15/err for panels in one batched sweep; False if unaffordable."""
        xs = np.concatenate([map_to_panel(p.lo, p.hi, rule.nodes)
                             for p in panels])
        try:
            vs = counter.many(xs)
        except _BudgetExhausted:
            return False
        vs = vs.reshape(len(panels), nn)
        halves = np.array([0.5 * (p.hi - p.lo) for p in panels])
        k15s = halves * (vs @ rule.weights_high)
        g7s = halves * (vs[:, rule.low_indices] @ rule.weights_low)
        for p, k15, g7 in zip(panels, k15s, g7s):
            p.k15 = float(k15)
            p.err = abs(float(k15) - float(g7))
        return True

    edges = np.linspace(a, b, 11)
    leaves: list[_GKPanel] = [_GKPanel(lo=float(lo), hi=float(hi), depth=0)
                              for lo, hi in zip(edges[:-1], edges[1:])]
    if not evaluate(leaves):
        return QuadratureResult(0.0, math.inf, counter.count, 0, False,
                                warnings=("budget below the initial panel cost",))

    exhausted = False
    while True:
        value = sum(p.k15 for p in leaves)
        scale = _tol_scale(spec, value)
        to_split = {id(p) for p in leaves
                    if not p.forced and p.err > scale * (p.hi - p.lo) / span}
        if not to_split:
            break
        child_map: dict[int, tuple[_GKPanel, _GKPanel]] = {}
        fresh: list[_GKPanel] = []
        for p in leaves:
            if id(p) not in to_split:
                continue
            mid = 0.5 * (p.lo + p.hi)
            if mid <= p.lo or mid >= p.hi:
                p.forced = True
                warns.append("subinterval narrowed to machine width; its estimate stands")
                continue
            if p.depth + 1 > MAX_DEPTH:
                p.forced = True
                warns.append("depth cap reached; panel accepted above tolerance")
                continue
            kids = (_GKPanel(p.lo, mid, p.depth + 1),
                    _GKPanel(mid, p.hi, p.depth + 1))
            child_map[id(p)] = kids
            fresh.extend(kids)
        if not fresh:
            break  # everything that wanted splitting hit a cap
        if not evaluate(fresh):
            exhausted = True
            warns.append("evaluation budget exhausted; coarser panels kept")
            break
        merged: list[_GKPanel] = []
        for p in leaves:
            kids = child_map.get(id(p))
            if kids is None:
                merged.append(p)
            else:
                merged.extend(kids)
        leaves = merged

    value = sum(p.k15 for p in leaves)
    est = max(sum(p.err for p in leaves),
              float(np.finfo(float).eps) * abs(value))  # roundoff floor
    forced_any = any(p.forced for p in leaves)
    return QuadratureResult(value=value, error_estimate=est,
                            fevals=counter.count, subintervals=len(leaves),
                            converged=not exhausted and not forced_any,
                            warnings=tuple(dict.fromkeys(warns)))


# ---------------------------------------------------------------- entry points

def _dispatch(counter: _Counter, a: float, b: float,
              spec: QuadSpec) -> QuadratureResult:
    m = spec.method
    if isinstance(m, Trapezoid):
        return _run_trapezoid(counter, a, b, spec, m.h)
    if isinstance(m, GaussLegendre):
        return _run_gauss_legendre(counter, a, b, spec, m.n)
    if isinstance(m, AdaptiveSimpson):
        return _run_simpson(counter, a, b, spec)
    if isinstance(m, AdaptiveLobatto):
        return _run_lobatto(counter, a, b, spec)
    if isinstance(m, GaussKronrod715):
        return _run_gk(counter, a, b, spec)
    raise TypeError(f"unsupported method {m!r}")


def integrate(f, a: float, b: float, spec: Optional[QuadSpec] = None) -> QuadratureResult:
    """Integrate f over the finite interval [a, b] per spec."""
    if spec is None:
        spec = QuadSpec()
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"interval endpoints must be finite, got [{a}, {b}]")
    if not b > a:
        raise ValueError(f"empty or inverted interval [{a}, {b}]")
    counter = _Counter(f, spec.max_fevals)
    return _dispatch(counter, a, b, spec)


def integrate_semi_infinite(f, a: float = 0.0,
                            spec: Optional[QuadSpec] = None) -> QuadratureResult:
    """Integrate f over [a, oo) by truncating to [a, U].

    U starts at 200 and doubles while the integrand at U or the last
    octave's contribution is non-negligible against abs_tol, capping at
    1e4. The truncation point is recorded on the result; hitting the cap
    with a live tail clears the converged flag.
    """
    if spec is None:
        spec = QuadSpec()
    if not math.isfinite(a):
        raise ValueError(f"lower endpoint must be finite, got {a}")
    if a >= TRUNCATION_START:
        raise ValueError(f"lower endpoint {a} exceeds the initial truncation point")
    counter = _Counter(f, spec.max_fevals)
    rule = kronrod_extension(7)
    warns: list[str] = []
    U = TRUNCATION_START
    capped = False
    while True:
        try:
            head = abs(counter.one(U))
            # one 15-point panel across the last octave gauges its mass
            tail_xs = map_to_panel(U / 2.0, U, rule.nodes)
            tail = abs(0.25 * U * float(np.dot(rule.weights_high,
                                               counter.many(tail_xs))))
        except _BudgetExhausted:
            return QuadratureResult(0.0, math.inf, counter.count, 0, False,
                                    truncation_upper=U,
                                    warnings=("budget exhausted while locating the truncation point",))
        if head <= spec.abs_tol / 100.0 and tail <= spec.abs_tol / 10.0:
            break
        if U >= TRUNCATION_CAP:
            capped = True
            warns.append("truncation cap reached with a non-negligible tail")
            break
        U = min(2.0 * U, TRUNCATION_CAP)
    res = _dispatch(counter, a, U, spec)
    res.truncation_upper = U
    if capped:
        res.converged = False
    if warns:
        res.warnings = tuple(dict.fromkeys((*res.warnings, *warns)))
    return res
