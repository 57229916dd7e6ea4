"""Constructed worst cases for Gauss-Kronrod quadrature.

Piecewise-constant integrands whose discontinuities sit exactly on the
rule's abscissas. The two Kronrod sums then see systematically different
plateau values, so the error estimate stays small while adaptive
refinement churns: the estimator is deceived by design. The analytic
size of that deception on the unrefined function follows directly from
the rule weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .quadrature import GaussKronrod715, QuadSpec, QuadratureResult, integrate
from .rules import kronrod_extension, map_to_panel

__all__ = [
    "AbscissaAlignedFn",
    "build_failure_fn",
    "analytic_E0",
    "BlowupTrace",
    "blowup_profile",
]

MAX_LEVEL = 20


@dataclass(frozen=True)
class AbscissaAlignedFn:
    """Plateau function with jumps at the 2n+1 rule nodes of 2^level panels.

    Plateaus alternate between 1+eps (right of the odd-numbered nodes,
    counting from 1 -- the Kronrod-only ones) and 1-eps (right of the
    even-numbered Gauss nodes, and left of the first node). A node
    evaluates to the plateau on its right, so the half-open layout and
    the bit-exact node placement make f(node) exactly the intended value.
    Interior panel edges reset the value to 1-eps, making each panel an
    exact copy of the level-0 profile; by symmetry of the node set the
    exact integral over [a, b] is then b - a for every level and eps.
    """

    n: int
    level: int
    eps: float
    a: float
    b: float
    boundaries: np.ndarray   # all jump locations, ascending
    plateau: np.ndarray      # value on [boundaries[i], boundaries[i+1])

    @property
    def exact_integral(self) -> float:
        return self.b - self.a

    def __call__(self, x: float) -> float:
        i = int(np.searchsorted(self.boundaries, x, side="right"))
        return 1.0 - self.eps if i == 0 else float(self.plateau[i - 1])

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.boundaries, xs, side="right")
        out = np.full(len(xs), 1.0 - self.eps)
        hit = idx > 0
        out[hit] = self.plateau[idx[hit] - 1]
        return out


def build_failure_fn(n: int, level: int, eps: float, a: float = -1.0,
                     b: float = 1.0) -> AbscissaAlignedFn:
    """Plateau function on [a, b] with jumps at the GK(n, 2n+1) abscissas."""
    if n < 2:
        raise ValueError(f"base rule size must be >= 2, got {n}")
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in [0, {MAX_LEVEL}], got {level}")
    if not eps >= 0:
        raise ValueError(f"eps must be non-negative, got {eps}")
    if not b > a:
        raise ValueError(f"empty interval [{a}, {b}]")
    rule = kronrod_extension(n)
    pieces = 2 ** level
    edges = a + (b - a) * np.arange(pieces + 1) / pieces
    # 0-based even positions are the Kronrod-only (odd-numbered) nodes
    per_panel = np.where(np.arange(rule.npoints) % 2 == 0,
                         1.0 + eps, 1.0 - eps)
    # nodes per panel through the shared mapping, so an integrator panel
    # that coincides with one of ours sees boundaries at its own abscissas.
    # Each subinterval carries a full copy of the level-0 profile, so the
    # value drops back to 1-eps at every interior edge; without that reset
    # the junction gap rides at 1+eps on both sides and the true integral
    # drifts off b-a by 2*eps*(pieces-1)*(first-node offset)
    bound_parts: list[np.ndarray] = []
    val_parts: list[np.ndarray] = []
    for k in range(pieces):
        bound_parts.append(map_to_panel(edges[k], edges[k + 1], rule.nodes))
        val_parts.append(per_panel)
        if k + 1 < pieces:
            bound_parts.append(edges[k + 1:k + 2])
            val_parts.append(np.array([1.0 - eps]))
    return AbscissaAlignedFn(n=n, level=level, eps=eps, a=float(a), b=float(b),
                             boundaries=np.concatenate(bound_parts),
                             plateau=np.concatenate(val_parts))


def analytic_E0(n: int, eps: float, a: float = -1.0, b: float = 1.0) -> float:
    """|G_n - K_{2n+1}| on the level-0 function, from the weights alone.

    The Gauss sum sees only 1-eps; the Kronrod sum mixes both plateaus,
    leaving eps*(b-a)*|1 + C_n| with C_n half the alternating weight sum.
    """
    rule = kronrod_extension(n)
    w = rule.weights_high
    c_n = (float(np.sum(w[0::2])) - float(np.sum(w[1::2]))) / 2.0
    return eps * (b - a) * abs(1.0 + c_n)


@dataclass(frozen=True)
class BlowupTrace:
    """What adaptive GK did to one constructed failure function."""

    n: int
    level: int
    eps: float
    analytic_e0: float
    value: float
    true_error: float
    error_estimate: float
    leaves: int
    fevals: int
    converged: bool
    warnings: tuple[str, ...] = ()

    @property
    def deceived(self) -> bool:
        """True error exceeded the reported estimate."""
        return self.true_error > self.error_estimate

    def as_dict(self) -> dict:
        return {
            "n": self.n, "level": self.level, "eps": self.eps,
            "analytic_e0": self.analytic_e0, "value": self.value,
            "true_error": self.true_error,
            "error_estimate": self.error_estimate,
            "leaves": self.leaves, "fevals": self.fevals,
            "converged": self.converged, "warnings": list(self.warnings),
        }


def blowup_profile(n: int, level: int, eps: float,
                   spec: Optional[QuadSpec] = None,
                   a: float = -1.0, b: float = 1.0) -> BlowupTrace:
    """Run adaptive GK on the constructed function and record the damage."""
    if spec is None:
        spec = QuadSpec()
    spec = replace(spec, method=GaussKronrod715())
    fn = build_failure_fn(n, level, eps, a, b)
    res: QuadratureResult = integrate(fn, a, b, spec)
    return BlowupTrace(n=n, level=level, eps=eps,
                       analytic_e0=analytic_E0(n, eps, a, b),
                       value=res.value,
                       true_error=abs(res.value - fn.exact_integral),
                       error_estimate=res.error_estimate,
                       leaves=res.subintervals, fevals=res.fevals,
                       converged=res.converged, warnings=res.warnings)
