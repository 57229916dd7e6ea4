"""Quadrature rule construction: nodes and weights on [-1, 1].

Gauss-Legendre rules are computed in binary64 by Newton iteration on the
Legendre recurrence. The Gauss-Kronrod pair (n, 2n+1) is derived at 30
significant digits on first use: the n+1 added nodes are the roots of the
Stieltjes polynomial E_{n+1} (orthogonal to every polynomial of degree <= n
against the signed weight P_n), obtained from a moment system; Kronrod
weights come from a Legendre-basis Vandermonde solve. A compiled-in
25-digit table for the (7,15) pair acts as fallback and as a startup
cross-check on the derivation: the table was produced by an independent
multiprecision stack (see tools/gen_gk_table.py), so the two routes only
agree if both are right.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np

__all__ = [
    "Rule",
    "EmbeddedRule",
    "gauss_legendre_rule",
    "kronrod_extension",
    "lobatto_kronrod_rule",
    "RuleDerivationError",
]

MAX_GL_POINTS = 1024
NEWTON_MAX_ITERS = 100

# 30 significant digits for the runtime derivation
_DERIVE_BITS = int(math.ceil(30 * math.log2(10))) + 4


class RuleDerivationError(RuntimeError):
    """A quadrature rule failed to construct; this is a defect, not an input error."""


@dataclass(frozen=True)
class Rule:
    """Plain rule: sum(weights * f(nodes)) approximates the [-1,1] integral."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def npoints(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class EmbeddedRule:
    """High-order rule plus a lower rule living on a subset of its nodes.

    `low_indices` selects the embedded rule's nodes out of `nodes`; for a
    Kronrod pair these are the odd positions 1, 3, 5, ... of the sorted
    15-node set (counting from zero), i.e. every second node starting at
    the second.
    """

    nodes: np.ndarray
    weights_high: np.ndarray
    weights_low: np.ndarray
    low_indices: np.ndarray

    @property
    def npoints(self) -> int:
        return len(self.nodes)


# ---------------------------------------------------------------- binary64 GL

def _legendre_pair(n: int, x):
    """P_n(x) and P_n'(x); works elementwise on numpy arrays and on mpfr."""
    p0, p1 = x * 0 + 1, x
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    if n == 0:
        return p0, x * 0
    return p1, n * (x * p1 - p0) / (x * x - 1)


@lru_cache(maxsize=None)
def gauss_legendre_rule(n: int) -> Rule:
    """n-point Gauss-Legendre rule on [-1, 1], exact through degree 2n-1."""
    if not 1 <= n <= MAX_GL_POINTS:
        raise ValueError(f"Gauss-Legendre size must be in [1, {MAX_GL_POINTS}], got {n}")
    if n == 1:
        return Rule(nodes=np.zeros(1), weights=np.full(1, 2.0))
    i = np.arange(n)
    x = np.cos(math.pi * (i + 0.75) / (n + 0.5))
    for it in range(NEWTON_MAX_ITERS):
        p, dp = _legendre_pair(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise RuleDerivationError(
            f"Gauss-Legendre({n}) Newton iteration failed to reach 1e-15 "
            f"in {NEWTON_MAX_ITERS} iterations"
        )
    _, dp = _legendre_pair(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return Rule(nodes=x[order], weights=w[order])


# ------------------------------------------------------- 30-digit GK derivation

def _derive_ctx():
    gmpy2.set_context(gmpy2.context(precision=_DERIVE_BITS))


def _mp_legendre(n: int, x):
    p0, p1 = gmpy2.mpfr(1), x
    if n == 0:
        return p0, gmpy2.mpfr(0)
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    return p1, n * (x * p1 - p0) / (x * x - 1)


def _mp_gauss(n: int):
    _derive_ctx()
    tiny = gmpy2.mpfr(2) ** (-(_DERIVE_BITS - 8))
    nodes, weights = [], []
    for i in range(n):
        x = gmpy2.mpfr(math.cos(math.pi * (i + 0.75) / (n + 0.5)))
        for _ in range(NEWTON_MAX_ITERS):
            p, dp = _mp_legendre(n, x)
            dx = p / dp
            x = x - dx
            if abs(dx) < tiny:
                break
        else:
            raise RuleDerivationError(f"Gauss({n}) root failed to converge at 30 digits")
        p, dp = _mp_legendre(n, x)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    order = sorted(range(n), key=lambda j: float(nodes[j]))
    return [nodes[j] for j in order], [weights[j] for j in order]


def _mp_solve(A, b):
    """Gaussian elimination with partial pivoting over mpfr."""
    n = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            raise RuleDerivationError("singular system in rule derivation")
        M[col], M[piv] = M[piv], M[col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            for c in range(col, n + 1):
                M[r][c] -= f * M[col][c]
    x = [gmpy2.mpfr(0)] * n
    for r in range(n - 1, -1, -1):
        s = M[r][n]
        for c in range(r + 1, n):
            s -= M[r][c] * x[c]
        x[r] = s / M[r][r]
    return x


def _stieltjes_roots(n: int):
    """Roots of E_{n+1}: the degree-(n+1) monic polynomial orthogonal to all
    degree-<=n polynomials against the signed weight P_n on [-1,1]."""
    _derive_ctx()
    gl_n, gl_w = _mp_gauss(2 * n + 2)  # exact through degree 4n+3
    pn_at = [_mp_legendre(n, x)[0] for x in gl_n]
    mom = []
    for m in range(2 * (n + 1) + 1):
        s = gmpy2.mpfr(0)
        for x, w, p in zip(gl_n, gl_w, pn_at):
            s += w * p * x ** m
        mom.append(s)
    A = [[mom[i + j] for i in range(n + 1)] for j in range(n + 1)]
    rhs = [-mom[n + 1 + j] for j in range(n + 1)]
    c = _mp_solve(A, rhs)
    coeffs = c + [gmpy2.mpfr(1)]  # ascending monomial coefficients of E_{n+1}

    def e_val(x):
        acc, dacc = gmpy2.mpfr(0), gmpy2.mpfr(0)
        for cf in reversed(coeffs):
            dacc = dacc * x + acc
            acc = acc * x + cf
        return acc, dacc

    guesses = np.roots(np.array([float(cf) for cf in reversed(coeffs)]))
    guesses = sorted(g.real for g in guesses)
    if len(guesses) != n + 1:
        raise RuleDerivationError(f"expected {n + 1} Stieltjes roots, got {len(guesses)}")
    tiny = gmpy2.mpfr(2) ** (-(_DERIVE_BITS - 8))
    roots = []
    for g0 in guesses:
        x = gmpy2.mpfr(g0)
        for _ in range(NEWTON_MAX_ITERS):
            v, dv = e_val(x)
            dx = v / dv
            x = x - dx
            if abs(dx) < tiny:
                break
        else:
            raise RuleDerivationError(f"Stieltjes root near {float(g0)} did not converge")
        roots.append(x)
    return sorted(roots, key=float)


def _derive_kronrod(n: int):
    """(nodes, kronrod weights, gauss nodes, gauss weights), all mpfr at 30 digits."""
    _derive_ctx()
    gn, gw = _mp_gauss(n)
    sr = _stieltjes_roots(n)
    all_nodes = sorted(gn + sr, key=float)
    m = 2 * n + 1
    A = []
    for j in range(m):
        A.append([_mp_legendre(j, x)[0] if j > 0 else gmpy2.mpfr(1) for x in all_nodes])
    rhs = [gmpy2.mpfr(2 if j == 0 else 0) for j in range(m)]
    kw = _mp_solve(A, rhs)
    return all_nodes, kw, gn, gw


# Fallback (7,15) pair at 25 significant digits, generated by the independent
# mpmath implementation in tools/gen_gk_table.py. Positive half only; nodes
# are symmetric and weights even. Validated against the runtime derivation.
GK715_TABLE = (
    ("0.0", "0.2094821410847278280129992"),
    ("0.2077849550078984676006894", "0.2044329400752988924141620"),
    ("0.4058451513773971669066064", "0.1903505780647854099132564"),
    ("0.5860872354676911302941448", "0.1690047266392679028265834"),
    ("0.7415311855993944398638648", "0.1406532597155259187451896"),
    ("0.8648644233597690727897128", "0.1047900103222501838398763"),
    ("0.9491079123427585245261897", "0.06309209262997855329070066"),
    ("0.9914553711208126392068547", "0.02293532201052922496373201"),
)
G7_WEIGHTS = (
    "0.4179591836734693877551020",
    "0.3818300505051189449503698",
    "0.2797053914892766679014678",
    "0.1294849661688696932706114",
)


def _fallback_715():
    nodes = [-float(x) for x, _ in reversed(GK715_TABLE[1:])]
    nodes += [float(x) for x, _ in GK715_TABLE]
    kw = [float(w) for _, w in reversed(GK715_TABLE[1:])]
    kw += [float(w) for _, w in GK715_TABLE]
    gw_half = [float(w) for w in G7_WEIGHTS]
    gw = list(reversed(gw_half[1:])) + gw_half
    return (np.array(nodes), np.array(kw), np.array(gw))


_TABLE_CHECK_TOL = 1e-23  # both routes carry >= 25 good digits


@lru_cache(maxsize=None)
def kronrod_extension(n: int) -> EmbeddedRule:
    """The (n, 2n+1) Gauss-Kronrod pair on [-1,1] as an EmbeddedRule.

    Derived at 30 digits and lowered to binary64. For n = 7 the derivation
    is cross-checked against the compiled-in independent table; if the
    derivation itself fails, the table is used with a warning.
    """
    if n < 2:
        raise ValueError(f"Kronrod extension needs n >= 2, got {n}")
    try:
        all_nodes, kw, gn, gw = _derive_kronrod(n)
    except RuleDerivationError:
        if n != 7:
            raise
        warnings.warn("Gauss-Kronrod(7,15) derivation failed; using compiled-in table")
        nodes, kweights, gweights = _fallback_715()
        return EmbeddedRule(nodes=nodes, weights_high=kweights,
                            weights_low=gweights,
                            low_indices=np.arange(1, 15, 2))
    nodes = np.array([float(x) for x in all_nodes])
    kweights = np.array([float(w) for w in kw])
    gweights = np.array([float(w) for w in gw])
    low_idx = np.arange(1, 2 * n + 1, 2)
    # embedded structure: gauss nodes must reappear at the odd sorted positions
    for i, gx in enumerate(gn):
        if abs(float(all_nodes[2 * i + 1]) - float(gx)) > 1e-14:
            raise RuleDerivationError(
                f"Gauss node {float(gx)} not embedded in Kronrod set for n={n}"
            )
    if n == 7:
        # compare at full precision against the independent 25-digit table
        _derive_ctx()
        worst = gmpy2.mpfr(0)
        for i, (xs, ws) in enumerate(GK715_TABLE):
            worst = max(worst, abs(all_nodes[7 + i] - gmpy2.mpfr(xs)),
                        abs(kw[7 + i] - gmpy2.mpfr(ws)))
        for i, ws in enumerate(G7_WEIGHTS):
            worst = max(worst, abs(gw[3 + i] - gmpy2.mpfr(ws)))
        if worst > _TABLE_CHECK_TOL:
            raise RuleDerivationError(
                f"Gauss-Kronrod(7,15) derivation disagrees with the reference "
                f"table by {float(worst):.2e}; one of the two routes is wrong"
            )
    return EmbeddedRule(nodes=nodes, weights_high=kweights,
                        weights_low=gweights, low_indices=low_idx)


# ------------------------------------------------------------------- Lobatto

_SQ15 = math.sqrt(1.0 / 5.0)
_SQ23 = math.sqrt(2.0 / 3.0)


@lru_cache(maxsize=None)
def lobatto_kronrod_rule() -> EmbeddedRule:
    """4-point Lobatto rule (nodes +-1, +-1/sqrt(5)) with its 7-point
    Kronrod extension (adds +-sqrt(2/3) and 0); closed-form weights."""
    nodes = np.array([-1.0, -_SQ23, -_SQ15, 0.0, _SQ15, _SQ23, 1.0])
    weights_high = np.array([77.0, 432.0, 625.0, 672.0, 625.0, 432.0, 77.0]) / 1470.0
    weights_low = np.array([1.0, 5.0, 5.0, 1.0]) / 6.0
    return EmbeddedRule(nodes=nodes, weights_high=weights_high,
                        weights_low=weights_low,
                        low_indices=np.array([0, 2, 4, 6]))


# ------------------------------------------------------- shared panel mapping

def map_to_panel(a: float, b: float, nodes: np.ndarray) -> np.ndarray:
    """Affine image of [-1,1] nodes on [a,b].

    Every consumer of rule abscissas (the integrators and the
    discontinuity-aligned test functions) must place nodes through this one
    function so positions agree bit-for-bit."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid + half * nodes
