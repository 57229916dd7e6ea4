"""Model state, quotes, and the transform/characteristic-function layer."""

import cmath
import math

import numpy as np
import pytest

from quadprice.model import (LogNormalJumps, LogUniformJumps, MarketQuote,
                             ModelParams, PARAM_BOUNDS, afsvjd, bates,
                             char_fn, f_zero, heston, integrand,
                             integrand_many, jump_fourier, transform_terms)
from quadprice.precision import WORKING, extended
from quadprice.testcases import TC_QUOTE, get


def benign_params():
    return heston(0.0175, 1.5768, 0.0398, 0.5751, -0.5711)


def quote():
    return TC_QUOTE


# ------------------------------------------------------------------ validation

def test_param_bounds_rejected():
    with pytest.raises(ValueError, match="v0"):
        heston(-0.01, 1.5, 0.04, 0.5, -0.5)
    with pytest.raises(ValueError, match="kappa"):
        heston(0.02, 151.0, 0.04, 0.5, -0.5)
    with pytest.raises(ValueError, match="rho"):
        heston(0.02, 1.5, 0.04, 0.5, -1.5)
    with pytest.raises(ValueError, match="hurst"):
        afsvjd(0.02, 1.5, 0.04, 0.5, -0.5, 0.1, -0.05, 0.1, 0.3)
    with pytest.raises(ValueError, match="mu_j"):
        bates(0.02, 1.5, 0.04, 0.5, -0.5, 0.1, -11.0, 0.1)
    with pytest.raises(ValueError, match="epsilon"):
        heston(0.02, 1.5, 0.04, 0.5, -0.5, epsilon=0.0)


def test_log_uniform_support_ordering():
    LogUniformJumps(-0.2, 0.1)
    with pytest.raises(ValueError):
        LogUniformJumps(0.1, 0.1)


def test_with_sigma_replaces_only_sigma():
    p = benign_params()
    p2 = p.with_sigma(1e-4)
    assert p2.sigma == 1e-4
    assert (p2.v0, p2.kappa, p2.theta, p2.rho) == (p.v0, p.kappa, p.theta, p.rho)


def test_quote_validation():
    with pytest.raises(ValueError):
        MarketQuote(tau=-0.1, strike=100.0, rate=0.01, spot=100.0)
    with pytest.raises(ValueError):
        MarketQuote(tau=0.5, strike=-5.0, rate=0.01, spot=100.0)
    with pytest.raises(ValueError):  # bid without ask
        MarketQuote(tau=0.5, strike=100.0, rate=0.01, spot=100.0, bid=1.0)
    with pytest.raises(ValueError):  # crossed market
        MarketQuote(tau=0.5, strike=100.0, rate=0.01, spot=100.0,
                    bid=2.0, ask=1.0)
    with pytest.raises(ValueError):
        MarketQuote(tau=0.5, strike=100.0, rate=0.01, spot=100.0, mid=0.0)


def test_quote_out_of_range_warns_not_raises():
    with pytest.warns(UserWarning, match="rate"):
        q = MarketQuote(tau=0.5, strike=100.0, rate=0.30, spot=100.0)
    assert q.rate == 0.30


def test_quote_spread():
    q = MarketQuote(tau=0.5, strike=100.0, rate=0.01, spot=100.0,
                    bid=9.5, ask=10.5)
    assert q.spread == pytest.approx(1.0)
    assert quote().spread is None


# ------------------------------------------------------------------ factories

def test_factories_fix_reduction_fields():
    h = heston(0.02, 1.5, 0.04, 0.5, -0.5)
    assert h.jump is None and h.lam == 0.0 and h.hurst == 0.5
    b = bates(0.02, 1.5, 0.04, 0.5, -0.5, 0.3, -0.1, 0.2)
    assert isinstance(b.jump, LogNormalJumps) and b.hurst == 0.5
    a = afsvjd(0.02, 1.5, 0.04, 0.5, -0.5, 0.3, -0.1, 0.2, 0.75)
    assert a.hurst == 0.75


# ------------------------------------------------- transform and char function

def test_transform_terms_cross_precision_agreement():
    # benign regime: working and 32-digit extended agree to ~1e-12 relative
    p, q = benign_params(), quote()
    ctx = extended(32)
    for x in (0.0, 0.7, 3.0, 12.0):
        tw = transform_terms(p, q.tau, complex(x, 0.5), WORKING)
        te = transform_terms(p, q.tau, ctx.make_complex(ctx.lift(x), ctx.lift(0.5)), ctx)
        ce = ctx.lower_complex(te.C)
        assert abs(tw.C - ce) <= 1e-12 * max(1.0, abs(ce))


def test_transform_rejects_sigma_zero():
    p = benign_params()
    bad = ModelParams(p.v0, p.kappa, p.theta, 0.0, p.rho)
    with pytest.raises(ValueError):
        transform_terms(bad, 0.5, complex(1.0, 0.5), WORKING)


def test_jump_fourier_is_one_at_zero():
    assert jump_fourier(LogNormalJumps(-0.1, 0.25), 0.0) == pytest.approx(1.0)
    assert jump_fourier(LogUniformJumps(-0.2, 0.1), 0.0) == pytest.approx(1.0)


def test_char_fn_is_one_at_zero_and_without_jumps():
    jump = LogNormalJumps(-0.1, 0.25)
    assert char_fn(jump, 0.4, 0.7, 0.0) == pytest.approx(1.0)
    # lambda = 0 kills the jump factor identically
    assert char_fn(jump, 0.0, 0.7, 1.3 + 0.5j) == pytest.approx(1.0)


def test_char_fn_extended_matches_working():
    jump = LogNormalJumps(-0.1, 0.25)
    ctx = extended(32)
    k = complex(2.0, 0.5)
    w = char_fn(jump, 0.4, 0.7, k, WORKING)
    e = ctx.lower_complex(char_fn(jump, 0.4, 0.7, ctx.lift_complex(k), ctx))
    assert abs(w - e) <= 1e-13 * abs(e)


def test_f_zero_positive_on_test_cases():
    for name in ("tc1", "tc2"):
        case = get(name, sigma=0.01)
        assert f_zero(case.params, case.quote) > 0


def test_integrand_decays():
    p, q = benign_params(), quote()
    near = abs(integrand(p, q, 0.0))
    far = abs(integrand(p, q, 120.0))
    assert far < near * 1e-6


def test_integrand_many_matches_scalar_in_benign_regime():
    p, q = benign_params(), quote()
    xs = np.linspace(0.0, 20.0, 41)
    vec = integrand_many(p, q, xs)
    scal = np.array([integrand(p, q, float(x)) for x in xs])
    assert np.max(np.abs(vec - scal)) <= 1e-12
