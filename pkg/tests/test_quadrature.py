"""Integration engines: known integrals, budgets, estimates, parsing."""

import math

import numpy as np
import pytest

from quadprice.quadrature import (AdaptiveLobatto, AdaptiveSimpson,
                                  GaussKronrod715, GaussLegendre,
                                  NonFiniteIntegrandError, QuadSpec,
                                  QuadratureResult, Trapezoid,
                                  integrate, integrate_semi_infinite,
                                  method_from_name)

ALL_METHODS = [Trapezoid(h=1e-3), GaussLegendre(n=64), AdaptiveSimpson(),
               AdaptiveLobatto(), GaussKronrod715()]


# -------------------------------------------------------------------- parsing

def test_method_from_name():
    assert isinstance(method_from_name("gk715"), GaussKronrod715)
    assert isinstance(method_from_name("kronrod"), GaussKronrod715)
    assert isinstance(method_from_name("simpson"), AdaptiveSimpson)
    assert isinstance(method_from_name("lobatto"), AdaptiveLobatto)
    m = method_from_name("trapezoid:0.01")
    assert isinstance(m, Trapezoid) and m.h == 0.01
    assert isinstance(method_from_name("trapz"), Trapezoid)
    m = method_from_name("gl:64")
    assert isinstance(m, GaussLegendre) and m.n == 64
    assert isinstance(method_from_name("legendre"), GaussLegendre)
    with pytest.raises(ValueError, match="cubature"):
        method_from_name("cubature")


def test_quadspec_validation():
    with pytest.raises(ValueError):
        QuadSpec(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadSpec(rel_tol=-1e-9)
    with pytest.raises(ValueError):
        QuadSpec(max_fevals=0)


# ------------------------------------------------------------- known integrals

def tol_for(method) -> float:
    # trapezoid is O(h^2): at h=1e-3 roughly 1e-7 on unit-scale integrals
    return 1e-6 if isinstance(method, Trapezoid) else 1e-8


@pytest.mark.parametrize("method", ALL_METHODS, ids=lambda m: type(m).__name__)
def test_polynomial_integral(method):
    spec = QuadSpec(method=method, abs_tol=1e-10, rel_tol=1e-10)
    res = integrate(lambda x: x * x, 0.0, 1.0, spec)
    assert res.value == pytest.approx(1.0 / 3.0, abs=tol_for(method))
    assert res.fevals > 0


@pytest.mark.parametrize("method", ALL_METHODS, ids=lambda m: type(m).__name__)
def test_sine_integral(method):
    spec = QuadSpec(method=method, abs_tol=1e-10, rel_tol=1e-10)
    res = integrate(math.sin, 0.0, math.pi, spec)
    assert res.value == pytest.approx(2.0, abs=tol_for(method))


@pytest.mark.parametrize("method", ALL_METHODS, ids=lambda m: type(m).__name__)
def test_gaussian_integral(method):
    spec = QuadSpec(method=method, abs_tol=1e-10, rel_tol=1e-10)
    res = integrate(lambda x: math.exp(-x * x), -5.0, 5.0, spec)
    assert res.value == pytest.approx(math.sqrt(math.pi) * math.erf(5.0),
                                      abs=tol_for(method))


def test_oscillatory_integral():
    # int_0^10 cos(7x) = sin(70)/7
    spec = QuadSpec(abs_tol=1e-12, rel_tol=1e-12)
    res = integrate(lambda x: math.cos(7.0 * x), 0.0, 10.0, spec)
    assert res.value == pytest.approx(math.sin(70.0) / 7.0, abs=1e-10)
    assert res.converged


def test_estimate_soundness_on_smooth_functions():
    # converged estimates must not understate the true error badly
    cases = [
        (lambda x: math.exp(x), 0.0, 1.0, math.e - 1.0),
        (lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0, math.pi / 4.0),
        (lambda x: math.cos(x), 0.0, 2.0, math.sin(2.0)),
    ]
    for f, a, b, exact in cases:
        for method in (GaussKronrod715(), AdaptiveSimpson(), AdaptiveLobatto()):
            spec = QuadSpec(method=method, abs_tol=1e-10, rel_tol=1e-10)
            res = integrate(f, a, b, spec)
            assert res.converged
            true_err = abs(res.value - exact)
            assert true_err <= max(10.0 * res.error_estimate, 1e-9)


# ----------------------------------------------------------- budget accounting

def test_fevals_counted_exactly():
    calls = 0

    def f(x):
        nonlocal calls
        calls += 1
        return x

    res = integrate(f, 0.0, 1.0, QuadSpec())
    assert res.fevals == calls


def test_budget_exhaustion_flags_not_raises():
    # a needle the rule keeps chasing with only 60 evaluations allowed
    f = lambda x: math.exp(-1e6 * (x - 0.3123) ** 2)
    res = integrate(f, 0.0, 1.0, QuadSpec(max_fevals=60, abs_tol=1e-14,
                                          rel_tol=1e-14))
    assert not res.converged
    assert any("budget" in w for w in res.warnings)
    assert res.fevals <= 60


def test_non_finite_integrand_raises_with_location():
    def f(x):
        return math.nan if x > 0.9 else 1.0

    with pytest.raises(NonFiniteIntegrandError) as exc:
        integrate(f, 0.0, 1.0, QuadSpec())
    assert exc.value.abscissa > 0.9


def test_vectorized_and_scalar_agree():
    class WithMany:
        def __call__(self, x):
            return math.exp(-x) * math.cos(x)

        def eval_many(self, xs):
            return np.exp(-xs) * np.cos(xs)

    spec = QuadSpec(abs_tol=1e-12, rel_tol=1e-12)
    r_vec = integrate(WithMany(), 0.0, 3.0, spec)
    r_scal = integrate(lambda x: math.exp(-x) * math.cos(x), 0.0, 3.0, spec)
    assert r_vec.value == pytest.approx(r_scal.value, abs=1e-14)
    assert r_vec.fevals == r_scal.fevals


# --------------------------------------------------------------- semi-infinite

def test_semi_infinite_exponential():
    res = integrate_semi_infinite(lambda x: math.exp(-x), 0.0, QuadSpec())
    assert res.value == pytest.approx(1.0, abs=1e-9)
    assert res.converged
    assert res.truncation_upper is not None and res.truncation_upper > 0


def test_semi_infinite_gaussian():
    res = integrate_semi_infinite(lambda x: math.exp(-x * x), 0.0, QuadSpec())
    assert res.value == pytest.approx(math.sqrt(math.pi) / 2.0, abs=1e-9)


def test_semi_infinite_shifted_origin():
    res = integrate_semi_infinite(lambda x: math.exp(-(x - 2.0)), 2.0,
                                  QuadSpec())
    assert res.value == pytest.approx(1.0, abs=1e-9)


# -------------------------------------------------------------- serialization

def test_result_round_trip():
    res = QuadratureResult(value=1.25, error_estimate=1e-9, fevals=315,
                           subintervals=12, converged=True,
                           truncation_upper=400.0, warnings=("note",))
    back = QuadratureResult.from_dict(res.as_dict())
    assert back == res
