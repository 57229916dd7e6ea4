"""Two-precision facade: contexts, lifting, digit policy."""

import math
import threading

import pytest

from quadprice.precision import (DEFAULT_DIGITS, ENV_DIGITS, MAX_DIGITS,
                                 MIN_DIGITS, WORKING, bits_for_digits,
                                 check_digits, default_digits, eval_chain,
                                 extended)


def test_absorption_chain_loses_digits_in_working():
    # (0.1 + 1e9) - 1e9 shifts the addend 30 bits out of the mantissa
    got = eval_chain(WORKING)
    assert got != 0.1
    assert abs(got - 0.1) > 1e-8


def test_absorption_chain_exact_in_extended():
    got = eval_chain(extended(40))
    assert float(got) == 0.1


def test_lift_is_bit_exact_not_decimal():
    ctx = extended(32)
    lifted = ctx.lift(0.1)
    # the mpfr must hold the binary64 value, not the decimal 1/10
    assert float(lifted) == 0.1
    import gmpy2
    assert lifted != gmpy2.mpfr("0.1", ctx.bits)


def test_lift_rejects_non_finite():
    ctx = extended(32)
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError):
            ctx.lift(bad)
        with pytest.raises(ValueError):
            WORKING.lift(bad)


def test_lower_complex_round_trip():
    ctx = extended(32)
    z = complex(1.25, -0.5)
    assert ctx.lower_complex(ctx.lift_complex(z)) == z
    assert WORKING.lower_complex(WORKING.lift_complex(z)) == z


def test_check_digits_bounds():
    assert check_digits(MIN_DIGITS) == MIN_DIGITS
    assert check_digits(MAX_DIGITS) == MAX_DIGITS
    with pytest.raises(ValueError):
        check_digits(MIN_DIGITS - 1)
    with pytest.raises(ValueError):
        check_digits(MAX_DIGITS + 1)


def test_bits_for_digits():
    assert bits_for_digits(32) == math.ceil(32 * math.log2(10)) + 4
    assert bits_for_digits(20) > 64  # always more than binary64's mantissa


def test_default_digits_env(monkeypatch):
    monkeypatch.delenv(ENV_DIGITS, raising=False)
    assert default_digits() == DEFAULT_DIGITS
    monkeypatch.setenv(ENV_DIGITS, "48")
    assert default_digits() == 48
    monkeypatch.setenv(ENV_DIGITS, "not-a-number")
    with pytest.raises(ValueError):
        default_digits()
    monkeypatch.setenv(ENV_DIGITS, "10")
    with pytest.raises(ValueError):
        default_digits()
    monkeypatch.setenv(ENV_DIGITS, "")
    assert default_digits() == DEFAULT_DIGITS


def test_working_branch_behavior():
    assert WORKING.log(math.e) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        WORKING.log(0.0)
    assert WORKING.sqrt(-4.0) == 2j
    assert WORKING.sqrt(4.0) == 2.0


def test_extended_log_zero_raises():
    ctx = extended(32)
    ctx.activate()
    with pytest.raises(ValueError):
        ctx.log(ctx.lift(0.0))


def test_extended_sqrt_matches_working_at_float():
    ctx = extended(32)
    ctx.activate()
    assert float(ctx.sqrt(ctx.lift(2.0))) == math.sqrt(2.0)


def test_contexts_are_thread_isolated():
    # two threads at different digit counts must not corrupt each other
    results = {}

    def run(name, digits, reps):
        ctx = extended(digits)
        vals = set()
        for _ in range(reps):
            ctx.activate()
            vals.add(str(ctx.exp(ctx.lift(1.0))))
        results[name] = vals

    t1 = threading.Thread(target=run, args=("a", 32, 200))
    t2 = threading.Thread(target=run, args=("b", 64, 200))
    t1.start(); t2.start(); t1.join(); t2.join()
    assert len(results["a"]) == 1
    assert len(results["b"]) == 1
    assert results["a"] != results["b"]  # different precision, different repr
