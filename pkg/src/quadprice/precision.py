"""Two-precision arithmetic facade.

Every formula downstream is written once against this interface and runs
either in native binary64 ("working") or in arbitrary-precision arithmetic
("extended", a configurable number of significant decimal digits, 32 by
default). Extended mode is backed by MPFR/MPC through gmpy2, whose
elementary functions are correctly rounded, comfortably inside the 2 ulp
budget the rest of the package assumes.

Floats are lifted bit-exactly (the mpfr is built from the binary64 bits,
never from a decimal string), so the working and extended pipelines consume
identical inputs. That is what makes cross-precision error measurements
meaningful: lift(0.1) is the binary rational 0.1000000000000000055511151...,
not the decimal 1/10.
"""

from __future__ import annotations

import cmath
import math
import os

import gmpy2

DEFAULT_DIGITS = 32
MIN_DIGITS = 20
MAX_DIGITS = 256

ENV_DIGITS = "QUADPRICE_DIGITS"


def bits_for_digits(digits: int) -> int:
    """Mantissa size in bits covering `digits` decimal digits, plus guard bits."""
    return int(math.ceil(digits * math.log2(10))) + 4


def check_digits(digits: int) -> int:
    digits = int(digits)
    if not MIN_DIGITS <= digits <= MAX_DIGITS:
        raise ValueError(
            f"extended digits must lie in [{MIN_DIGITS}, {MAX_DIGITS}], got {digits}"
        )
    return digits


def default_digits() -> int:
    """Digit count used when none is given; QUADPRICE_DIGITS overrides 32."""
    raw = os.environ.get(ENV_DIGITS)
    if raw is None or raw.strip() == "":
        return DEFAULT_DIGITS
    try:
        digits = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_DIGITS} must be an integer, got {raw!r}") from None
    return check_digits(digits)


def _require_finite(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"cannot lift non-finite value {x!r}")
    return x


class WorkingContext:
    """binary64 arithmetic; lift and lower are identities on IEEE doubles."""

    digits = None
    is_extended = False

    def activate(self) -> "WorkingContext":
        # nothing to install; plain float/complex ops are already binary64
        return self

    def lift(self, x) -> float:
        return _require_finite(float(x))

    def lift_complex(self, z) -> complex:
        z = complex(z)
        _require_finite(z.real)
        _require_finite(z.imag)
        return z

    def lower(self, x) -> float:
        return float(x)

    def lower_complex(self, z) -> complex:
        return complex(z)

    def make_complex(self, re, im=0.0) -> complex:
        return complex(float(re), float(im))

    def exp(self, z):
        return cmath.exp(z) if isinstance(z, complex) else math.exp(z)

    def log(self, z):
        if isinstance(z, complex):
            if z == 0:
                raise ValueError("log(0) is undefined")
            return cmath.log(z)
        z = float(z)
        if z > 0.0:
            return math.log(z)
        if z == 0.0:
            raise ValueError("log(0) is undefined")
        return cmath.log(complex(z))

    def sqrt(self, z):
        if isinstance(z, complex):
            return cmath.sqrt(z)
        z = float(z)
        return math.sqrt(z) if z >= 0.0 else cmath.sqrt(complex(z))

    def __repr__(self):
        return "WorkingContext(binary64)"


class ExtendedContext:
    """MPFR/MPC arithmetic at a fixed decimal digit count.

    Plain arithmetic operators on lifted values round to the thread's active
    gmpy2 context, so every formula evaluation must call activate() first.
    The context object itself is immutable; activate() installs a copy as the
    calling thread's active context, so concurrent threads do not interfere.
    """

    is_extended = True

    def __init__(self, digits: int | None = None):
        if digits is None:
            digits = default_digits()
        self.digits = check_digits(digits)
        self.bits = bits_for_digits(self.digits)
        self._gctx = gmpy2.context(precision=self.bits, allow_complex=True)

    def activate(self) -> "ExtendedContext":
        gmpy2.set_context(self._gctx.copy())
        return self

    def lift(self, x):
        if isinstance(x, gmpy2.mpfr):
            if not gmpy2.is_finite(x):
                raise ValueError(f"cannot lift non-finite value {x!r}")
            return gmpy2.mpfr(x, self.bits)
        # mpfr(float) at >= 53 bits is exact: the binary64 bits are preserved
        return gmpy2.mpfr(_require_finite(float(x)), self.bits)

    def lift_complex(self, z):
        if isinstance(z, gmpy2.mpc):
            if not gmpy2.is_finite(z):
                raise ValueError(f"cannot lift non-finite value {z!r}")
            return gmpy2.mpc(z.real, z.imag, precision=self.bits)
        z = complex(z)
        _require_finite(z.real)
        _require_finite(z.imag)
        return gmpy2.mpc(z.real, z.imag, precision=self.bits)

    def lower(self, x) -> float:
        return float(x)

    def lower_complex(self, z) -> complex:
        if isinstance(z, gmpy2.mpc):
            return complex(float(z.real), float(z.imag))
        return complex(float(z), 0.0)

    def make_complex(self, re, im=0):
        return gmpy2.mpc(re, im, precision=self.bits)

    def exp(self, z):
        return self._gctx.exp(z)

    def log(self, z):
        if z == 0:
            raise ValueError("log(0) is undefined")
        return self._gctx.log(z)

    def sqrt(self, z):
        return self._gctx.sqrt(z)

    def __repr__(self):
        return f"ExtendedContext({self.digits} digits, {self.bits} bits)"


WORKING = WorkingContext()


def extended(digits: int | None = None) -> ExtendedContext:
    """An extended context at `digits` significant decimal digits (default 32)."""
    return ExtendedContext(digits)


def eval_chain(ctx, x: float = 0.1):
    """(x + 1e9) - 1e9 evaluated at ctx precision.

    The classic absorption self-test: in binary64 the small addend is
    shifted 30 bits against 1e9 and comes back as 0.100000023841858...;
    with ~30+ digits the chain is exact and returns lift(x) unchanged.
    Returns the ctx-native value (not lowered) so callers can inspect the
    full-precision result.
    """
    ctx.activate()
    xl = ctx.lift(x)
    big = ctx.lift(1e9)
    return (xl + big) - big
