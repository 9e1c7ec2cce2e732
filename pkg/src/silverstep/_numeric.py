"""Precision contexts shared by the schedule and certificate builders.

Double precision is the default everywhere. Deep doubling levels push
1 - z below the point where binary64 rounding swamps the certificate
algebra (several denominators scale like powers of 1 - z), so builders
escalate to mpmath software floats once 1 - z crosses a threshold.
"""

import contextlib
import math

import mpmath

# Escalate once 1 - z_n drops below this.
ESCALATION_THRESHOLD = 1e-8
ESCALATION_BITS = 128


class FloatContext:
    """Plain IEEE binary64 arithmetic via the math module."""

    bits = None

    def guard(self):
        return contextlib.nullcontext()

    @staticmethod
    def number(x):
        return float(x)

    sqrt = staticmethod(math.sqrt)
    log = staticmethod(math.log)
    log1p = staticmethod(math.log1p)
    exp = staticmethod(math.exp)
    hypot = staticmethod(math.hypot)

    @staticmethod
    def to_float(x):
        return x


class MPContext:
    """mpmath arithmetic at a fixed mantissa width.

    Arithmetic operators between mpf values round at the *global* mpmath
    precision, so whole computations must run inside guard(); the
    individual function wrappers assume the caller did that.
    """

    def __init__(self, bits):
        if bits < 53:
            raise ValueError("bits must be >= 53")
        self.bits = int(bits)

    def guard(self):
        return mpmath.workprec(self.bits)

    def number(self, x):
        with mpmath.workprec(self.bits):
            return mpmath.mpf(x)

    sqrt = staticmethod(mpmath.sqrt)
    log = staticmethod(mpmath.log)
    log1p = staticmethod(mpmath.log1p)
    exp = staticmethod(mpmath.exp)
    hypot = staticmethod(mpmath.hypot)

    @staticmethod
    def to_float(x):
        return float(x)


def context(bits=None):
    """Return the arithmetic context for a mantissa width (None = binary64)."""
    if bits is None:
        return FloatContext()
    return MPContext(bits)
