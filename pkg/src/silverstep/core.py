"""Silver stepsize schedules and their normalized preimages.

The schedule for n = 2^k steps is assembled from a doubling recursion on
a pair of "normalized" values (y, z) in (0, 1], one pair per level. Each
level keeps three coupled representations: the pair itself, the
complement u = 1 - z, and log u. The complement is propagated by the
cancellation-free identity u_new = u^2 / (1 + y_new) rather than by
subtracting z from 1, because z approaches 1 doubly exponentially and a
plain subtraction would lose everything after a few dozen levels; log u
survives even after u itself underflows.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from ._numeric import context

__all__ = [
    "NormalizedPair",
    "SilverSchedule",
    "RateValue",
    "psi",
    "psi_inv",
    "normalized_step",
    "normalized_sequence",
    "build_schedule",
    "infinite_step",
    "occupation_measure",
    "silver_rate",
]


@dataclass(frozen=True)
class NormalizedPair:
    """One level of the normalized stepsize recursion.

    level 0 holds y = z = 1/kappa; level k corresponds to the 2^k-step
    schedule. u duplicates 1 - z in a cancellation-free representation
    and log_u stays finite after u underflows.
    """

    level: int
    y: float
    z: float
    u: float
    log_u: float


@dataclass(frozen=True)
class SilverSchedule:
    """A length-n stepsize schedule with its normalized preimages.

    steps[i] = psi(normalized[i]); 0-indexed storage.
    """

    kappa: float
    n: int
    steps: tuple
    normalized: tuple

    @property
    def level(self):
        return self.n.bit_length() - 1


@dataclass(frozen=True)
class RateValue:
    """Certified squared-distance contraction factor for n steps.

    tau may underflow to 0.0 for very deep schedules; log_tau is always
    finite and is the authoritative value there.
    """

    kappa: float
    n: int
    tau: float
    log_tau: float


def _check_kappa(kappa):
    if not kappa > 1:
        raise ValueError("kappa must be > 1")


def _check_pow2(n):
    if n < 1 or n & (n - 1):
        raise ValueError("n must be a power of 2")


def psi(t, kappa):
    """Map a normalized value in [0, 1] to a stepsize in [1, (1+kappa)/2]."""
    if t < 0:
        raise ValueError("psi requires t >= 0")
    return (1 + kappa * t) / (1 + t)


def psi_inv(s, kappa):
    """Inverse of psi on [1, kappa)."""
    if not 1 <= s < kappa:
        raise ValueError("psi_inv requires 1 <= s < kappa")
    return (s - 1) / (kappa - s)


def normalized_step(prev):
    """Advance the (y, z) pair one doubling level.

    The multiplier xi + sqrt(1 + xi^2) with xi = 1 - prev.z sends z to
    z*mult and y to z/mult; both defining relations y*z = prev.z^2 and
    z - y = 2(prev.z - prev.z^2) follow. z is rebuilt as 1 - u from the
    stable complement update, not as z*mult.
    """
    if isinstance(prev.z, float):
        hypot, log1p = math.hypot, math.log1p
    else:
        hypot, log1p = mpmath.hypot, mpmath.log1p
    z, u = prev.z, prev.u
    if not 0 < z <= 1:
        raise ValueError("normalized_step requires z in (0, 1]")
    mult = u + hypot(1, u)
    y_new = z / mult
    u_new = u * u / (1 + y_new)
    z_new = 1 - u_new
    log_u_new = 2 * prev.log_u - log1p(y_new)
    return NormalizedPair(prev.level + 1, y_new, z_new, u_new, log_u_new)


def normalized_sequence(kappa, levels, bits=None):
    """Pairs for levels 0..levels; element 0 is (1/kappa, 1/kappa)."""
    _check_kappa(kappa)
    if levels < 0:
        raise ValueError("levels must be >= 0")
    ctx = context(bits)
    with ctx.guard():
        k = ctx.number(kappa)
        y0 = 1 / k
        u0 = (k - 1) / k
        pair = NormalizedPair(0, y0, y0, u0, ctx.log(u0))
        out = [pair]
        for _ in range(levels):
            pair = normalized_step(pair)
            out.append(pair)
    return out


def build_schedule(kappa, n, bits=None):
    """Construct the n-step schedule, n a power of 2.

    h(1) = [psi(1/kappa)]; h(2m) = [h(m) minus its last step, psi(y_2m),
    h(m) minus its last step, psi(z_2m)]. The shared prefix is copied,
    not recomputed, so prefixes of deeper schedules are bit-identical.
    """
    _check_kappa(kappa)
    _check_pow2(n)
    pairs = normalized_sequence(kappa, n.bit_length() - 1, bits=bits)
    ctx = context(bits)
    with ctx.guard():
        k = ctx.number(kappa)
        norm = [pairs[0].z]
        steps = [psi(pairs[0].z, k)]
        for pair in pairs[1:]:
            norm = norm[:-1] + [pair.y] + norm[:-1] + [pair.z]
            steps = steps[:-1] + [psi(pair.y, k)] + steps[:-1] + [psi(pair.z, k)]
    return SilverSchedule(kappa, n, tuple(steps), tuple(norm))


def infinite_step(i, kappa, bits=None):
    """Step i (1-indexed) of the horizon-free schedule.

    Position i carries the symbol a_{2*lowbit(i)}, so entries 1..n-1
    agree with build_schedule(kappa, n) for every power of 2.
    """
    if i < 1:
        raise ValueError("i must be >= 1")
    _check_kappa(kappa)
    lowbit = i & -i
    level = lowbit.bit_length()  # a_{2*lowbit} lives at this level
    pairs = normalized_sequence(kappa, level, bits=bits)
    ctx = context(bits)
    with ctx.guard():
        return psi(pairs[level].y, ctx.number(kappa))


def occupation_measure(n):
    """Exact fraction of schedule positions held by each step symbol.

    a_{2^i} occupies 2^{-i} of the n positions; the closing step b_n
    occupies 1/n. Fractions sum to exactly 1.
    """
    _check_pow2(n)
    if n < 2:
        raise ValueError("occupation measure needs n >= 2")
    out = {}
    size = 2
    while size <= n:
        out[f"a_{size}"] = Fraction(1, size)  # a_{2^i} fills 2^{-i} of positions
        size *= 2
    out[f"b_{n}"] = Fraction(1, n)
    assert sum(out.values()) == 1
    return out


def silver_rate(kappa, n, bits=None):
    """tau_n = ((1 - z_n)/(1 + z_n))^2, with a log-space companion."""
    _check_kappa(kappa)
    _check_pow2(n)
    pair = normalized_sequence(kappa, n.bit_length() - 1, bits=bits)[-1]
    ctx = context(bits)
    with ctx.guard():
        log_tau = 2 * (pair.log_u - ctx.log(2 - pair.u))
        ratio = pair.u / (2 - pair.u)
        tau = ratio * ratio
    return RateValue(kappa, n, ctx.to_float(tau), ctx.to_float(log_tau))
