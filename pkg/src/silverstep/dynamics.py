"""One-step dynamics of the stepsize recursion in h-coordinates.

The doubling recursion on normalized pairs becomes, after the change of
variables h = 2z/(1+z), a scalar fixed-point iteration h -> H(h) on
(0, 1). Near 0 the map multiplies by rho = 1 + sqrt(2) (acceleration);
near 1 the gap 1 - h squares each step (saturation). Everything here
evaluates H and its two-sided Taylor bounds in forms that stay accurate
at both ends of the interval.
"""

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .core import _check_kappa, _check_pow2, normalized_sequence

__all__ = [
    "RHO",
    "NU",
    "LOG2_RHO",
    "TaylorReport",
    "PhaseReport",
    "HTrace",
    "MonotonicitySlack",
    "h_update",
    "one_minus_h_update",
    "check_taylor_bounds",
    "phase_transition",
    "rate_envelope",
    "rate_envelope_log",
    "rate_monotonicity_check",
    "cobweb_trace",
]

RHO = 1 + math.sqrt(2)  # multiplier of H at the origin
NU = 3 * RHO / (2 * math.sqrt(2))  # quadratic correction coefficient
LOG2_RHO = math.log2(RHO)  # exponent of the accelerated rate, ~1.2716


def _sqrt_for(x):
    return math.sqrt if isinstance(x, float) else mpmath.sqrt


def h_update(h, strict=True):
    """Apply the one-step map H(h) = h(2 - 3h + sqrt(5h^2 - 12h + 8)) / (2(1 - h^2)).

    strict mode rejects the boundary fixed points 0 and 1; permissive
    mode returns them unchanged.
    """
    if not 0 <= h <= 1:
        raise ValueError("h must lie in [0, 1]")
    if h == 0 or h == 1:
        if strict:
            raise ValueError("h_update requires 0 < h < 1 in strict mode")
        return h
    if h > 0.5:
        # the direct formula divides vanishing quantities near h = 1;
        # 1 - h is exact here, so route through the complement form
        return 1 - one_minus_h_update(1 - h)
    sqrt = _sqrt_for(h)
    disc = (5 * h - 12) * h + 8  # discriminant is positive on all of [0, 1]
    return h * (2 - 3 * h + sqrt(disc)) / (2 * (1 - h * h))


def one_minus_h_update(s):
    """1 - H(1 - s), rearranged so no subtraction of near-equal terms occurs.

    Direct evaluation of 1 - H loses all precision once s is tiny; this
    form is an exact algebraic rewrite with value 2s^2 / W1 where
    W1 = s^2 + 1 + (1 - s) sqrt(1 + 2s + 5s^2).
    """
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    sqrt = _sqrt_for(s)
    t = sqrt(1 + s * (2 + 5 * s))
    w1 = s * s + 1 + (1 - s) * t
    return 2 * s * s / w1


@dataclass(frozen=True)
class TaylorReport:
    """Margins of the four two-sided bounds on H over a grid.

    Each margin is evaluated through an exact rearrangement whose value
    is a product of individually computable factors, so a reported
    negative margin is a genuine violation and not roundoff. min_margins
    maps bound name to the smallest margin seen; violations lists
    (name, h, margin) triples with margin < 0.
    """

    count: int
    min_margins: dict
    violations: tuple

    @property
    def ok(self):
        return not self.violations


def check_taylor_bounds(grid):
    """Check rho*h - nu*h^2 <= H(h) <= rho*h and s^2 - s^4 <= 1 - H <= s^2, s = 1 - h.

    grid: iterable of points in (0, 1). Margins come from cancellation
    free rewrites of the four differences (verified elsewhere to agree
    with direct evaluation); all four are positive on the open interval.
    """
    h = np.asarray(list(grid), dtype=float)
    if h.size and not ((h > 0).all() and (h < 1).all()):
        raise ValueError("grid points must lie in (0, 1)")
    r2 = math.sqrt(2)
    sqrt_d = np.sqrt((5 * h - 12) * h + 8)

    # rho*h - H = h^2 (12 rho - (12 + 8 sqrt2) h) / (2 (G + sqrt(D)))
    g = 2 * r2 + 3 * h - 2 * RHO * h * h
    acc_upper = h * h * (12 * RHO - (12 + 8 * r2) * h) / (2 * (g + sqrt_d))

    # H - (rho*h - nu*h^2) = h^3 R2 / (2 (sqrt(D) + K))
    k = 2 * r2 - (3 * r2 / 2) * h - 2 * RHO * h**2 + (3 + 3 * r2 / 2) * h**3
    r2_poly = (13.5 + 9 * r2) * h * h - (24 + 18 * r2) * h + (16.5 + 8 * r2)
    acc_lower = h**3 * r2_poly / (2 * (sqrt_d + k))

    s = 1 - h
    t = np.sqrt(1 + s * (2 + 5 * s))
    # 1 - s is written as h throughout: reconstructing it from the
    # rounded s would cost ~ulp(1)/h relative error for h near 0
    w1 = s * s + 1 + h * t
    w2 = 1 + s**4 + h * h * (1 + s) * t

    # s^2 - (1 - H) = 4 s^4 (1 - s) / (W1 (T + 1 + s))
    sat_upper = 4 * s**4 * h / (w1 * (t + 1 + s))

    # (1 - H) - (s^2 - s^4) = 4 s^5 (2 - 4s^2 + 2s^3 + 2s^4 - s^5) / (W1 W2)
    inner = 2 + s * s * (-4 + s * (2 + s * (2 - s)))
    sat_lower = 4 * s**5 * inner / (w1 * w2)

    margins = {
        "accel_upper": acc_upper,
        "accel_lower": acc_lower,
        "sat_upper": sat_upper,
        "sat_lower": sat_lower,
    }
    violations = []
    mins = {}
    for name, m in margins.items():
        if h.size == 0:
            mins[name] = math.inf
            continue
        i = int(np.argmin(m))
        mins[name] = float(m[i])
        bad = np.nonzero(m < 0)[0]
        violations.extend((name, float(h[j]), float(m[j])) for j in bad)
    return TaylorReport(count=int(h.size), min_margins=mins, violations=tuple(violations))


@dataclass(frozen=True)
class PhaseReport:
    """Location of the acceleration-to-saturation transition."""

    kappa: float
    i_star: int
    n_star: int

    def regime(self, n):
        return "acceleration" if n <= self.n_star else "saturation"


def phase_transition(kappa):
    """i* = floor(log_rho(kappa/3)) clamped at 0; n* = 2^i*.

    For kappa <= 3 the formula goes negative; saturation is immediate
    and the transition is pinned to n* = 1.
    """
    _check_kappa(kappa)
    i_star = max(0, math.floor(math.log(kappa / 3) / math.log(RHO)))
    return PhaseReport(kappa=kappa, i_star=i_star, n_star=2**i_star)


def rate_envelope_log(kappa, n):
    """(log lower, log upper, regime) for the n-step rate tau_n.

    Acceleration (n <= n*): exp(-8 n^p / kappa) <= tau <= exp(-n^p / kappa)
    with p = LOG2_RHO. Saturation (n > n*): the upper bound continues
    geometrically from the transition, exp(-(n/n*) (n*)^p / kappa); the
    lower bound is the matching geometric continuation of the
    acceleration floor through the point (n*, L*) with a factor-16
    headroom, 16 (L*/16)^(n/n*) where L* = exp(-8 (n*)^p / kappa).
    """
    _check_kappa(kappa)
    _check_pow2(n)
    n_star = phase_transition(kappa).n_star
    if n <= n_star:
        base = n**LOG2_RHO / kappa
        return (-8 * base, -base, "acceleration")
    base = n_star**LOG2_RHO / kappa
    ratio = n / n_star
    log16 = math.log(16)
    return (log16 + ratio * (-8 * base - log16), -ratio * base, "saturation")


def rate_envelope(kappa, n):
    """Two-sided envelope (lower, upper) with lower <= tau_n <= upper."""
    lo, up, _ = rate_envelope_log(kappa, n)
    return (math.exp(lo), math.exp(up))


@dataclass(frozen=True)
class MonotonicitySlack:
    """One doubling step of the rate monotonicity check.

    log_slack = 2 log tau_{n/2} - log tau_n, the amount by which
    squaring the half-horizon rate overestimates the full rate. The
    exact rearrangement 2 log1p(2 y u / (2 - u_half)^2) is nonnegative
    by construction, so monotonicity can never be lost to cancellation.
    """

    level: int
    n: int
    log_slack: float


def rate_monotonicity_check(kappa, max_level, bits=None):
    """Verify tau_{2m} <= tau_m^2 for m = 2^0 .. 2^(max_level-1).

    Returns one MonotonicitySlack per doubling. The slack is computed
    from the normalized pairs directly: with u = 1 - z at the doubled
    level and u_half one level up,
    2 log tau_m - log tau_{2m} = 2 log((1 + y)(2 - u) / (2 - u_half)^2)
    and the argument equals 1 + 2 y u / (2 - u_half)^2 exactly.
    """
    _check_kappa(kappa)
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    pairs = normalized_sequence(kappa, max_level, bits=bits)
    log1p = math.log1p if isinstance(pairs[0].u, float) else mpmath.log1p
    out = []
    for lvl in range(1, max_level + 1):
        half, full = pairs[lvl - 1], pairs[lvl]
        denom = (2 - half.u) ** 2
        slack = 2 * log1p(2 * full.y * full.u / denom)
        if slack < 0:
            raise AssertionError(
                f"rate monotonicity violated at level {lvl}: slack {slack}"
            )
        out.append(MonotonicitySlack(level=lvl, n=2**lvl, log_slack=float(slack)))
    return out


@dataclass(frozen=True)
class HTrace:
    """Iterates of H from h_0 = 2/(1+kappa), for cobweb plots.

    hs[i] is the i-th iterate; one_minus_hs carries the same trajectory
    in the stable complement so (1 - h_i)^2 stays meaningful after h_i
    rounds to 1.
    """

    kappa: float
    hs: tuple
    one_minus_hs: tuple

    @property
    def pairs(self):
        """(h_i, H(h_i)) pairs, the segments a cobweb diagram draws."""
        return tuple(zip(self.hs[:-1], self.hs[1:]))


def cobweb_trace(kappa, iters):
    """Iterate h -> H(h) for iters steps starting at h_0 = 2/(1+kappa)."""
    _check_kappa(kappa)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    s = (kappa - 1) / (kappa + 1)  # complement of h_0, exact to rounding
    ss = [s]
    for _ in range(iters):
        s = one_minus_h_update(s)
        ss.append(s)
    return HTrace(
        kappa=kappa,
        hs=tuple(1 - v for v in ss),
        one_minus_hs=tuple(ss),
    )
