import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from silverstep.core import (
    build_schedule,
    infinite_step,
    normalized_sequence,
    occupation_measure,
    psi,
    psi_inv,
    silver_rate,
)

# frozen reference values, computed independently from the two-level
# recursion in exact/high-precision arithmetic
H4_K4 = (1.3333333333333333, 1.7082039324993692, 1.3333333333333333, 2.3416407864998741)
Z4_K4 = (0.125, 0.3090169943749474, 0.125, 0.80901699437494745)
INF8_K4 = (
    1.3333333333333333,
    1.7082039324993692,
    1.3333333333333333,
    2.2026571266676491,
    1.3333333333333333,
    1.7082039324993692,
    1.3333333333333333,
    2.4670462833217419,
)
TAU4_K4 = 0.011145618000168242
Y2_K10 = 0.0445362404707371
Z2_K10 = 0.22453624047073695


def test_psi_closed_values():
    assert psi(0.25, 4.0) == pytest.approx(1.6, abs=0)
    assert psi(0.5, 4.0) == pytest.approx(2.0, abs=0)
    # steady growth: psi maps (0, 1) into (1, kappa)
    assert 1 < psi(1e-9, 4.0) < psi(1 - 1e-9, 4.0) < 4


@given(
    st.floats(1.01, 1e6),  # inversion conditioning degrades like 1/(kappa-1)
    st.floats(1e-12, 1.0 - 1e-12),
)
def test_psi_inverse_roundtrip(kappa, t):
    s = psi(t, kappa)
    assert psi_inv(s, kappa) == pytest.approx(t, rel=1e-9)


def test_pair_recursion_base():
    pairs = normalized_sequence(4.0, 0)
    assert pairs[0].y == 0.25 and pairs[0].z == 0.25


def test_pair_recursion_kappa4():
    pairs = normalized_sequence(4.0, 2)
    assert pairs[1].y == pytest.approx(0.125, abs=1e-15)
    assert pairs[1].z == pytest.approx(0.5, abs=1e-15)
    assert pairs[2].y == pytest.approx(0.3090169943749474, abs=1e-15)
    assert pairs[2].z == pytest.approx(0.80901699437494745, abs=1e-15)


def test_pair_recursion_kappa10():
    p = normalized_sequence(10.0, 1)[1]
    assert p.y == pytest.approx(Y2_K10, rel=1e-15)
    assert p.z == pytest.approx(Z2_K10, rel=1e-15)


@given(st.floats(1.01, 1e4), st.integers(1, 8))
@settings(max_examples=60)
def test_pair_invariants(kappa, levels):
    # y' z' = z^2 and z' - y' = 2 z (1 - z) hold at every doubling
    pairs = normalized_sequence(kappa, levels)
    for prev, cur in zip(pairs, pairs[1:]):
        assert cur.y * cur.z == pytest.approx(prev.z**2, rel=1e-12)
        assert cur.z - cur.y == pytest.approx(2 * prev.z * (1 - prev.z), rel=1e-12)
        assert cur.u == pytest.approx(1 - cur.z, rel=1e-9)


def test_schedule_frozen_kappa4():
    s = build_schedule(4.0, 4)
    assert s.steps == pytest.approx(H4_K4, rel=1e-15)
    assert s.normalized == pytest.approx(Z4_K4, rel=1e-15)
    assert build_schedule(4.0, 1).steps == (1.6,)
    assert build_schedule(4.0, 2).steps == pytest.approx((4 / 3, 2.0), rel=1e-15)


def test_first_pair_step_closed_form_is_kappa4_only():
    # kappa/(kappa-1) matches psi(y_2) at kappa=4 and only there
    assert build_schedule(4.0, 2).steps[0] == pytest.approx(4 / 3, rel=1e-15)
    a2_k10 = build_schedule(10.0, 2).steps[0]
    assert a2_k10 == pytest.approx(1.3837360052304124, rel=1e-14)
    assert abs(a2_k10 - 10 / 9) > 0.2


def test_schedule_prefix_property():
    # the first n-1 entries are shared with every longer schedule, bit for bit
    for kappa in (1.5, 4.0, 37.0):
        for n in (2, 4, 8, 16):
            short = build_schedule(kappa, n).steps
            long = build_schedule(kappa, 2 * n).steps
            assert long[: n - 1] == short[: n - 1]


def test_infinite_schedule_prefix():
    got = tuple(infinite_step(i, 4.0) for i in range(1, 9))
    assert got == pytest.approx(INF8_K4, rel=1e-15)
    # finite schedules agree with the infinite one except at the closer
    fin = build_schedule(4.0, 8).steps
    assert fin[:7] == pytest.approx(got[:7], rel=1e-15)
    assert fin[7] > got[7] > 0


def test_infinite_step_validates():
    with pytest.raises(ValueError):
        infinite_step(0, 4.0)


def test_occupation_measure_exact():
    occ = occupation_measure(8)
    assert occ == {
        "a_2": Fraction(1, 2),
        "a_4": Fraction(1, 4),
        "a_8": Fraction(1, 8),
        "b_8": Fraction(1, 8),
    }
    assert sum(occ.values()) == 1
    with pytest.raises(ValueError):
        occupation_measure(1)


def test_silver_rate_frozen():
    assert silver_rate(4.0, 1).tau == pytest.approx(0.36, rel=1e-15)
    assert silver_rate(4.0, 2).tau == pytest.approx(1 / 9, rel=1e-15)
    assert silver_rate(4.0, 4).tau == pytest.approx(TAU4_K4, rel=1e-15)


def test_silver_rate_deep_log():
    # at n = 1024 the rate is far below double range; the log channel
    # carries it. Reference via 256-bit arithmetic.
    rv = silver_rate(10.0, 1024, bits=256)
    assert rv.log_tau / math.log(10) == pytest.approx(-227.2933062003361, rel=1e-12)


def test_silver_rate_log_matches_tau_when_representable():
    for kappa in (1.5, 4.0, 100.0):
        for n in (1, 2, 8, 32):
            rv = silver_rate(kappa, n)
            assert math.log(rv.tau) == pytest.approx(rv.log_tau, rel=1e-12)


def test_mp_bits_agree_with_double():
    a = build_schedule(4.0, 16).steps
    b = build_schedule(4.0, 16, bits=192).steps
    for x, y in zip(a, b):
        assert float(y) == pytest.approx(x, rel=1e-14)
    assert isinstance(b[0], mpmath.mpf)


def test_validation_messages():
    with pytest.raises(ValueError, match="power of 2"):
        build_schedule(4.0, 3)
    with pytest.raises(ValueError, match="kappa must be > 1"):
        build_schedule(1.0, 4)
    with pytest.raises(ValueError, match="kappa must be > 1"):
        silver_rate(0.5, 4)
