import math

import numpy as np
import pytest

from silverstep.core import silver_rate
from silverstep.gdlab import (
    FunctionOracle,
    adversarial_probe,
    contraction,
    curvature_switch_oracle,
    hard_instances,
    quadratic_oracle,
    run_gd,
)


def test_quadratic_oracle_validation():
    with pytest.raises(ValueError, match="nonempty list of positive"):
        quadratic_oracle([])
    with pytest.raises(ValueError, match="nonempty list of positive"):
        quadratic_oracle([-1.0])
    with pytest.raises(ValueError, match="within"):
        quadratic_oracle([0.5], m=0.6, M=1.0)


def test_quadratic_oracle_rotated_spectrum():
    spectrum = [0.25, 0.5, 1.0]
    oracle = quadratic_oracle(spectrum, seed=3)
    assert oracle.description == "quad:d=3:seed=3"
    # recover the hessian column by column from the linear gradient
    hess = np.column_stack([oracle.grad(e) for e in np.eye(3)])
    assert np.allclose(hess, hess.T, atol=1e-12)
    assert np.allclose(np.linalg.eigvalsh(hess), spectrum, atol=1e-12)
    x = np.array([0.3, -1.2, 0.7])
    assert oracle.value(x) == pytest.approx(0.5 * x @ hess @ x, rel=1e-12)


def test_switch_oracle_validation():
    with pytest.raises(ValueError, match="nonempty"):
        curvature_switch_oracle([], 0.25, 1.0)
    with pytest.raises(ValueError, match="strictly increasing"):
        curvature_switch_oracle([(0.5, 1.0), (0.2, 0.25)], 0.25, 1.0)
    with pytest.raises(ValueError, match="must be m or M"):
        curvature_switch_oracle([(0.0, 0.7)], 0.25, 1.0)


def test_switch_oracle_continuity():
    m, M = 0.25, 1.0
    oracle = curvature_switch_oracle([(-0.5, M), (0.3, m)], m, M)
    assert oracle.grad(np.array([0.0]))[0] == 0.0
    assert oracle.value(np.array([0.0])) == 0.0
    eps = 1e-9
    for knot in (-0.5, 0.3):
        g_lo = oracle.grad(np.array([knot - eps]))[0]
        g_hi = oracle.grad(np.array([knot + eps]))[0]
        assert g_lo == pytest.approx(g_hi, abs=3e-9)
        v_lo = oracle.value(np.array([knot - eps]))
        v_hi = oracle.value(np.array([knot + eps]))
        assert v_lo == pytest.approx(v_hi, abs=3e-9)
    # curvature = second difference, checked inside each piece
    for x, want in ((-1.0, m), (-0.2, M), (1.0, m)):
        d = 1e-5
        g1 = oracle.grad(np.array([x + d]))[0]
        g0 = oracle.grad(np.array([x]))[0]
        assert (g1 - g0) / d == pytest.approx(want, rel=1e-6)


def test_switch_oracle_single_piece():
    oracle = curvature_switch_oracle([(-math.inf, 1.0)], 0.25, 1.0)
    x = np.array([-2.7])
    assert oracle.grad(x)[0] == pytest.approx(-2.7, rel=1e-15)
    assert oracle.value(x) == pytest.approx(0.5 * 2.7**2, rel=1e-15)


def test_run_gd_exact_trajectory():
    oracle = quadratic_oracle([1.0])
    traj = run_gd(oracle, np.array([1.0]), [4 / 3, 2.0])
    assert [float(x[0]) for x in traj.xs] == pytest.approx([1.0, -1 / 3, 1 / 3], rel=1e-15)
    assert contraction(traj) == pytest.approx(1 / 9, rel=1e-14)
    assert traj.fs[0] == pytest.approx(0.5, rel=1e-15)
    assert traj.f_min == 0.0


def test_run_gd_validation():
    oracle = quadratic_oracle([1.0])
    with pytest.raises(ValueError, match="nonempty"):
        run_gd(oracle, np.array([1.0]), [])
    bad = FunctionOracle(
        value=lambda x: math.inf,
        grad=lambda x: np.asarray(x),
        minimizer=np.zeros(1),
        m=0.25,
        M=1.0,
        description="bad",
    )
    with pytest.raises(ValueError, match="non-finite"):
        run_gd(bad, np.array([1.0]), [1.0])


def test_contraction_zero_distance():
    oracle = quadratic_oracle([1.0])
    traj = run_gd(oracle, np.array([0.0]), [1.0])
    with pytest.raises(ValueError, match="coincides"):
        contraction(traj)


def test_hard_instances_contractions():
    """All four pinned instances contract by exactly tau_2 = 1/9 or better
    under the optimal two-step pair at kappa=4, with the worst three tight."""
    m, M, alpha, beta = 0.25, 1.0, 4 / 3, 2.0
    want = (1 / 9, 1 / 9, 1 / 36, 1 / 9)
    for oracle, expected in zip(hard_instances(m, M, alpha), want):
        traj = run_gd(oracle, np.ones(len(oracle.minimizer)), [alpha, beta])
        assert contraction(traj) == pytest.approx(expected, rel=1e-12), oracle.description


def test_hard_instance_kink_landing():
    m, M, alpha = 0.25, 1.0, 4 / 3
    oracle = hard_instances(m, M, alpha)[3]
    traj = run_gd(oracle, np.array([1.0]), [alpha, 2.0])
    s0 = (1 - m * alpha) / (1 + alpha * (M - m))
    assert float(traj.xs[1][0]) == pytest.approx(s0, rel=1e-14)


def test_worst_quadratic_lambda_frozen():
    from silverstep.gdlab import _worst_quadratic_lambda

    assert _worst_quadratic_lambda([1.5], 0.25, 1.0) == pytest.approx(0.25, rel=1e-12)
    assert _worst_quadratic_lambda([4 / 3, 2.0], 0.25, 1.0) == pytest.approx(1.0, rel=1e-12)


def test_adversarial_probe_baseline_hits_rate():
    # at kappa=4 the worst plain quadratic attains the certified rate
    rep = adversarial_probe(4.0, 4, budget=0)
    assert rep.tau_n == pytest.approx(silver_rate(4.0, 4).tau, rel=1e-15)
    assert rep.slack == pytest.approx(0.0, abs=1e-15)
    assert rep.schedule_id == "silver:kappa=4:n=4"


def test_adversarial_probe_never_beats_rate():
    for n in (2, 8):
        rep = adversarial_probe(10.0, n, budget=200, seed=1)
        assert rep.contraction <= rep.tau_n * (1 + 1e-10)


def test_adversarial_probe_deterministic():
    a = adversarial_probe(4.0, 4, budget=150, seed=7)
    b = adversarial_probe(4.0, 4, budget=150, seed=7)
    assert a == b


def test_adversarial_probe_custom_schedule():
    rep = adversarial_probe(4.0, 3, schedule=[1.0, 1.0, 1.0], budget=0)
    assert rep.schedule_id == "custom:kappa=4:n=3"
    assert math.isnan(rep.tau_n)
    with pytest.raises(ValueError, match=">= 0"):
        adversarial_probe(4.0, 2, budget=-1)
