"""Gradient descent runs on instrumented oracles, with worst-case probing.

Oracles carry analytic value/gradient and their curvature window
[m, M]. The 1-D piecewise-quadratic family (curvature m or M on each
interval, gradient zero at the origin) contains the explicit instances
that make any two-step schedule pay its lower-bound floor, and the
adversarial probe searches this family plus random quadratics for the
worst contraction a schedule admits.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import silver_rate

__all__ = [
    "FunctionOracle",
    "TrajectoryData",
    "RunReport",
    "run_gd",
    "quadratic_oracle",
    "curvature_switch_oracle",
    "hard_instances",
    "contraction",
    "adversarial_probe",
]


@dataclass(frozen=True)
class FunctionOracle:
    """Differentiable test function with known minimizer and curvature range."""

    value: object  # callable x -> scalar
    grad: object  # callable x -> vector
    minimizer: np.ndarray
    m: float
    M: float
    description: str


@dataclass(frozen=True)
class TrajectoryData:
    """Iterates, gradients, and values of one gradient descent run.

    Arrays have n+1 rows: the starting point, every intermediate
    iterate, and the final point. The minimizer rides along so distance
    ratios and interpolation checks need no oracle access.
    """

    xs: np.ndarray
    gs: np.ndarray
    fs: np.ndarray
    minimizer: np.ndarray
    f_min: float = 0.0

    @property
    def n(self):
        return len(self.xs) - 1


@dataclass(frozen=True)
class RunReport:
    """Outcome of one run measured against the certified rate."""

    schedule_id: str
    oracle_description: str
    contraction: float
    tau_n: float
    slack: float  # tau_n - contraction; nonnegative for in-class runs


def run_gd(oracle, x0, schedule):
    """Run x_{t+1} = x_t - h_t * grad(x_t) and record everything."""
    if len(schedule) == 0:
        raise ValueError("schedule must be nonempty")
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    xs, gs, fs = [x], [], []
    for h in schedule:
        g = np.atleast_1d(np.asarray(oracle.grad(x), dtype=float))
        f = float(oracle.value(x))
        if not (np.all(np.isfinite(g)) and math.isfinite(f)):
            raise ValueError("oracle returned a non-finite value")
        gs.append(g)
        fs.append(f)
        x = x - h * g
        xs.append(x)
    g = np.atleast_1d(np.asarray(oracle.grad(x), dtype=float))
    f = float(oracle.value(x))
    if not (np.all(np.isfinite(g)) and math.isfinite(f)):
        raise ValueError("oracle returned a non-finite value")
    gs.append(g)
    fs.append(f)
    return TrajectoryData(
        xs=np.asarray(xs),
        gs=np.asarray(gs),
        fs=np.asarray(fs),
        minimizer=np.asarray(oracle.minimizer, dtype=float),
        f_min=float(oracle.value(oracle.minimizer)),
    )


def _haar_orthogonal(d, rng):
    a = rng.normal(size=(d, d))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


def quadratic_oracle(spectrum, seed=None, m=None, M=None):
    """Quadratic (1/2) x^T H x with the given eigenvalues.

    seed=None keeps H diagonal; otherwise H is conjugated by a Haar
    random orthogonal matrix. m, M default to the spectrum extremes.
    """
    lam = np.asarray(spectrum, dtype=float)
    if lam.ndim != 1 or lam.size == 0 or np.any(lam <= 0):
        raise ValueError("spectrum must be a nonempty list of positive reals")
    m = float(lam.min()) if m is None else float(m)
    M = float(lam.max()) if M is None else float(M)
    if np.any(lam < m) or np.any(lam > M):
        raise ValueError("spectrum must lie within [m, M]")
    d = lam.size
    if seed is None:
        hess = np.diag(lam)
        desc = "quad:" + ",".join(f"{v:g}" for v in lam)
    else:
        q = _haar_orthogonal(d, np.random.default_rng(seed))
        hess = q.T @ np.diag(lam) @ q
        desc = f"quad:d={d}:seed={seed}"
    return FunctionOracle(
        value=lambda x: 0.5 * float(np.asarray(x) @ hess @ np.asarray(x)),
        grad=lambda x: hess @ np.asarray(x),
        minimizer=np.zeros(d),
        m=m,
        M=M,
        description=desc,
    )


def curvature_switch_oracle(breaks, m, M):
    """1-D piecewise quadratic defined by its curvature on each interval.

    breaks: sorted (threshold, curvature) pairs; curvature applies on
    [threshold, next threshold). Below the first finite threshold the
    complementary curvature applies (a single -inf threshold covers the
    whole line instead). Gradient and value are integrated analytically
    outward from the minimizer at 0, so both are continuous.
    """
    if not breaks:
        raise ValueError("breaks must be nonempty")
    thresholds = [float(t) for t, _c in breaks]
    curvs = [float(c) for _t, c in breaks]
    if sorted(thresholds) != thresholds or len(set(thresholds)) != len(thresholds):
        raise ValueError("thresholds must be strictly increasing")
    for c in curvs:
        if c not in (float(m), float(M)):
            raise ValueError("curvatures must be m or M")
    if math.isinf(thresholds[0]):
        knots = np.asarray(thresholds[1:])
        piece_curv = np.asarray(curvs)
    else:
        knots = np.asarray(thresholds)
        below = float(M) if curvs[0] == float(m) else float(m)
        piece_curv = np.asarray([below] + curvs)
    # piece p covers [knots[p-1], knots[p]); p ranges over 0..len(knots)
    p0 = int(np.searchsorted(knots, 0.0, side="right"))
    n_knots = len(knots)
    g_at = np.zeros(n_knots)
    v_at = np.zeros(n_knots)
    # integrate from the origin (g=0, v=0) out to each knot
    g, v, ref = 0.0, 0.0, 0.0
    for j in range(p0 - 1, -1, -1):  # leftward
        t = knots[j]
        a = piece_curv[j + 1]  # curvature of the piece between t and ref
        dg = a * (t - ref)
        v_at[j] = v + g * (t - ref) + 0.5 * a * (t - ref) ** 2
        g_at[j] = g + dg
        g, v, ref = g_at[j], v_at[j], t
    g, v, ref = 0.0, 0.0, 0.0
    for j in range(p0, n_knots):  # rightward
        t = knots[j]
        a = piece_curv[j]
        v_at[j] = v + g * (t - ref) + 0.5 * a * (t - ref) ** 2
        g_at[j] = g + a * (t - ref)
        g, v, ref = g_at[j], v_at[j], t

    def _ref_state(x):
        flat = np.asarray(x, dtype=float).reshape(-1)
        if n_knots == 0:  # single piece covering the whole line
            zero = np.zeros_like(flat)
            return flat, piece_curv[0], zero, zero, zero
        p = np.searchsorted(knots, flat, side="right")
        # pieces right of the origin anchor at their left knot, pieces
        # left of it at their right knot; the origin piece at 0 itself
        idx = np.clip(np.where(p < p0, p, p - 1), 0, n_knots - 1)
        at_origin = p == p0
        ref = np.where(at_origin, 0.0, knots[idx])
        gref = np.where(at_origin, 0.0, g_at[idx])
        vref = np.where(at_origin, 0.0, v_at[idx])
        return flat, piece_curv[p], ref, gref, vref

    def grad(x):
        flat, a, ref, gref, _v = _ref_state(x)
        return (gref + a * (flat - ref)).reshape(np.shape(x))

    def value(x):
        flat, a, ref, gref, vref = _ref_state(x)
        dx = flat - ref
        return float((vref + gref * dx + 0.5 * a * dx * dx)[0])

    desc = "switch:" + ";".join(f"{t:g}:{c:g}" for t, c in zip(thresholds, curvs))
    return FunctionOracle(
        value=value,
        grad=grad,
        minimizer=np.zeros(1),
        m=float(m),
        M=float(M),
        description=desc,
    )


def hard_instances(m, M, alpha):
    """The four 1-D instances that pin the two-step lower bound.

    Two extreme quadratics, the curvature flip at the origin, and the
    flip at (1 - m*alpha)/(1 + alpha*(M - m)) where the first step
    lands exactly on the kink. Run from x0 = 1.
    """
    s0 = (1 - m * alpha) / (1 + alpha * (M - m))
    return (
        quadratic_oracle([M], m=m, M=M),
        quadratic_oracle([m], m=m, M=M),
        curvature_switch_oracle([(0.0, M)], m, M),
        curvature_switch_oracle([(s0, m)], m, M),
    )


def contraction(trajectory, minimizer=None):
    """Squared distance to the minimizer, final over initial."""
    x_star = trajectory.minimizer if minimizer is None else np.asarray(minimizer, float)
    d0 = float(np.sum((trajectory.xs[0] - x_star) ** 2))
    if d0 == 0:
        raise ValueError("starting point coincides with the minimizer")
    dn = float(np.sum((trajectory.xs[-1] - x_star) ** 2))
    return dn / d0


def _worst_quadratic_lambda(schedule, m, M):
    """argmax over lam in [m, M] of |prod (1 - lam h)|, via critical points."""
    # p(lam) = prod(1 - lam h); roots at 1/h
    coeffs = np.poly([1.0 / h for h in schedule]) * np.prod([-h for h in schedule])
    deriv = np.polyder(coeffs)
    cands = [m, M]
    if len(deriv) > 1:
        roots = np.roots(deriv)
        cands.extend(
            float(r.real) for r in roots if abs(r.imag) < 1e-12 and m < r.real < M
        )
    best = max(cands, key=lambda lam: abs(np.polyval(coeffs, lam)))
    return float(best)


def _report(schedule_id, oracle, schedule, tau):
    traj = run_gd(oracle, np.ones(len(oracle.minimizer)), schedule)
    c = contraction(traj)
    return RunReport(
        schedule_id=schedule_id,
        oracle_description=oracle.description,
        contraction=c,
        tau_n=tau,
        slack=tau - c,
    )


def adversarial_probe(kappa, n, schedule=None, budget=1000, seed=0):
    """Search for the worst-case contraction of a schedule on the class.

    The baseline examines quadratics exactly (worst curvature found by
    polynomial critical points). The budget is then spent on random
    rotated quadratics in dimensions 1-10, random curvature-switch
    instances with up to n breakpoints, and local refinement of the
    best switch found. Best-effort: returns the worst instance found,
    not a certified maximum.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    from .core import build_schedule  # local import keeps module load light

    if schedule is None:
        schedule = build_schedule(kappa, n).steps
        schedule_id = f"silver:kappa={kappa:g}:n={n}"
    else:
        schedule_id = f"custom:kappa={kappa:g}:n={n}"
    schedule = [float(h) for h in schedule]
    m, M = 1.0 / kappa, 1.0
    # custom schedules may have any length; the certified rate only exists
    # at powers of two
    tau = silver_rate(kappa, n).tau if n > 0 and n & (n - 1) == 0 else math.nan

    lam_worst = _worst_quadratic_lambda(schedule, m, M)
    worst = _report(schedule_id, quadratic_oracle([lam_worst], m=m, M=M), schedule, tau)
    for lam in (m, M):
        rep = _report(schedule_id, quadratic_oracle([lam], m=m, M=M), schedule, tau)
        if rep.contraction > worst.contraction:
            worst = rep
    if budget == 0:
        return worst

    rng = np.random.default_rng(seed)
    n_quad = budget // 4
    n_switch = budget - n_quad - budget // 4
    n_refine = budget - n_quad - n_switch

    for _ in range(n_quad):
        d = int(rng.integers(1, 11))
        lam = np.exp(rng.uniform(math.log(m), math.log(M), size=d))
        lam[0] = lam_worst  # keep the known worst curvature in play
        oracle = quadratic_oracle(lam, seed=int(rng.integers(2**31)), m=m, M=M)
        x0 = rng.normal(size=d)
        traj = run_gd(oracle, x0, schedule)
        c = contraction(traj)
        if c > worst.contraction:
            worst = RunReport(schedule_id, oracle.description, c, tau, tau - c)

    def random_switch():
        k = int(rng.integers(1, max(2, n + 1)))
        ts = np.sort(rng.uniform(-1.5, 1.5, size=k))
        while len(set(ts)) < k:
            ts = np.sort(rng.uniform(-1.5, 1.5, size=k))
        cs = rng.choice([m, M], size=k)
        return [(float(t), float(c)) for t, c in zip(ts, cs)]

    best_breaks = None
    for _ in range(n_switch):
        breaks = random_switch()
        rep = _report(schedule_id, curvature_switch_oracle(breaks, m, M), schedule, tau)
        if rep.contraction > worst.contraction:
            worst = rep
            best_breaks = breaks

    if best_breaks is not None:
        scale = 0.25
        breaks = best_breaks
        for _ in range(n_refine):
            ts = np.array([t for t, _c in breaks])
            jitter = ts + rng.normal(scale=scale, size=len(ts))
            jitter = np.sort(jitter)
            if len(set(jitter)) < len(jitter):
                continue
            cand = [(float(t), c) for t, (_t0, c) in zip(jitter, breaks)]
            rep = _report(schedule_id, curvature_switch_oracle(cand, m, M), schedule, tau)
            if rep.contraction > worst.contraction:
                worst = rep
                breaks = cand
            scale *= 0.97
    return worst
