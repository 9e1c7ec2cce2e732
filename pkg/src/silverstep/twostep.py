"""The optimal two-step schedule on [m, M]-conditioned smooth strongly convex functions.

Closed forms for the short/long step pair and its worst-case squared
distance contraction, the four-term lower-bound floor that certifies
optimality from below, a brute-force grid+descent oracle for the closed
forms, and the Chebyshev pair for the quadratic-only comparison.

Stepsize order matters: the floor is asymmetric in (alpha, beta), and
running the long step first is strictly worse.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "TwoStepSolution",
    "ContourGrid",
    "optimal_pair",
    "defining_residual",
    "rate_floor",
    "argmin_floor",
    "chebyshev_pair",
    "quadratic_rate",
    "contour_grid",
]


@dataclass(frozen=True)
class TwoStepSolution:
    """Optimal (short, long) stepsize pair with its contraction factor.

    Iterates as (alpha_star, beta_star, R_star). Fields are Fractions
    when the inputs were rational and the discriminant is a perfect
    rational square, floats otherwise.
    """

    alpha_star: object
    beta_star: object
    R_star: object
    m: object
    M: object
    S: object

    def __iter__(self):
        return iter((self.alpha_star, self.beta_star, self.R_star))


def _check_mM(m, M):
    if not 0 < m < M:
        raise ValueError("need 0 < m < M")


def _exact_sqrt(x):
    """sqrt of a nonnegative Fraction if it is a perfect rational square, else None."""
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def optimal_pair(m, M):
    """Closed-form optimal two-step schedule for the class with curvature in [m, M].

    alpha* = 2/(m+S), beta* = 2/(2M+m-S), R* = (S-M)/(2m+S-M) with
    S = sqrt(M^2 + (M-m)^2). Tries exact rational arithmetic first;
    falls back to floating point when S is irrational.
    """
    _check_mM(m, M)
    try:
        mf, Mf = Fraction(m), Fraction(M)
    except (TypeError, ValueError):
        mf = Mf = None
    if mf is not None:
        s = _exact_sqrt(Mf * Mf + (Mf - mf) * (Mf - mf))
        if s is not None:
            return TwoStepSolution(
                alpha_star=2 / (mf + s),
                beta_star=2 / (2 * Mf + mf - s),
                R_star=(s - Mf) / (2 * mf + s - Mf),
                m=m,
                M=M,
                S=s,
            )
    s = math.hypot(M, M - m)
    return TwoStepSolution(
        alpha_star=2 / (m + s),
        beta_star=2 / (2 * M + m - s),
        R_star=(s - M) / (2 * m + s - M),
        m=m,
        M=M,
        S=s,
    )


def defining_residual(alpha, beta, m, M):
    """Residuals of the two equalities that pin the optimal pair.

    r1: worst quadratic at curvature M vs worst at curvature m.
    r2: worst at curvature m vs the kinked instance that splits
    curvature across the two steps. Both vanish exactly at the optimum.
    """
    r1 = (M * alpha - 1) * (M * beta - 1) - (1 - alpha * m) * (1 - beta * m)
    r2 = (1 - alpha * m) * (1 - beta * m) - (1 - m * alpha) * (M * beta - 1) / (
        1 + alpha * (M - m)
    )
    return (r1, r2)


def _floor_terms(alpha, beta, m, M):
    t1 = (M * alpha - 1) * (M * beta - 1)
    t2 = (1 - alpha * m) * (1 - beta * m)
    t3 = (M * alpha - 1) * (1 - m * beta)
    t4 = (1 - m * alpha) * (M * beta - 1) / (1 + alpha * (M - m))
    return (t1, t2, t3, t4)


def rate_floor(alpha, beta, m, M):
    """Largest contraction forced by four explicit hard instances.

    Every gradient method using exactly these two stepsizes, in this
    order, contracts squared distance by at least this factor on one of
    the instances. Stepsizes outside [1/M, 1/m] are rejected: values
    there are dominated by their clipped counterparts, so allowing them
    would only blur the comparison.
    """
    _check_mM(m, M)
    lo, hi = 1 / M, 1 / m
    eps = 1e-12 * hi
    if not (lo - eps <= alpha <= hi + eps and lo - eps <= beta <= hi + eps):
        raise ValueError("stepsizes must lie in [1/M, 1/m]")
    return max(abs(t) for t in _floor_terms(alpha, beta, m, M))


def _golden_min(f, a, b, tol):
    # golden-section; f is quasiconvex along coordinate lines (max of
    # V-shaped absolute-linear terms and one monotone rational term)
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def _refine_floor(alpha, beta, m, M, iters):
    # coordinate descent with golden-section line probes, plus a probe
    # along each sweep's net displacement: products of linears are
    # quasiconcave, so the max-of-four has spurious corner basins that
    # trap pure axis moves
    lo, hi = 1 / M, 1 / m
    tol = (hi - lo) * 1e-13
    clamp = lambda x: min(max(x, lo), hi)
    for _ in range(iters):
        a0, b0 = alpha, beta
        alpha, _v = _golden_min(lambda a: rate_floor(a, beta, m, M), lo, hi, tol)
        beta, _v = _golden_min(lambda b: rate_floor(alpha, b, m, M), lo, hi, tol)
        da, db = alpha - a0, beta - b0
        nrm = math.hypot(da, db)
        if nrm == 0:
            continue
        da, db = da / nrm, db / nrm
        tmin, tmax = -math.inf, math.inf
        for d, x in ((da, alpha), (db, beta)):
            if d > 0:
                tmin, tmax = max(tmin, (lo - x) / d), min(tmax, (hi - x) / d)
            elif d < 0:
                tmin, tmax = max(tmin, (hi - x) / d), min(tmax, (lo - x) / d)
        t, _v = _golden_min(
            lambda t: rate_floor(clamp(alpha + t * da), clamp(beta + t * db), m, M),
            tmin,
            tmax,
            tol,
        )
        alpha, beta = clamp(alpha + t * da), clamp(beta + t * db)
    return (alpha, beta, rate_floor(alpha, beta, m, M))


def argmin_floor(m, M, grid_resolution=64, refine_iters=6):
    """Brute-force minimizer of the four-term floor over [1/M, 1/m]^2.

    Dense grid scan, then local refinement from each of the best grid
    cells (the floor is not quasiconvex and grows spurious local basins
    for small m, so a single-start descent can stall short of the
    minimizer). Serves as the independent check that the closed forms
    really are the minimizer; agrees with optimal_pair to well below
    1e-6 even at m/M = 0.001.
    """
    _check_mM(m, M)
    if grid_resolution < 32:
        raise ValueError("grid_resolution must be >= 32")
    lo, hi = 1 / M, 1 / m
    xs = np.linspace(lo, hi, grid_resolution)
    a_grid, b_grid = np.meshgrid(xs, xs, indexing="ij")
    vals = _floor_values(a_grid, b_grid, m, M)
    best = None
    for idx in np.argsort(vals.ravel())[:24]:
        i, j = np.unravel_index(int(idx), vals.shape)
        cand = _refine_floor(float(xs[i]), float(xs[j]), m, M, refine_iters)
        if best is None or cand[2] < best[2]:
            best = cand
    return best


def _floor_values(alpha, beta, m, M):
    # vectorized counterpart of rate_floor for grids
    t1 = np.abs((M * alpha - 1) * (M * beta - 1))
    t2 = np.abs((1 - alpha * m) * (1 - beta * m))
    t3 = np.abs((M * alpha - 1) * (1 - m * beta))
    t4 = np.abs((1 - m * alpha) * (M * beta - 1) / (1 + alpha * (M - m)))
    return np.maximum(np.maximum(t1, t2), np.maximum(t3, t4))


def chebyshev_pair(m, M):
    """Stepsizes of the degree-2 Chebyshev semi-iterative method, ascending.

    Inverse roots of the optimal quadratic-case polynomial; the roots
    are (M+m)/2 +- (M-m)/(2 sqrt(2)).
    """
    _check_mM(m, M)
    spread = (M - m) / (2 * math.sqrt(2))
    mid = (M + m) / 2
    return (1 / (mid + spread), 1 / (mid - spread))


def quadratic_rate(alpha, beta, m, M):
    """Worst |(1-lam*alpha)(1-lam*beta)| over quadratics with curvature in [m, M].

    The polynomial's extrema over the interval sit at the endpoints or
    the midpoint, so three evaluations suffice.
    """
    _check_mM(m, M)
    return max(
        abs((1 - lam * alpha) * (1 - lam * beta)) for lam in (m, M, (m + M) / 2)
    )


@dataclass(frozen=True)
class ContourGrid:
    """Floor values tabulated over the stepsize square, for contour plots."""

    alphas: np.ndarray
    betas: np.ndarray
    rates: np.ndarray  # rates[i, j] = floor(alphas[i], betas[j])

    def rows(self):
        """Yield (alpha, beta, rate) triples row-major, for CSV emission."""
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.betas):
                yield (float(a), float(b), float(self.rates[i, j]))


def contour_grid(m, M, resolution=101):
    """Tabulate the floor on a resolution x resolution grid over [1/M, 1/m]^2."""
    _check_mM(m, M)
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    xs = np.linspace(1 / M, 1 / m, resolution)
    a_grid, b_grid = np.meshgrid(xs, xs, indexing="ij")
    return ContourGrid(alphas=xs.copy(), betas=xs.copy(), rates=_floor_values(a_grid, b_grid, m, M))
