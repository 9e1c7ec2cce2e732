"""Convergence-rate certificates for silver schedules by recursive gluing.

A certificate for n steps is a sparse nonnegative matrix of multipliers
lambda over index set {0..n-1, *} such that

    tau_n |x_0|^2 - |x_n|^2  =  sum_ij lambda_ij Q_ij

identically in the free variables (x_0, g_0..g_{n-1}, f_0..f_{n-1}),
where Q_ij is the co-coercivity gap of the pair (i, j) for the class
with curvature in [1/kappa, 1] and the iterates follow the schedule.
The identity is built once for n=1 and doubled by a gluing step: two
scaled copies of the half certificate, corrected on the handful of
entries that straddle the seam, plus one rank-structured spread row.

All seam quantities are evaluated through the complement u = 1 - z of
the normalized pair, never through z itself: the corrections divide by
z_{2n} - z_n and 1 - z_n, both of which vanish doubly exponentially.
"""

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from ._numeric import ESCALATION_BITS, ESCALATION_THRESHOLD, context
from .core import (
    _check_kappa,
    _check_pow2,
    build_schedule,
    normalized_sequence,
    psi,
)

__all__ = [
    "STAR",
    "Multipliers",
    "GlueParts",
    "IdentityReport",
    "StructureReport",
    "cocoercivity_Q",
    "quad_part_P",
    "base_certificate",
    "q_shorthand",
    "glue",
    "build_certificate",
    "verify_identity",
    "verify_structure",
    "esl_matrices",
    "check_identities",
    "certificate_payload",
]

STAR = -1  # index sentinel for the minimizer; serialized as "star"

NORMALIZATION = "Q[m=1/kappa,M=1]"  # the Q convention the entries certify


@dataclass(frozen=True)
class Multipliers:
    """Sparse nonnegative multipliers over {0..n-1, *} x {0..n-1, *}.

    entries maps (i, j) pairs (STAR = -1 allowed) to values. bits
    records the working precision the values were computed at (None
    means double).
    """

    n: int
    kappa: float
    entries: dict
    normalization: str = NORMALIZATION
    bits: object = None

    def get(self, i, j):
        return self.entries.get((i, j), 0.0)


@dataclass(frozen=True)
class GlueParts:
    """Scalars of one gluing step, exposed for inspection and tests."""

    r: object  # ratio of complement gaps, (1-z_n)/(1-z_2n)
    c: object  # second-copy scale
    chi: object  # (z_2n + z_n)/(z_2n - z_n)
    xi_total: object  # total mass spread over the middle columns
    w_sum: object  # normalizer of the spread weights


def _point(data, i):
    if i == STAR:
        z = np.zeros_like(np.asarray(data.xs[0], dtype=float))
        return z, z, float(getattr(data, "f_min", 0.0))
    xs = data.xs
    if not -len(xs) <= i < len(xs):
        raise IndexError(f"trajectory has no index {i}")
    return np.asarray(data.xs[i], float), np.asarray(data.gs[i], float), float(data.fs[i])


def cocoercivity_Q(data, i, j, m, M):
    """Co-coercivity gap of the ordered pair (i, j); >= 0 for in-class data.

    2(M-m)(f_i - f_j) + 2<M g_j - m g_i, x_j - x_i> - |g_i - g_j|^2
    - M m |x_i - x_j|^2.
    """
    xi, gi, fi = _point(data, i)
    xj, gj, fj = _point(data, j)
    dx = xj - xi
    dg = gi - gj
    return float(
        2 * (M - m) * (fi - fj)
        + 2 * np.dot(M * gj - m * gi, dx)
        - np.dot(dg, dg)
        - M * m * np.dot(dx, dx)
    )


def quad_part_P(data, i, j, kappa):
    """cocoercivity_Q at (m, M) = (1/kappa, 1) with the f-term removed.

    Summing lambda_ij P_ij equals summing lambda_ij Q_ij whenever
    lambda's row sums match its column sums, since the f-terms then
    telescope away.
    """
    m, M = 1.0 / kappa, 1.0
    _xi, _gi, fi = _point(data, i)
    _xj, _gj, fj = _point(data, j)
    return cocoercivity_Q(data, i, j, m, M) - 2 * (M - m) * (fi - fj)


def base_certificate(kappa, bits=None):
    """One-step certificate: symmetric mass 2 kappa^2/(kappa+1)^2 to and from *."""
    _check_kappa(kappa)
    ctx = context(bits)
    with ctx.guard():
        k = ctx.number(kappa)
        v = 2 * k * k / ((k + 1) * (k + 1))
    return Multipliers(
        n=1, kappa=kappa, entries={(0, STAR): v, (STAR, 0): v}, bits=bits
    )


def q_shorthand(schedule, i):
    """q_i = alpha_i (1 - alpha_{i+1}/kappa) / alpha_{i+1} for consecutive steps."""
    steps = schedule.steps
    if not 0 <= i < len(steps) - 1:
        raise IndexError("q_shorthand needs 0 <= i < n-1")
    k = schedule.kappa
    return steps[i] * (1 - steps[i + 1] / k) / steps[i + 1]


def _shift(i, offset):
    # second-copy reindexing; the star index absorbs the shift
    return STAR if i == STAR else i + offset


def _boundary_to_star(kappa, z):
    """Multiplier from the last iterate to *: 2 kappa z / (1+z)^2."""
    return 2 * kappa * z / ((1 + z) * (1 + z))


def _boundary_from_star(kappa, z):
    """Multiplier from * to the last iterate: (1 + (kappa-1) z + kappa z^2)/(1+z)^2."""
    return (1 + (kappa - 1) * z + kappa * z * z) / ((1 + z) * (1 + z))


def _glue_scalars(kappa, pair_half, pair_full, q_full):
    """Seam constants for one doubling, all via complements.

    pair_half / pair_full are the normalized pairs at the input and
    output levels; q_full the q-shorthand sequence of the output
    schedule (length 2n-1).
    """
    half = (len(q_full) + 1) // 2
    u_h, u_f, y_f = pair_half.u, pair_full.u, pair_full.y
    # tau_2n / tau_n without forming either tau
    rho_ratio = (u_f * (2 - u_h) / (u_h * (2 - u_f))) ** 2
    r = u_h / u_f
    dz = u_h * (1 + y_f - u_h) / (1 + y_f)  # z_2n - z_n, cancellation-free
    chi = (2 - u_h - u_f) / dz
    c = rho_ratio * (r + (1 + r) * chi)
    tau_full = (u_f / (2 - u_f)) ** 2
    kz_minus_1 = (kappa - 1) - kappa * u_h  # kappa z_n - 1
    xi_total = tau_full * (kz_minus_1 / u_h) * chi
    # spread weights over output columns n..2n-2
    ws = []
    w = u_h / u_h  # one, in the working number type
    for j in range(half, 2 * half - 1):
        ws.append(w)
        if j < 2 * half - 2:
            w = w / q_full[j]
    w_sum = sum(ws) if ws else None
    return rho_ratio, r, chi, c, tau_full, xi_total, ws, w_sum


def glue(sigma, kappa, schedule_2n):
    """Double a certificate: two scaled copies plus seam corrections.

    The first copy is scaled by tau_2n/tau_n, the second by c and
    shifted by n (star absorbing). Five boundary entries are then
    overwritten outright rather than adjusted, so no cancellation
    occurs, and the remaining correction mass xi_total is spread over
    columns n..2n-2 on rows (n-1, 2n-1, *) with signs (1, r, -(1+r)).
    """
    _check_kappa(kappa)
    if kappa == 2:
        raise ValueError("kappa=2 unsupported; use kappa=2±ε")
    n = sigma.n
    if schedule_2n.n != 2 * n:
        raise ValueError("schedule must have length 2n")
    bits = sigma.bits
    ctx = context(bits)
    with ctx.guard():
        k = ctx.number(kappa)
        pairs = normalized_sequence(kappa, schedule_2n.level, bits=bits)
        pair_half, pair_full = pairs[-2], pairs[-1]
        q_full = [q_shorthand(schedule_2n, t) for t in range(2 * n - 1)]
        rho_ratio, r, chi, c, tau_full, xi_total, ws, w_sum = _glue_scalars(
            k, pair_half, pair_full, q_full
        )
        z_h, z_f, u_h, y_f = pair_half.z, pair_full.z, pair_half.u, pair_full.y

        out = {}
        for (i, j), v in sigma.entries.items():
            out[(i, j)] = rho_ratio * v
        for (i, j), v in sigma.entries.items():
            key = (_shift(i, n), _shift(j, n))
            out[key] = out.get(key, 0 * c) + c * v

        # seam overwrites (exact closed forms, no differencing)
        out.pop((n - 1, STAR), None)
        out[(STAR, n - 1)] = tau_full * (1 + k * y_f) / u_h
        out[(2 * n - 1, STAR)] = _boundary_to_star(k, z_f)
        out[(STAR, 2 * n - 1)] = _boundary_from_star(k, z_f)
        # seam interior additions
        d01 = tau_full * chi / u_h
        d10 = k * y_f * tau_full * chi / u_h
        out[(n - 1, 2 * n - 1)] = out.get((n - 1, 2 * n - 1), 0 * c) + d01
        out[(2 * n - 1, n - 1)] = out.get((2 * n - 1, n - 1), 0 * c) + d10

        # spread rows over the middle columns
        if ws:
            for j, w in zip(range(n, 2 * n - 1), ws):
                xi_j = xi_total * w / w_sum
                out[(n - 1, j)] = out.get((n - 1, j), 0 * c) + xi_j
                out[(2 * n - 1, j)] = out.get((2 * n - 1, j), 0 * c) + r * xi_j
                out[(STAR, j)] = out.get((STAR, j), 0 * c) - (1 + r) * xi_j
    return Multipliers(n=2 * n, kappa=kappa, entries=out, bits=bits)


def _needs_escalation(kappa, n):
    pair = normalized_sequence(kappa, n.bit_length() - 1)[-1]
    return pair.u < ESCALATION_THRESHOLD


def build_certificate(kappa, n, bits=None):
    """Fold the gluing from n=1 up to n, escalating precision if needed.

    With bits=None the complement 1 - z_n is probed in double
    precision; if it has decayed below the escalation threshold the
    whole construction runs at 128-bit precision and the finished
    entries are rounded back to floats. An explicit bits keeps
    multiprecision entries.
    """
    _check_kappa(kappa)
    if kappa == 2:
        raise ValueError("kappa=2 unsupported; use kappa=2±ε")
    _check_pow2(n)
    demote = False
    if bits is None and n > 1 and _needs_escalation(kappa, n):
        bits = ESCALATION_BITS
        demote = True
    cert = base_certificate(kappa, bits=bits)
    m = 2
    while m <= n:
        cert = glue(cert, kappa, build_schedule(kappa, m, bits=bits))
        m *= 2
    if demote:
        cert = Multipliers(
            n=cert.n,
            kappa=cert.kappa,
            entries={k: float(v) for k, v in cert.entries.items()},
            normalization=cert.normalization,
            bits=None,
        )
    return cert


@dataclass(frozen=True)
class IdentityReport:
    """Randomized check of the certificate identity."""

    max_residual: float
    scale: float
    trials: int
    dim: int
    seed: int
    tol: float
    ok: bool


def verify_identity(schedule, multipliers, tau, trials=100, dim=3, seed=0, tol=1e-8):
    """Randomized test that tau |x0|^2 - |x_n|^2 = scale * sum lambda Q.

    Free variables are drawn iid standard normal, the star point is
    pinned at zero, and the f_i are free scalars (netflow makes the sum
    f-invariant). One global scale is fitted on the first trial and
    frozen; the report carries the worst relative residual, measured
    against the total mass sum |lambda Q| + |tau||x0|^2 + |x_n|^2, and
    ok means every residual was finite and the worst one is within tol.
    """
    if multipliers.n != schedule.n:
        raise ValueError("certificate and schedule sizes differ")
    n = schedule.n
    kappa = multipliers.kappa
    keys = sorted(multipliers.entries.keys(), key=lambda ij: (ij[0] == STAR, ij[0], ij[1] == STAR, ij[1]))
    star_row = n + 1  # xs rows: 0..n iterates, n+1 star
    idx_i = np.array([star_row if i == STAR else i for i, _j in keys])
    idx_j = np.array([star_row if j == STAR else j for _i, j in keys])
    if multipliers.bits is None:
        vals = np.array([float(multipliers.entries[k]) for k in keys])
        steps = np.array([float(h) for h in schedule.steps])
        return _verify_identity_float(
            steps, idx_i, idx_j, vals, float(tau), kappa, trials, dim, seed, tol
        )
    vals = [multipliers.entries[k] for k in keys]
    return _verify_identity_mp(
        schedule, idx_i, idx_j, vals, tau, kappa, trials, dim, seed, multipliers.bits, tol
    )


def _verify_identity_float(steps, idx_i, idx_j, vals, tau, kappa, trials, dim, seed, tol):
    n = len(steps)
    m, M = 1.0 / kappa, 1.0
    rng = np.random.default_rng(seed)
    scale = None
    worst = 0.0
    ok = True
    for _ in range(trials):
        g = rng.standard_normal((n, dim))
        x0 = rng.standard_normal(dim)
        f = np.concatenate([rng.standard_normal(n), np.zeros(2)])
        xs = np.empty((n + 2, dim))
        xs[0] = x0
        xs[1 : n + 1] = x0 - np.cumsum(steps[:, None] * g, axis=0)
        xs[n + 1] = 0.0
        gs = np.vstack([g, np.zeros((2, dim))])
        xi, xj = xs[idx_i], xs[idx_j]
        gi, gj = gs[idx_i], gs[idx_j]
        dx = xj - xi
        dg = gi - gj
        q = (
            2 * (M - m) * (f[idx_i] - f[idx_j])
            + 2 * np.einsum("ij,ij->i", M * gj - m * gi, dx)
            - np.einsum("ij,ij->i", dg, dg)
            - M * m * np.einsum("ij,ij->i", dx, dx)
        )
        rhs = float(vals @ q)
        lhs = tau * float(x0 @ x0) - float(xs[n] @ xs[n])
        if scale is None:
            scale = lhs / rhs if rhs != 0 else 1.0
        denom = float(np.abs(vals * q).sum()) + abs(tau) * float(x0 @ x0) + float(xs[n] @ xs[n])
        res = abs(lhs - scale * rhs) / denom
        if not math.isfinite(res):
            ok = False
            res = math.inf
        worst = max(worst, res)
    ok = ok and worst <= tol
    return IdentityReport(
        max_residual=worst, scale=float(scale), trials=trials, dim=dim, seed=seed, tol=tol, ok=ok
    )


def _verify_identity_mp(schedule, idx_i, idx_j, vals, tau, kappa, trials, dim, seed, bits, tol):
    n = schedule.n
    rng = np.random.default_rng(seed)
    worst = mpmath.mpf(0)
    scale = None
    ok = True
    with mpmath.workprec(bits):
        k = mpmath.mpf(kappa)
        m, M = 1 / k, mpmath.mpf(1)
        steps = [mpmath.mpf(h) if not isinstance(h, mpmath.mpf) else h for h in schedule.steps]
        for _ in range(trials):
            g = [[mpmath.mpf(v) for v in row] for row in rng.standard_normal((n, dim))]
            x0 = [mpmath.mpf(v) for v in rng.standard_normal(dim)]
            f = [mpmath.mpf(v) for v in rng.standard_normal(n)] + [mpmath.mpf(0)] * 2
            xs = [x0]
            cur = x0
            for t in range(n):
                cur = [cur[d] - steps[t] * g[t][d] for d in range(dim)]
                xs.append(cur)
            zero = [mpmath.mpf(0)] * dim
            xs.append(zero)
            gs = g + [zero, zero]
            rhs = mpmath.mpf(0)
            mass = mpmath.mpf(0)
            for (ii, jj), lam in zip(zip(idx_i, idx_j), vals):
                xi, xj = xs[ii], xs[jj]
                gi, gj = gs[ii], gs[jj]
                q = 2 * (M - m) * (f[ii] - f[jj])
                for d in range(dim):
                    dxd = xj[d] - xi[d]
                    dgd = gi[d] - gj[d]
                    q += 2 * (M * gj[d] - m * gi[d]) * dxd - dgd * dgd - M * m * dxd * dxd
                rhs += lam * q
                mass += abs(lam * q)
            nx0 = sum(v * v for v in x0)
            nxn = sum(v * v for v in xs[n])
            lhs = tau * nx0 - nxn
            if scale is None:
                scale = lhs / rhs if rhs != 0 else mpmath.mpf(1)
            res = abs(lhs - scale * rhs) / (mass + abs(tau) * nx0 + nxn)
            if not mpmath.isfinite(res):
                ok = False
                res = mpmath.inf
            worst = max(worst, res)
        ok = ok and worst <= tol
    return IdentityReport(
        max_residual=float(worst), scale=float(scale), trials=trials, dim=dim, seed=seed, tol=tol, ok=ok
    )


@dataclass(frozen=True)
class StructureReport:
    """Raw structural measurements of a multiplier set."""

    n: int
    min_entry: float
    star_sparsity_exact: bool
    max_netflow_imbalance: float

    def passes(self, tol=1e-10):
        return (
            self.min_entry >= -tol
            and self.star_sparsity_exact
            and self.max_netflow_imbalance <= tol
        )


def verify_structure(multipliers):
    """Measure nonnegativity, *-sparsity, and netflow of the entries."""
    n = multipliers.n
    entries = multipliers.entries
    min_entry = min((float(v) for v in entries.values()), default=0.0)
    sparsity = all(
        not (j == STAR and i != STAR and i < n - 1) or float(v) == 0.0
        for (i, j), v in entries.items()
    )
    sums = {}
    for (i, j), v in entries.items():
        ri = sums.setdefault(i, [0.0, 0.0])
        ri[0] += float(v)
        cj = sums.setdefault(j, [0.0, 0.0])
        cj[1] += float(v)
    imbalance = max((abs(rs - cs) for rs, cs in sums.values()), default=0.0)
    return StructureReport(
        n=n,
        min_entry=min_entry,
        star_sparsity_exact=sparsity,
        max_netflow_imbalance=imbalance,
    )


def _sym_fill(mat):
    for a in range(4):
        for b in range(a + 1, 4):
            mat[b][a] = mat[a][b]
    return mat


def esl_matrices(kappa, n):
    """Quadratic-form bookkeeping of one gluing step, input size n.

    v = (x_{n-1}, g_{n-1}, x_{2n-1}, g_{2n-1}). E collects the exact
    change of the certified quadratic form across the seam, S the
    contribution of the seam corrections, L the contribution of the
    spread row. E = S + L entrywise is the scalar heart of the gluing
    proof; the returned residual is max |E - S - L|, evaluated before
    rounding the matrices back to floats.

    Entries of E shrink like 1 - z_n deep in saturation, so the whole
    computation escalates to a precision proportional to -log2(1-z_n)
    once the double-precision budget is spent.
    """
    _check_kappa(kappa)
    if kappa == 2:
        raise ValueError("kappa=2 unsupported; use kappa=2±ε")
    _check_pow2(n)
    N = 2 * n
    level = N.bit_length() - 1
    probe = normalized_sequence(kappa, level)[-1]
    bits = None
    if probe.u < ESCALATION_THRESHOLD:
        # c - 1 and friends cancel down to the scale of 1 - z; pad well past it
        bits = max(ESCALATION_BITS, 2 * int(-probe.log_u / math.log(2)) + 192)
    ctx = context(bits)
    with ctx.guard():
        k = ctx.number(kappa)
        sched_full = build_schedule(kappa, N, bits=bits)
        pairs = normalized_sequence(kappa, level, bits=bits)
        pair_half, pair_full = pairs[-2], pairs[-1]
        q_full = [q_shorthand(sched_full, t) for t in range(N - 1)]
        rho_ratio, r, chi, c, tau_full, xi_total, ws, w_sum = _glue_scalars(
            k, pair_half, pair_full, q_full
        )
        z_h, z_f, u_h, y_f = pair_half.z, pair_full.z, pair_half.u, pair_full.y
        tau_half = (u_h / (2 - u_h)) ** 2
        a_full = psi(y_f, k)  # middle step of the output schedule
        b_half = psi(z_h, k)  # closing step of the input schedule
        b_full = psi(z_f, k)  # closing step of the output schedule
        zero = 0 * u_h

        e = [[zero] * 4 for _ in range(4)]
        e[0][0] = rho_ratio - c * tau_half
        e[0][1] = c * tau_half * a_full - rho_ratio * b_half
        e[1][1] = rho_ratio * b_half**2 - c * tau_half * a_full**2
        e[2][2] = c - 1
        e[2][3] = b_full - c * b_half
        e[3][3] = c * b_half**2 - b_full**2
        _sym_fill(e)

        # seam-correction deltas relative to the plain two-copy tensor
        d01 = tau_full * chi / u_h
        d10 = k * y_f * tau_full * chi / u_h
        d0s = -rho_ratio * _boundary_to_star(k, z_h)
        ds0 = tau_full * (1 + k * y_f) / u_h - rho_ratio * _boundary_from_star(k, z_h)
        d1s = _boundary_to_star(k, z_f) - c * _boundary_to_star(k, z_h)
        ds1 = _boundary_from_star(k, z_f) - c * _boundary_from_star(k, z_h)

        s = [[zero] * 4 for _ in range(4)]
        left = d01 + d0s + d10 + ds0
        right = d10 + d1s + d01 + ds1
        s[0][0] = -left / k
        s[0][1] = (d01 + d0s) / k + d10 + ds0
        s[0][2] = (d01 + d10) / k
        s[0][3] = -d01 - d10 / k
        s[1][1] = -left
        s[1][2] = -d10 - d01 / k
        s[1][3] = d01 + d10
        s[2][2] = -right / k
        s[2][3] = (d10 + d1s) / k + d01 + ds1
        s[3][3] = -right
        _sym_fill(s)

        ell = [[zero] * 4 for _ in range(4)]
        if n > 1:
            sched_half = build_schedule(kappa, n, bits=bits)
            q_half = [q_shorthand(sched_half, t) for t in range(n - 1)]
            prod_a = 1 + zero
            for t in range(n - 2):  # prod_{t=0}^{n-3} 1/q_t of the input schedule
                prod_a /= q_half[t]
            a2 = psi(pairs[1].y, k)
            w = w_sum
            cc = prod_a / a2
            cp = 1 / k - 1 / a2
            al = a_full
            phi = xi_total / w
            ell[0][0] = phi * (w / k - 2 * cc)
            ell[0][1] = phi * (-w * al / k + cc * (al + 1))
            ell[0][2] = phi * (cc + r * cp)
            ell[0][3] = phi * (-r * cp)
            ell[1][1] = phi * (w * (2 * al / k - 1) - 2 * cc * al)
            ell[1][2] = phi * (-cc - r * cp * al)
            ell[1][3] = phi * (r * cp * al)
            ell[2][2] = phi * r * (w / k - 2 * cp)
            ell[2][3] = phi * r * cp
            ell[3][3] = phi * r * (-w)
            _sym_fill(ell)
        else:
            # output size 2: x_1 = x_0 - a_2 g_0 makes the four coordinates
            # dependent, so the seam form is determined only on that
            # subspace. Move S to the gauge where it agrees with E
            # entrywise; the residual below still measures the reduced
            # identity because the gauge term vanishes on the subspace.
            cvec = [1 + zero, -a_full, -1 + zero, zero]
            num = [
                sum((e[a][b] - s[a][b]) * cvec[b] for b in range(4)) for a in range(4)
            ]
            cc2 = sum(ci * ci for ci in cvec)
            # solve d = c w^T + w c^T in least squares: w = (d c - c (c.d c)/(2 c.c)) / (c.c)
            cdc = sum(num[a] * cvec[a] for a in range(4))
            wvec = [(num[a] - cvec[a] * cdc / (2 * cc2)) / cc2 for a in range(4)]
            for a in range(4):
                for b in range(4):
                    s[a][b] = s[a][b] + cvec[a] * wvec[b] + wvec[a] * cvec[b]
        residual = max(abs(e[a][b] - s[a][b] - ell[a][b]) for a in range(4) for b in range(4))
    to_f = ctx.to_float
    e = np.array([[to_f(v) for v in row] for row in e])
    s = np.array([[to_f(v) for v in row] for row in s])
    ell = np.array([[to_f(v) for v in row] for row in ell])
    return (e, s, ell, float(residual))


def _disjunction_lhs(cs):
    total = 0.0
    for t, c in enumerate(cs):
        prod = 1.0
        for ci in cs[t + 1 :]:
            prod *= 1 - ci
        total += c * prod
    return total


def check_identities(kappa, n, seed=0):
    """Numeric audit of the q-product and boundary-multiplier closed forms.

    Returns a dict of named absolute/relative errors:
      prod_to_nm2: prod_{t=0}^{n-3} 1/q_t of the n-schedule vs its
        closed form (kappa-1)^2 / (kappa^2 (1+y_2)(1-z_n))
      prod_full: prod_{t=0}^{n-1} 1/q_t of the 2n-schedule vs
        (1-z_n)/(1-z_2n)
      middle_sum: sum_{j=n}^{2n-2} prod_{t=n}^{j-1} 1/q_t of the
        2n-schedule vs 1 + (kappa/a_2)(prod_to_nm2 - 1)
      ladder_max: worst relative error of the built certificate's
        (*, j) entries against the geometric ladder
        (kappa z_2 - 1)(prod_{t=j}^{n-3} q_t)(1-z_n)/(1+z_n)^2
      disjunction_max: worst absolute error of the telescoping
        identity sum_t c_t prod_{i>t}(1-c_i) = 1 - prod_t (1-c_t)
        over random real sequences
    """
    _check_kappa(kappa)
    _check_pow2(n)
    if n < 4:
        raise ValueError("check_identities needs n >= 4")
    pairs = normalized_sequence(kappa, n.bit_length())
    y2 = pairs[1].y
    z2 = pairs[1].z
    u_n = pairs[n.bit_length() - 1].u
    u_2n = pairs[n.bit_length()].u
    a2 = psi(y2, kappa)
    sched_n = build_schedule(kappa, n)
    sched_2n = build_schedule(kappa, 2 * n)
    q_n = [q_shorthand(sched_n, t) for t in range(n - 1)]
    q_2n = [q_shorthand(sched_2n, t) for t in range(2 * n - 1)]

    prod_a = 1.0
    for t in range(n - 2):
        prod_a /= q_n[t]
    closed_a = (kappa - 1) ** 2 / (kappa**2 * (1 + y2) * u_n)
    err_a = abs(prod_a - closed_a) / closed_a

    prod_b = 1.0
    for t in range(n):
        prod_b /= q_2n[t]
    closed_b = u_n / u_2n
    err_b = abs(prod_b - closed_b) / closed_b

    total = 0.0
    w = 1.0
    for j in range(n, 2 * n - 1):
        total += w
        if j < 2 * n - 2:
            w /= q_2n[j]
    closed_c = 1 + (kappa / a2) * (prod_a - 1)
    err_c = abs(total - closed_c) / closed_c

    cert = build_certificate(kappa, n)
    z_n = pairs[n.bit_length() - 1].z
    anchor = a2 * (kappa - 1) / kappa  # equals kappa z_2 - 1
    ladder_err = 0.0
    tail = 1.0
    for j in range(n - 2, -1, -1):
        want = anchor * tail * u_n / (1 + z_n) ** 2
        got = float(cert.get(STAR, j))
        ladder_err = max(ladder_err, abs(got - want) / abs(want))
        if j > 0:
            tail *= q_n[j - 1]

    rng = np.random.default_rng(seed)
    worst_d = 0.0
    for _ in range(200):
        cs = list(rng.uniform(-2, 2, size=int(rng.integers(1, 21))))
        lhs = _disjunction_lhs(cs)
        rhs = 1.0
        for c in cs:
            rhs *= 1 - c
        worst_d = max(worst_d, abs(lhs - (1 - rhs)))
    return {
        "prod_to_nm2": err_a,
        "prod_full": err_b,
        "middle_sum": err_c,
        "ladder_max": ladder_err,
        "disjunction_max": worst_d,
    }


def certificate_payload(multipliers):
    """JSON-ready dict for a certificate, deterministic entry order."""

    def enc(i):
        return "star" if i == STAR else i

    def sort_key(item):
        (i, j), _v = item
        big = multipliers.n  # star sorts after all iterate indices
        return (big if i == STAR else i, big if j == STAR else j)

    entries = [
        [enc(i), enc(j), float(v)]
        for (i, j), v in sorted(multipliers.entries.items(), key=sort_key)
    ]
    return {
        "kappa": float(multipliers.kappa),
        "n": multipliers.n,
        "scale_convention": multipliers.normalization,
        "entries": entries,
    }
