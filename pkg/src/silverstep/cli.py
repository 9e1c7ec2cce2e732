"""Command-line front end.

Exit codes are a stable contract: 0 success, 2 validation failure
(click usage errors), 3 verification failure with the report still
written. Identical flags and seed produce byte-identical files; the
delimited outputs get a rendered figure next to them unless --no-plot.
"""

import math
import os
import sys

import click

from . import _io
from .core import (
    build_schedule,
    infinite_step,
    occupation_measure,
    silver_rate,
)

PRECISION_ENV = "SILVERSTEP_PRECISION"


def _precision_option():
    return click.option(
        "--precision",
        type=int,
        default=None,
        envvar=PRECISION_ENV,
        help=f"Working precision in bits (default: auto; env {PRECISION_ENV}).",
    )


def _usage(err):
    raise click.UsageError(str(err))


def _sibling(path, ext):
    root, _ = os.path.splitext(os.fspath(path))
    return root + ext


@click.group()
def main():
    """Silver stepsize schedules, rate certificates, and worst-case probes."""


@main.command()
@click.option("--kappa", type=float, required=True, help="Condition number, > 1.")
@click.option("--n", type=int, default=None, help="Schedule length, a power of 2.")
@click.option("--infinite", is_flag=True, help="Emit the infinite schedule instead.")
@click.option("--count", type=int, default=16, show_default=True, help="Steps to emit with --infinite.")
@click.option("--normalized", "want_normalized", is_flag=True, help="Include the normalized preimages.")
@_precision_option()
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write JSON here instead of stdout.")
def schedule(kappa, n, infinite, count, want_normalized, precision, output):
    """Construct a silver schedule and emit it as JSON."""
    if infinite == (n is not None):
        raise click.UsageError("pass exactly one of --n or --infinite")
    try:
        if infinite:
            if count < 1:
                raise ValueError("count must be >= 1")
            steps = [infinite_step(i, kappa, bits=precision) for i in range(1, count + 1)]
            payload = {
                "kappa": kappa,
                "n": None,
                "steps": [float(h) for h in steps],
                "normalized": None,
                "tau": None,
                "occupation": None,
            }
        else:
            sched = build_schedule(kappa, n, bits=precision)
            rate = silver_rate(kappa, n, bits=precision)
            payload = {
                "kappa": kappa,
                "n": n,
                "steps": [float(h) for h in sched.steps],
                "normalized": [float(t) for t in sched.normalized] if want_normalized else None,
                "tau": rate.tau,
                "occupation": {k: str(v) for k, v in occupation_measure(n).items()} if n >= 2 else None,
            }
    except ValueError as err:
        _usage(err)
    text = _io.json_text(payload)
    if output is None:
        click.echo(text, nl=False)
    else:
        _io.write_text_atomic(output, text)


@main.command()
@click.option("--kappa", type=float, required=True)
@click.option("--max-level", type=int, default=10, show_default=True, help="Largest n is 2^max_level.")
@_precision_option()
@click.option("--output", type=click.Path(dir_okay=False), default="rate.csv", show_default=True)
@click.option("--no-plot", is_flag=True, help="Skip the figure next to the CSV.")
def rate(kappa, max_level, precision, output, no_plot):
    """Tabulate tau_n with the phase envelope, one row per power of 2."""
    from .dynamics import phase_transition, rate_envelope

    if max_level < 0:
        raise click.UsageError("max-level must be >= 0")
    try:
        phase = phase_transition(kappa)
        rows = []
        for level in range(max_level + 1):
            n = 1 << level
            rv = silver_rate(kappa, n, bits=precision)
            lo, up = rate_envelope(kappa, n)
            rows.append((n, rv.tau, rv.log_tau / n, lo, up, phase.regime(n)))
    except ValueError as err:
        _usage(err)
    _io.write_csv_atomic(output, ("n", "tau", "avg_log_rate", "lower", "upper", "regime"), rows)
    if not no_plot:
        from .plots import render_rate

        render_rate(rows, phase.n_star, _sibling(output, ".png"))


@main.command()
@click.option("--kappa", type=float, required=True)
@click.option("--n", type=int, required=True)
@_precision_option()
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--dim", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=None, help="Residual gate (default 1e-8, or 1e-20 with --precision).")
@click.option("--output", type=click.Path(dir_okay=False), default="certificate.json", show_default=True)
def certify(kappa, n, precision, trials, dim, seed, tol, output):
    """Build a certificate, verify it, and write both artifacts.

    The verification report lands next to the certificate with a
    .report.json suffix. Exit code 3 means a check failed; the report
    is still written.
    """
    from .certificate import (
        build_certificate,
        certificate_payload,
        esl_matrices,
        verify_identity,
        verify_structure,
    )

    if trials < 1 or dim < 1:
        raise click.UsageError("trials and dim must be >= 1")
    if tol is None:
        tol = 1e-20 if precision is not None else 1e-8
    try:
        cert = build_certificate(kappa, n, bits=precision)
        sched = build_schedule(kappa, n, bits=precision)
        rv = silver_rate(kappa, n, bits=precision)
        if precision is None:
            tau = rv.tau
        else:
            import mpmath

            from .core import normalized_sequence

            with mpmath.workprec(precision):
                pair = normalized_sequence(kappa, n.bit_length() - 1, bits=precision)[-1]
                tau = (pair.u / (2 - pair.u)) ** 2
    except ValueError as err:
        _usage(err)
    identity = verify_identity(sched, cert, tau, trials=trials, dim=dim, seed=seed, tol=tol)
    structure = verify_structure(cert)
    esl_res, esl_emax = None, None
    if n >= 2:
        _e, _s, _l, esl_res = esl_matrices(kappa, n // 2)
        esl_emax = float(abs(_e).max())
    ok = (
        identity.ok
        and identity.max_residual <= tol
        and structure.passes(1e-10)
        and (esl_res is None or esl_res <= 1e-10 * esl_emax)
    )
    _io.write_text_atomic(output, _io.json_text(certificate_payload(cert)))
    report = {
        "kappa": kappa,
        "n": n,
        "precision_bits": precision,
        "tau": rv.tau,
        "tolerance": tol,
        "identity": {
            "max_residual": identity.max_residual,
            "scale": identity.scale,
            "trials": identity.trials,
            "dim": identity.dim,
            "seed": identity.seed,
            "ok": identity.ok,
        },
        "structure": {
            "min_entry": structure.min_entry,
            "star_sparsity_exact": structure.star_sparsity_exact,
            "max_netflow_imbalance": structure.max_netflow_imbalance,
            "ok": structure.passes(1e-10),
        },
        "seam": {"residual": esl_res, "e_max": esl_emax},
        "pass": ok,
    }
    _io.write_text_atomic(_sibling(output, ".report.json"), _io.json_text(report))
    if not ok:
        click.echo("verification FAILED; report written", err=True)
        sys.exit(3)
    click.echo(f"verified: residual {identity.max_residual:.3e} <= {tol:g}")


def _parse_oracle(spec, m, M, alpha):
    from . import gdlab

    parts = spec.split(":")
    kind = parts[0]
    if kind == "quad":
        opts = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
        if "lambda" in opts:
            spectrum = [float(v) for v in opts["lambda"].split(",")]
            return gdlab.quadratic_oracle(spectrum, m=m, M=M)
        if "d" in opts:
            import numpy as np

            d = int(opts["d"])
            if d < 1:
                raise ValueError("quad:d=... needs d >= 1")
            seed = int(opts.get("seed", 0))
            rng = np.random.default_rng(seed)
            lam = np.exp(rng.uniform(np.log(m), np.log(M), size=d))
            lam[0] = M  # keep the extreme curvature in play
            if d > 1:
                lam[-1] = m
            return gdlab.quadratic_oracle(lam, seed=seed, m=m, M=M)
        raise ValueError(f"oracle spec {spec!r} needs lambda=... or d=...")
    if kind == "switch" and len(parts) == 2:
        names = {"first": 0, "second": 1, "third": 2, "fourth": 3}
        if parts[1] in names:
            return gdlab.hard_instances(m, M, alpha)[names[parts[1]]]
        raise ValueError(f"oracle spec {spec!r}: pick one of {sorted(names)}")
    raise ValueError(f"cannot parse oracle spec {spec!r}")


@main.command()
@click.option("--kappa", type=float, required=True)
@click.option("--n", type=int, default=None, help="Silver schedule length (power of 2).")
@click.option("--schedule-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON with a 'steps' array; overrides --n.")
@click.option("--oracle", "oracles", multiple=True, help="quad:lambda=..., quad:d=..:seed=.., switch:third, ...")
@click.option("--adversarial", is_flag=True, help="Search for the worst in-class instance.")
@click.option("--budget", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trajectory", type=click.Path(dir_okay=False), default=None,
              help="Also dump the first oracle's trajectory CSV here.")
@click.option("--output", type=click.Path(dir_okay=False), default="runs.jsonl", show_default=True)
@click.option("--no-plot", is_flag=True)
def simulate(kappa, n, schedule_file, oracles, adversarial, budget, seed, trajectory, output, no_plot):
    """Run gradient descent oracles against a schedule; report JSON lines."""
    from . import gdlab

    if not oracles and not adversarial:
        raise click.UsageError("pass at least one --oracle or --adversarial")
    try:
        if schedule_file is not None:
            data = _io.read_json(schedule_file)
            steps = [float(h) for h in data["steps"]]
            schedule_id = f"custom:{os.path.basename(schedule_file)}"
        elif n is not None:
            steps = [float(h) for h in build_schedule(kappa, n).steps]
            schedule_id = f"silver:kappa={kappa:g}:n={n}"
        else:
            raise ValueError("pass --n or --schedule-file")
        nsteps = len(steps)
        pow2 = nsteps > 0 and nsteps & (nsteps - 1) == 0
        tau = silver_rate(kappa, nsteps).tau if pow2 else math.nan
        m, M = 1.0 / kappa, 1.0
        runs = [( _parse_oracle(spec, m, M, steps[0]), spec) for spec in oracles]
    except (ValueError, KeyError) as err:
        _usage(err)
    lines = []
    first_traj = None
    for oracle, _spec in runs:
        traj = gdlab.run_gd(oracle, [1.0] * len(oracle.minimizer), steps)
        if first_traj is None:
            first_traj = traj
        c = gdlab.contraction(traj)
        lines.append(
            _io.json_line(
                {
                    "schedule_id": schedule_id,
                    "oracle": oracle.description,
                    "contraction": c,
                    "tau_n": tau,
                    "slack": tau - c,
                }
            )
        )
    if adversarial:
        worst = gdlab.adversarial_probe(
            kappa, nsteps, schedule=None if schedule_file is None else steps,
            budget=budget, seed=seed,
        )
        lines.append(
            _io.json_line(
                {
                    "schedule_id": worst.schedule_id,
                    "oracle": worst.oracle_description,
                    "contraction": worst.contraction,
                    "tau_n": worst.tau_n,
                    "slack": worst.slack,
                }
            )
        )
    _io.write_text_atomic(output, "\n".join(lines) + "\n")
    if trajectory is not None and first_traj is not None:
        def vec(row):
            return ";".join(_io.fmt17(v) for v in row)

        rows = [
            (t, vec(first_traj.xs[t]), vec(first_traj.gs[t]), first_traj.fs[t])
            for t in range(len(first_traj.xs))
        ]
        _io.write_csv_atomic(trajectory, ("t", "x", "g", "f"), rows)
        if not no_plot:
            from .plots import render_trajectory

            render_trajectory(first_traj, _sibling(trajectory, ".png"))


@main.command()
@click.option("--m", "m", type=float, required=True, help="Lower curvature bound.")
@click.option("--big-m", "--M", "big_m", type=float, required=True, help="Upper curvature bound.")
@click.option("--contour", type=int, default=None, help="Also write an NxN floor grid CSV.")
@click.option("--output", type=click.Path(dir_okay=False), default="twostep.json", show_default=True)
@click.option("--no-plot", is_flag=True)
def twostep(m, big_m, contour, output, no_plot):
    """Solve the two-step minimax problem; optional contour of the floor."""
    from .twostep import contour_grid, optimal_pair, rate_floor

    try:
        sol = optimal_pair(m, big_m)
        floor = rate_floor(sol.alpha_star, sol.beta_star, m, big_m)
    except ValueError as err:
        _usage(err)
    payload = {
        "m": m,
        "M": big_m,
        "alpha_star": float(sol.alpha_star),
        "beta_star": float(sol.beta_star),
        "R_star": float(sol.R_star),
        "tau_2": float(sol.R_star) ** 2,
        "floor_at_optimum": floor,
    }
    _io.write_text_atomic(output, _io.json_text(payload))
    if contour is not None:
        if contour < 2:
            raise click.UsageError("contour resolution must be >= 2")
        grid = contour_grid(m, big_m, resolution=contour)
        _io.write_csv_atomic(_sibling(output, ".contour.csv"), ("alpha", "beta", "rate"), grid.rows())
        if not no_plot:
            from .plots import render_contour

            render_contour(grid, sol, _sibling(output, ".png"))


@main.command()
@click.option("--kappa", type=float, required=True)
@click.option("--steps", type=int, default=32, show_default=True, help="Iterations of the update map.")
@click.option("--output", type=click.Path(dir_okay=False), default="cobweb.csv", show_default=True)
@click.option("--no-plot", is_flag=True)
def cobweb(kappa, steps, output, no_plot):
    """Trace the stepsize update map from the conservative fixed start."""
    from .dynamics import cobweb_trace

    if steps < 1:
        raise click.UsageError("steps must be >= 1")
    try:
        trace = cobweb_trace(kappa, steps)
    except ValueError as err:
        _usage(err)
    rows = [
        (t, h, s) for t, (h, s) in enumerate(zip(trace.hs, trace.one_minus_hs))
    ]
    _io.write_csv_atomic(output, ("t", "h", "one_minus_h"), rows)
    if not no_plot:
        from .plots import render_cobweb

        render_cobweb(list(trace.hs), kappa, _sibling(output, ".png"))


if __name__ == "__main__":
    main()
