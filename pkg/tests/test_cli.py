import json
import math
import os

import pytest
from click.testing import CliRunner

from silverstep.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _run(runner, args, **kw):
    return runner.invoke(main, args, catch_exceptions=False, **kw)


def test_schedule_two_steps(runner):
    res = _run(runner, ["schedule", "--kappa", "4", "--n", "2"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["kappa"] == 4.0
    assert doc["n"] == 2
    assert doc["steps"] == [1.3333333333333333, 2.0]
    assert doc["tau"] == pytest.approx(1 / 9, rel=1e-15)
    assert doc["normalized"] is None
    assert doc["occupation"] == {"a_2": "1/2", "b_2": "1/2"}


def test_schedule_single_step(runner):
    res = _run(runner, ["schedule", "--kappa", "4", "--n", "1"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["steps"] == [1.6]
    assert doc["tau"] == pytest.approx(0.36, rel=1e-15)
    assert doc["occupation"] is None


def test_schedule_rejects_non_power(runner):
    res = _run(runner, ["schedule", "--kappa", "4", "--n", "3"])
    assert res.exit_code == 2
    assert "n must be a power of 2" in res.output


def test_schedule_needs_exactly_one_mode(runner):
    res = _run(runner, ["schedule", "--kappa", "4"])
    assert res.exit_code == 2
    res = _run(runner, ["schedule", "--kappa", "4", "--n", "2", "--infinite"])
    assert res.exit_code == 2


def test_schedule_infinite_prefix(runner):
    fin = json.loads(_run(runner, ["schedule", "--kappa", "4", "--n", "8"]).output)
    inf = json.loads(_run(runner, ["schedule", "--kappa", "4", "--infinite", "--count", "8"]).output)
    assert inf["n"] is None and inf["tau"] is None and inf["occupation"] is None
    assert inf["steps"][:7] == fin["steps"][:7]
    assert inf["steps"][7] < fin["steps"][7]


def test_schedule_normalized_flag(runner):
    doc = json.loads(_run(runner, ["schedule", "--kappa", "4", "--n", "4", "--normalized"]).output)
    assert doc["normalized"] == pytest.approx([0.125, 0.3090169943749474, 0.125, 0.8090169943749475])


def test_schedule_output_file_roundtrip(runner, tmp_path):
    out = tmp_path / "sched.json"
    res = _run(runner, ["schedule", "--kappa", "4", "--n", "4", "--output", str(out)])
    assert res.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["steps"][1] == 1.7082039324993692


def test_rate_csv(runner, tmp_path):
    out = tmp_path / "rate.csv"
    res = _run(runner, ["rate", "--kappa", "4", "--max-level", "3", "--output", str(out), "--no-plot"])
    assert res.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,tau,avg_log_rate,lower,upper,regime"
    rows = [line.split(",") for line in lines[1:]]
    assert [r[0] for r in rows] == ["1", "2", "4", "8"]
    assert float(rows[0][1]) == pytest.approx(0.36, rel=1e-15)
    assert float(rows[0][2]) == pytest.approx(math.log(0.36), rel=1e-12)
    assert float(rows[2][1]) == pytest.approx(0.011145618000168242, rel=1e-14)
    # kappa=4 transitions immediately: every finite level is saturated
    assert rows[0][5] == "acceleration"
    assert rows[1][5] == "saturation"
    assert not (tmp_path / "rate.png").exists()


def test_rate_plot_file(runner, tmp_path):
    out = tmp_path / "r.csv"
    res = _run(runner, ["rate", "--kappa", "10", "--max-level", "4", "--output", str(out)])
    assert res.exit_code == 0
    assert (tmp_path / "r.png").stat().st_size > 0


def test_certify_roundtrip(runner, tmp_path):
    out = tmp_path / "cert.json"
    res = _run(
        runner,
        ["certify", "--kappa", "4", "--n", "4", "--trials", "20", "--output", str(out)],
    )
    assert res.exit_code == 0
    assert "verified" in res.output
    cert = json.loads(out.read_text())
    assert cert["kappa"] == 4.0 and cert["n"] == 4
    entries = {(i, j): v for i, j, v in cert["entries"]}
    assert entries[(1, 2)] == pytest.approx(0.09442719099991587, rel=1e-13)
    report = json.loads((tmp_path / "cert.report.json").read_text())
    assert report["pass"] is True
    assert report["identity"]["max_residual"] <= report["tolerance"]
    assert report["structure"]["star_sparsity_exact"] is True
    assert report["seam"]["residual"] <= 1e-10 * report["seam"]["e_max"]


def test_certify_rejects_kappa_two(runner, tmp_path):
    res = _run(runner, ["certify", "--kappa", "2", "--n", "4", "--output", str(tmp_path / "c.json")])
    assert res.exit_code == 2
    assert "kappa=2 unsupported; use kappa=2±ε" in res.output


def test_certify_failure_still_writes_report(runner, tmp_path):
    out = tmp_path / "c.json"
    res = _run(
        runner,
        ["certify", "--kappa", "4", "--n", "4", "--trials", "5", "--tol", "0", "--output", str(out)],
    )
    assert res.exit_code == 3
    assert "verification FAILED" in res.output
    report = json.loads((tmp_path / "c.report.json").read_text())
    assert report["pass"] is False
    assert out.exists()  # certificate itself is still written


def test_certify_precision(runner, tmp_path):
    out = tmp_path / "c.json"
    res = _run(
        runner,
        ["certify", "--kappa", "10", "--n", "16", "--precision", "256", "--trials", "5", "--output", str(out)],
    )
    assert res.exit_code == 0
    report = json.loads((tmp_path / "c.report.json").read_text())
    assert report["precision_bits"] == 256
    assert report["tolerance"] == 1e-20
    assert report["identity"]["max_residual"] <= 1e-20


def test_simulate_quadratic(runner, tmp_path):
    out = tmp_path / "runs.jsonl"
    res = _run(
        runner,
        ["simulate", "--kappa", "4", "--n", "2", "--oracle", "quad:lambda=1", "--output", str(out)],
    )
    assert res.exit_code == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 1
    assert rows[0]["contraction"] == pytest.approx(1 / 9, rel=1e-12)
    assert rows[0]["tau_n"] == pytest.approx(1 / 9, rel=1e-15)
    assert rows[0]["slack"] >= -1e-15


def test_simulate_switch_and_adversarial(runner, tmp_path):
    out = tmp_path / "runs.jsonl"
    res = _run(
        runner,
        [
            "simulate", "--kappa", "4", "--n", "2",
            "--oracle", "switch:third",
            "--adversarial", "--budget", "50",
            "--output", str(out),
        ],
    )
    assert res.exit_code == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 2
    assert rows[0]["contraction"] == pytest.approx(1 / 36, rel=1e-12)
    assert rows[1]["oracle"].startswith("quad:")
    assert rows[1]["contraction"] <= rows[1]["tau_n"] * (1 + 1e-10)


def test_simulate_custom_schedule_has_no_rate(runner, tmp_path):
    sched = tmp_path / "steps.json"
    sched.write_text('{"steps": [1.0, 1.0, 1.0]}\n')
    out = tmp_path / "runs.jsonl"
    res = _run(
        runner,
        [
            "simulate", "--kappa", "4", "--schedule-file", str(sched),
            "--oracle", "quad:lambda=1", "--output", str(out),
        ],
    )
    assert res.exit_code == 0
    row = json.loads(out.read_text().splitlines()[0])
    assert row["tau_n"] is None and row["slack"] is None


def test_simulate_requires_oracle(runner, tmp_path):
    res = _run(runner, ["simulate", "--kappa", "4", "--n", "2", "--output", str(tmp_path / "r.jsonl")])
    assert res.exit_code == 2


def test_simulate_bad_oracle_spec(runner, tmp_path):
    res = _run(
        runner,
        ["simulate", "--kappa", "4", "--n", "2", "--oracle", "quad:nope",
         "--output", str(tmp_path / "r.jsonl")],
    )
    assert res.exit_code == 2


def test_simulate_trajectory(runner, tmp_path):
    out = tmp_path / "runs.jsonl"
    traj = tmp_path / "traj.csv"
    res = _run(
        runner,
        ["simulate", "--kappa", "4", "--n", "2", "--oracle", "quad:lambda=1",
         "--trajectory", str(traj), "--output", str(out), "--no-plot"],
    )
    assert res.exit_code == 0
    lines = traj.read_text().splitlines()
    assert lines[0] == "t,x,g,f"
    assert len(lines) == 4  # header + x0, x1, x2
    assert float(lines[1].split(",")[1]) == 1.0


def test_twostep_json(runner, tmp_path):
    out = tmp_path / "two.json"
    res = _run(runner, ["twostep", "--m", "0.25", "--M", "1", "--output", str(out), "--no-plot"])
    assert res.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["alpha_star"] == pytest.approx(4 / 3, rel=1e-15)
    assert doc["beta_star"] == 2.0
    assert doc["R_star"] == pytest.approx(1 / 3, rel=1e-15)
    assert doc["tau_2"] == pytest.approx(1 / 9, rel=1e-15)
    assert doc["floor_at_optimum"] == pytest.approx(1 / 3, rel=1e-13)


def test_twostep_contour(runner, tmp_path):
    out = tmp_path / "two.json"
    res = _run(
        runner,
        ["twostep", "--m", "0.25", "--M", "1", "--contour", "41", "--output", str(out)],
    )
    assert res.exit_code == 0
    csv_lines = (tmp_path / "two.contour.csv").read_text().splitlines()
    assert csv_lines[0] == "alpha,beta,rate"
    assert len(csv_lines) == 1 + 41 * 41
    best = min(csv_lines[1:], key=lambda line: float(line.split(",")[2]))
    a, b, _ = best.split(",")
    assert float(a) == pytest.approx(4 / 3, abs=0.1)
    assert float(b) == pytest.approx(2.0, abs=0.1)
    assert (tmp_path / "two.png").stat().st_size > 0


def test_twostep_rejects_degenerate(runner, tmp_path):
    res = _run(runner, ["twostep", "--m", "1", "--M", "1", "--output", str(tmp_path / "t.json")])
    assert res.exit_code == 2
    assert "need 0 < m < M" in res.output


def test_cobweb_csv(runner, tmp_path):
    out = tmp_path / "cob.csv"
    res = _run(runner, ["cobweb", "--kappa", "10", "--steps", "5", "--output", str(out), "--no-plot"])
    assert res.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,h,one_minus_h"
    assert len(lines) == 7  # header + h_0..h_5
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(2 / 11, rel=1e-15)
    second = lines[2].split(",")
    assert float(second[1]) == pytest.approx(0.3667286161892942, rel=1e-14)


def test_byte_identical_reruns(runner, tmp_path):
    args = ["rate", "--kappa", "10", "--max-level", "6", "--no-plot"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert _run(runner, args + ["--output", str(a)]).exit_code == 0
    assert _run(runner, args + ["--output", str(b)]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()

    sim = ["simulate", "--kappa", "4", "--n", "4", "--adversarial", "--budget", "100"]
    sa = tmp_path / "sa.jsonl"
    sb = tmp_path / "sb.jsonl"
    assert _run(runner, sim + ["--output", str(sa)]).exit_code == 0
    assert _run(runner, sim + ["--output", str(sb)]).exit_code == 0
    assert sa.read_bytes() == sb.read_bytes()


def test_precision_env_variable(runner, tmp_path):
    out = tmp_path / "c.json"
    env = dict(os.environ, SILVERSTEP_PRECISION="192")
    res = runner.invoke(
        main,
        ["certify", "--kappa", "4", "--n", "8", "--trials", "5", "--output", str(out)],
        env=env,
        catch_exceptions=False,
    )
    assert res.exit_code == 0
    report = json.loads((tmp_path / "c.report.json").read_text())
    assert report["precision_bits"] == 192
