import json
import os
import subprocess
import sys

import numpy as np
import pytest

from wignerlab.cli import main as cli_main
from wignerlab.config import load_run_config, load_sweep_config
from wignerlab.diagnostics import TrajectoryRecord
from wignerlab.runner import compare, run, sweep

HARMONIC_RUN = """
[grid]
nx = 64
np = 64
x_min_length = -10
x_max_length = 10
p_min_momentum = -10
p_max_momentum = 10
hbar_action = 1.0
mass = 1.0

[potential]
kind = harmonic
omega_per_time = 1.0

[initial_state]
kind = gaussian
sigma_x_length = 0.7071067811865476
sigma_p_momentum = 0.7071067811865476

[evolution]
bracket = moyal
dt_time = 0.0628318530717958647
n_steps = 100
record_every = 10

[outputs]
snapshot_every = 50
heatmap = true
"""

DOUBLE_WELL_COMPARE = """
[grid]
nx = 64
np = 64
x_min_length = -8
x_max_length = 8
p_min_momentum = -8
p_max_momentum = 8
hbar_action = 0.5
mass = 1.0

[potential]
kind = double_well
a_quadratic = 1.0
b_quartic = 1.0

[initial_state]
kind = gaussian
x0_length = 1.0
sigma_x_length = 0.6
sigma_p_momentum = 0.6

[evolution]
bracket = moyal
dt_time = 0.02
n_steps = 100
record_every = 10

[outputs]
snapshot_every = 10
"""

# displaced packet: the origin-centered coherent state is stationary and
# converges at a higher order, so it cannot probe the splitting order
DT_SWEEP = (
    HARMONIC_RUN.replace("snapshot_every = 50\nheatmap = true", "snapshot_every = 0")
    .replace("kind = gaussian", "kind = gaussian\nx0_length = 1.0")
    + """
[sweep]
parameter = dt
values = 0.125663706143591729, 0.0628318530717958647, 0.0314159265358979323, 0.0157079632679489662
paired = false
"""
)


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_outputs(tmp_path):
    cfg = load_run_config(HARMONIC_RUN, is_text=True)
    out = str(tmp_path / "run")
    record, _ = run(cfg, out)
    assert os.path.exists(os.path.join(out, "trajectory.csv"))
    assert os.path.exists(os.path.join(out, "config.cfg"))
    assert os.path.exists(os.path.join(out, "snap_00000000.wig"))
    assert os.path.exists(os.path.join(out, "snap_00000000.pgm"))
    back = TrajectoryRecord.from_csv(os.path.join(out, "trajectory.csv"))
    assert np.array_equal(back.times, record.times)
    # harmonic, no environment: purity column constant at 1
    assert np.abs(back["purity"] - 1.0).max() < 1e-6


def test_run_deterministic_outputs(tmp_path):
    cfg = load_run_config(HARMONIC_RUN, is_text=True)
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    run(cfg, out1)
    run(cfg, out2)
    for name in ("trajectory.csv", "snap_00000100.wig"):
        with open(os.path.join(out1, name), "rb") as fa, open(os.path.join(out2, name), "rb") as fb:
            assert fa.read() == fb.read(), name


def test_compare_quadratic_never_breaks(tmp_path):
    text = HARMONIC_RUN.replace("snapshot_every = 50\nheatmap = true", "snapshot_every = 10")
    cfg = load_run_config(text, is_text=True)
    result = compare(cfg, str(tmp_path / "cmp"))
    assert not result.breakdown["moment"].reached
    div = result.divergence
    assert div.rel_mean_x2.max() < 1e-6
    assert div.field_l2 is not None and div.field_l2.max() < 1e-6
    data = json.load(open(tmp_path / "cmp" / "breakdown.json"))
    assert data["moment"]["reached"] is False


def test_compare_double_well_diverges(tmp_path):
    cfg = load_run_config(DOUBLE_WELL_COMPARE, is_text=True)
    result = compare(cfg, str(tmp_path / "cmp"))
    # nonlinear dynamics at hbar = 0.5: visible quantum-classical divergence
    assert result.divergence.rel_mean_x2.max() > 0.01
    assert os.path.exists(tmp_path / "cmp" / "divergence.csv")
    assert os.path.exists(tmp_path / "cmp" / "quantum" / "trajectory.csv")
    assert os.path.exists(tmp_path / "cmp" / "classical" / "trajectory.csv")


def test_dt_sweep_second_order(tmp_path):
    sw = load_sweep_config(DT_SWEEP, is_text=True)
    out = str(tmp_path / "sweep")
    result = sweep(sw, out)
    assert not result.failures
    report = open(os.path.join(out, "fit_report.txt")).read()
    slope = float(report.split("log-log slope:")[1].split()[0])
    assert 1.8 <= slope <= 2.2
    assert os.path.exists(os.path.join(out, "summary.csv"))


def test_sweep_parallel_matches_serial(tmp_path):
    sw = load_sweep_config(DT_SWEEP, is_text=True)
    out1, out2 = str(tmp_path / "serial"), str(tmp_path / "par")
    sweep(sw, out1, parallel=1)
    sweep(sw, out2, parallel=2)
    with open(os.path.join(out1, "summary.csv"), "rb") as fa, open(
        os.path.join(out2, "summary.csv"), "rb"
    ) as fb:
        assert fa.read() == fb.read()


def test_sweep_partial_failure(tmp_path):
    bad = DT_SWEEP.replace(
        "values = 0.125663706143591729, 0.0628318530717958647, 0.0314159265358979323, 0.0157079632679489662",
        "values = 0.9, 0.0628318530717958647, 0.0314159265358979323",
    )  # 0.9 violates the stability bound
    sw = load_sweep_config(bad, is_text=True)
    out = str(tmp_path / "sweep")
    from wignerlab.runner import PartialSweepError

    with pytest.raises(PartialSweepError):
        sweep(sw, out)
    failures = json.load(open(os.path.join(out, "failures.json")))
    assert "0" in failures
    assert os.path.exists(os.path.join(out, "summary.csv"))


# ---------------------------------------------------------------------------
# CLI entry points


def test_cli_run_and_snapshot_to_pgm(tmp_path):
    cfg_path = _write(tmp_path, "run.cfg", HARMONIC_RUN)
    out = str(tmp_path / "out")
    assert cli_main(["run", "--config", cfg_path, "--out", out]) == 0
    wig = os.path.join(out, "snap_00000100.wig")
    assert cli_main(["snapshot-to-pgm", wig, "--out", str(tmp_path / "x.pgm")]) == 0
    assert os.path.exists(tmp_path / "x.pgm")


def test_cli_config_error_exit_code(tmp_path):
    cfg_path = _write(tmp_path, "bad.cfg", HARMONIC_RUN.replace("nx = 64", "nx = 60"))
    code = cli_main(["run", "--config", cfg_path, "--out", str(tmp_path / "out")])
    assert code == 2


def test_cli_missing_file_exit_code(tmp_path):
    code = cli_main(["run", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o")])
    assert code == 2


def test_cli_compare(tmp_path):
    cfg_path = _write(
        tmp_path, "cmp.cfg",
        HARMONIC_RUN.replace("snapshot_every = 50\nheatmap = true", "snapshot_every = 0"),
    )
    out = str(tmp_path / "out")
    assert cli_main(["compare", "--config", cfg_path, "--out", out, "--verbose"]) == 0
    assert os.path.exists(os.path.join(out, "divergence.csv"))


def test_cli_estimate(tmp_path, capsys):
    scenario = """
[scenario]
name = hyperion
mass_kg = 5.62e18
speed_m_per_s = 5.07e3
period_days = 21.28
lyapunov_inverse_days = 42.0
reference_t_r_years = 20.0
reference_log_action = 100.0
"""
    cfg_path = _write(tmp_path, "scenario.cfg", scenario)
    out = str(tmp_path / "est")
    assert cli_main(["estimate", "--config", cfg_path, "--out", out]) == 0
    captured = capsys.readouterr()
    assert "ln(A0/hbar)" in captured.out
    assert os.path.exists(os.path.join(out, "estimates.csv"))


def test_cli_entrypoint_subprocess(tmp_path):
    cfg_path = _write(tmp_path, "run.cfg", HARMONIC_RUN)
    out = str(tmp_path / "out")
    proc = subprocess.run(
        [sys.executable, "-m", "wignerlab.cli", "run", "--config", cfg_path, "--out", out],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert os.path.exists(os.path.join(out, "trajectory.csv"))


def test_cli_numeric_abort_exit_code(tmp_path, monkeypatch):
    cfg_path = _write(tmp_path, "run.cfg", HARMONIC_RUN)

    def explode(*args, **kwargs):
        from wignerlab.errors import NumericsError

        raise NumericsError("synthetic abort", step=3)

    monkeypatch.setattr("wignerlab.runner.evolve", explode)
    code = cli_main(["run", "--config", cfg_path, "--out", str(tmp_path / "out")])
    assert code == 3


INVERTED_D_SWEEP = """
[grid]
nx = 512
np = 512
x_min_length = -7.3
x_max_length = 7.3
p_min_momentum = -7.3
p_max_momentum = 7.3
hbar_action = 0.001
mass = 1.0

[potential]
kind = inverted
lambda0_per_time = 1.0

[initial_state]
kind = gaussian
sigma_x_length = 0.0559
sigma_p_momentum = 0.0559
xp_correlation = -0.6

[evolution]
bracket = moyal
dt_time = 0.01
n_steps = 250
record_every = 5

[environment]
D_p2_per_time = 0.01

[sweep]
parameter = D
values = 0.005, 0.01, 0.02
paired = false
"""


def test_d_sweep_critical_dispersion_slope(tmp_path):
    # sigma_c^2 against 2D/lambda across the sweep: unit slope
    sw = load_sweep_config(INVERTED_D_SWEEP, is_text=True)
    out = str(tmp_path / "dsweep")
    sweep(sw, out)
    report = open(os.path.join(out, "fit_report.txt")).read()
    slope = float(report.split("sigma_c^2 vs 2D/lambda slope:")[1].split()[0])
    assert abs(slope - 1.0) < 0.02


HBAR_SWEEP_SMALL = DOUBLE_WELL_COMPARE.replace("snapshot_every = 10", "snapshot_every = 0") + """
[sweep]
parameter = hbar
values = 0.5, 0.25, 0.125, 0.0625
paired = true
moment_threshold = 0.02
lyapunov_x0_length = 1.0
lyapunov_p0_momentum = 0.3
lyapunov_duration_time = 40.0
lyapunov_dt_time = 0.01
"""


def test_hbar_sweep_report_structure(tmp_path):
    sw = load_sweep_config(HBAR_SWEEP_SMALL, is_text=True)
    out = str(tmp_path / "hsweep")
    result = sweep(sw, out)
    report = result.fit_report
    assert "classical lyapunov" in report
    assert "breakdown[moment]" in report
    assert "breakdown[ratio_classical]" in report
    for i in range(4):
        assert os.path.exists(os.path.join(out, f"member_{i:02d}", "divergence.csv"))
    assert os.path.exists(os.path.join(out, "summary.csv"))
