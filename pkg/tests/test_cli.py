import subprocess
import sys

import numpy as np
import pytest

from echotransform.cli import main
from echotransform.config import load_config
from echotransform.errors import ConfigError
from echotransform.formats import dump_matrix, load_design, load_schedule
from echotransform.kernel import CALIBRATED_JITTER_SIGMA


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(*argv):
    return main([str(a) for a in argv])


def phased_splitter_file(tmp_path):
    pb1, pa1, pb2 = 0.4, -0.9, 1.3
    pa2 = pa1 + pb2 - pb1 + np.pi
    u = np.array([[np.exp(1j * pb1), np.exp(1j * pa1)], [np.exp(1j * pb2), np.exp(1j * pa2)]]) / np.sqrt(2)
    return write(tmp_path, "splitter.txt", dump_matrix(u))


def test_design_qubit(tmp_path, capsys):
    cfg = write(tmp_path, "q.yaml", f"scenario: qubit_usd\nalpha: {float(np.arccos(np.sqrt(2 / 3)))!r}\nout: {tmp_path}\n")
    assert run("design", "--config", cfg) == 0
    d = load_design((tmp_path / "design.usd").read_text())
    assert d.p_inconclusive_avg == pytest.approx(1 / 3, abs=1e-12)
    assert "IDP bound: 0.3333333333" in capsys.readouterr().out


def test_design_orthogonal_custom_pair(tmp_path):
    cfg = write(tmp_path, "o.yaml", f"scenario: qutrit_usd\nstates: [[1, 0], [0, 1]]\nout: {tmp_path}\n")
    assert run("design", "--config", cfg) == 0
    assert load_design((tmp_path / "design.usd").read_text()).p_inconclusive_avg == pytest.approx(0, abs=1e-12)


def test_design_dependent_triple_fails(tmp_path, capsys):
    cfg = write(tmp_path, "d.yaml", "scenario: qutrit_usd\n"
                "states: [[1, 0, 0], [0, 1, 0], [0.7071067811865476, 0.7071067811865476, 0]]\n"
                f"out: {tmp_path}\n")
    assert run("design", "--config", cfg) == 1
    assert "DegenerateSetError" in capsys.readouterr().err


def test_compile_phased_splitter(tmp_path, capsys):
    m = phased_splitter_file(tmp_path)
    assert run("compile", m, "--out", tmp_path) == 0
    s = load_schedule((tmp_path / "schedule.sched").read_text())
    assert len(s.train.reads) == 4
    assert sorted(s.read_clusters) == [0, 0, 1, 1]
    assert "0 forbidden" in capsys.readouterr().out


def test_compile_identity_three_clusters(tmp_path):
    m = write(tmp_path, "id.txt", dump_matrix(np.eye(3)))
    assert run("compile", m, "--out", tmp_path) == 0
    s = load_schedule((tmp_path / "schedule.sched").read_text())
    assert sorted(s.read_clusters) == [0, 1, 2]


def test_compile_byte_identical_rerun(tmp_path):
    m = phased_splitter_file(tmp_path)
    run("compile", m, "--out", tmp_path / "a")
    run("compile", m, "--out", tmp_path / "b")
    assert (tmp_path / "a/schedule.sched").read_bytes() == (tmp_path / "b/schedule.sched").read_bytes()


def test_compile_design_file_then_lint(tmp_path):
    cfg = write(tmp_path, "q.yaml", f"scenario: qubit_usd\nalpha: 0.4\nout: {tmp_path}\n")
    run("design", "--config", cfg)
    assert run("compile", tmp_path / "design.usd", "--out", tmp_path) == 0
    assert run("lint", tmp_path / "schedule.sched") == 0
    assert run("lint", tmp_path / "schedule.sched", "--duration", 250) == 1


def test_compile_errors(tmp_path, capsys):
    bad = write(tmp_path, "bad.txt", "1 1\n0 1\n")
    assert run("compile", bad, "--out", tmp_path) == 1
    garbled = write(tmp_path, "g.txt", "1 0\n0 what\n")
    assert run("compile", garbled, "--out", tmp_path) == 2
    assert "line 2" in capsys.readouterr().err
    u = write(tmp_path, "u.txt", dump_matrix(np.eye(3)))
    assert run("compile", u, "--out", tmp_path, "--max-horizon", -1) == 1


def test_simulate_qutrit_four_windows(tmp_path):
    cfg = write(tmp_path, "t.yaml", f"scenario: qutrit_usd\nsymmetric_overlap: 0.3\nout: {tmp_path}\n")
    assert run("simulate", "--config", cfg) == 0
    for i in range(3):
        trace = (tmp_path / f"trace_state{i}.csv").read_text().splitlines()
        assert trace[0] == "time_ns,field_re,field_im,intensity"
        areas = (tmp_path / f"areas_state{i}.csv").read_text().splitlines()
        roles = [row.split(",")[-1] for row in areas[1:]]
        assert len(roles) == 4
        assert roles.count("right") == 1 and roles.count("wrong") == 2 and roles.count("inconclusive") == 1


def test_simulate_with_schedule_file(tmp_path):
    cfg = write(tmp_path, "q.yaml", f"scenario: qubit_usd\nalpha: 0.5\nout: {tmp_path}\nkernel: spectral\n")
    run("design", "--config", cfg)
    run("compile", tmp_path / "design.usd", "--out", tmp_path)
    assert run("simulate", "--config", cfg, "--schedule", tmp_path / "schedule.sched") == 0


def test_simulate_missing_schedule(tmp_path, capsys):
    cfg = write(tmp_path, "q.yaml", f"scenario: qubit_usd\nout: {tmp_path}\n")
    assert run("simulate", "--config", cfg, "--schedule", tmp_path / "nope.sched") == 2
    err = capsys.readouterr().err
    assert "usage:" in err and "does not exist" in err


def test_sweep_and_report_saturate_bounds(tmp_path, capsys):
    cfg = write(tmp_path, "s.yaml", f"scenario: qubit_usd\njitter: 0\ntrials: 1\nout: {tmp_path}\n")
    assert run("sweep", "--config", cfg) == 0
    rows = (tmp_path / "rate_curve.csv").read_text().splitlines()
    assert len(rows) == 9
    assert run("report", "--config", cfg, "--strict") == 0
    report = (tmp_path / "report.txt").read_text()
    assert "ALL POINTS WITHIN TOLERANCE" in report
    assert report.count("PASS") == 24 and "FAIL" not in report


def test_report_strict_fails_with_jitter(tmp_path):
    cfg = write(tmp_path, "s.yaml", "scenario: qubit_usd\nalphas: [0.3]\njitter: calibrated\n"
                f"trials: 30\nout: {tmp_path}\n")
    assert run("report", "--config", cfg, "--strict") == 1
    assert run("report", "--config", cfg) == 0


def test_end_to_end_determinism(tmp_path):
    cfg = write(tmp_path, "s.yaml", "scenario: qubit_usd\nalphas: [0.2, 0.6]\njitter: calibrated\n"
                "trials: 25\nseed: 11\n")
    for d in ("a", "b"):
        assert run("sweep", "--config", cfg, "--out", tmp_path / d) == 0
        assert run("simulate", "--config", cfg, "--out", tmp_path / d) == 0
    for name in ("rate_curve.csv", "rate_curve.dat", "trace_state0.csv", "areas_state1.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    run("sweep", "--config", cfg, "--out", tmp_path / "c", "--seed", 12)
    assert (tmp_path / "c/rate_curve.csv").read_bytes() != (tmp_path / "a/rate_curve.csv").read_bytes()


def test_config_validation(tmp_path, capsys):
    cfg = write(tmp_path, "u.yaml", "scenario: qubit_usd\nmodel:\n  bandwith: 2\n")
    assert run("design", "--config", cfg) == 2
    assert "model.bandwith (line 3)" in capsys.readouterr().err
    for text in ("scenario: qubit_usd\nalpha: 1.2\n", "scenario: nope\n", "scenario: custom_unitary\n",
                 "scenario: custom_unitary\nmatrix_file: missing.txt\n", "scenario: qubit_usd\ntrials: 0\n",
                 "scenario: qubit_usd\njitter: lots\n", "scenario: qubit_usd\nalpha: big\n", "- a\n- b\n", "scenario: [unclosed\n"):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "x.yaml", text))
    assert run("design") == 2


def test_config_values(tmp_path):
    write(tmp_path, "m.txt", "0 1\n1 0\n")
    cfg = load_config(write(tmp_path, "c.yaml", "scenario: custom_unitary\nmatrix_file: m.txt\n"
                            "jitter: calibrated\nlayout:\n  mode_spacing: 120\nanalysis:\n  window_half_width: 20\n"))
    assert cfg.model.phase_jitter_sigma == CALIBRATED_JITTER_SIGMA
    assert cfg.layout.mode_spacing == 120 and cfg.window_half_width == 20
    assert np.array_equal(cfg.matrix, [[0, 1], [1, 0]])
    assert cfg.with_overrides(seed=5, jitter="0").model.phase_jitter_sigma == 0


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "echotransform", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "compile" in out.stdout
