import json

import pytest

from carlsim.cli import main
from conftest import scenario_doc


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(scenario_doc(**{"run.duration_s": 40e-6})))
    return p


def test_run_then_analyze_and_tof(scenario_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(scenario_file), "-o", str(out)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert main(["analyze", str(out / "trace.csv")]) == 0
    assert json.loads(capsys.readouterr().out) == printed
    assert main(["tof", str(out / "final_state.json"), "--t-tof", "10e-3", "-o", str(tmp_path / "tof.json")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["integral"] == pytest.approx(1e6, rel=1e-3)


def test_sweep_command(scenario_file, tmp_path, capsys):
    rc = main(["sweep", str(scenario_file), "--param", "pump.power_w", "--values", "1.0,2.0", "-o", str(tmp_path / "sw")])
    assert rc == 0
    assert (tmp_path / "sw" / "summary.csv").exists()
    assert len(json.loads(capsys.readouterr().out)["rows"]) == 2


def test_regime_command(scenario_file, capsys):
    assert main(["regime", str(scenario_file)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["regime"] == ["good-cavity", "semiclassical"]
    assert main(["regime", str(scenario_file), "--condensate-length", "150e-6",
                 "--condensate-waist", "10e-6", "--use", "condensate"]) == 0
    assert json.loads(capsys.readouterr().out)["G_sr"] > 0


def test_validation_exit_code(tmp_path, capsys):
    doc = scenario_doc()
    del doc["atoms"]["n_real"]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert main(["run", str(p), "-o", str(tmp_path / "o")]) == 2
    assert "atoms.n_real" in capsys.readouterr().err
    assert main(["sweep", str(p), "--param", "atoms.n_real", "--values", "x", "-o", str(tmp_path / "o")]) == 2


def test_divergence_exit_code(tmp_path):
    p = tmp_path / "div.json"
    p.write_text(json.dumps(scenario_doc(**{"integrator.dt_s": 1e-3, "run.duration_s": 1.0,
                                            "initial.alpha_minus_re": 1e20})))
    assert main(["run", str(p), "-o", str(tmp_path / "o")]) == 3


def test_unknown_repro_tag():
    with pytest.raises(SystemExit) as exc:
        main(["repro", "fig99", "-o", "x"])
    assert exc.value.code == 2


def test_repro_fig3(tmp_path, capsys):
    assert main(["repro", "fig3", "-o", str(tmp_path)]) == 0
    analysis = json.loads((tmp_path / "analysis.json").read_text())
    assert analysis["passed"]
    assert "PASS fig3.pulse_train" in capsys.readouterr().out
