import json
import logging

import pytest
import yaml

import mbvqe.verify
from mbvqe.cli import EXIT_INVALID, EXIT_OK, EXIT_PROPERTY_FAILURE, RunConfig, main
from mbvqe.graphstate import decoration_pattern
from mbvqe.mbqc import Domain, standardize
from mbvqe.settings import ConfigError, Settings


def write_config(tmp_path, data):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_settings_defaults_and_overrides(mbvqe_settings, caplog):
    assert mbvqe_settings.SEED == 7
    assert mbvqe_settings.SCHWINGER["s"] == 2
    assert mbvqe_settings.SCHWINGER["j"] == 1.0
    assert "SCHWINGER.j" in mbvqe_settings.defaulted
    with caplog.at_level(logging.INFO):
        mbvqe_settings.log_defaults()
    assert "Using default for TORIC" in caplog.text
    overridden = Settings(None, {"SEED": 11, "VERIFY.trials": 3})
    assert overridden.SEED == 11
    assert overridden.VERIFY == {"suite": "all", "trials": 3}


def test_settings_reject_unknown_keys(tmp_path):
    with pytest.raises(ConfigError):
        Settings(write_config(tmp_path, {"SPEED": 3}))
    with pytest.raises(ConfigError):
        Settings(write_config(tmp_path, {"TORIC": {"nz": 2}}))


def test_run_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig(Settings(write_config(tmp_path, {"EXPERIMENT": "ising"})))
    with pytest.raises(ConfigError):
        RunConfig(Settings(write_config(tmp_path, {"SCHWINGER": {"s": 3}})))
    with pytest.raises(ConfigError):
        optimizer = {"OPTIMIZER": {"implementation": "x.Y"}}
        RunConfig(Settings(write_config(tmp_path, optimizer)))


def test_invalid_config_exits_with_one(mbvqe_test_config, capsys):
    bad_config = str(mbvqe_test_config.parent / "bad_config.yaml")
    assert main(["verify", "--config", bad_config]) == EXIT_INVALID
    assert "sites" in capsys.readouterr().err
    assert main(["verify", "--suite", "nonsense"]) == EXIT_INVALID


def test_verify_counts(mbvqe_test_config):
    assert main(["verify", "--config", str(mbvqe_test_config)]) == EXIT_OK


def test_verify_decorated_edge_hundred_trials():
    assert main(["verify", "--suite", "eq-s1", "--trials", "100"]) == EXIT_OK


def test_verify_reports_corrupted_byproducts(monkeypatch, capsys):
    def corrupted_cases():
        state = standardize(decoration_pattern())
        first = state.order[0]
        output = state.outputs[0]
        x, z = state.byproducts[output]
        byproducts = dict(state.byproducts)
        byproducts[output] = (x ^ Domain([first]), z)
        return [("corrupted gadget", state.copy(byproducts=byproducts))]

    monkeypatch.setattr(mbvqe.verify, "determinism_cases", corrupted_cases)
    code = main(["verify", "--suite", "determinism", "--trials", "10"])
    assert code == EXIT_PROPERTY_FAILURE
    assert "determinism" in capsys.readouterr().err


def test_compile_writes_states(tmp_path):
    config = write_config(
        tmp_path, {"EXPERIMENT": "compile", "SCHWINGER": {"s": 4, "layers": [1, 3]}}
    )
    out = tmp_path / "out"
    assert main(["compile", "--config", config, "--out", str(out)]) == EXIT_OK
    resources = json.loads((out / "resources.json").read_text())
    assert resources["states"]["schwinger_S4_K1"]["qubits"] == 12
    assert resources["states"]["schwinger_S4_K1"]["rotated_measurements"] == 8
    assert resources["states"]["schwinger_S4_K3"]["qubits"] == 28
    assert resources["states"]["toric_2x2"]["qubits"] == 44
    assert resources["config"]["EXPERIMENT"] == "compile"
    state = json.loads((out / "schwinger_S4_K1.json").read_text())
    assert len(state["vertices"]) == 12
    dot = (out / "toric_2x2.dot").read_text()
    assert sum(1 for line in dot.splitlines() if "label=" in line) == 44


def test_run_is_reproducible(mbvqe_test_config, tmp_path):
    out = tmp_path / "out"
    args = ["run", "--config", str(mbvqe_test_config), "--seed", "7", "--out", str(out)]
    assert main(args) == EXIT_OK
    first = (out / "schwinger_K1.csv").read_bytes()
    assert main(args) == EXIT_OK
    assert (out / "schwinger_K1.csv").read_bytes() == first
    assert first.startswith(b"# mbvqe-csv v1\n# config: ")
    summary = json.loads((out / "schwinger_K1_summary.json").read_text())
    assert summary["config"]["SEED"] == 7
    assert len(summary["points"]) == 3
    assert (out / "schwinger_K1_point0_trace.csv").exists()


def test_run_rejects_verify_experiment(tmp_path):
    config = write_config(tmp_path, {"EXPERIMENT": "verify"})
    assert main(["run", "--config", config, "--out", str(tmp_path)]) == EXIT_INVALID
