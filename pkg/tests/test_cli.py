import json
import subprocess
import sys

import pytest

from histphase import cli
from histphase.scenarios import SCENARIOS, ConfigError, RunRecord, ScenarioConfig


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "histphase.cli", *args], capture_output=True, text=True)


def test_list_scenarios(capsys):
    assert cli.main(["--list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in SCENARIOS:
        assert name in out


def test_help_documents_columns():
    proc = run_cli("--help")
    assert proc.returncode == 0
    for spec in SCENARIOS.values():
        for col in spec.columns:
            assert col in proc.stdout


@pytest.mark.parametrize("name", ["double_slit", "convergence", "bloch_loop"])
def test_csv_is_deterministic(name, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main([name, "--output", str(a)]) == 0
    assert cli.main([name, "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0].split(",")
    assert header == list(SCENARIOS[name].columns)


def test_json_output_has_metadata(capsys):
    assert cli.main(["df_coarse_check", "--format", "json", "--seed", "3", "--param", "trials=4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    meta = doc["metadata"]
    assert meta["scenario"] == "df_coarse_check"
    assert meta["seed"] == 3 and meta["params"]["trials"] == 4
    assert meta["columns"] == list(SCENARIOS["df_coarse_check"].columns)
    assert all(meta["checks"].values())
    assert "wall_time" not in meta
    assert len(doc["rows"]) == 4


def test_seed_changes_random_scenarios(capsys):
    cli.main(["df_coarse_check", "--seed", "1", "--param", "trials=2"])
    first = capsys.readouterr().out
    cli.main(["df_coarse_check", "--seed", "2", "--param", "trials=2"])
    assert capsys.readouterr().out != first


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "convergence", "params": {"theta": 1.0}, "n_steps": 64, "format": "json"}))
    assert cli.main(["--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["metadata"]["n_steps"] == 64
    assert [r["n"] for r in doc["rows"]] == [8, 16, 32, 64]


@pytest.mark.parametrize(
    "argv",
    [
        ["nope"],
        ["convergence", "--param", "theta"],
        ["convergence", "--param", "theta=abc"],
        ["convergence", "--param", "bogus=1"],
        ["convergence", "--n-steps", "2"],
        ["bloch_loop", "--param", "theta=0"],
        [],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    err = capsys.readouterr().err
    assert json.loads(err.splitlines()[0])["status"] == "error"


def test_bad_config_file_exits_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "convergence", "extra": 1}))
    assert cli.main(["--config", str(cfg)]) == 2
    assert cli.main(["--config", str(tmp_path / "missing.json")]) == 2


def test_failed_checks_exit_1(monkeypatch, capsys):
    def fake_run(config):
        return RunRecord(config.scenario, {}, [{c: 0 for c in SCENARIOS[config.scenario].columns}], 0.0,
                         checks={"something": False})

    monkeypatch.setattr(cli, "run", fake_run)
    assert cli.main(["convergence"]) == 1
    err = capsys.readouterr().err
    record = json.loads(err.strip().splitlines()[-1])
    assert record["status"] == "fail" and record["failures"] == ["something"]


def test_config_validation_direct():
    with pytest.raises(ConfigError):
        ScenarioConfig("convergence", format="xml").validate()
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"params": {}})
