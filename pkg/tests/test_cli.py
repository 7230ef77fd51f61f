"""Command-line interface: config loading, output formats, exit codes."""
import csv
import json

import pytest

import osasim.protocols
from osasim import cli
from osasim.analytic import IntegrationError
from osasim.experiments import RESULT_COLUMNS


def write_config(path, **overrides):
    doc = {
        "params": {"N_ra": 0.3},
        "protocol": "PRA",
        "metric": "opportunity",
        "mode": "analytic",
        "n_trials": 50,
        "seed": 3,
    }
    doc.update(overrides)
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_csv_output_matches_published_schema(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    out = tmp_path / "rows.csv"
    assert cli.main(["--config", str(cfg), "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(RESULT_COLUMNS)
    assert len(rows) == 2
    record = dict(zip(rows[0], rows[1]))
    assert record["protocol"] == "PRA"
    assert record["metric"] == "opportunity"
    assert 0.0 < float(record["analytic_value"]) < 1.0
    # analytic mode leaves every simulation cell empty
    for col in ("simulated_mean", "simulated_stderr", "n_trials",
                "n_rejected", "seed"):
        assert record[col] == ""


def test_stdout_output(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json")
    assert cli.main(["--config", str(cfg), "--out", "-"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == ",".join(RESULT_COLUMNS)


def test_jsonl_output(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    out = tmp_path / "rows.jsonl"
    assert cli.main(["--config", str(cfg), "--out", str(out),
                     "--format", "jsonl"]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1
    record = json.loads(lines[0])
    assert set(record) == set(RESULT_COLUMNS)
    assert record["simulated_mean"] is None


def test_preset_runs_analytically(tmp_path):
    out = tmp_path / "fig4a.csv"
    assert cli.main(["--preset", "fig4a", "--mode", "analytic",
                     "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(RESULT_COLUMNS)
    assert len(rows) == 1 + 14  # 2 protocols x 7 sweep points


def test_cli_overrides_reach_the_run(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", mode="both")
    out = tmp_path / "rows.csv"
    assert cli.main(["--config", str(cfg), "--out", str(out),
                     "--trials", "32", "--seed", "11"]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        record = dict(zip(*list(csv.reader(fh))[:2]))
    assert record["n_trials"] == "32"
    assert record["seed"] == "11"
    assert record["simulated_mean"] != ""


def test_output_bytes_are_reproducible(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", mode="both", n_trials=200)
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["--config", str(cfg), "--out", str(out_a)]) == 0
    assert cli.main(["--config", str(cfg), "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_missing_config_file_exits_2(tmp_path, capsys):
    assert cli.main(["--config", str(tmp_path / "nope.json"), "--out", "-"]) == 2
    assert "config error" in capsys.readouterr().err


def test_malformed_json_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json", encoding="utf-8")
    assert cli.main(["--config", str(cfg), "--out", "-"]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_config_document_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json", metric="latency")
    assert cli.main(["--config", str(cfg), "--out", "-"]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_required_parameter_exits_2(tmp_path, capsys):
    # ERR needs an exclusion radius; leaving it unset is a config problem
    cfg = write_config(tmp_path / "cfg.json", protocol="ERR",
                       params={})
    assert cli.main(["--config", str(cfg), "--out", "-"]) == 2
    assert "D_excl" in capsys.readouterr().err


def test_unknown_preset_is_an_argument_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--preset", "fig99", "--out", "-"])
    assert exc.value.code == 2


def test_config_and_preset_are_mutually_exclusive(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    with pytest.raises(SystemExit) as exc:
        cli.main(["--config", str(cfg), "--preset", "fig3", "--out", "-"])
    assert exc.value.code == 2


def test_rejection_cap_exits_4(tmp_path, capsys, monkeypatch):
    # sensing threshold so low the conditioned secondary build cannot succeed
    monkeypatch.setattr(osasim.protocols, "DEFAULT_REJECTION_CAP", 2)
    cfg = write_config(tmp_path / "cfg.json", metric="coverage_secondary",
                       mode="simulate", params={"N_ra": 1e-12}, n_trials=3)
    assert cli.main(["--config", str(cfg), "--out", "-"]) == 4
    assert "rejection cap" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys, monkeypatch):
    def boom(spec):
        raise IntegrationError("quadrature did not converge")

    monkeypatch.setattr(cli, "run", boom)
    cfg = write_config(tmp_path / "cfg.json")
    assert cli.main(["--config", str(cfg), "--out", "-"]) == 3
    assert "numerical failure" in capsys.readouterr().err
