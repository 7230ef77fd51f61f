"""Command line behavior: exit codes, output paths, error reporting."""

import json

import pytest

from figures import FigureSpec, spec_to_dict
from figures.cli import EXIT_CONFIG, EXIT_OK, main


@pytest.fixture
def spec_file(tmp_path, write_table, make_row):
    """A valid spec JSON pointing at a small result table."""
    rows = [make_row(sweep_value=q, analytic_value=v,
                     simulated_mean=v, simulated_stderr=0.01)
            for q, v in ((0.5, 0.9), (0.9, 0.95))]
    table = write_table("t.csv", rows)
    spec = FigureSpec(inputs=(table,), kind="curve-vs-sweep",
                      output=str(tmp_path / "fig.png"))
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec_to_dict(spec)))
    return path


def test_render_writes_image_and_prints_path(tmp_path, spec_file, capsys):
    assert main(["render", "--spec", str(spec_file)]) == EXIT_OK
    assert (tmp_path / "fig.png").exists()
    assert capsys.readouterr().out.strip().endswith("fig.png")


def test_out_flag_overrides_spec(tmp_path, spec_file, capsys):
    out = tmp_path / "elsewhere.png"
    assert main(["render", "--spec", str(spec_file), "--out", str(out)]) == EXIT_OK
    assert out.exists()
    assert not (tmp_path / "fig.png").exists()
    assert capsys.readouterr().out.strip().endswith("elsewhere.png")


def test_missing_spec_file_fails(tmp_path, capsys):
    code = main(["render", "--spec", str(tmp_path / "absent.json")])
    assert code == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_invalid_spec_json_fails(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{oops")
    assert main(["render", "--spec", str(path)]) == EXIT_CONFIG
    assert "JSON" in capsys.readouterr().err


def test_table_with_missing_columns_fails(tmp_path, write_table, make_row,
                                          capsys):
    table = write_table("t.csv", [make_row(sweep_value=0.5,
                                           analytic_value=0.9)],
                        drop=("bound_lower",))
    spec = FigureSpec(inputs=(table,), kind="curve-vs-sweep",
                      output=str(tmp_path / "fig.png"))
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec_to_dict(spec)))
    assert main(["render", "--spec", str(path)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "bound_lower" in err
    assert not (tmp_path / "fig.png").exists()


def test_metric_mismatch_fails(tmp_path, write_table, make_row, capsys):
    table = write_table("t.csv", [make_row(sweep_value=0.5,
                                           analytic_value=0.9)])
    spec = FigureSpec(inputs=(table,), kind="curve-vs-sweep",
                      output=str(tmp_path / "fig.png"), metric="opportunity")
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec_to_dict(spec)))
    assert main(["render", "--spec", str(path)]) == EXIT_CONFIG
    assert "opportunity" in capsys.readouterr().err


def test_subcommand_is_required():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2
