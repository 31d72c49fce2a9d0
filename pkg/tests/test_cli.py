import csv
import json
import os

import pytest

from xxz_droplets.cli import main


def run(tmp_path, monkeypatch, *argv):
    monkeypatch.chdir(tmp_path)
    return main(list(argv))


def test_droplet_csv_has_one_row_per_momentum(tmp_path, monkeypatch):
    code = run(tmp_path, monkeypatch,
               "droplet", "--sites", "8", "--down", "2", "--epsilon", "0.05",
               "--wmax", "5", "--format", "csv", "--no-timestamp", "--no-plot")
    assert code == 0
    with open(tmp_path / "droplet.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k_index", "k", "E"]
    assert len(rows) == 1 + 8


def test_kink_zero_coupling_energy_is_two(tmp_path, monkeypatch):
    code = run(tmp_path, monkeypatch,
               "kink", "--sites", "8", "--down", "4", "--epsilon", "0",
               "--wmax", "4", "--no-timestamp", "--no-plot")
    assert code == 0
    doc = json.loads((tmp_path / "kink.json").read_text())
    assert doc["energy"] == 2.0
    assert doc["oracle_check"]["abs_diff"] == 0.0


def test_verify_writes_report_and_figure(tmp_path, monkeypatch):
    code = run(tmp_path, monkeypatch,
               "verify", "--sites", "8", "--down", "2", "--epsilon", "0.05",
               "--wmax", "6", "--no-timestamp")
    assert code == 0
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert len(doc["rows"]) == 8
    assert doc["max_abs_diff"] <= doc["tolerance"]
    assert "residual_sweep" in doc
    assert (tmp_path / "verify.png").exists()


def test_no_plot_skips_figure(tmp_path, monkeypatch):
    run(tmp_path, monkeypatch,
        "verify", "--sites", "8", "--down", "2", "--epsilon", "0.05",
        "--wmax", "5", "--no-timestamp", "--no-plot")
    assert not (tmp_path / "verify.png").exists()


def test_verify_csv_table(tmp_path, monkeypatch):
    run(tmp_path, monkeypatch,
        "verify", "--sites", "8", "--down", "2", "--epsilon", "0.05",
        "--wmax", "5", "--format", "csv", "--no-timestamp", "--no-plot")
    with open(tmp_path / "verify.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k_index", "k", "E", "E_oracle", "abs_diff", "rank"]
    assert len(rows) == 1 + 8


def test_artifacts_are_byte_identical_across_reruns(tmp_path, monkeypatch):
    argv = ["droplet", "--sites", "8", "--down", "2", "--epsilon", "0.05",
            "--wmax", "5", "--no-timestamp", "--no-plot"]
    run(tmp_path, monkeypatch, *argv)
    first = (tmp_path / "droplet.json").read_bytes()
    run(tmp_path, monkeypatch, *argv)
    assert (tmp_path / "droplet.json").read_bytes() == first


def test_timestamp_present_by_default(tmp_path, monkeypatch):
    run(tmp_path, monkeypatch,
        "enumerate", "--sites", "6", "--down", "2", "--wmax", "2")
    doc = json.loads((tmp_path / "enumerate.json").read_text())
    assert "generated_at" in doc


def test_enumerate_json_schema(tmp_path, monkeypatch):
    run(tmp_path, monkeypatch,
        "enumerate", "--sites", "8", "--down", "3", "--wmax", "3",
        "--topology", "open", "--no-timestamp")
    doc = json.loads((tmp_path / "enumerate.json").read_text())
    assert doc["geometry"] == {"N": 8, "topology": "open"}
    assert {"sites", "w", "walls"} == set(doc["entries"][0])


def test_oracle_dump(tmp_path, monkeypatch):
    code = run(tmp_path, monkeypatch,
               "oracle", "--sites", "8", "--down", "2", "--epsilon", "0.1",
               "--no-timestamp")
    assert code == 0
    doc = json.loads((tmp_path / "oracle.json").read_text())
    assert sum(b["dim"] for b in doc["blocks"]) == 28


def test_scaling_and_stability_artifacts(tmp_path, monkeypatch):
    code = run(tmp_path, monkeypatch,
               "scaling", "--sites", "8", "--down", "2",
               "--epsilon-grid", "0.02,0.04,0.08", "--no-timestamp")
    assert code == 0
    doc = json.loads((tmp_path / "scaling.json").read_text())
    assert abs(doc["slope"] - 2.0) < 0.1
    assert (tmp_path / "scaling.png").exists()

    code = run(tmp_path, monkeypatch,
               "stability", "--down", "2", "--epsilon", "0.05", "--wmax", "4",
               "--sites-grid", "8,10,12", "--no-timestamp", "--no-plot")
    assert code == 0
    doc = json.loads((tmp_path / "stability.json").read_text())
    assert doc["N_grid"] == [8, 10, 12]


def test_one_magnon_droplet_path(tmp_path, monkeypatch):
    code = run(tmp_path, monkeypatch,
               "droplet", "--sites", "8", "--down", "1", "--epsilon", "0.05",
               "--format", "csv", "--no-timestamp", "--no-plot")
    assert code == 0
    with open(tmp_path / "droplet.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 8


def test_config_file_with_flag_override(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("sites = 8\ndown = 2\nepsilon = 0.05\nwmax = 5\n"
                   "no-timestamp = true\nno-plot = true\n")
    code = run(tmp_path, monkeypatch,
               "droplet", "--config", str(cfg), "--format", "csv")
    assert code == 0
    with open(tmp_path / "droplet.csv") as fh:
        assert len(list(csv.reader(fh))) == 1 + 8


def test_unknown_config_key_is_a_usage_error(tmp_path, monkeypatch):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sites = 8\nwibble = 3\n")
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, monkeypatch, "droplet", "--config", str(cfg))
    assert exc.value.code == 2


def test_missing_required_option_is_a_usage_error(tmp_path, monkeypatch):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, monkeypatch, "droplet", "--sites", "8")
    assert exc.value.code == 2


def test_invalid_parameters_are_usage_errors(tmp_path, monkeypatch):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, monkeypatch,
            "droplet", "--sites", "8", "--down", "8", "--epsilon", "0.05")
    assert exc.value.code == 2


def test_numerical_failure_exits_one_with_record(tmp_path, monkeypatch, capsys):
    code = run(tmp_path, monkeypatch,
               "kink", "--sites", "8", "--down", "3", "--epsilon", "0.05",
               "--max-iter", "1", "--no-plot")
    assert code == 1
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "NonConvergence"
    assert record["command"] == "kink"


def test_output_dir_environment_variable(tmp_path, monkeypatch):
    outdir = tmp_path / "artifacts"
    monkeypatch.setenv("XXZ_DROPLETS_OUTDIR", str(outdir))
    run(tmp_path, monkeypatch,
        "enumerate", "--sites", "6", "--down", "2", "--wmax", "2",
        "--no-timestamp")
    assert (outdir / "enumerate.json").exists()


def test_explicit_output_path(tmp_path, monkeypatch):
    target = tmp_path / "out" / "band.csv"
    run(tmp_path, monkeypatch,
        "droplet", "--sites", "8", "--down", "2", "--epsilon", "0.05",
        "--wmax", "4", "--format", "csv", "--output", str(target),
        "--no-timestamp", "--no-plot")
    assert target.exists()
