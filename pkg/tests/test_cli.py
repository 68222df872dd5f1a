import csv
import json

import numpy as np
import pytest

import damekricci.cli as cli
from damekricci.errors import NumericalError


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def read_table(path):
    with open(path) as fh:
        config = json.loads(fh.readline().removeprefix("# config: "))
        rows = list(csv.DictReader(fh))
    return config, rows


def test_eval_phi_h3_matches_closed_form(tmp_path):
    assert run(tmp_path, "eval-phi", "--space", "0,2", "--lambda", "1,-1", "--s-max", "6") == 0
    _, rows = read_table(tmp_path / "phi_lambda=1.csv")
    s = np.array([float(r["s"]) for r in rows])
    phi = np.array([float(r["phi"]) for r in rows])
    expected = np.where(s > 0, np.sin(s) / np.sinh(np.where(s > 0, s, 1)), 1.0)
    assert np.max(np.abs(phi - expected)) <= 1e-8
    assert rows[0]["near_main"] == "" and rows[-1]["near_main"] == "" and rows[-1]["far_main"] != ""
    # the spherical function is even in lambda, so both files agree column for column
    _, neg = read_table(tmp_path / "phi_lambda=-1.csv")
    assert neg == rows
    assert (tmp_path / "phi.gp").exists()


def test_eval_phi_rejects_empty_radius_range(tmp_path, capsys):
    assert run(tmp_path, "eval-phi", "--s-max", "0") == 2
    assert "s_max" in capsys.readouterr().err


def test_c_function_table(tmp_path):
    assert run(tmp_path, "c-function", "--lambda", "0.5,2", "--format", "json") == 0
    data = json.loads((tmp_path / "c_function.json").read_text())
    assert data["rows"][1]["c_im"] == pytest.approx(-0.5, abs=1e-14)
    assert data["config"]["lambdas"] == [0.5, 2.0]
    assert run(tmp_path, "c-function", "--lambda", "0") == 2


def test_transform_roundtrip_and_tolerance(tmp_path):
    assert run(tmp_path, "transform", "--roundtrip", "--s-max", "8") == 0
    summary = json.loads((tmp_path / "transform.json").read_text())
    assert summary["pass"] and summary["roundtrip_max_abs_error"] <= 1e-6
    assert (tmp_path / "spectrum.csv").read_text().startswith("# grid: ")
    assert run(tmp_path, "transform", "--roundtrip", "--s-max", "8", "--tol", "1e-20") == 1


def test_sharpness_is_byte_identical_on_rerun(tmp_path):
    args = ("sharpness", "--N", "16,32,64")
    names = ("sharpness_report.json", "sharpness.csv", "sharpness.gp")
    assert run(tmp_path, *args) in (0, 1)
    first = {name: (tmp_path / name).read_bytes() for name in names}
    assert run(tmp_path, *args) in (0, 1)
    assert all((tmp_path / name).read_bytes() == first[name] for name in names)
    report = json.loads(first["sharpness_report.json"])
    assert report["inputs"]["config"]["N_list"] == [16, 32, 64]


def test_sharpness_rejects_empty_N(tmp_path):
    assert run(tmp_path, "sharpness", "--N", "") == 2


def test_maximal_refinement_monotone(tmp_path, capsys):
    code = run(tmp_path, "maximal", "--N", "16,32", "--beta", "0.175", "--t-count", "16", "--refine")
    assert code == 0
    assert "refinement norms monotone: True" in capsys.readouterr().out
    _, rows = read_table(tmp_path / "maximal_refinement.csv")
    for N in ("16", "32"):
        norms = [float(r["ball_norm"]) for r in rows if r["N"] == N]
        assert len(norms) >= 2 and all(b >= a for a, b in zip(norms, norms[1:]))


def test_small_oscillatory_sweep(tmp_path):
    code = run(tmp_path, "oscillatory", "--a", "0.5", "--beta", "0.2", "--N", "16,64",
               "--epsilon-list", "1", "--x-count", "3")
    assert code in (0, 1)
    _, rows = read_table(tmp_path / "oscillatory_sup.csv")
    assert [r["N"] for r in rows] == ["16", "64"]


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def boom(cfg):
        raise NumericalError("solver gave up", s=0.5)

    monkeypatch.setitem(cli.HANDLERS, "pitt", boom)
    assert run(tmp_path, "pitt") == 3
    assert "solver gave up" in capsys.readouterr().err


def test_config_file_and_flag_override(tmp_path):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({"space": [2, 1], "lambdas": [0.5, 3.0], "s_max": 4.0}))
    out = tmp_path / "out"
    assert cli.main(["c-function", "--config", str(cfg_path), "--lambda", "1.5", "--out", str(out)]) == 0
    config, rows = read_table(out / "c_function.csv")
    assert config["space"] == [2, 1] and config["lambdas"] == [1.5] and config["s_max"] == 4.0
    assert [r["lambda"] for r in rows] == ["1.5"]


def test_unknown_config_key(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({"spaec": [2, 1]}))
    assert cli.main(["c-function", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2
    assert "spaec" in capsys.readouterr().err


@pytest.mark.parametrize("args", [["--a", "1.5"], ["--space", "1,2"], ["--t", "1.0"], ["--threads", "0"]])
def test_invalid_values_exit_2(tmp_path, args):
    assert run(tmp_path, "c-function", *args) == 2


def test_parse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["no-such-command"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["c-function", "--space", "two"])
    assert info.value.code == 2


def test_every_output_embeds_config(tmp_path):
    assert run(tmp_path, "propagate", "--t", "0.3", "--s-max", "6", "--threads", "1") == 0
    for name in ("propagate.csv", "propagate.gp"):
        first = (tmp_path / name).read_text().splitlines()[0]
        assert first.startswith("# config: ") and json.loads(first[10:])["t"] == 0.3
