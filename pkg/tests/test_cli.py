import json

import numpy as np
import pytest

from phdinfluence.cli import main


def run(args):
    return main([str(a) for a in args])


def test_simulate_writes_dataset_and_manifest(tmp_path):
    code = run(["simulate", "--model", "cosine_index", "--n", 50, "--p", 3,
                "--seed", 4, "--sigma", 0.5, "--output-dir", tmp_path])
    assert code == 0
    assert (tmp_path / "dataset.csv").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 4
    assert "dataset.csv" in manifest["outputs"]
    assert manifest["version"]


def test_fit_pipeline(tmp_path, capsys):
    run(["simulate", "--model", "cosine_index", "--n", 400, "--p", 3,
         "--seed", 10, "--sigma", 0.3, "--output-dir", tmp_path])
    code = run(["fit", "--input", tmp_path / "dataset.csv", "--response", "y",
                "--variant", "y", "--k", 1, "--output-dir", tmp_path / "fit"])
    assert code == 0
    lines = (tmp_path / "fit" / "eigenvalues.csv").read_text().splitlines()
    assert lines[0] == "index,eigenvalue,abs_eigenvalue,abs_ratio_to_next"
    assert len(lines) == 4  # header + p rows
    vals = [abs(float(line.split(",")[1])) for line in lines[1:]]
    assert vals == sorted(vals, reverse=True)
    basis = (tmp_path / "fit" / "basis.csv").read_text().splitlines()
    assert basis[0] == "predictor,direction1"
    manifest = json.loads((tmp_path / "fit" / "manifest.json").read_text())
    assert manifest["config"]["predictors_resolved"] == ["x1", "x2", "x3"]
    assert manifest["input"]["sha256"]
    out = capsys.readouterr().out
    assert "leading eigenvalues" in out


def test_influence_pipeline(tmp_path):
    run(["simulate", "--model", "cosine_index", "--n", 60, "--p", 3,
         "--seed", 20, "--sigma", 0.3, "--output-dir", tmp_path])
    code = run(["influence", "--input", tmp_path / "dataset.csv", "--response", "y",
                "--k", 1, "--output-dir", tmp_path / "inf"])
    assert code == 0
    records = (tmp_path / "inf" / "records.csv").read_text().splitlines()
    assert records[0] == "j,variant,direction,sris,eris,hris,md,flags"
    assert len(records) == 1 + 60 * 2  # one row per observation per variant
    report = json.loads((tmp_path / "inf" / "report.json").read_text())
    assert report["n"] == 60 and report["p"] == 3 and report["k"] == 1
    assert set(report["correlations"]) == {"y", "r"}
    corr = (tmp_path / "inf" / "correlations.csv").read_text().splitlines()
    assert corr[0] == "variant,target,direction,spearman"
    assert len(corr) == 1 + 2 * 3 * 2  # per variant, target, direction+average


def test_surface_checkpoint_cell(tmp_path):
    code = run(["surface", "--norm-max", 3, "--grid", 61,
                "--output-dir", tmp_path])
    assert code == 0
    lines = (tmp_path / "surface.csv").read_text().splitlines()
    assert len(lines) == 1 + 61 * 61
    target = None
    for line in lines[1:]:
        cells = line.split(",")
        if float(cells[0]) == 2.0 and float(cells[1]) == 0.0:
            target = cells
    assert target is not None
    assert float(target[2]) == pytest.approx(1.0, abs=1e-9)
    assert float(target[3]) == pytest.approx(0.0, abs=1e-9)


def test_validate_constants_small_run(tmp_path, capsys):
    code = run(["validate-constants", "--n", 200000, "--seed", 7,
                "--sigma", 0.5, "--output-dir", tmp_path])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("PASS") == 4  # three targets plus the exclusion check
    report = json.loads((tmp_path / "constants.json").read_text())
    assert report["all_pass"] is True
    assert {r["name"] for r in report["results"]} == {"mu_y", "cov_zy", "lambda1"}


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        run(["fit", "--no-such-flag"])
    assert exc.value.code == 2


def test_data_error_exit_code(tmp_path, capsys):
    code = run(["fit", "--input", tmp_path / "missing.csv", "--response", "y",
                "--variant", "y", "--k", 1, "--output-dir", tmp_path])
    assert code == 3
    err = capsys.readouterr().err.strip()
    record = json.loads(err.splitlines()[-1])
    assert "error" in record and "message" in record


def test_numeric_error_exit_code(tmp_path, capsys):
    # exactly collinear predictors make the covariance singular
    lines = ["y,x1,x2"]
    rng = np.random.default_rng(0)
    for i in range(12):
        v = rng.standard_normal()
        lines.append(f"{rng.standard_normal()},{v},{2 * v}")
    path = tmp_path / "collinear.csv"
    path.write_text("\n".join(lines) + "\n")
    code = run(["fit", "--input", path, "--response", "y",
                "--variant", "y", "--k", 1, "--output-dir", tmp_path])
    assert code == 4
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "NotPositiveDefinite"


def test_invalid_rank_maps_to_usage_error(tmp_path, capsys):
    run(["simulate", "--model", "cosine_index", "--n", 30, "--p", 2,
         "--seed", 1, "--sigma", 0.1, "--output-dir", tmp_path])
    code = run(["fit", "--input", tmp_path / "dataset.csv", "--response", "y",
                "--variant", "y", "--k", 5, "--output-dir", tmp_path])
    assert code == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "InvalidRank"
