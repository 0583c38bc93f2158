import json
import subprocess
import sys

import numpy as np
import pytest

from latentgp.cli import EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from latentgp.config import ConfigError, RunConfig, load_config, parse_grid
from latentgp.dataset import save_dataset
from latentgp.pipeline import read_csv
from latentgp.testbed import PLANE_BOUNDS, example_1d, example_2d_plane

SMALL = {"mcmc": {"iterations": 600, "burnin": 100, "thin": 5}}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Fit once on the 1-D example; later tests reuse data, config and trace."""
    w = tmp_path_factory.mktemp("cli")
    save_dataset(example_1d(), w / "data.csv")
    (w / "small.json").write_text(json.dumps(SMALL))
    code = main(["fit", "--data", str(w / "data.csv"), "--config", str(w / "small.json"),
                 "--out", str(w)])
    assert code == EXIT_OK
    return w


def run(*args):
    return main([str(a) for a in args])


def test_fit_writes_expected_records(workdir):
    lines = (workdir / "trace.jsonl").read_text().splitlines()
    header = json.loads(lines[0])
    assert len(lines) - 1 == (600 - 100) // 5
    assert header["run"]["mcmc"]["iterations"] == 600
    assert header["run"]["mean_basis"] == "linear"


def test_fit_prints_rates(workdir, capsys):
    out = workdir / "again"
    assert run("fit", "--data", workdir / "data.csv", "--config", workdir / "small.json",
               "--out", out) == EXIT_OK
    text = capsys.readouterr().out
    assert "100 samples" in text and "acceptance sigma2" in text
    assert (out / "trace.jsonl").read_bytes() == (workdir / "trace.jsonl").read_bytes()


def test_predict_two_point_grid(workdir):
    out = workdir / "p2"
    assert run("predict", "--trace", workdir / "trace.jsonl", "--data", workdir / "data.csv",
               "--grid", "2", "--out", out) == EXIT_OK
    header, rows = read_csv(out / "field.csv")
    assert header == ["x1", "prob_r1", "mean_eta"]
    assert [float(r[0]) for r in rows] == [0.0, 20.0]
    assert (out / "field.csv").read_text().startswith("# config=")
    b = json.loads((out / "boundary.json").read_text())
    assert {"median", "lower95", "upper95", "excluded_draws"} <= set(b)


def test_predict_reports_original_units(workdir):
    out = workdir / "p401"
    assert run("predict", "--trace", workdir / "trace.jsonl", "--data", workdir / "data.csv",
               "--out", out) == EXIT_OK
    _, rows = read_csv(out / "field.csv")
    x = np.array([float(r[0]) for r in rows])
    assert len(x) == 401 and x[0] == 0.0 and x[-1] == 20.0
    b = json.loads((out / "boundary.json").read_text())
    assert 0.0 < b["median"] < 20.0


def test_loo_csv(workdir):
    assert run("loo", "--trace", workdir / "trace.jsonl", "--data", workdir / "data.csv",
               "--out", workdir) == EXIT_OK
    header, rows = read_csv(workdir / "loo.csv")
    assert header[:4] == ["index", "x1", "label", "misclass_rate"]
    assert [int(r[0]) for r in rows] == list(range(12))
    assert all(0.0 <= float(r[3]) <= 1.0 for r in rows)


def test_baseline_voronoi_keeps_training_labels(tmp_path):
    d = example_2d_plane(0)
    save_dataset(d, tmp_path / "plane.csv")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": {"bounds": PLANE_BOUNDS}}))
    assert run("baseline", "--method", "voronoi", "--data", tmp_path / "plane.csv",
               "--config", cfg, "--grid", "50x50", "--out", tmp_path) == EXIT_OK
    _, rows = read_csv(tmp_path / "baseline_voronoi.csv")
    pts = np.array([[float(v) for v in r[:2]] for r in rows])
    lab = np.array([float(r[2]) for r in rows]) == 1.0
    for x, r1 in zip(d.points, d.in_r1):
        cell = np.argmin(np.sum((pts - x) ** 2, axis=1))
        assert lab[cell] == r1


def test_baseline_logistic_columns(tmp_path):
    save_dataset(example_1d(), tmp_path / "d.csv")
    assert run("baseline", "--method", "logistic", "--data", tmp_path / "d.csv",
               "--samples", 10, "--grid", 5, "--out", tmp_path) == EXIT_OK
    header, rows = read_csv(tmp_path / "baseline_logistic.csv")
    assert header == ["x1", "prob_r1", "avg_bernoulli_r1"] and len(rows) == 5


@pytest.mark.parametrize("argv", [
    [],
    ["fit"],
    ["baseline", "--method", "svm", "--data", "x.csv"],
    ["demo", "nonesuch"],
    ["predict", "--trace", "t", "--data", "d", "--grid", "3by3"],
])
def test_usage_errors(argv, tmp_path):
    assert main(argv) == EXIT_USAGE


def test_samples_zero_is_usage_error(workdir):
    assert run("baseline", "--method", "logistic", "--data", workdir / "data.csv",
               "--samples", 0, "--out", workdir) == EXIT_USAGE


def test_burnin_error_names_field(workdir, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"mcmc": {"iterations": 100, "burnin": 100}}))
    assert run("fit", "--data", workdir / "data.csv", "--config", bad,
               "--out", tmp_path) == EXIT_USAGE
    assert "burnin" in capsys.readouterr().err


def test_fault_injection_matrix(workdir, tmp_path):
    # missing file
    assert run("fit", "--data", tmp_path / "absent.csv", "--out", tmp_path) == EXIT_DATA
    # malformed row
    (tmp_path / "mal.csv").write_text("x1,label\n0,l1\nzero,l2\n")
    assert run("fit", "--data", tmp_path / "mal.csv", "--out", tmp_path) == EXIT_DATA
    # forced non-positive-definite Gram matrix: near-coincident inputs, no nugget to speak of
    (tmp_path / "near.csv").write_text("x1,label\n0,l1\n1e-9,l2\n5,l2\n")
    cfg = tmp_path / "npd.json"
    cfg.write_text(json.dumps({"mcmc": {"iterations": 20, "burnin": 10, "nugget_scale": 1e-300}}))
    assert run("fit", "--data", tmp_path / "near.csv", "--config", cfg,
               "--out", tmp_path) == EXIT_NUMERICAL


def test_mismatched_data_is_data_error(workdir, tmp_path):
    save_dataset(example_2d_plane(0), tmp_path / "plane.csv")
    assert run("predict", "--trace", workdir / "trace.jsonl", "--data", tmp_path / "plane.csv",
               "--out", tmp_path) == EXIT_DATA
    (tmp_path / "empty.jsonl").write_text("")
    assert run("loo", "--trace", tmp_path / "empty.jsonl", "--data", workdir / "data.csv",
               "--out", tmp_path) == EXIT_DATA


def test_config_defaults_and_overrides(tmp_path):
    assert load_config(None).to_dict() == RunConfig().to_dict()
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"mcmc": {"thin": 2}, "prior": {"sigma2_shape": 4.0}}))
    cfg = load_config(p)
    assert cfg.mcmc.thin == 2 and cfg.mcmc.iterations == 10000
    assert cfg.prior == {"sigma2_shape": 4.0}
    p.write_text(json.dumps({"colour": 1}))
    with pytest.raises(ConfigError, match="colour"):
        load_config(p)
    p.write_text(json.dumps({"grid": {"resolution": [1]}}))
    with pytest.raises(ConfigError, match="grid.resolution"):
        load_config(p)


def test_parse_grid():
    assert parse_grid("50x40", 2) == [50, 40]
    assert parse_grid("7", 3) == [7, 7, 7]
    with pytest.raises(ConfigError):
        parse_grid("5x5", 1)
    with pytest.raises(ConfigError):
        parse_grid("1x5", 2)


def test_module_entry_point(workdir):
    proc = subprocess.run([sys.executable, "-m", "latentgp", "demo", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE and "unknown demo" in proc.stderr
