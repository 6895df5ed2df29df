import json
import math

import numpy as np
import pytest

from sclab import cli
from sclab import experiments as ex


# ---------------------------------------------------------------------------
# Slope fitting
# ---------------------------------------------------------------------------

def test_fit_slope_exact_power_law():
    xs = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    slope, stderr = ex.fit_slope(zip(xs, xs**2))
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert stderr < 1e-10


def test_fit_slope_with_noise():
    rng = np.random.default_rng(42)
    xs = np.geomspace(1.0, 100.0, 12)
    ys = 5.0 * xs ** (2.0 / 3.0) * (1.0 + 0.01 * rng.standard_normal(12))
    slope, stderr = ex.fit_slope(zip(xs, ys))
    assert slope == pytest.approx(2.0 / 3.0, abs=0.02)
    assert stderr < 0.02


def test_fit_slope_rejections():
    with pytest.raises(ValueError):
        ex.fit_slope([(1.0, 1.0)])
    with pytest.raises(ValueError):
        ex.fit_slope([(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])
    with pytest.raises(ValueError):
        ex.fit_slope([(1.0, 1.0), (2.0, 2.0), (2.0, 3.0), (4.0, 4.0)])
    with pytest.raises(ValueError):
        ex.fit_slope([(1.0, 1.0), (2.0, -2.0), (3.0, 3.0), (4.0, 4.0)])


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

GOOD_CONFIG = """
# sample sweep
experiment = weyl
lambda_range = 10, 200
seed = 7
zeta = 0.5
p_list = 2, 6, inf
"""


def test_parse_config_roundtrip():
    cfg = ex.parse_config(GOOD_CONFIG)
    assert cfg.experiment == "weyl"
    assert cfg.lambda_range == [10, 200]
    assert cfg.seed == 7
    assert cfg.p_list == [2, 6, math.inf]


def test_parse_config_unknown_key_has_line_number():
    with pytest.raises(ex.ConfigError, match="line 3.*frobnicate"):
        ex.parse_config("experiment = weyl\n\nfrobnicate = 1\n")


def test_parse_config_bad_values():
    with pytest.raises(ex.ConfigError, match="zeta"):
        ex.parse_config("experiment = weyl\nzeta = nope\n")
    with pytest.raises(ex.ConfigError, match="zeta"):
        ex.parse_config("experiment = weyl\nzeta = 1.5\n")
    with pytest.raises(ex.ConfigError, match="experiment"):
        ex.parse_config("experiment = astrology\n")
    with pytest.raises(ex.ConfigError, match="missing"):
        ex.parse_config("seed = 1\n")
    with pytest.raises(ex.ConfigError, match="line 2"):
        ex.parse_config("experiment = weyl\njust some words\n")


def test_empty_range_rejected():
    with pytest.raises(ex.ConfigError, match="ell_range"):
        ex.ExperimentConfig(experiment="weyl", ell_range=[]).validate()


# ---------------------------------------------------------------------------
# Runner dispatch, reproducibility, file output
# ---------------------------------------------------------------------------

def test_run_writes_reproducible_outputs(tmp_path):
    blobs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        cfg = ex.ExperimentConfig(experiment="weyl", lambda_range=[10, 100],
                                  seed=3, output=str(out))
        report = ex.run(cfg)
        assert report.passed
        csv_bytes = (out / "weyl.csv").read_bytes()
        json_bytes = (out / "weyl.json").read_bytes()
        blobs.append((csv_bytes, json_bytes))
    assert blobs[0] == blobs[1]
    assert blobs[0][0].startswith(b"lambda,count,count_over_lambda_sq\r\n")


def test_sogge_single_slope():
    cfg = ex.ExperimentConfig(experiment="sogge_single",
                              ell_range=[32, 48, 64, 96, 128])
    checks, rows, header = ex.run_sogge_single(cfg)
    slope = checks[0]
    assert slope.passed and slope.tol == 0.03
    assert header == ("ell", "l6_norm")
    assert len(rows) == 5


def test_cluster_lower_sup_norm_slope_tight():
    cfg = ex.ExperimentConfig(experiment="cluster_lower",
                              ell_range=[100, 141, 200, 283, 400])
    checks, _, _ = ex.run_cluster_lower(cfg)
    sup_slope = next(c for c in checks if c.name == "lower-slope-caseinf-pinf")
    assert abs(sup_slope.measured - 1.0) <= 0.05


def test_grid_size_overrides_are_honored():
    cfg = ex.ExperimentConfig(experiment="heuristic_compare",
                              ell_range=[100], n_theta=700)
    checks, _, _ = ex.run_heuristic_compare(cfg)
    assert all(c.passed for c in checks)
    grid = ex._cluster_grid(10.0, n_theta=64, n_phi=80)
    assert grid.n_theta == 64 and grid.n_phi == 80


def test_cluster_upper_default_sweep_bounded():
    cfg = ex.ExperimentConfig(experiment="cluster_upper", seed=1)
    checks, rows, _ = ex.run_cluster_upper(cfg)
    assert all(c.passed for c in checks)
    assert {row[0] for row in rows} == {5.0, 10.0, 20.0, 35.0, 50.0}


def test_cluster_upper_is_seed_deterministic():
    cfg1 = ex.ExperimentConfig(experiment="cluster_upper",
                               lambda_range=[5, 8], seed=9)
    cfg2 = ex.ExperimentConfig(experiment="cluster_upper",
                               lambda_range=[5, 8], seed=9)
    _, rows1, _ = ex.run_cluster_upper(cfg1)
    _, rows2, _ = ex.run_cluster_upper(cfg2)
    assert rows1 == rows2


def test_spectra_dumped_per_lambda(tmp_path):
    out = tmp_path / "sd"
    cfg = ex.ExperimentConfig(experiment="schatten_dual",
                              lambda_range=[5, 10], p_list=[6],
                              output=str(out))
    ex.run(cfg)
    for lam in (5, 10):
        path = out / "spectra" / f"schatten_dual_lambda{lam}.csv"
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "k,sigma"
        assert float(lines[1].split(",")[1]) > 0.0


def test_json_report_schema(tmp_path):
    out = tmp_path / "rep"
    cfg = ex.ExperimentConfig(experiment="weyl", output=str(out))
    ex.run(cfg)
    data = json.loads((out / "weyl.json").read_text())
    assert data["schema_version"] == ex.SCHEMA_VERSION
    assert data["experiment"] == "weyl"
    for entry in data["checks"]:
        assert set(entry) == {"check", "predicted", "measured", "tol", "pass"}


def test_format_rows_rfc4180_quoting():
    text = ex.format_rows(("a", "b"), [("x,y", 1.5)])
    assert text == 'a,b\r\n"x,y",1.5\r\n'


def test_unknown_experiment_rejected():
    with pytest.raises(ex.ConfigError):
        ex.ExperimentConfig(experiment="nope").validate()


# ---------------------------------------------------------------------------
# Coverage manifest
# ---------------------------------------------------------------------------

def test_every_operation_is_covered_by_the_suite():
    covered = set()
    for name, ops in ex.OP_COVERAGE.items():
        assert name in ex.RUNNERS
        covered |= ops
    assert covered == ex.ALL_OPS


def test_experiment_names_match_runners():
    assert set(ex.EXPERIMENT_NAMES) == set(ex.RUNNERS)
    assert set(ex.OP_COVERAGE) == set(ex.RUNNERS)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_run_weyl(tmp_path, capsys):
    cfg_path = tmp_path / "weyl.cfg"
    out = tmp_path / "out"
    cfg_path.write_text(
        f"experiment = weyl\nlambda_range = 10, 100\noutput = {out}\n")
    code = cli.main(["run", str(cfg_path)])
    captured = capsys.readouterr()
    assert code == 0
    assert "[PASS] weyl :: weyl-count-slope" in captured.out
    assert (out / "weyl.csv").exists()


def test_cli_run_bad_config(tmp_path, capsys):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("experiment = weyl\nmystery = 1\n")
    code = cli.main(["run", str(cfg_path)])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_cli_run_missing_config(tmp_path, capsys):
    code = cli.main(["run", str(tmp_path / "nope.cfg")])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_cli_dump_wkb(tmp_path):
    out = tmp_path / "profile.csv"
    code = cli.main(["dump-wkb", "--ell", "40", "--m", "38", "--case", "2",
                     "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "theta,Q,S,y,v_exact,envelope"
    assert len(lines) == 202
    row = [float(tok) for tok in lines[101].split(",")]
    assert row[0] == pytest.approx(0.0)  # center of the symmetric grid
    assert row[1] < 0.0  # oscillatory regime


def test_cli_check_writes_acceptance_json(tmp_path, capsys):
    out = tmp_path / "acceptance.json"
    code = cli.main(["check", "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    data = json.loads(out.read_text())
    names = {entry["check"] for entry in data["checks"]}
    for idx in range(1, 14):
        assert any(name.startswith(f"c{idx:02d}-") for name in names)
    assert f"{sum(1 for c in data['checks'] if c['pass'])}/" in captured.out
