import csv
import json
import os

import numpy as np
import pytest

from gpopt import ParamSpace, SincObjective, run_original, CampaignConfig
from gpopt.campaign import TraceRecord
from gpopt.cli import main
from gpopt.config import ConfigError, parse_config
from gpopt.trace_io import (
    dump_posterior,
    iterations_used,
    read_trace,
    summary_report,
    trace_header,
    write_trace,
    write_summary,
)
from gpopt.acquisition import evaluate_grid
from gpopt.gp import GaussianProcess


def sinc_config_text(tmp_path, seeds="[1]", algorithm="original", extra_alg="", posterior=False):
    posterior_line = f"  posterior_dir: {tmp_path}/posterior\n" if posterior else ""
    return f"""
objective:
  sinc: {{}}
space:
  lower: [-15.0]
  upper: [15.0]
  grid_points_per_dim: 201
algorithm:
  name: {algorithm}
  criterion: expected_improvement
  max_iters: 8
  refit_hyperparams: false
  alpha0: 1.6e-5
  gammas0: 1.0
  noise_var0: 0.0
  ei_epsilon: 1.0e-5
{extra_alg}init:
  thetas: [[6.6], [7.2], [8.1]]
seeds: {seeds}
output:
  trace_path: {tmp_path}/trace_{{seed}}.csv
  summary_path: {tmp_path}/summary.json
{posterior_line}"""


def write_config(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestTraceFile:
    def records(self):
        return [
            TraceRecord(iter=0, move="Init", theta=np.array([7.5]), y=0.04, y_best=0.04),
            TraceRecord(
                iter=1, move="Exploit", theta=np.array([7.65]), y=0.0407, y_best=0.0407,
                acq_value=0.003, max_std=0.004, rho=None, threshold_used=None, nu=None,
            ),
            TraceRecord(
                iter=2, move="Explore", theta=np.array([-15.0]), y=0.0138, y_best=0.0407,
                acq_value=1e-6, max_std=0.004, rho=0.91, threshold_used=0.8, nu=0.25,
            ),
        ]

    def test_exact_header(self, tmp_path):
        path = tmp_path / "t.csv"
        write_trace(self.records(), path)
        first = path.read_text().splitlines()[0]
        assert first == "iter,move,theta_0,y,y_best,acq_value,max_std,rho,threshold_used,nu"
        assert trace_header(2)[2:4] == ["theta_0", "theta_1"]

    def test_init_row_rendering(self, tmp_path):
        path = tmp_path / "t.csv"
        write_trace(self.records(), path)
        row = path.read_text().splitlines()[1]
        assert row == "0,Init,7.5,0.04,0.04,,,,,"

    def test_row_count(self, tmp_path):
        path = tmp_path / "t.csv"
        write_trace(self.records(), path)
        assert len(path.read_text().splitlines()) == 4

    def test_roundtrip_via_independent_reader(self, tmp_path):
        path = tmp_path / "t.csv"
        records = self.records()
        write_trace(records, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert float(rows[2]["rho"]) == 0.91
        assert rows[1]["rho"] == ""
        back = read_trace(path)
        assert len(back) == len(records)
        for a, b in zip(records, back):
            assert a.iter == b.iter and a.move == b.move
            np.testing.assert_array_equal(a.theta, b.theta)
            assert a.y == b.y and a.y_best == b.y_best
            assert a.acq_value == b.acq_value and a.max_std == b.max_std
            assert a.rho == b.rho and a.threshold_used == b.threshold_used and a.nu == b.nu

    def test_full_precision_roundtrip(self, tmp_path):
        value = 0.1 + 0.2  # not representable prettily
        rec = TraceRecord(iter=0, move="Init", theta=np.array([value]), y=value, y_best=value)
        path = tmp_path / "t.csv"
        write_trace([rec], path)
        back = read_trace(path)[0]
        assert back.y == value and back.theta[0] == value

    def test_empty_trace_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_trace([], tmp_path / "t.csv")


class TestPosteriorDump:
    def test_files_and_shapes(self, tmp_path):
        space = ParamSpace(lower=[-2.0], upper=[2.0], grid_points_per_dim=101)
        gp = GaussianProcess(noise_var=0.0).fit([[0.0]], [1.0])
        grid = evaluate_grid(gp, space.candidates)
        dump_posterior(grid, np.array([[0.0]]), np.array([1.0]), 3, tmp_path)
        post = (tmp_path / "posterior_3.csv").read_text().splitlines()
        assert len(post) == 102
        assert post[0] == "theta_0,mean,std"
        stds = [float(line.split(",")[2]) for line in post[1:]]
        assert all(s >= 0.0 for s in stds)
        center = stds[50]
        assert center <= 1e-4
        obs = (tmp_path / "observations_3.csv").read_text().splitlines()
        assert obs == ["theta_0,y", "0.0,1.0"]


class TestSummary:
    def test_aggregates_recomputable(self, tmp_path):
        space = ParamSpace(lower=[-15.0], upper=[15.0], grid_points_per_dim=101)
        cfg = CampaignConfig(
            algorithm="original", max_iters=4, refit_hyperparams=False,
            alpha0=1e-4, gammas0=1.0, noise_var0=0.0, seed=0,
        )
        results = [run_original(space, SincObjective(), [[3.0]], cfg) for _ in range(3)]
        report = summary_report([1, 2, 3], results)
        for key in ("y_best", "iterations_used"):
            values = [row[key] for row in report["per_seed"]]
            agg = report["aggregate"][key]
            assert agg["Average"] == pytest.approx(np.mean(values), abs=1e-12)
            assert agg["Minimum"] == pytest.approx(np.min(values), abs=1e-12)
            assert agg["Maximum"] == pytest.approx(np.max(values), abs=1e-12)
            expected_std = np.std(values, ddof=1) if len(values) > 1 else 0.0
            assert agg["Standard Deviation"] == pytest.approx(expected_std, abs=1e-12)
        out = tmp_path / "summary.json"
        write_summary(report, out)
        assert json.loads(out.read_text()) == json.loads(out.read_text())

    def test_iterations_used_excludes_init(self):
        space = ParamSpace(lower=[0.0], upper=[1.0], grid_points_per_dim=11)
        cfg = CampaignConfig(algorithm="original", max_iters=2, refit_hyperparams=False,
                             alpha0=1.0, gammas0=0.05, noise_var0=0.0, seed=0)
        res = run_original(space, lambda t: float(t[0]), [[0.0], [1.0]], cfg)
        assert iterations_used(res) == len(res.trace) - 2


class TestConfigParsing:
    def test_valid_config_parses(self, tmp_path):
        settings = parse_config(write_config(tmp_path, sinc_config_text(tmp_path)))
        assert settings.objective_kind == "sinc"
        assert settings.campaign.algorithm == "original"
        assert settings.seeds == (1,)

    def test_two_objectives_rejected(self, tmp_path):
        text = sinc_config_text(tmp_path).replace(
            "objective:\n  sinc: {}",
            "objective:\n  sinc: {}\n  external:\n    command: echo 1",
        )
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(write_config(tmp_path, text))

    def test_missing_section_named(self, tmp_path):
        text = sinc_config_text(tmp_path).replace("seeds: [1]\n", "")
        with pytest.raises(ConfigError, match="seeds"):
            parse_config(write_config(tmp_path, text))

    def test_unknown_field_named(self, tmp_path):
        text = sinc_config_text(tmp_path) + "\nbogus: 3\n"
        with pytest.raises(ConfigError, match="bogus"):
            parse_config(write_config(tmp_path, text))

    def test_multi_seed_requires_placeholder(self, tmp_path):
        text = sinc_config_text(tmp_path, seeds="[1, 2]").replace("trace_{seed}.csv", "trace.csv")
        with pytest.raises(ConfigError, match="placeholder"):
            parse_config(write_config(tmp_path, text))

    def test_init_outside_bounds(self, tmp_path):
        text = sinc_config_text(tmp_path).replace("[[6.6], [7.2], [8.1]]", "[[99.0]]")
        with pytest.raises(ConfigError, match="outside"):
            parse_config(write_config(tmp_path, text))

    def test_forest_requires_existing_csv(self, tmp_path):
        text = sinc_config_text(tmp_path).replace(
            "objective:\n  sinc: {}",
            "objective:\n  forest:\n    csv_path: /nonexistent.csv\n    label_column: y",
        )
        with pytest.raises(ConfigError, match="not found"):
            parse_config(write_config(tmp_path, text))

    def test_bad_tau_surfaces_field(self, tmp_path):
        text = sinc_config_text(tmp_path, algorithm="hybrid", extra_alg="  tau: 1.5\n")
        with pytest.raises(ConfigError, match="algorithm"):
            parse_config(write_config(tmp_path, text))

    def test_bare_exponent_literals_coerced(self, tmp_path):
        # YAML 1.1 reads 1e-5 (no dot) as a string; the parser must coerce it
        text = sinc_config_text(tmp_path).replace("ei_epsilon: 1.0e-5", "ei_epsilon: 1e-5")
        settings = parse_config(write_config(tmp_path, text))
        assert settings.campaign.ei_epsilon == 1e-5

    def test_non_numeric_epsilon_rejected(self, tmp_path):
        text = sinc_config_text(tmp_path).replace("ei_epsilon: 1.0e-5", "ei_epsilon: tiny")
        with pytest.raises(ConfigError, match="ei_epsilon"):
            parse_config(write_config(tmp_path, text))


class TestCliEndToEnd:
    def test_validate_ok(self, tmp_path, capsys):
        rc = main(["validate", "--config", write_config(tmp_path, sinc_config_text(tmp_path))])
        assert rc == 0
        assert "config OK" in capsys.readouterr().out

    def test_run_produces_non_decreasing_y_best(self, tmp_path):
        rc = main(["run", "--config", write_config(tmp_path, sinc_config_text(tmp_path))])
        assert rc == 0
        records = read_trace(tmp_path / "trace_1.csv")
        bests = [r.y_best for r in records]
        assert all(b >= a for a, b in zip(bests, bests[1:]))
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["per_seed"][0]["seed"] == 1

    def test_run_twice_is_byte_identical(self, tmp_path):
        config = write_config(tmp_path, sinc_config_text(tmp_path, seeds="[1, 2]", posterior=True))
        assert main(["run", "--config", config]) == 0
        first = {
            p: (tmp_path / p).read_bytes()
            for p in ("trace_1.csv", "trace_2.csv", "summary.json")
        }
        first_post = sorted(os.listdir(tmp_path / "posterior" / "seed_1"))
        assert main(["run", "--config", config]) == 0
        for name, blob in first.items():
            assert (tmp_path / name).read_bytes() == blob
        assert sorted(os.listdir(tmp_path / "posterior" / "seed_1")) == first_post
        assert any(n.startswith("posterior_") for n in first_post)
        assert any(n.startswith("observations_") for n in first_post)

    def test_parallel_jobs_match_sequential(self, tmp_path):
        config = write_config(tmp_path, sinc_config_text(tmp_path, seeds="[3, 4]"))
        assert main(["run", "--config", config]) == 0
        sequential = {p: (tmp_path / p).read_bytes() for p in ("trace_3.csv", "trace_4.csv")}
        assert main(["run", "--config", config, "--jobs", "2"]) == 0
        for name, blob in sequential.items():
            assert (tmp_path / name).read_bytes() == blob

    def test_config_error_exit_code_and_prefix(self, tmp_path, capsys):
        bad = sinc_config_text(tmp_path).replace(
            "objective:\n  sinc: {}",
            "objective:\n  sinc: {}\n  external:\n    command: echo 1",
        )
        rc = main(["run", "--config", write_config(tmp_path, bad)])
        assert rc == 2
        err = capsys.readouterr().err
        assert err.startswith("GPOPT-CONFIG-ERROR:") and err.count("\n") == 1

    def test_objective_failure_exit_code(self, tmp_path, capsys):
        text = sinc_config_text(tmp_path).replace(
            "objective:\n  sinc: {}",
            "objective:\n  external:\n    command: 'false'",
        )
        rc = main(["run", "--config", write_config(tmp_path, text)])
        assert rc == 3
        assert capsys.readouterr().err.startswith("GPOPT-OBJECTIVE-ERROR:")

    def test_io_error_exit_code(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        text = sinc_config_text(tmp_path).replace(
            f"trace_path: {tmp_path}/trace_{{seed}}.csv",
            f"trace_path: {blocker}/trace_{{seed}}.csv",
        )
        rc = main(["run", "--config", write_config(tmp_path, text)])
        assert rc == 4
        assert capsys.readouterr().err.startswith("GPOPT-IO-ERROR:")

    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["validate", "--config", str(tmp_path / "nope.yaml")])
        assert rc == 2
        assert capsys.readouterr().err.startswith("GPOPT-CONFIG-ERROR:")

    def test_external_objective_end_to_end(self, tmp_path):
        text = sinc_config_text(tmp_path).replace(
            "objective:\n  sinc: {}",
            "objective:\n  external:\n    command: echo {theta0}",
        )
        rc = main(["run", "--config", write_config(tmp_path, text)])
        assert rc == 0
        records = read_trace(tmp_path / "trace_1.csv")
        for r in records:
            assert r.y == r.theta[0]  # the command echoes theta back

    def test_forest_objective_end_to_end(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = ["f0,f1,label"]
        for _ in range(60):
            a, b = rng.normal(), rng.normal()
            rows.append(f"{a},{b},{'y' if a + 0.3 * b > 0 else 'n'}")
        csv_path = tmp_path / "toy.csv"
        csv_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        text = f"""
objective:
  forest:
    csv_path: {csv_path}
    label_column: label
    data_seed: 3
    holdout_fraction: 0.3
    max_depth: 6
    min_leaf: 3
space:
  lower: [1.0]
  upper: [20.0]
  grid_points_per_dim: 10
algorithm:
  name: variable_threshold
  criterion: expected_improvement
  max_iters: 4
  refit_hyperparams: false
  alpha0: 0.01
  gammas0: 4.0
  noise_var0: 1.0e-4
init:
  thetas: [[1.0]]
seeds: [5]
output:
  trace_path: {tmp_path}/forest_trace_{{seed}}.csv
  summary_path: {tmp_path}/forest_summary.json
"""
        rc = main(["run", "--config", write_config(tmp_path, text)])
        assert rc == 0
        records = read_trace(tmp_path / "forest_trace_5.csv")
        assert all(0.0 <= r.y <= 1.0 for r in records)
        summary = json.loads((tmp_path / "forest_summary.json").read_text())
        assert summary["per_seed"][0]["stop_reason"] in ("Budget", "Converged", "GridExhausted")
