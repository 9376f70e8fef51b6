import json

import numpy as np
import pytest

from eigenbridge import (
    ConfigError,
    EigenbridgeError,
    ExperimentConfig,
    RngStream,
    collect_records,
    run_experiment,
)
from eigenbridge.cli import _default_threads, main
from eigenbridge.harness import (
    EXPERIMENTS,
    T_GRID,
    _process_labels,
    pipeline_cov_bridge,
    pipeline_spike,
)


def test_experiment_names():
    assert EXPERIMENTS == ("haar-bridge", "cov-bridge", "mp-check", "lambda-max", "spike-detect")


def test_t_grid():
    assert len(T_GRID) == 19
    assert T_GRID[0] == 0.05
    assert T_GRID[9] == 0.5
    assert T_GRID[-1] == 0.95


def test_field_defaults():
    assert ExperimentConfig(experiment="haar-bridge", n=8).field == "complex"
    assert ExperimentConfig(experiment="mp-check", n=8).field == "real"
    assert ExperimentConfig(experiment="haar-bridge", n=8, field="real").field == "real"


def test_aspect_ratio():
    cfg = ExperimentConfig(experiment="mp-check", n=8, s=16)
    assert cfg.y == 0.5
    assert ExperimentConfig(experiment="mp-check", n=8, y_override=2.0).y == 2.0
    with pytest.raises(ConfigError):
        _ = ExperimentConfig(experiment="mp-check", n=8).y


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(experiment="unknown", n=8),
        dict(experiment="haar-bridge", n=1),
        dict(experiment="haar-bridge", n=8, replicates=0),
        dict(experiment="haar-bridge", n=8, thread_count=0),
        dict(experiment="haar-bridge", n=8, master_seed=-1),
        dict(experiment="haar-bridge", n=8, master_seed=2**64),
        dict(experiment="haar-bridge", n=8, field="banana"),
        dict(experiment="haar-bridge", n=8, y_override=-0.5),
        dict(experiment="haar-bridge", n=8, m=9),
        dict(experiment="cov-bridge", n=16),
        dict(experiment="cov-bridge", n=16, s=32, field="complex"),
        dict(experiment="cov-bridge", n=16, s=32, law="complex-gaussian"),
        dict(experiment="cov-bridge", n=10, s=32, m=2),
        dict(experiment="mp-check", n=16),
        dict(experiment="mp-check", n=16, s=32, law="lorentz"),
        dict(experiment="spike-detect", n=16, s=32),
        dict(experiment="spike-detect", n=16, s=32, theta=3.0, m=1),
        dict(experiment="spike-detect", n=16, s=32, theta=3.0, law="complex-gaussian"),
        dict(experiment="spike-detect", n=8, m=2, theta=3.0, zero_noise=False),
    ],
)
def test_validate_rejects(kwargs):
    with pytest.raises(EigenbridgeError):
        ExperimentConfig(**kwargs).validate()


def test_process_labels():
    assert _process_labels(2, "real") == ["diag1", "diag2", "cross12"]
    assert _process_labels(2, "complex") == ["diag1", "diag2", "cross12_re", "cross12_im"]
    assert len(_process_labels(3, "complex")) == 9
    assert len(_process_labels(3, "real")) == 6


def test_haar_record_schema():
    cfg = ExperimentConfig(experiment="haar-bridge", n=64, m=2, replicates=3, master_seed=5)
    records = collect_records(cfg)
    assert [r.index for r in records] == [0, 1, 2]
    keys = records[0].scalars.keys()
    for want in ("sup_diag1", "sup_cross12_im", "diag2_t0.50", "cross12_re_t0.05", "pin_max"):
        assert want in keys
    assert all(r.scalars["pin_max"] < 1e-8 for r in records)


def test_cov_record_schema_and_kernel_count():
    cfg = ExperimentConfig(
        experiment="cov-bridge", n=16, s=8, m=2, law="rademacher", replicates=2, master_seed=3
    )
    records = collect_records(cfg)
    keys = records[0].scalars.keys()
    for want in ("lambda_max", "n_zero_eigs", "sup_cross12", "diag1_t0.95", "pin_max"):
        assert want in keys
    # y = 2 > 1: the sample covariance has rank s, so exactly n - s kernel
    # eigenvalues in every replicate
    assert all(r.scalars["n_zero_eigs"] == 8 for r in records)


def test_mp_and_lambda_max_schemas():
    cfg = ExperimentConfig(experiment="mp-check", n=64, s=128, replicates=2, master_seed=1)
    records = collect_records(cfg)
    keys = records[0].scalars.keys()
    assert {"lambda_min", "lambda_max", "ks_mp", "n_outside_support"} <= set(keys)
    cfg2 = ExperimentConfig(experiment="lambda-max", n=64, s=128, replicates=2)
    assert set(collect_records(cfg2)[0].scalars) == {"master_seed", "lambda_max"}


def test_spike_record_schema_real():
    cfg = ExperimentConfig(
        experiment="spike-detect", n=32, s=64, m=3, theta=3.0, replicates=2, master_seed=9
    )
    records = collect_records(cfg)
    keys = set(records[0].scalars)
    assert {"lambda_max_s", "lambda_top", "no_root", "discard", "proj2", "proj3",
            "resolvent_norm", "gn_sup_dev"} <= keys


def test_spike_zero_noise_exact():
    cfg = ExperimentConfig(
        experiment="spike-detect", n=8, m=2, field="complex", theta=2.0,
        replicates=2, zero_noise=True, master_seed=1,
    )
    records = collect_records(cfg)
    for r in records:
        assert abs(r.scalars["lambda_top"] - 2.0) < 1e-8
        assert r.scalars["proj2_re"] == 0.0 and r.scalars["proj2_im"] == 0.0
        assert abs(r.scalars["resolvent_norm"] - 0.5) < 1e-8
        assert r.scalars["gn_sup_dev"] < 1e-12


def test_thread_count_does_not_change_results():
    base = dict(experiment="cov-bridge", n=32, s=64, m=2, law="rademacher",
                replicates=6, master_seed=11)
    one = collect_records(ExperimentConfig(**base, thread_count=1))
    four = collect_records(ExperimentConfig(**base, thread_count=4))
    assert [r.index for r in one] == [r.index for r in four]
    for a, b in zip(one, four):
        assert list(a.scalars) == list(b.scalars)
        for k in a.scalars:
            assert a.scalars[k] == b.scalars[k], k


def test_csv_and_summary_outputs(tmp_path):
    out = tmp_path / "run"
    cfg = ExperimentConfig(
        experiment="mp-check", n=64, s=128, replicates=3, master_seed=2,
        output_path=str(out),
    )
    reports, outputs = run_experiment(cfg)
    assert [p.split("/")[-1] for p in outputs] == ["replicates.csv", "summary.json"]
    lines = (out / "replicates.csv").read_text().strip().split("\n")
    header = lines[0].split(",")
    assert header[0] == "replicate"
    assert len(lines) == 4
    assert [row.split(",")[0] for row in lines[1:]] == ["0", "1", "2"]
    # float cells round-trip exactly at 17 significant digits
    records = collect_records(cfg)
    ks_col = header.index("ks_mp")
    for row, rec in zip(lines[1:], records):
        assert float(row.split(",")[ks_col]) == rec.scalars["ks_mp"]
    n_out_col = header.index("n_outside_support")
    assert "." not in lines[1].split(",")[n_out_col]

    payload = json.loads((out / "summary.json").read_text())
    assert set(payload) == {"version", "config", "replicates", "reports"}
    assert payload["replicates"] == 3
    assert payload["config"]["experiment"] == "mp-check"
    assert {r["name"] for r in payload["reports"]} == {"esd-ks", "support-containment"}
    for r in payload["reports"]:
        assert set(r) == {"name", "statistic", "threshold", "replicates", "pass", "details"}


def test_run_experiment_without_output_dir():
    cfg = ExperimentConfig(experiment="lambda-max", n=32, s=64, replicates=2)
    reports, outputs = run_experiment(cfg)
    assert outputs == []
    assert reports[0].name == "lambda-max-mean"


def test_report_names_unique():
    cfg = ExperimentConfig(experiment="haar-bridge", n=64, m=2, replicates=3)
    reports, _ = run_experiment(cfg)
    names = [r.name for r in reports]
    assert len(names) == len(set(names))
    assert names[0] == "pinning"


def test_pipeline_requires_stream_per_replicate():
    cfg = ExperimentConfig(experiment="cov-bridge", n=16, s=16, m=2, law="rademacher")
    a = pipeline_cov_bridge(cfg, RngStream(7, 0))
    b = pipeline_cov_bridge(cfg, RngStream(7, 0))
    c = pipeline_cov_bridge(cfg, RngStream(7, 1))
    assert a.scalars["lambda_max"] == b.scalars["lambda_max"]
    assert a.scalars["lambda_max"] != c.scalars["lambda_max"]


def test_spike_discard_is_recorded():
    cfg = ExperimentConfig(
        experiment="spike-detect", n=16, s=32, m=2, theta=3.0, replicates=4, master_seed=0
    )
    for i in range(4):
        rec = pipeline_spike(cfg, RngStream(0, i))
        assert rec.scalars["discard"] in (0, 1)
        assert rec.scalars["no_root"] in (0, 1)


def test_cli_lambda_max_passes(tmp_path, capsys):
    out = tmp_path / "lm"
    code = main([
        "lambda-max", "--n", "200", "--s", "400", "--reps", "5",
        "--seed", "3", "--out", str(out),
    ])
    captured = capsys.readouterr()
    assert code == 0
    assert "[PASS] lambda-max-mean" in captured.out
    assert f"wrote {out}/replicates.csv" in captured.out


def test_cli_failing_run_returns_one(capsys):
    # tiny replicate count: sup-law KS cannot meet its band, so the run fails
    code = main(["haar-bridge", "--n", "16", "--m", "2", "--reps", "3", "--seed", "1"])
    captured = capsys.readouterr()
    assert code == 1
    assert "[FAIL]" in captured.out


def test_cli_error_returns_two(capsys):
    code = main(["spike-detect", "--n", "16", "--s", "32", "--reps", "1"])
    captured = capsys.readouterr()
    assert code == 2
    assert "theta" in captured.err


def test_cli_hex_seed_equivalent(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    args = ["mp-check", "--n", "32", "--s", "64", "--reps", "2"]
    assert main(args + ["--seed", "0x2a", "--out", str(out_a)]) in (0, 1)
    assert main(args + ["--seed", "42", "--out", str(out_b)]) in (0, 1)
    assert (out_a / "replicates.csv").read_bytes() == (out_b / "replicates.csv").read_bytes()


def test_cli_config_file(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "experiment": "spike-detect", "n": 8, "m": 2, "field": "complex",
        "theta": 2.0, "replicates": 2, "zero_noise": True, "master_seed": 1,
    }))
    code = main(["config", str(path)])
    captured = capsys.readouterr()
    assert code == 0
    assert "[PASS] spike-eig-mean" in captured.out


def test_cli_config_rejects_unknown_keys(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"experiment": "mp-check", "n": 16, "s": 32, "bogus": 1}))
    assert main(["config", str(path)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_default_threads_env(monkeypatch):
    monkeypatch.delenv("EIGENBRIDGE_THREADS", raising=False)
    assert _default_threads() == 1
    monkeypatch.setenv("EIGENBRIDGE_THREADS", "3")
    assert _default_threads() == 3
    monkeypatch.setenv("EIGENBRIDGE_THREADS", "zero")
    assert _default_threads() == 1
