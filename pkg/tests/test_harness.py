import json
import subprocess
import sys

import numpy as np
import pytest

from llgfront.errors import ConfigError
from llgfront.harness import cli
from llgfront.harness.config import SCHEMA, load_config, schema_document
from llgfront.harness.io import read_table, sha256, write_table
from llgfront.harness.manifest import RunManifest
from llgfront.stats import stable_motion

SMALL_CC = ["--set", "cc.T=3", "--set", "cc.dt=1e-3", "--set", "cc.thin=10"]
SMALL_SPDE = ["--set", "model.L=40", "--set", "model.nx=201", "--set", "spde.T=0.2",
              "--set", "spde.snapshot_stride=50"]


def write_ini(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------- config

def test_defaults_cover_schema():
    cfg = load_config()
    for section, keys in SCHEMA.items():
        for key in keys:
            cfg[f"{section}.{key}"]
    assert cfg["model.g"] == (1.0, 1.0, 1.0)


def test_config_file_and_override(tmp_path):
    p = write_ini(tmp_path / "a.ini", "[model]\nlam = 2.5\nsigma = 0.1\n[cc]\nT = 7\n")
    cfg = load_config(p, {"cc.T": "9", "experiment.seed": 4, "experiment.workers": None})
    assert cfg["model.lam"] == 2.5 and cfg["cc.T"] == 9.0 and cfg["experiment.seed"] == 4
    assert cfg.model_params().sigma == 0.1


@pytest.mark.parametrize("text,key", [
    ("[model]\nlam = 0\n", "model.lam"),
    ("[model]\nsigma = -1\n", "model.sigma"),
    ("[model]\nlam = abc\n", "model.lam"),
    ("[model]\nwhat = 1\n", "model.what"),
    ("[nowhere]\nx = 1\n", "nowhere"),
    ("[spde]\nn_runs = 2.5\n", "spde.n_runs"),
    ("[analyze]\ntests = pvariation bogus\n", "analyze.tests"),
])
def test_config_errors_name_the_key(tmp_path, text, key):
    with pytest.raises(ConfigError) as info:
        load_config(write_ini(tmp_path / "bad.ini", text))
    assert key in str(info.value)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_schema_document_is_json():
    doc = schema_document()
    json.dumps(doc)
    assert "model" in doc and "lam" in doc["model"]


# ---------------------------------------------------------------- io

@pytest.mark.parametrize("fmt", ["csv", "binary"])
def test_table_round_trip(tmp_path, fmt):
    data = np.random.default_rng(0).normal(size=(50, 3)) * 1e-7
    p = write_table(tmp_path / "x", ("a", "b", "c"), data, fmt)
    header, back = read_table(p)
    assert header == ["a", "b", "c"]
    assert np.array_equal(back, data)


# ---------------------------------------------------------------- CLI

def run(argv):
    return cli.main([str(a) for a in argv])


def test_invalid_parameter_exit_code(tmp_path, capsys):
    assert run(["simulate-cc", "--out", tmp_path, "--set", "model.lam=-1"]) == cli.EXIT_VALIDATION
    assert "model.lam" in capsys.readouterr().err
    assert run(["simulate-cc", "--out", tmp_path, "--set", "nodot"]) == cli.EXIT_VALIDATION


def test_fit_without_inputs_is_validation_error(tmp_path):
    assert run(["fit", "--out", tmp_path]) == cli.EXIT_VALIDATION
    assert run(["analyze", "--out", tmp_path]) == cli.EXIT_VALIDATION


def test_simulate_cc_deterministic_and_worker_independent(tmp_path):
    base = ["simulate-cc", "--seed", 3, "--set", "cc.n_trajectories=3", *SMALL_CC]
    assert run([*base, "--out", tmp_path / "a", "--workers", 1]) == 0
    assert run([*base, "--out", tmp_path / "b", "--workers", 2]) == 0
    assert run([*base, "--out", tmp_path / "c", "--workers", 1, "--seed", 4]) == 0
    ma = RunManifest.read(tmp_path / "a" / "manifest.json")
    mb = RunManifest.read(tmp_path / "b" / "manifest.json")
    mc = RunManifest.read(tmp_path / "c" / "manifest.json")
    assert ma.outputs == mb.outputs
    assert ma.outputs != mc.outputs
    assert ma.verify_outputs(tmp_path / "a") == []
    assert ma.seed == 3 and ma.scheme["id"].startswith("ito")
    header, data = read_table(tmp_path / "a" / "traj_0000.csv")
    assert header[:6] == ["t", "w", "theta", "eta", "phi", "psi"]
    assert data[-1, 0] == pytest.approx(3.0)


def test_manifest_replay_reproduces_outputs(tmp_path):
    assert run(["simulate-cc", "--out", tmp_path / "a", "--seed", 7, *SMALL_CC]) == 0
    assert run(["simulate-cc", "--out", tmp_path / "b", "--config", tmp_path / "a" / "manifest.json"]) == 0
    ma = RunManifest.read(tmp_path / "a" / "manifest.json")
    mb = RunManifest.read(tmp_path / "b" / "manifest.json")
    assert ma.outputs == mb.outputs and ma.config == mb.config


def test_binary_format(tmp_path):
    assert run(["simulate-cc", "--out", tmp_path, "--format", "binary", *SMALL_CC]) == 0
    header, data = read_table(tmp_path / "traj_0000.bin")
    assert "phi" in header and data.shape[0] > 100


def test_spde_then_fit(tmp_path):
    assert run(["simulate-spde", "--out", tmp_path, "--set", "model.sigma=0.1", *SMALL_SPDE]) == 0
    snaps = tmp_path / "run_snapshots.csv"
    assert snaps.exists() and (tmp_path / "run_wiener.csv").exists()
    man = RunManifest.read(tmp_path / "manifest.json")
    assert man.steps["0"]["max_norm_error"] < 1e-12
    assert run(["fit", "--out", tmp_path, snaps]) == 0
    header, data = read_table(tmp_path / "run_fitted.csv")
    res = data[:, header.index("residual")]
    assert res.size == 5 and np.all(res < 0.05)


def test_analyze_synthetic_series(tmp_path):
    n = 64_000
    phi = stable_motion(1.5, n, seed=1)
    write_table(tmp_path / "series.csv", ("t", "phi"), np.column_stack([np.arange(n) * 0.01, phi]))
    argv = ["analyze", "--out", tmp_path, "--set", "analyze.n_segments=200",
            "--set", "analyze.segment_len=320", "--set", "analyze.tail_source=increments",
            tmp_path / "series.csv"]
    assert run(argv) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert set(report["results"]) == {"pvariation", "moments", "mle", "beta"}
    assert "poisson" in report["skipped"]
    assert 1.3 <= report["results"]["moments"]["alpha"] <= 1.7
    assert (tmp_path / "ks_curve.csv").exists()
    first = sha256(tmp_path / "report.json")
    assert run(argv) == 0
    assert sha256(tmp_path / "report.json") == first


@pytest.mark.slow
def test_verify_detects_mutation(tmp_path, capsys):
    assert run(["verify", "--out", tmp_path, "--set", "verify.n_states=50"]) == cli.EXIT_OK
    code = run(["verify", "--out", tmp_path, "--set", "verify.n_states=50",
                "--set", "verify.perturb=1e-3", "--set", "verify.perturb_component=f_eta"])
    assert code == cli.EXIT_VERIFY
    summary = json.loads((tmp_path / "verify.json").read_text())
    proj = summary["suites"][0]
    assert not proj["passed"] and proj["details"]["failing_components"] == ["f_eta"]
    capsys.readouterr()


def test_console_script_schema():
    out = subprocess.run([sys.executable, "-m", "llgfront.harness.cli", "schema"],
                         capture_output=True, text=True, check=True)
    assert "analyze" in json.loads(out.stdout)
