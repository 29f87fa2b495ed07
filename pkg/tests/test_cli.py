import io
import json
import subprocess
import sys

import numpy as np
import pytest

from vbhmm.cli import main
from vbhmm.fileio import read_model, read_sequences


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


@pytest.fixture
def data(tmp_path):
    path = tmp_path / "train.csv"
    assert run("sample", "--model", "benchmark", "--length", 300, "--seed", 1, "--out", path)[0] == 0
    return path


def test_sample_with_states(tmp_path):
    path = tmp_path / "s.csv"
    code, _ = run("sample", "--model", "benchmark", "--length", 20, "--with-states", "--out", path)
    assert code == 0
    rows = path.read_text().splitlines()
    assert len(rows) == 20 and all(len(r.split(",")) == 3 for r in rows)


def test_train_inspect_eval(tmp_path, data):
    model = tmp_path / "m.json"
    code, out = run("train", "--data", data, "--states", 2, "--out", model)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("iter 1 elbo ")
    values = [float(line.split()[-1]) for line in lines]
    assert values[-1] == read_model(model).train_meta["final_elbo"]

    code, out = run("inspect", "--model", model)
    assert code == 0
    assert "method vb" in out and "prior.nu0 2.0" in out and "meta.seed 0" in out

    code, out = run("eval", "--model", model, "--data", data)
    assert code == 0
    per_obs = float(out.splitlines()[-1].split()[-1])
    assert -4.0 < per_obs < -2.5


def test_train_is_byte_deterministic(tmp_path, data):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run("train", "--data", data, "--states", 2, "--seed", 4, "--init", "random",
                   "--restarts", 2, "--out", p)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_em_method(tmp_path, data):
    model = tmp_path / "em.json"
    code, out = run("train", "--data", data, "--states", 2, "--method", "em", "--out", model)
    assert code == 0 and out.startswith("iter 1 loglik ")
    code, out = run("eval", "--model", model, "--data", data)
    assert code == 0 and "total loglik" in out
    code, out = run("inspect", "--model", model)
    assert code == 0 and out.startswith("method em")


def test_sample_from_trained_model(tmp_path, data):
    model = tmp_path / "m.json"
    run("train", "--data", data, "--states", 2, "--out", model)
    out = tmp_path / "s.csv"
    assert run("sample", "--model", model, "--length", 10, "--out", out)[0] == 0
    assert read_sequences(out)[0].shape == (10, 2)


def test_usage_errors(tmp_path, data):
    assert run()[0] == 2
    assert run("train", "--states", 2, "--out", tmp_path / "m.json")[0] == 2
    assert run("train", "--data", data, "--states", 0, "--out", tmp_path / "m.json")[0] == 2
    assert run("--help")[0] == 0


def test_data_errors(tmp_path, data):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,oops\n")
    assert run("train", "--data", bad, "--states", 2, "--out", tmp_path / "m.json")[0] == 3
    assert run("train", "--data", tmp_path / "missing.csv", "--states", 2,
               "--out", tmp_path / "m.json")[0] == 3
    model = tmp_path / "m.json"
    run("train", "--data", data, "--states", 2, "--out", model)
    one_col = tmp_path / "one.csv"
    one_col.write_text("1\n2\n")
    assert run("eval", "--model", model, "--data", one_col)[0] == 3
    doc = json.loads(model.read_text())
    doc["schema_version"] = 2
    model.write_text(json.dumps(doc))
    assert run("inspect", "--model", model)[0] == 3


def test_numeric_failure(tmp_path):
    rng = np.random.default_rng(0)
    X = np.vstack([np.tile([6.0, 6.0], (50, 1)), rng.normal(size=(200, 2))])
    path = tmp_path / "dup.csv"
    path.write_text("\n".join(f"{a!r},{b!r}" for a, b in X.tolist()) + "\n")
    code, _ = run("train", "--data", path, "--states", 2, "--method", "em", "--cov-floor", 0,
                  "--out", tmp_path / "em.json")
    assert code == 4
    code, _ = run("train", "--data", path, "--states", 2, "--out", tmp_path / "vb.json")
    assert code == 0


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "vbhmm", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "train" in proc.stdout
