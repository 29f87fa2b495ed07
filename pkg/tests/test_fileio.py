import json

import numpy as np
import pytest

from vbhmm.datagen import benchmark_model, sample
from vbhmm.errors import DataError
from vbhmm.fileio import (
    SCHEMA_VERSION,
    ModelFormatError,
    params_to_dict,
    read_model,
    read_params,
    read_sequences,
    write_ml_model,
    write_model,
    write_sequences,
)
from vbhmm.baseline_em import baum_welch_fit
from vbhmm.trainer import TrainConfig, fit


@pytest.fixture(scope="module")
def report():
    X, _ = sample(benchmark_model(), 200, seed=0)
    return fit([X], TrainConfig(J=2))


def test_csv_roundtrip(tmp_path, rng):
    seqs = [rng.normal(size=(5, 2)), rng.normal(size=(3, 2))]
    path = tmp_path / "d.csv"
    write_sequences(path, seqs)
    back = read_sequences(path)
    assert len(back) == 2
    for a, b in zip(seqs, back):
        np.testing.assert_array_equal(a, b)


def test_csv_with_states(tmp_path):
    path = tmp_path / "d.csv"
    write_sequences(path, [np.array([[1.5], [2.5]])], [np.array([0, 1])])
    assert path.read_text() == "1.5,0\n2.5,1\n"


def test_jsonl(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text("[[1, 2], [3, 4]]\n\n[[5, 6]]\n")
    seqs = read_sequences(path)
    assert [s.shape for s in seqs] == [(2, 2), (1, 2)]


@pytest.mark.parametrize(
    "text, fmt, fragment",
    [
        ("1,2\n3\n", "csv", "line 2"),
        ("1,x\n", "csv", "non-numeric"),
        ("1,nan\n", "csv", "non-finite"),
        ("\n\n", "csv", "no observations"),
        ("[[1, 2], [3]]\n", "jsonl", "expected 2 values"),
        ('[[1, "a"]]\n', "jsonl", "non-numeric"),
        ("[[1, NaN]]\n", "jsonl", "non-finite"),
        ("[[true]]\n", "jsonl", "non-numeric"),
        ("{bad\n", "jsonl", "invalid JSON"),
        ("[]\n", "jsonl", "non-empty"),
    ],
)
def test_malformed_data(tmp_path, text, fmt, fragment):
    path = tmp_path / f"d.{fmt}"
    path.write_text(text)
    with pytest.raises(DataError, match=fragment):
        read_sequences(path)


def test_model_roundtrip_is_exact(tmp_path, report):
    path = tmp_path / "m.json"
    write_model(report, report.priors, path, {"seed": 0})
    mf = read_model(path)
    assert mf.method == "vb" and mf.schema_version == SCHEMA_VERSION
    assert (mf.J, mf.D) == (2, 2)
    np.testing.assert_array_equal(mf.posterior.transitions, report.posterior.transitions)
    for a, b in zip(mf.posterior.emissions, report.posterior.emissions):
        assert a.allclose(b)
    assert mf.priors.emission0.allclose(report.priors.emission0)
    assert mf.train_meta["final_elbo"] == report.final_elbo
    assert mf.train_meta["seed"] == 0
    # rewriting gives the same bytes
    path2 = tmp_path / "m2.json"
    write_model(report, report.priors, path2, {"seed": 0})
    assert path.read_bytes() == path2.read_bytes()


def test_ml_model_roundtrip(tmp_path):
    X, _ = sample(benchmark_model(), 200, seed=0)
    model, trace = baum_welch_fit([X], 2)
    path = tmp_path / "em.json"
    write_ml_model(model, path, {"iterations": len(trace)})
    mf = read_model(path)
    assert mf.method == "em"
    np.testing.assert_array_equal(mf.ml_model.covariances, model.covariances)


def test_schema_version_mismatch(tmp_path, report):
    path = tmp_path / "m.json"
    write_model(report, report.priors, path)
    doc = json.loads(path.read_text())
    doc["schema_version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="schema_version 99"):
        read_model(path)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("posterior"),
        lambda d: d.update(method="mcmc"),
        lambda d: d.update(J=3),
        lambda d: d["posterior"]["emissions"][0].update(nu=-1.0),
    ],
)
def test_invalid_model_file(tmp_path, report, mutate):
    path = tmp_path / "m.json"
    write_model(report, report.priors, path)
    doc = json.loads(path.read_text())
    mutate(doc)
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError):
        read_model(path)


def test_not_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{")
    with pytest.raises(ModelFormatError, match="malformed JSON"):
        read_model(path)
    path.write_text("[]")
    with pytest.raises(ModelFormatError, match="not a model file"):
        read_model(path)


def test_params_roundtrip(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(params_to_dict(benchmark_model())))
    back = read_params(path)
    np.testing.assert_array_equal(back.A, benchmark_model().A)
    path.write_text(json.dumps({"pi": [1.0]}))
    with pytest.raises(ModelFormatError):
        read_params(path)
