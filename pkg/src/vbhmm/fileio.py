"""Dataset files and model persistence.

Sequence files
    csv: one observation per row with D numeric columns; a blank line starts a
    new sequence.  jsonl: one sequence per line, as a JSON array of D-length
    arrays.

Model files
    A single JSON document tagged with ``schema_version``.  Floats are written
    with Python's shortest round-trip repr, so reading a file back reproduces
    every binary64 value exactly.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataError, DomainError
from .params import HmmParams
from .posteriors import GaussWishart, HmmPosterior, HmmPriors

__all__ = [
    "SCHEMA_VERSION",
    "ModelFile",
    "ModelFormatError",
    "read_sequences",
    "write_sequences",
    "write_model",
    "write_ml_model",
    "read_model",
    "read_params",
    "params_to_dict",
]

SCHEMA_VERSION = 1


class ModelFormatError(DataError):
    """Malformed or incompatible model file."""


def _infer_format(path, fmt):
    if fmt is not None:
        if fmt not in ("csv", "jsonl"):
            raise DataError(f"unknown data format {fmt!r}")
        return fmt
    return "jsonl" if Path(path).suffix.lower() in (".jsonl", ".json") else "csv"


def _parse_float(cell, lineno):
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"line {lineno}: non-numeric value {cell.strip()!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {lineno}: non-finite value {cell.strip()!r}")
    return value


def _read_csv(lines):
    sequences, current, width = [], [], None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            if current:
                sequences.append(current)
                current = []
            continue
        row = [_parse_float(cell, lineno) for cell in line.split(",")]
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(f"line {lineno}: expected {width} columns, found {len(row)}")
        current.append(row)
    if current:
        sequences.append(current)
    return sequences


def _read_jsonl(lines):
    sequences, width = [], None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            seq = json.loads(line, parse_constant=float)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(seq, list) or not seq:
            raise DataError(f"line {lineno}: expected a non-empty array of observations")
        rows = []
        for obs in seq:
            if not isinstance(obs, list):
                raise DataError(f"line {lineno}: observations must be arrays")
            if width is None:
                width = len(obs)
            if len(obs) != width:
                raise DataError(f"line {lineno}: expected {width} values per observation")
            rows.append([_check_finite(v, lineno) for v in obs])
        sequences.append(rows)
    return sequences


def _check_finite(value, lineno):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DataError(f"line {lineno}: non-numeric value {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise DataError(f"line {lineno}: non-finite value {value!r}")
    return value


def read_sequences(path, format=None):
    """Read observation sequences; returns a list of (N_i, D) arrays."""
    fmt = _infer_format(path, format)
    text = Path(path).read_text()
    lines = text.splitlines()
    sequences = _read_csv(lines) if fmt == "csv" else _read_jsonl(lines)
    if not sequences:
        raise DataError(f"{path}: no observations found")
    if sequences[0] and len(sequences[0][0]) == 0:
        raise DataError(f"{path}: observations have no columns")
    return [np.array(seq, dtype=float) for seq in sequences]


def write_sequences(path, sequences, states=None):
    """Write csv sequences; ``states`` appends an integer label column."""
    lines = []
    for k, X in enumerate(sequences):
        if k:
            lines.append("")
        for n, row in enumerate(np.asarray(X, dtype=float)):
            cells = [repr(float(v)) for v in row]
            if states is not None:
                cells.append(str(int(states[k][n])))
            lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _floats(arr):
    return np.asarray(arr, dtype=float).tolist()


def _gw_to_dict(gw):
    return {"m": _floats(gw.m), "beta": gw.beta, "W": _floats(gw.W), "nu": gw.nu}


def _gw_from_dict(d):
    return GaussWishart(m=d["m"], beta=d["beta"], W=d["W"], nu=d["nu"])


def params_to_dict(params):
    return {
        "pi": _floats(params.pi),
        "A": _floats(params.A),
        "means": _floats(params.means),
        "covariances": _floats(params.covariances),
    }


def _params_from_dict(d):
    return HmmParams(pi=d["pi"], A=d["A"], means=d["means"], covariances=d["covariances"])


@dataclass(frozen=True, eq=False)
class ModelFile:
    schema_version: int
    method: str
    J: int
    D: int
    priors: HmmPriors = None
    posterior: HmmPosterior = None
    ml_model: HmmParams = None
    train_meta: dict = field(default_factory=dict)


def _dump(doc, path):
    text = json.dumps(doc, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def write_model(report, priors, path, train_meta=None):
    """Persist a VB fit: priors, posterior and training metadata."""
    post = report.posterior
    meta = {
        "iterations": report.iterations,
        "converged": report.converged,
        "final_elbo": report.final_elbo,
        "tool_version": __version__,
    }
    meta.update(train_meta or {})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "method": "vb",
        "J": post.J,
        "D": post.D,
        "priors": {
            "initial_alpha0": _floats(priors.initial_alpha0),
            "transition_alpha0": _floats(priors.transition_alpha0),
            "emission0": _gw_to_dict(priors.emission0),
        },
        "posterior": {
            "initial": _floats(post.initial),
            "transitions": _floats(post.transitions),
            "emissions": [_gw_to_dict(gw) for gw in post.emissions],
        },
        "train_meta": meta,
    }
    _dump(doc, path)


def write_ml_model(model, path, train_meta=None):
    """Persist a maximum-likelihood fit from the Baum-Welch baseline."""
    meta = {"tool_version": __version__}
    meta.update(train_meta or {})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "method": "em",
        "J": model.J,
        "D": model.D,
        "ml_model": params_to_dict(model),
        "train_meta": meta,
    }
    _dump(doc, path)


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None


def read_model(path):
    doc = _load_json(path)
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise ModelFormatError(f"{path}: not a model file (no schema_version)")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported schema_version {doc['schema_version']} "
            f"(this version reads {SCHEMA_VERSION})"
        )
    try:
        method = doc["method"]
        common = dict(
            schema_version=doc["schema_version"],
            method=method,
            J=int(doc["J"]),
            D=int(doc["D"]),
            train_meta=dict(doc.get("train_meta", {})),
        )
        if method == "vb":
            p, q = doc["priors"], doc["posterior"]
            priors = HmmPriors(
                initial_alpha0=p["initial_alpha0"],
                transition_alpha0=p["transition_alpha0"],
                emission0=_gw_from_dict(p["emission0"]),
            )
            post = HmmPosterior(
                initial=q["initial"],
                transitions=q["transitions"],
                emissions=tuple(_gw_from_dict(e) for e in q["emissions"]),
            )
            out = ModelFile(priors=priors, posterior=post, **common)
        elif method == "em":
            out = ModelFile(ml_model=_params_from_dict(doc["ml_model"]), **common)
        else:
            raise ModelFormatError(f"{path}: unknown method {method!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: invalid model file ({exc})") from None
    if out.posterior is not None and (out.posterior.J, out.posterior.D) != (out.J, out.D):
        raise ModelFormatError(f"{path}: J/D header disagrees with the posterior")
    return out


def read_params(path):
    """Read concrete HMM parameters (pi, A, means, covariances) from JSON."""
    doc = _load_json(path)
    try:
        return _params_from_dict(doc)
    except (KeyError, TypeError, DomainError, ValueError) as exc:
        raise ModelFormatError(f"{path}: invalid HMM parameter file ({exc})") from None
