"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

import argparse
import json
import sys
from importlib import resources

import numpy as np

from .baseline_em import baum_welch_fit
from .datagen import sample
from .errors import DataError, DomainError, NumericError
from .fileio import (
    ModelFormatError,
    read_model,
    read_params,
    read_sequences,
    write_ml_model,
    write_model,
    write_sequences,
)
from .forward_backward import e_step
from .params import log_likelihood
from .trainer import TrainConfig, fit, point_estimate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _fmt(values):
    return " ".join(repr(float(v)) for v in np.ravel(values))


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="vbhmm",
        description="Variational Bayesian training of Gaussian hidden Markov models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="fit a model to observation sequences")
    train.add_argument("--data", required=True)
    train.add_argument("--states", type=int, required=True, metavar="J")
    train.add_argument("--format", choices=("csv", "jsonl"))
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--tol", type=float, default=1e-6)
    train.add_argument("--max-iters", type=int, default=200)
    train.add_argument("--init", choices=("random", "kmeans"), default="kmeans")
    train.add_argument("--initial-update", choices=("occupancy", "first-step"), default="first-step")
    train.add_argument("--restarts", type=int, default=1)
    train.add_argument("--method", choices=("vb", "em"), default="vb")
    train.add_argument("--cov-floor", type=float, default=None,
                       help="eigenvalue floor for --method em (default: 1e-6 x data variance)")
    train.add_argument("--out", required=True)

    samp = sub.add_parser("sample", help="draw a sequence from a known or trained model")
    samp.add_argument("--model", required=True,
                      help="parameter JSON (pi, A, means, covariances), a model file, "
                           "or 'benchmark'")
    samp.add_argument("--length", type=int, required=True)
    samp.add_argument("--seed", type=int, default=0)
    samp.add_argument("--with-states", action="store_true")
    samp.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="score sequences under a trained model")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--format", choices=("csv", "jsonl"))

    insp = sub.add_parser("inspect", help="print model parameters")
    insp.add_argument("--model", required=True)
    return parser


def _cmd_train(args, out):
    data = read_sequences(args.data, args.format)
    if len({X.shape[1] for X in data}) != 1:
        raise DataError(f"{args.data}: sequences have inconsistent dimensions")
    if args.method == "em":
        model, trace = baum_welch_fit(
            data, args.states, seed=args.seed, max_iters=args.max_iters, tol=args.tol,
            cov_floor=args.cov_floor, init=args.init,
        )
        for k, value in enumerate(trace, start=1):
            print(f"iter {k} loglik {value!r}", file=out)
        write_ml_model(model, args.out, {
            "method": "em",
            "seed": args.seed,
            "iterations": len(trace),
            "final_loglik": trace[-1],
        })
        return EXIT_OK

    cfg = TrainConfig(
        J=args.states,
        tol=args.tol,
        max_iters=args.max_iters,
        seed=args.seed,
        init=args.init,
        initial_update_mode=args.initial_update,
        restarts=args.restarts,
    )
    report = fit(data, cfg)
    for k, value in enumerate(report.elbo_trace, start=1):
        print(f"iter {k} elbo {value!r}", file=out)
    write_model(report, report.priors, args.out, {
        "seed": args.seed,
        "init": args.init,
        "initial_update": args.initial_update,
        "restart": report.restart,
    })
    return EXIT_OK


def _load_sampling_model(source):
    if source == "benchmark":
        ref = resources.files("vbhmm").joinpath("data/benchmark.json")
        with resources.as_file(ref) as path:
            return read_params(path)
    with open(source) as fh:
        doc = json.load(fh)
    if "schema_version" in doc:
        mf = read_model(source)
        return mf.ml_model if mf.method == "em" else point_estimate(mf.posterior)
    return read_params(source)


def _cmd_sample(args, out):
    if args.length < 1:
        raise DataError("--length must be at least 1")
    model = _load_sampling_model(args.model)
    X, states = sample(model, args.length, args.seed)
    write_sequences(args.out, [X], [states] if args.with_states else None)
    return EXIT_OK


def _cmd_eval(args, out):
    mf = read_model(args.model)
    data = read_sequences(args.data, args.format)
    for X in data:
        if X.shape[1] != mf.D:
            raise DataError(f"model expects {mf.D} columns, data has {X.shape[1]}")
    if mf.method == "vb":
        label = "log_z_tilde"
        scores = [e_step(mf.posterior, X).log_z_tilde for X in data]
    else:
        label = "loglik"
        scores = [log_likelihood(mf.ml_model, X) for X in data]
    total = float(sum(scores))
    for k, value in enumerate(scores):
        print(f"seq {k} {label} {value!r}", file=out)
    print(f"total {label} {total!r}", file=out)
    print(f"per_obs {label} {total / sum(len(X) for X in data)!r}", file=out)
    if not np.isfinite(total):
        raise NumericError("non-finite score")
    return EXIT_OK


def _cmd_inspect(args, out):
    mf = read_model(args.model)
    params = mf.ml_model if mf.method == "em" else point_estimate(mf.posterior)
    lines = [f"method {mf.method}", f"J {mf.J}", f"D {mf.D}", f"pi {_fmt(params.pi)}"]
    lines += [f"A[{j}] {_fmt(row)}" for j, row in enumerate(params.A)]
    lines += [f"mean[{j}] {_fmt(m)}" for j, m in enumerate(params.means)]
    lines += [f"cov[{j}] {_fmt(c)}" for j, c in enumerate(params.covariances)]
    if mf.method == "vb":
        post, pri = mf.posterior, mf.priors
        lines.append(f"posterior.initial {_fmt(post.initial)}")
        lines += [f"posterior.transitions[{j}] {_fmt(r)}" for j, r in enumerate(post.transitions)]
        for j, gw in enumerate(post.emissions):
            lines += [
                f"posterior.emission[{j}].m {_fmt(gw.m)}",
                f"posterior.emission[{j}].beta {gw.beta!r}",
                f"posterior.emission[{j}].W {_fmt(gw.W)}",
                f"posterior.emission[{j}].nu {gw.nu!r}",
            ]
        lines.append(f"prior.initial_alpha0 {_fmt(pri.initial_alpha0)}")
        lines += [f"prior.transition_alpha0[{j}] {_fmt(r)}"
                  for j, r in enumerate(pri.transition_alpha0)]
        e0 = pri.emission0
        lines += [
            f"prior.m0 {_fmt(e0.m)}",
            f"prior.beta0 {e0.beta!r}",
            f"prior.W0 {_fmt(e0.W)}",
            f"prior.nu0 {e0.nu!r}",
        ]
    for key in sorted(mf.train_meta):
        lines.append(f"meta.{key} {mf.train_meta[key]}")
    print("\n".join(lines), file=out)
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "sample": _cmd_sample,
    "eval": _cmd_eval,
    "inspect": _cmd_inspect,
}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, out)
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"vbhmm: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, ModelFormatError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"vbhmm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # invalid option values (e.g. --states 0) surface from config validation
        print(f"vbhmm: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
