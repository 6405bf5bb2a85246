"""Command-line interface.

Subcommands: predict, sweep, histogram, convergence, estimate-tau,
mnist-stats.  Config files are JSON (TOML accepted when the interpreter
ships tomllib); keys are documented in the README.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments, mnist, theory
from .errors import (
    BadMagic,
    ClassMissing,
    CountMismatch,
    DegenerateStats,
    EigFailure,
    LssvmError,
    SingularSystem,
    TruncatedFile,
)
from .kernels import kernel_from_spec
from .mixture import mix64, model_from_spec, sample

_DATA_ERRORS = (BadMagic, TruncatedFile, CountMismatch, ClassMissing, FileNotFoundError)
_NUMERIC_ERRORS = (SingularSystem, EigFailure, DegenerateStats, np.linalg.LinAlgError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_config(path):
    text = Path(path).read_bytes()
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError as exc:
            raise ValueError("TOML configs need Python >= 3.11; use JSON") from exc
        return tomllib.loads(text.decode())
    return json.loads(text)


def _emit(obj, args):
    out = json.dumps(obj, indent=2)
    if getattr(args, "out", None):
        Path(args.out).write_text(out + "\n")
    else:
        print(out)


def _resolve_profile(doc, model):
    return experiments.resolve_kernel(doc.get("kernel", {"kind": "gaussian", "sigma2": 1.0}), model)


def cmd_predict(args):
    doc = _load_config(args.config)
    model = model_from_spec(doc["model"])
    profile = _resolve_profile(doc, model)
    n = int(doc.get("n", 256))
    gamma = float(doc.get("gamma", 1.0))
    convention = doc.get("convention", "standard")
    rule = args.threshold or doc.get("threshold", "optimal")
    stats = theory.gaussian_stats(model, n, gamma, profile, convention)
    threshold = experiments.resolve_threshold(rule, stats, model.c1, model.c2)
    eps1, eps2, weighted = theory.error_rates(stats, threshold, model.c1, model.c2)
    out = stats.as_dict()
    out.update(
        {"threshold_rule": rule, "threshold": threshold, "eps1": eps1, "eps2": eps2, "weighted": weighted}
    )
    _emit(out, args)
    return 0


def _config_overrides(args, doc):
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.threshold is not None:
        doc["threshold"] = args.threshold
    return doc


def cmd_sweep(args):
    doc = _config_overrides(args, _load_config(args.config))
    config = experiments.config_from_dict(doc)
    result = experiments.run_sweep(config)
    # CSV is the default file output; --full implies the JSON mirror
    fmt = args.format or ("json" if args.full or not args.out else "csv")
    if fmt == "csv":
        if not args.out:
            raise ValueError("--format csv requires --out")
        result.to_csv(args.out)
    elif args.out:
        result.to_json(args.out, full=args.full)
    else:
        print(json.dumps(result.to_json(full=args.full), indent=2))
    return 0


def cmd_histogram(args):
    doc = _config_overrides(args, _load_config(args.config))
    model = model_from_spec(doc["model"])
    profile = _resolve_profile(doc, model)
    result = experiments.run_histogram(
        model,
        int(doc.get("n", 256)),
        float(doc.get("gamma", 1.0)),
        profile,
        doc.get("convention", "standard"),
        int(doc.get("n_test", 100)),
        int(doc.get("trials", 50)),
        int(doc.get("base_seed", 0)),
    )
    out = result.summary()
    if args.full:
        out["scores1"] = result.scores1.tolist()
        out["scores2"] = result.scores2.tolist()
    _emit(out, args)
    return 0


def cmd_convergence(args):
    doc = _config_overrides(args, _load_config(args.config))
    sizes = [tuple(map(int, pair)) for pair in doc["sizes"]]
    model_spec = doc["model"]
    rows = experiments.run_convergence(
        lambda p: model_from_spec(model_spec, p=p),
        float(doc.get("gamma", 1.0)),
        lambda model: experiments.resolve_kernel(
            doc.get("kernel", {"kind": "gaussian", "sigma2": 1.0}), model
        ),
        sizes,
        int(doc.get("trials", 20)),
        int(doc.get("base_seed", 0)),
        n_points=int(doc.get("n_points", 100)),
    )
    _emit(
        [
            {"n": r.n, "p": r.p, "median_scaled_gap": r.median_scaled_gap, "samples": r.samples}
            for r in rows
        ],
        args,
    )
    return 0


def cmd_estimate_tau(args):
    path = Path(args.data)
    if not path.exists():
        raise FileNotFoundError(str(path))
    X = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, delimiter=",")
    _emit({"tau": theory.estimate_tau(X), "p": X.shape[0], "n": X.shape[1]}, args)
    return 0


def cmd_mnist_stats(args):
    data = mnist.load_idx(args.images, args.labels)
    if args.snr_db is not None:
        data = mnist.add_white_noise(data, args.snr_db, mix64(args.seed or 0, 99))
    model = mnist.class_stats(data, args.digit_a, args.digit_b)
    profile = kernel_from_spec({"kind": "gaussian", "sigma2": args.sigma2})
    stats = theory.gaussian_stats(model, args.n, args.gamma, profile)
    rule = args.threshold or "optimal"
    threshold = experiments.resolve_threshold(rule, stats, model.c1, model.c2)
    eps1, eps2, weighted = theory.error_rates(stats, threshold, model.c1, model.c2)

    mask = (data.labels == args.digit_a) | (data.labels == args.digit_b)
    pool_x = data.images[:, mask]
    pool_y = np.where(data.labels[mask] == args.digit_a, -1.0, 1.0)
    n1 = args.n // 2
    m1 = args.n_test // 2
    trials = args.trials or 10
    errs = [
        experiments.empirical_error_pool(
            pool_x, pool_y, n1, args.n - n1, m1, args.n_test - m1,
            args.gamma, profile, threshold, mix64(args.seed or 0, t),
        )[2]
        for t in range(trials)
    ]
    triples = {
        name: mnist.discrepancy_stats(
            mnist.class_stats(mnist.apply_scaling(data, name), args.digit_a, args.digit_b)
        )
        for name in mnist.CANDIDATE_SCALINGS
    }
    out = {
        "digits": [args.digit_a, args.digit_b],
        "counts": [int((data.labels == args.digit_a).sum()), int((data.labels == args.digit_b).sum())],
        "discrepancy_by_scaling": {k: list(v) for k, v in triples.items()},
        "theory": dict(stats.as_dict(), threshold=threshold, eps1=eps1, eps2=eps2, weighted=weighted),
        "empirical_weighted_error": float(np.mean(errs)),
        "empirical_se": float(np.std(errs, ddof=1) / np.sqrt(len(errs))) if len(errs) > 1 else None,
        "trials": trials,
    }
    _emit(out, args)
    return 0


def build_parser():
    parser = _Parser(prog="lssvmlim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], help="output format")
        p.add_argument("--seed", type=int, help="override base seed")
        p.add_argument("--trials", type=int, help="override trial count")
        p.add_argument(
            "--threshold", choices=list(experiments.THRESHOLD_RULES), help="threshold rule"
        )

    p = sub.add_parser("predict", help="asymptotic prediction from a model config")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep", help="empirical vs predicted error over a parameter grid")
    common(p)
    p.add_argument("--full", action="store_true", help="include per-trial records (JSON)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("histogram", help="pooled score samples with Gaussian overlay")
    common(p)
    p.add_argument("--full", action="store_true", help="include raw scores")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("convergence", help="score-equivalent convergence study")
    common(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("estimate-tau", help="distance concentration point of a data file")
    p.add_argument("data", help=".npy (p x n) or comma-separated text matrix")
    common(p, config=False)
    p.set_defaults(func=cmd_estimate_tau)

    p = sub.add_parser("mnist-stats", help="two-digit statistics, prediction, and test error")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--digit-a", type=int, default=8)
    p.add_argument("--digit-b", type=int, default=9)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--n-test", type=int, default=256)
    p.add_argument("--snr-db", type=float, default=None)
    common(p, config=False)
    p.set_defaults(func=cmd_mnist_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"lssvmlim: data error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"lssvmlim: invalid input: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"lssvmlim: numerical failure: {exc}", file=sys.stderr)
        return 3
    except LssvmError as exc:
        print(f"lssvmlim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
