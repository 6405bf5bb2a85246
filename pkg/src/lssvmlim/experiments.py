"""Monte Carlo harness tying mixtures, LS-SVM training, and the asymptotic
predictors together: parameter sweeps, score histograms, score-equivalent
convergence studies, and empirical-vs-theoretical error comparison.

Trial k of any experiment draws its randomness from ``mix64(base_seed, k)``
only, so results are reproducible and independent of scheduling order;
per-trial outcomes are stored and reduced at the end.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.stats

from .kernels import TaylorKernel, kernel_from_spec
from .lssvm import TrainedModel, classify
from .mixture import MixtureModel, mix64, model_from_spec, sample
from .theory import error_at_optimal, error_rates, gaussian_stats, random_equivalent

THRESHOLD_RULES = ("optimal", "zero", "bias")


def resolve_threshold(rule, stats, c1, c2):
    """Map a threshold rule name to a numeric threshold."""
    if rule == "optimal":
        return error_at_optimal(stats, c1, c2)[0]
    if rule == "zero":
        return 0.0
    if rule == "bias":
        return c2 - c1
    raise ValueError(f"unknown threshold rule: {rule!r}")


def _test_split(n_test, c1):
    """Per-class test counts at proportions c1 : c2, at least one each."""
    if n_test < 2:
        raise ValueError("n_test must be at least 2 to cover both classes")
    m1 = min(max(1, round(n_test * c1)), n_test - 1)
    return m1, n_test - m1


def empirical_error(model, n1, n2, n_test, gamma, profile, threshold, seed):
    """Train on a fresh sample, misclassification rates on a fresh test
    sample of ``n_test`` points split by the class proportions.

    Returns ``(eps1_hat, eps2_hat, weighted_hat)`` with the weighted rate
    ``c1 eps1 + c2 eps2``.
    """
    n = n1 + n2
    c1 = n1 / n
    c2 = n2 / n
    train_set = sample(model, n1, n2, mix64(seed, 0))
    test_set = sample(model, *_test_split(n_test, c1), mix64(seed, 1))
    fitted = TrainedModel.fit(train_set.X, train_set.labels, gamma, profile)
    assigned = classify(fitted.decide_many(test_set.X), threshold)
    truth = np.where(test_set.labels < 0, 1, 2)
    eps1 = float(np.mean(assigned[truth == 1] != 1))
    eps2 = float(np.mean(assigned[truth == 2] != 2))
    return eps1, eps2, c1 * eps1 + c2 * eps2


def empirical_error_pool(X, labels, n1, n2, m1, m2, gamma, profile, threshold, seed):
    """Like :func:`empirical_error`, but drawing train and test points
    without replacement from a fixed labeled pool (columns of ``X``,
    labels -1/+1).  Train and test sets are disjoint."""
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels)
    idx1 = np.flatnonzero(labels < 0)
    idx2 = np.flatnonzero(labels > 0)
    if len(idx1) < n1 + m1 or len(idx2) < n2 + m2:
        raise ValueError("pool too small for the requested train/test sizes")
    pick1 = rng.choice(idx1, size=n1 + m1, replace=False)
    pick2 = rng.choice(idx2, size=n2 + m2, replace=False)
    tr = np.concatenate([pick1[:n1], pick2[:n2]])
    te = np.concatenate([pick1[n1:], pick2[n2:]])
    fitted = TrainedModel.fit(X[:, tr], labels[tr].astype(float), gamma, profile)
    assigned = classify(fitted.decide_many(X[:, te]), threshold)
    truth = np.where(labels[te] < 0, 1, 2)
    eps1 = float(np.mean(assigned[truth == 1] != 1))
    eps2 = float(np.mean(assigned[truth == 2] != 2))
    c1 = n1 / (n1 + n2)
    return eps1, eps2, c1 * eps1 + (1 - c1) * eps2


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a base model/kernel plus a named axis and its grid."""

    model_spec: dict
    kernel_spec: dict
    n: int
    n_test: int
    gamma: float
    trials: int
    base_seed: int
    threshold_rule: str = "optimal"
    axis: str = None
    grid: tuple = ()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n_test < 1:
            raise ValueError("n_test must be at least 1")
        if self.axis is not None and len(self.grid) == 0:
            raise ValueError("sweep grid must be nonempty")
        if self.threshold_rule not in THRESHOLD_RULES:
            raise ValueError(f"unknown threshold rule: {self.threshold_rule!r}")
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))


def resolve_kernel(spec, model):
    """Kernel from config spec; a local kernel may anchor at the model's
    distance concentration point with ``"tau": "auto"``."""
    if spec.get("kind") == "local" and spec.get("tau") == "auto":
        spec = dict(spec, tau=model.tau)
    return kernel_from_spec(spec)


def _instantiate(config, value):
    """Materialize (model, profile, n, n1, n2) for one grid point."""
    axis = config.axis
    model_spec = dict(config.model_spec)
    n = config.n
    if axis == "c0":
        # dimension-to-sample sweep: n follows p at fixed p
        p = int(model_spec["p"])
        n = max(4, round(p / value))
    elif axis == "c1":
        model_spec["c1"] = value
        model_spec.pop("n1", None)
        model_spec.pop("n2", None)
    elif axis == "mu_offset":
        model_spec["mean1"] = f"unit_spike(1, {value})"
        model_spec["mean2"] = f"unit_spike(2, {value})"
    model = model_from_spec(model_spec)

    kernel_spec = dict(config.kernel_spec)
    if axis == "sigma2":
        kernel_spec = {"kind": "gaussian", "sigma2": value}
    elif axis in ("fprime", "fsecond"):
        # realized as the exact local quadratic anchored at the model's tau
        base = dict(kernel_spec)
        anchor = model.tau
        f0 = float(base.get("f", 1.0))
        fp = value if axis == "fprime" else float(base.get("fp", 0.0))
        fpp = value if axis == "fsecond" else float(base.get("fpp", 0.0))
        return model, TaylorKernel(anchor, f0, fp, fpp), n, *_class_counts(n, model.c1)
    elif axis not in (None, "c0", "c1", "mu_offset"):
        raise ValueError(f"unknown sweep axis: {axis!r}")
    return model, resolve_kernel(kernel_spec, model), n, *_class_counts(n, model.c1)


def _class_counts(n, c1):
    n1 = min(max(1, round(n * c1)), n - 1)
    return n1, n - n1


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    n: int
    p: int
    trials: int
    emp_err: float
    emp_se: float
    th_eps1: float
    th_eps2: float
    th_weighted: float
    threshold: float


CSV_COLUMNS = [
    "axis", "value", "n", "p", "trials", "emp_err", "emp_se",
    "th_eps1", "th_eps2", "th_weighted", "threshold",
]


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    per_trial: dict = field(default_factory=dict)  # value -> list of trial records
    failures: tuple = ()

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow([getattr(r, c) for c in CSV_COLUMNS])

    def to_json(self, path=None, full=False):
        obj = {"rows": [{c: getattr(r, c) for c in CSV_COLUMNS} for r in self.rows]}
        if full:
            obj["trials"] = {str(k): v for k, v in self.per_trial.items()}
            obj["failures"] = list(self.failures)
        if path is None:
            return obj
        Path(path).write_text(json.dumps(obj, indent=2))
        return obj


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Empirical error (mean over trials with standard error) and the
    asymptotic prediction for every grid point, in grid order.

    A failed trial is recorded under ``failures`` and excluded from the
    averages, never silently folded in.
    """
    grid = config.grid if config.axis is not None else (float("nan"),)
    rows, per_trial, failures = [], {}, []
    for gi, value in enumerate(grid):
        model, profile, n, n1, n2 = _instantiate(config, value)
        stats = gaussian_stats(model, n, config.gamma, profile)
        threshold = resolve_threshold(config.threshold_rule, stats, model.c1, model.c2)
        th_eps1, th_eps2, th_w = error_rates(stats, threshold, model.c1, model.c2)
        records = []
        for t in range(config.trials):
            seed = mix64(config.base_seed, gi * config.trials + t)
            try:
                e1, e2, w = empirical_error(
                    model, n1, n2, config.n_test, config.gamma, profile, threshold, seed
                )
            except Exception as exc:  # noqa: BLE001 - recorded, not averaged
                failures.append(
                    {"value": value, "trial": t, "seed": seed, "error": repr(exc)}
                )
                continue
            records.append({"trial": t, "seed": seed, "eps1": e1, "eps2": e2, "weighted": w})
        weighted = np.array([r["weighted"] for r in records])
        emp = float(weighted.mean()) if len(weighted) else float("nan")
        se = (
            float(weighted.std(ddof=1) / np.sqrt(len(weighted)))
            if len(weighted) > 1
            else float("nan")
        )
        rows.append(
            SweepRow(
                axis=config.axis or "none",
                value=value,
                n=n,
                p=model.p,
                trials=len(records),
                emp_err=emp,
                emp_se=se,
                th_eps1=th_eps1,
                th_eps2=th_eps2,
                th_weighted=th_w,
                threshold=threshold,
            )
        )
        per_trial[value] = records
    return SweepResult(rows=tuple(rows), per_trial=per_trial, failures=tuple(failures))


@dataclass(frozen=True, eq=False)
class HistogramResult:
    """Pooled test scores per class with their predicted Gaussian overlay."""

    scores1: np.ndarray
    scores2: np.ndarray
    stats: object  # TheoryStats
    ks1: float
    ks2: float

    def summary(self):
        out = {"ks1": self.ks1, "ks2": self.ks2}
        for name, s in (("class1", self.scores1), ("class2", self.scores2)):
            out[f"mean_{name}"] = float(s.mean())
            out[f"se_{name}"] = float(s.std(ddof=1) / np.sqrt(len(s)))
        out.update(self.stats.as_dict())
        return out


def run_histogram(model, n, gamma, profile, convention, n_test, trials, seed) -> HistogramResult:
    """Pool decision scores of fresh test points (n_test per class per trial)
    over independently trained models, with the per-class Gaussian prediction
    and a one-sample Kolmogorov-Smirnov distance against it."""
    n1, n2 = _class_counts(n, model.c1)
    scores1, scores2 = [], []
    for t in range(trials):
        s = mix64(seed, t)
        train_set = sample(model, n1, n2, mix64(s, 0))
        test_set = sample(model, n_test, n_test, mix64(s, 1))
        fitted = TrainedModel.fit(train_set.X, train_set.labels, gamma, profile, convention)
        scores = fitted.decide_many(test_set.X)
        scores1.append(scores[: n_test])
        scores2.append(scores[n_test:])
    scores1 = np.concatenate(scores1)
    scores2 = np.concatenate(scores2)
    stats = gaussian_stats(model, n1 + n2, gamma, profile, convention)
    ks1 = scipy.stats.kstest(scores1, "norm", args=(stats.E1, np.sqrt(stats.Var1))).statistic
    ks2 = scipy.stats.kstest(scores2, "norm", args=(stats.E2, np.sqrt(stats.Var2))).statistic
    return HistogramResult(scores1=scores1, scores2=scores2, stats=stats, ks1=float(ks1), ks2=float(ks2))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    p: int
    median_scaled_gap: float  # median over trials x points of n |g - g_hat|
    samples: int


def run_convergence(model_factory, gamma, profile, sizes, trials, base_seed, n_points=100):
    """Median of ``n |g(x) - g_hat(x)|`` per size, where the equivalent
    ``g_hat`` is evaluated from the true latents of freshly drawn training
    and test samples.

    ``model_factory(p)`` rebuilds the mixture at each dimension;
    ``profile`` may be a kernel or a callable ``model -> kernel`` (for
    locally specified kernels anchored at the model's tau).
    """
    rows = []
    for si, (n, p) in enumerate(sizes):
        model = model_factory(p)
        prof = profile(model) if callable(profile) else profile
        n1, n2 = _class_counts(n, model.c1)
        m1, m2 = _test_split(n_points, model.c1)
        gaps = []
        for t in range(trials):
            s = mix64(base_seed, si * trials + t)
            train_set = sample(model, n1, n2, mix64(s, 0))
            test_set = sample(model, m1, m2, mix64(s, 1))
            fitted = TrainedModel.fit(train_set.X, train_set.labels, gamma, prof)
            g = fitted.decide_many(test_set.X)
            for cls, sl in ((1, slice(0, m1)), (2, slice(m1, m1 + m2))):
                g_hat = random_equivalent(
                    train_set,
                    model,
                    test_set.omega[:, sl],
                    test_set.psi[sl],
                    cls,
                    gamma,
                    prof,
                )
                gaps.append(n * np.abs(g[sl] - g_hat))
        gaps = np.concatenate(gaps)
        rows.append(
            ConvergenceRow(n=n, p=p, median_scaled_gap=float(np.median(gaps)), samples=len(gaps))
        )
    return rows


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a parsed config file."""
    sweep = doc.get("sweep") or {}
    return ExperimentConfig(
        model_spec=doc["model"],
        kernel_spec=doc.get("kernel", {"kind": "gaussian", "sigma2": 1.0}),
        n=int(doc.get("n", 256)),
        n_test=int(doc.get("n_test", 256)),
        gamma=float(doc.get("gamma", 1.0)),
        trials=int(doc.get("trials", 20)),
        base_seed=int(doc.get("base_seed", 0)),
        threshold_rule=doc.get("threshold", "optimal"),
        axis=sweep.get("axis"),
        grid=tuple(sweep.get("grid", ())),
    )
