"""Cross-validation, metrics, significance tests, parameter sweeps and
learning curves over precomputed Gram matrices."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import svm
from .kernels import LocalAlignmentKernel, AlignParams, compute_gram, normalize_gram
from .kernels.base import as_kernel

DEFAULT_C_GRID = tuple(2.0 ** p for p in range(-6, 13, 2))


@dataclass(frozen=True)
class FoldPlan:
    """Fold assignment plus each instance's rank in the seeded shuffle."""

    k: int
    seed: int
    assignment: np.ndarray
    rank: np.ndarray

    def __len__(self) -> int:
        return len(self.assignment)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)

    def sizes(self) -> list[int]:
        return [int(np.sum(self.assignment == f)) for f in range(self.k)]

    def permuted(self, perm: Sequence[int]) -> "FoldPlan":
        """The same plan for data reordered as ``data[perm]``."""
        perm = np.asarray(perm)
        return FoldPlan(self.k, self.seed, self.assignment[perm], self.rank[perm])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.assignment, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]


def kfold_split(data, k: int = 10, seed: int = 0, stratify: bool = False, labels=None) -> FoldPlan:
    """Seeded shuffle followed by contiguous chunking into ``k`` folds.

    ``data`` is a Dataset, a sequence, or an instance count. With
    ``stratify`` the shuffled positives come first and instances are dealt
    round-robin, so both fold sizes and class mixes stay balanced.
    """
    n = data if isinstance(data, (int, np.integer)) else len(data)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} exceeds dataset size {n}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    assignment = np.empty(n, dtype=np.int64)
    if stratify:
        if labels is None:
            labels = data.labels
        lab = np.asarray(labels)[order] > 0
        dealt = np.concatenate([order[lab], order[~lab]])
        assignment[dealt] = np.arange(n) % k
    else:
        for f, chunk in enumerate(np.array_split(order, k)):
            assignment[chunk] = f
    return FoldPlan(k, seed, assignment, rank)


@dataclass(frozen=True)
class Metrics:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f_score(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def accuracy(self) -> float:
        n = self.tp + self.fp + self.fn + self.tn
        return (self.tp + self.tn) / n if n else 0.0

    def __add__(self, other: "Metrics") -> "Metrics":
        return Metrics(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
                "precision": self.precision, "recall": self.recall, "f_score": self.f_score}


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    if min(tp, fp, fn, tn) < 0:
        raise ValueError("counts must be non-negative")
    return Metrics(tp, fp, fn, tn)


def metrics_from_predictions(y_true, y_pred) -> Metrics:
    t = np.asarray(y_true) > 0
    p = np.asarray(y_pred) > 0
    return Metrics(int(np.sum(t & p)), int(np.sum(~t & p)), int(np.sum(t & ~p)), int(np.sum(~t & ~p)))


def _signs(labels) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    return np.where(y > 0, 1.0, -1.0)


def _fit_predict(K, y, train_idx, test_idx, C, weighting, tolerance):
    """Predictions for ``test_idx``; a one-class training set predicts that class."""
    ytr = y[train_idx]
    if np.all(ytr == ytr[0]):
        return np.full(len(test_idx), ytr[0]), True
    cfg = svm.TrainConfig(C=C, class_weighting=weighting, tolerance=tolerance)
    model = svm.train(K[np.ix_(train_idx, train_idx)], ytr, cfg)
    return svm.predict_many(model, K[np.ix_(test_idx, train_idx)]), False


def select_c(K, y, train_idx, rank, c_grid, weighting, inner_folds=3, tolerance=1e-3):
    """Pick C by inner cross-validation on ``train_idx`` (F-score, ties to
    the smaller C). Inner folds deal the training instances round-robin in
    shuffle-rank order."""
    grid = sorted(c_grid)
    if len(grid) == 1:
        return grid[0]
    train_idx = np.asarray(train_idx)
    inner = min(inner_folds, len(train_idx))
    if inner < 2:
        return grid[0]
    ordered = train_idx[np.argsort(rank[train_idx], kind="stable")]
    parts = [ordered[f::inner] for f in range(inner)]
    best_c, best_f = grid[0], -1.0
    for C in grid:
        total = Metrics()
        for f in range(inner):
            te = parts[f]
            tr = np.concatenate([parts[g] for g in range(inner) if g != f])
            pred, _ = _fit_predict(K, y, tr, te, C, weighting, tolerance)
            total = total + metrics_from_predictions(y[te], pred)
        if total.f_score > best_f:
            best_c, best_f = C, total.f_score
    return best_c


@dataclass
class FoldResult:
    fold: int
    C: float
    metrics: Metrics
    test_indices: np.ndarray
    constant: bool = False


@dataclass
class CVResult:
    folds: list[FoldResult]
    predictions: np.ndarray
    aggregate: Metrics = field(default_factory=Metrics)

    @property
    def fold_f_scores(self) -> list[float]:
        return [f.metrics.f_score for f in self.folds]


def cross_validate(g, labels, plan: FoldPlan, c_grid: Sequence[float] = DEFAULT_C_GRID,
                   weighting: str = svm.INVERSE, inner_folds: int = 3,
                   tolerance: float = 1e-3) -> CVResult:
    """Outer k-fold evaluation with C chosen on each training portion.

    Aggregate metrics are micro-averaged (pooled counts over folds). A
    training portion holding one class yields the constant classifier for
    that class, and the fold is flagged ``constant``.
    """
    if not len(c_grid):
        raise ValueError("empty C grid")
    K = np.asarray(g.values if hasattr(g, "values") else g, dtype=np.float64)
    y = _signs(labels)
    if len(y) != K.shape[0] or len(plan) != len(y):
        raise ValueError("Gram matrix, labels and fold plan disagree in size")
    predictions = np.zeros(len(y))
    folds = []
    for f in range(plan.k):
        te, tr = plan.test_indices(f), plan.train_indices(f)
        if len(te) == 0:
            continue
        C = select_c(K, y, tr, plan.rank, c_grid, weighting, inner_folds, tolerance)
        pred, constant = _fit_predict(K, y, tr, te, C, weighting, tolerance)
        predictions[te] = pred
        folds.append(FoldResult(f, C, metrics_from_predictions(y[te], pred), te, constant))
    aggregate = Metrics()
    for fr in folds:
        aggregate = aggregate + fr.metrics
    return CVResult(folds, predictions, aggregate)


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    significant: bool


def paired_ttest(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> TTestResult:
    """Two-tailed paired t-test on per-fold scores."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("score lists differ in length")
    if len(a) < 2:
        raise ValueError("need at least two paired scores")
    d = a - b
    mean = d.mean()
    sd = d.std(ddof=1)
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 1.0, False)
        return TTestResult(math.copysign(math.inf, mean), 0.0, True)
    t = mean / (sd / math.sqrt(len(d)))
    p = float(2.0 * stats.t.sf(abs(t), df=len(d) - 1))
    return TTestResult(float(t), p, p <= alpha)


@dataclass
class SweepRow:
    beta: float
    gap_open: float
    gap_extend: float
    result: CVResult

    @property
    def cell(self) -> str:
        return f"beta={self.beta:g} gap={self.gap_open:g}/{self.gap_extend:g}"

    @property
    def metrics(self) -> Metrics:
        return self.result.aggregate


def parse_gap(text: str) -> tuple[float, float]:
    """``"1.2/0.2"`` -> (1.2, 0.2)."""
    try:
        o, e = text.split("/")
        return float(o), float(e)
    except ValueError:
        raise ValueError(f"gap setting must look like open/extend, got {text!r}") from None


def parameter_sweep(ds, subst, beta_grid: Iterable[float], gap_grid: Iterable[tuple[float, float]],
                    plan: FoldPlan | None = None, k: int = 10, seed: int = 0,
                    c_grid: Sequence[float] = DEFAULT_C_GRID, weighting: str = svm.INVERSE,
                    workers: int = 1) -> list[SweepRow]:
    """Cross-validate the LA kernel for every (beta, gap) combination, all
    cells sharing one fold plan."""
    beta_grid, gap_grid = list(beta_grid), list(gap_grid)
    if not beta_grid or not gap_grid:
        raise ValueError("empty parameter grid")
    if plan is None:
        plan = kfold_split(ds, k, seed)
    labels = ds.labels
    rows = []
    for beta in beta_grid:
        for o, e in gap_grid:
            kern = LocalAlignmentKernel(subst, AlignParams(beta, o, e))
            g = normalize_gram(compute_gram(ds, kern, workers=workers))
            rows.append(SweepRow(beta, o, e, cross_validate(g, labels, plan, c_grid, weighting)))
    return rows


@dataclass
class CurvePoint:
    size: int
    C: float
    metrics: Metrics
    constant: bool = False


def learning_curve(train_ds, test_ds, kernel, sizes: Sequence[int], seed: int = 0,
                   c_grid: Sequence[float] = DEFAULT_C_GRID, weighting: str = svm.INVERSE,
                   workers: int = 1) -> list[CurvePoint]:
    """Train on growing seeded prefixes of ``train_ds``; score on ``test_ds``.

    Sizes whose model predicts no positives are reported with F = 0.
    """
    sizes = list(sizes)
    if sorted(sizes) != sizes:
        raise ValueError("sizes must be ascending")
    if sizes and sizes[-1] > len(train_ds):
        raise ValueError("size exceeds training set")
    kernel = as_kernel(kernel)
    n_tr = len(train_ds)
    g = normalize_gram(compute_gram(list(train_ds.paths) + list(test_ds.paths), kernel, workers=workers))
    K = g.values
    y = np.concatenate([_signs(train_ds.labels), _signs(test_ds.labels)])
    order = np.random.default_rng(seed).permutation(n_tr)
    rank = np.empty(len(y), dtype=np.int64)
    rank[order] = np.arange(n_tr)
    rank[n_tr:] = np.arange(n_tr, len(y))
    test_idx = np.arange(n_tr, len(y))
    out = []
    for size in sizes:
        tr = np.sort(order[:size])
        C = select_c(K, y, tr, rank, c_grid, weighting)
        pred, constant = _fit_predict(K, y, tr, test_idx, C, weighting, 1e-3)
        out.append(CurvePoint(size, C, metrics_from_predictions(y[test_idx], pred), constant))
    return out


REPORT_HEADER = "cell\tprecision\trecall\tf_score\n"


def format_report(rows: Iterable[tuple[str, Metrics]]) -> str:
    lines = [REPORT_HEADER]
    for cell, m in rows:
        lines.append(f"{cell}\t{m.precision:.6f}\t{m.recall:.6f}\t{m.f_score:.6f}\n")
    return "".join(lines)


def cv_report_rows(result: CVResult) -> list[tuple[str, Metrics]]:
    rows = [(f"fold{fr.fold}", fr.metrics) for fr in result.folds]
    rows.append(("aggregate", result.aggregate))
    return rows


def write_manifest(path, **info) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(info, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
