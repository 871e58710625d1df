"""Soft-margin SVM on a precomputed kernel matrix.

The dual is solved by sequential minimal optimisation with second-order
working-set selection. Indefinite kernels are tolerated: a non-positive
curvature along the chosen pair is replaced by a small constant and the
step is clipped to the box, which keeps every update an ascent step.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numba
import numpy as np

TAU = 1e-12
NONE = "none"
INVERSE = "inverse_class_probability"


class SingleClassError(ValueError):
    pass


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    class_weighting: str = NONE
    tolerance: float = 1e-6
    max_iter: int | None = None

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be > 0")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.class_weighting not in (NONE, INVERSE):
            raise ValueError(f"unknown class weighting {self.class_weighting!r}")


@dataclass
class TrainedModel:
    alpha: np.ndarray
    y: np.ndarray
    b: float
    ids: list[str] = field(default_factory=list)
    bounds: np.ndarray | None = None
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True

    @property
    def coef(self) -> np.ndarray:
        return self.alpha * self.y

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 0)

    @property
    def support_ids(self) -> list[str]:
        return [self.ids[i] for i in self.support] if self.ids else []


def box_bounds(y: np.ndarray, C: float, weighting: str) -> np.ndarray:
    """Per-instance upper bound C_i; inverse weighting gives C / P(class)."""
    y = np.asarray(y)
    if weighting == NONE:
        return np.full(len(y), float(C))
    frac_pos = np.mean(y > 0)
    frac = np.where(y > 0, frac_pos, 1.0 - frac_pos)
    return C / frac


@numba.njit(cache=True)
def _smo(K, y, Cb, eps, max_iter, trace):
    n = K.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    obj = np.zeros(max_iter + 1 if trace else 1)
    it = 0
    gap = np.inf
    while it < max_iter:
        # select i: max over I_up of -y G
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < Cb[t]) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        gmax2 = -np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < Cb[t]):
                yg = y[t] * G[t]
                if yg > gmax2:
                    gmax2 = yg
                if i >= 0:
                    bdiff = gmax + yg
                    if bdiff > 0:
                        a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if a <= 0:
                            a = TAU
                        cand = -(bdiff * bdiff) / a
                        if cand < best:
                            best = cand
                            j = t
        gap = gmax + gmax2
        if gap < eps or i < 0 or j < 0:
            break

        yi, yj = y[i], y[j]
        Ci, Cj = Cb[i], Cb[j]
        old_ai, old_aj = alpha[i], alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU
        ai, aj = old_ai, old_aj
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > Ci - Cj:
                if ai > Ci:
                    ai = Ci
                    aj = Ci - diff
            else:
                if aj > Cj:
                    aj = Cj
                    ai = Cj + diff
        else:
            delta = (G[i] - G[j]) / quad
            s = ai + aj
            ai -= delta
            aj += delta
            if s > Ci:
                if ai > Ci:
                    ai = Ci
                    aj = s - Ci
            else:
                if aj < 0:
                    aj = 0.0
                    ai = s
            if s > Cj:
                if aj > Cj:
                    aj = Cj
                    ai = s - Cj
            else:
                if ai < 0:
                    ai = 0.0
                    aj = s
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - old_ai
        daj = aj - old_aj
        for t in range(n):
            G[t] += y[t] * (yi * K[t, i] * dai + yj * K[t, j] * daj)
        it += 1
        if trace:
            f = 0.0
            for t in range(n):
                f += alpha[t] * (G[t] - 1.0)
            obj[it] = 0.5 * f
    return alpha, G, it, gap, obj[: it + 1]


def _bias(alpha, G, y, Cb):
    ub, lb = np.inf, -np.inf
    free_sum, n_free = 0.0, 0
    for t in range(len(y)):
        yg = y[t] * G[t]
        if alpha[t] >= Cb[t]:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            n_free += 1
            free_sum += yg
    rho = free_sum / n_free if n_free else (ub + lb) / 2.0
    return -rho


def _as_signs(labels) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    if set(np.unique(y)) <= {0.0, 1.0}:
        y = np.where(y > 0, 1.0, -1.0)
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("labels must be in {0, 1} or {-1, +1}")
    return y


def train(g, labels, cfg: TrainConfig = TrainConfig(), ids: Sequence[str] | None = None,
          return_trace: bool = False):
    """Fit the dual on Gram matrix ``g`` (array or GramMatrix).

    ``labels`` may be 0/1 or -1/+1. With ``return_trace`` the dual
    objective after every iteration is returned alongside the model.
    """
    if hasattr(g, "values"):
        ids = ids if ids is not None else g.ids
        g = g.values
    K = np.ascontiguousarray(g, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("kernel matrix must be square")
    y = _as_signs(labels)
    if len(y) != K.shape[0]:
        raise ValueError(f"{len(y)} labels for a {K.shape[0]}x{K.shape[0]} kernel matrix")
    if len(np.unique(y)) < 2:
        raise SingleClassError("training data contains a single class")
    Cb = box_bounds(y, cfg.C, cfg.class_weighting)
    n = len(y)
    max_iter = cfg.max_iter if cfg.max_iter is not None else max(1_000_000, 100 * n)
    alpha, G, it, gap, obj = _smo(K, y, Cb, cfg.tolerance, max_iter, return_trace)
    converged = bool(gap < cfg.tolerance)
    if not converged:
        warnings.warn(f"SMO stopped after {it} iterations with KKT gap {gap:.3g}",
                      ConvergenceWarning, stacklevel=2)
    model = TrainedModel(alpha=alpha, y=y, b=_bias(alpha, G, y, Cb),
                         ids=list(ids) if ids is not None else [], bounds=Cb,
                         iterations=int(it), residual=float(max(gap, 0.0)), converged=converged)
    if return_trace:
        return model, -obj  # dual objective, to be maximised
    return model


def decision_function(model: TrainedModel, kernel_rows) -> np.ndarray:
    """f(x) for each row of k(x, x_i) over the training instances."""
    rows = np.atleast_2d(np.asarray(kernel_rows, dtype=np.float64))
    if rows.shape[1] != len(model.alpha):
        raise ValueError(f"kernel row has length {rows.shape[1]}, model expects {len(model.alpha)}")
    return rows @ model.coef + model.b


def predict(model: TrainedModel, kernel_row) -> tuple[int, float]:
    """Class (+1/-1; ties go to -1) and decision value for one instance."""
    row = np.asarray(kernel_row, dtype=np.float64)
    if row.ndim != 1:
        raise ValueError("expected a single kernel row")
    f = float(decision_function(model, row)[0])
    return (1 if f > 0 else -1), f


def predict_many(model: TrainedModel, kernel_rows) -> np.ndarray:
    f = decision_function(model, kernel_rows)
    return np.where(f > 0, 1, -1)


def kkt_residual(K, labels, model: TrainedModel) -> float:
    """Maximal KKT violation m(alpha) - M(alpha), recomputed from scratch."""
    K = np.asarray(K, dtype=np.float64)
    y = _as_signs(labels)
    G = y * (K @ (model.alpha * y)) - 1.0
    Cb = model.bounds
    up = ((y > 0) & (model.alpha < Cb)) | ((y < 0) & (model.alpha > 0))
    low = ((y > 0) & (model.alpha > 0)) | ((y < 0) & (model.alpha < Cb))
    if not up.any() or not low.any():
        return 0.0
    return float(max(0.0, np.max(-y[up] * G[up]) + np.max(y[low] * G[low])))


def _fmt(v: float) -> str:
    return "%.17g" % v


def export_precomputed(g, labels, stream: TextIO | None = None) -> str:
    """LibSVM precomputed-kernel lines: ``<label> 0:<serial> 1:<k> ... n:<k>``."""
    K = g.values if hasattr(g, "values") else np.asarray(g, dtype=np.float64)
    y = _as_signs(labels) if len(labels) else np.zeros(0)
    lines = []
    for i in range(K.shape[0]):
        lab = "+1" if y[i] > 0 else "-1"
        cells = " ".join(f"{j + 1}:{_fmt(K[i, j])}" for j in range(K.shape[1]))
        lines.append(f"{lab} 0:{i + 1} {cells}\n")
    text = "".join(lines)
    if stream is not None:
        stream.write(text)
    return text


def parse_precomputed(stream: TextIO | str) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    labels, rows = [], []
    for lineno, line in enumerate(stream, start=1):
        parts = line.split()
        if not parts:
            continue
        labels.append(float(parts[0]))
        cells = dict(p.split(":", 1) for p in parts[1:])
        if int(cells.pop("0")) != len(rows) + 1:
            raise ValueError(f"serial number out of order at line {lineno}")
        rows.append([float(cells[str(j)]) for j in range(1, len(cells) + 1)])
    return np.array(rows, dtype=np.float64).reshape(len(rows), -1), np.array(labels)


def save_model(model: TrainedModel, stream: TextIO | None = None) -> str:
    buf = io.StringIO()
    buf.write("#svm-model v1\n")
    buf.write(f"b\t{_fmt(model.b)}\n")
    buf.write(f"n\t{len(model.alpha)}\n")
    ids = model.ids or [str(i) for i in range(len(model.alpha))]
    for ident, c, a, bound in zip(ids, model.coef, model.alpha, model.bounds):
        buf.write(f"{ident}\t{_fmt(c)}\t{_fmt(bound)}\n")
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def load_model(stream: TextIO | str) -> TrainedModel:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = [ln.rstrip("\r\n") for ln in stream if ln.strip()]
    if not lines or lines[0] != "#svm-model v1":
        raise ValueError("missing '#svm-model v1' header")
    b = float(lines[1].split("\t")[1])
    n = int(lines[2].split("\t")[1])
    ids, coef, bounds = [], [], []
    for ln in lines[3:3 + n]:
        ident, c, bound = ln.split("\t")
        ids.append(ident)
        coef.append(float(c))
        bounds.append(float(bound))
    coef = np.array(coef)
    y = np.where(coef < 0, -1.0, 1.0)
    return TrainedModel(alpha=np.abs(coef), y=y, b=b, ids=ids, bounds=np.array(bounds))


def dual_objective(K, labels, alpha) -> float:
    y = _as_signs(labels)
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ np.asarray(K) @ v)
