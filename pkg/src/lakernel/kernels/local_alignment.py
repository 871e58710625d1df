"""Local alignment (LA) kernel.

k_L(x, y) sums exp(beta * s(pi)) over every local alignment pi of x and y,
the empty alignment included. s adds the substitution score of each aligned
pair and subtracts g(l) = o + e * (l - 1) for each internal gap run of
length l in either sequence; unaligned prefixes and suffixes are free.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numba
import numpy as np

from .alignment import Scorer, as_scorer
from .base import Kernel


@dataclass(frozen=True)
class AlignParams:
    beta: float = 1.0
    gap_open: float = 1.2
    gap_extend: float = 0.2

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.gap_open < 0 or self.gap_extend < 0:
            raise ValueError("gap costs must be >= 0")
        if self.gap_extend > self.gap_open:
            warnings.warn(
                f"gap extension {self.gap_extend} exceeds gap opening {self.gap_open}",
                stacklevel=3,
            )

    def gap_cost(self, length: int) -> float:
        if length <= 0:
            return 0.0
        return self.gap_open + self.gap_extend * (length - 1)

    def label(self) -> str:
        return f"{self.gap_open:g}/{self.gap_extend:g}"


@numba.njit(nogil=True, cache=True)
def _la_dp(S, go, ge):
    # S[i, j] = exp(beta * d(x_i, y_j)); go = exp(-beta*o); ge = exp(-beta*e)
    n, m = S.shape
    M_prev = np.zeros(m + 1)
    X_prev = np.zeros(m + 1)
    Y_prev = np.zeros(m + 1)
    M_cur = np.zeros(m + 1)
    X_cur = np.zeros(m + 1)
    Y_cur = np.zeros(m + 1)
    total = 1.0
    for i in range(1, n + 1):
        M_cur[0] = 0.0
        X_cur[0] = 0.0
        Y_cur[0] = 0.0
        for j in range(1, m + 1):
            M_cur[j] = S[i - 1, j - 1] * (1.0 + M_prev[j - 1] + X_prev[j - 1] + Y_prev[j - 1])
            X_cur[j] = go * M_prev[j] + ge * X_prev[j]
            Y_cur[j] = go * (M_cur[j - 1] + X_cur[j - 1]) + ge * Y_cur[j - 1]
            total += M_cur[j]
        M_prev, M_cur = M_cur, M_prev
        X_prev, X_cur = X_cur, X_prev
        Y_prev, Y_cur = Y_cur, Y_prev
    return total


@numba.njit(nogil=True, cache=True)
def _precedes(b, a):
    if b.shape[0] != a.shape[0]:
        return b.shape[0] < a.shape[0]
    for i in range(a.shape[0]):
        if b[i] != a[i]:
            return b[i] < a[i]
    return False


@numba.njit(nogil=True, cache=True)
def _la_pairs(E, tokens, offsets, I, J, go, ge, out):
    # token ids follow sorted key order, so the orientation matches la_kernel
    for p in range(I.shape[0]):
        a = tokens[offsets[I[p]]:offsets[I[p] + 1]]
        b = tokens[offsets[J[p]]:offsets[J[p] + 1]]
        if _precedes(b, a):
            a, b = b, a
        S = np.empty((a.shape[0], b.shape[0]))
        for i in range(a.shape[0]):
            for j in range(b.shape[0]):
                S[i, j] = E[a[i], b[j]]
        out[p] = _la_dp(S, go, ge)


def _score_matrix(x: Sequence, y: Sequence, d: Callable) -> np.ndarray:
    S = np.empty((len(x), len(y)))
    for i, a in enumerate(x):
        for j, b in enumerate(y):
            S[i, j] = d(a, b)
    return S


def _canonical(seq: Sequence) -> tuple:
    return len(seq), [str(getattr(t, "key", t)) for t in seq]


def _exp_scaled(D: np.ndarray, beta: float) -> np.ndarray:
    """exp(beta * D) element by element, so every code path rounds alike."""
    E = np.ones(D.shape)
    nz = np.nonzero(D)
    E[nz] = [math.exp(beta * v) for v in D[nz].tolist()]
    return E


def la_kernel(x: Sequence, y: Sequence, subst: Scorer, params: AlignParams = AlignParams()) -> float:
    """LA kernel value via the five-state dynamic program, O(|x| |y|)."""
    d = as_scorer(subst)
    if len(x) == 0 or len(y) == 0:
        return 1.0
    if _canonical(y) < _canonical(x):
        # the DP is symmetric only up to rounding; fix one orientation
        x, y = y, x
    S = _exp_scaled(_score_matrix(x, y, d), params.beta)
    return float(_la_dp(S, math.exp(-params.beta * params.gap_open),
                        math.exp(-params.beta * params.gap_extend)))


def la_kernel_bruteforce(x: Sequence, y: Sequence, subst: Scorer,
                         params: AlignParams = AlignParams(), max_len: int = 8) -> float:
    """Reference value by enumerating every alignment explicitly.

    Exponential in the sequence lengths; used to check :func:`la_kernel`.
    """
    if len(x) > max_len or len(y) > max_len:
        raise ValueError(f"sequences longer than max_len={max_len}")
    d = as_scorer(subst)
    beta = params.beta
    total = 1.0  # empty alignment
    for r in range(1, min(len(x), len(y)) + 1):
        for ix in itertools.combinations(range(len(x)), r):
            for iy in itertools.combinations(range(len(y)), r):
                s = sum(d(x[i], y[j]) for i, j in zip(ix, iy))
                for k in range(r - 1):
                    s -= params.gap_cost(ix[k + 1] - ix[k] - 1)
                    s -= params.gap_cost(iy[k + 1] - iy[k] - 1)
                total += math.exp(beta * s)
    return total


class LocalAlignmentKernel(Kernel):
    """LA kernel over token paths with a substitution function.

    ``subst`` is typically a :class:`~lakernel.substitution.SubstitutionMatrix`;
    any ``(a, b) -> score`` callable over tokens works. Batch evaluation
    tabulates scores densely over the distinct token keys of the data.
    """

    name = "la"

    def __init__(self, subst, params: AlignParams = AlignParams()):
        self.subst = subst
        self.params = params

    def __call__(self, x, y) -> float:
        return la_kernel(x, y, self.subst, self.params)

    def prepare(self, paths):
        keys = sorted({t.key for p in paths for t in p})
        if hasattr(self.subst, "dense"):
            D, index = self.subst.dense(keys)
        else:
            rep = {}
            for p in paths:
                for t in p:
                    rep.setdefault(t.key, t)
            index = {k: i for i, k in enumerate(keys)}
            D = np.array([[self.subst(rep[a], rep[b]) for b in keys] for a in keys]).reshape(len(keys), len(keys))
        E = _exp_scaled(np.asarray(D, dtype=np.float64), self.params.beta)
        lengths = np.array([len(p) for p in paths], dtype=np.int64)
        offsets = np.zeros(len(paths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        tokens = np.array([index[t.key] for p in paths for t in p], dtype=np.int64)
        return E, tokens, offsets

    def evaluate_pairs(self, state, I, J) -> np.ndarray:
        E, tokens, offsets = state
        out = np.empty(len(I))
        _la_pairs(E, tokens, offsets, I, J,
                  math.exp(-self.params.beta * self.params.gap_open),
                  math.exp(-self.params.beta * self.params.gap_extend), out)
        return out

    def describe(self) -> dict:
        return {"kernel": self.name, "beta": self.params.beta,
                "gap_open": self.params.gap_open, "gap_extend": self.params.gap_extend}
