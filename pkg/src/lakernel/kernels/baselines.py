"""Comparison kernels: the shortest-path product kernel and the
gap-weighted subsequence kernel, both over token sequences."""

from __future__ import annotations

import itertools
from typing import Sequence

import numba
import numpy as np

from .base import Kernel
from .local_alignment import _precedes


def _features(element) -> frozenset:
    if hasattr(element, "feature_set"):
        return element.feature_set
    if isinstance(element, (set, frozenset)):
        return frozenset(element)
    if isinstance(element, (list, tuple)):
        return frozenset(element)
    return frozenset((element,))


def shortest_path_kernel(x: Sequence, y: Sequence) -> float:
    """Product over positions of the number of shared features; 0 when the
    lengths differ.

    Elements are tokens (features: key plus any ``|feat`` extras) or
    explicit feature collections. Two empty paths score 1.
    """
    if len(x) != len(y):
        return 0
    prod = 1
    for a, b in zip(x, y):
        shared = len(_features(a) & _features(b))
        if shared == 0:
            return 0
        prod *= shared
    return prod


def _key(element):
    return getattr(element, "key", element)


@numba.njit(nogil=True, cache=True)
def _ssk(s, t, n, lam):
    ls, lt = s.shape[0], t.shape[0]
    if min(ls, lt) < n:
        return 0.0
    lam2 = lam * lam
    Kp = np.zeros((n, ls + 1, lt + 1))
    Kp[0, :, :] = 1.0
    for i in range(1, n):
        for a in range(1, ls + 1):
            kpp = 0.0
            for b in range(1, lt + 1):
                kpp = lam * kpp
                if s[a - 1] == t[b - 1]:
                    kpp += lam2 * Kp[i - 1, a - 1, b - 1]
                Kp[i, a, b] = lam * Kp[i, a - 1, b] + kpp
    total = 0.0
    for a in range(1, ls + 1):
        for b in range(1, lt + 1):
            if s[a - 1] == t[b - 1]:
                total += lam2 * Kp[n - 1, a - 1, b - 1]
    return total


@numba.njit(nogil=True, cache=True)
def _ssk_pairs(tokens, offsets, I, J, n, lam, out):
    for p in range(I.shape[0]):
        a = tokens[offsets[I[p]]:offsets[I[p] + 1]]
        b = tokens[offsets[J[p]]:offsets[J[p] + 1]]
        if _precedes(b, a):
            a, b = b, a
        out[p] = _ssk(a, b, n, lam)


def _encode(seqs):
    # codes follow sorted key order so code comparison matches key comparison
    index = {k: i for i, k in enumerate(sorted({str(_key(e)) for s in seqs for e in s}))}
    return [np.array([index[str(_key(e))] for e in s], dtype=np.int64) for s in seqs]


def gap_weighted_kernel(x: Sequence, y: Sequence, n: int = 4, lam: float = 0.5) -> float:
    """Gapped-subsequence kernel over tokens: every common length-``n``
    subsequence contributes lam ** (span in x + span in y)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < lam <= 1:
        raise ValueError("lambda must be in (0, 1]")
    a, b = _encode([x, y])
    if _precedes(b, a):
        a, b = b, a
    return float(_ssk(a, b, n, lam))


def gap_weighted_bruteforce(x: Sequence, y: Sequence, n: int = 4, lam: float = 0.5) -> float:
    """Enumerate index subsequences of both inputs; exponential, tests only."""
    kx = [_key(e) for e in x]
    ky = [_key(e) for e in y]
    total = 0.0
    for ix in itertools.combinations(range(len(kx)), n):
        u = [kx[i] for i in ix]
        for iy in itertools.combinations(range(len(ky)), n):
            if u == [ky[j] for j in iy]:
                total += lam ** ((ix[-1] - ix[0] + 1) + (iy[-1] - iy[0] + 1))
    return total


class ShortestPathKernel(Kernel):
    name = "shortest-path"

    def __call__(self, x, y) -> float:
        return float(shortest_path_kernel(x, y))

    def prepare(self, paths):
        return [tuple(_features(t) for t in p) for p in paths]

    def evaluate_pairs(self, state, I, J):
        return np.array([shortest_path_kernel(state[i], state[j]) for i, j in zip(I, J)],
                        dtype=np.float64)


class GapWeightedKernel(Kernel):
    name = "gap-weighted"

    def __init__(self, n: int = 4, lam: float = 0.5):
        if n < 1 or not 0 < lam <= 1:
            raise ValueError("need n >= 1 and 0 < lambda <= 1")
        self.n = n
        self.lam = lam

    def __call__(self, x, y) -> float:
        return gap_weighted_kernel(x, y, self.n, self.lam)

    def prepare(self, paths):
        coded = _encode(paths)
        offsets = np.zeros(len(coded) + 1, dtype=np.int64)
        np.cumsum([len(c) for c in coded], out=offsets[1:])
        tokens = np.concatenate(coded) if coded else np.zeros(0, dtype=np.int64)
        return tokens.astype(np.int64), offsets

    def evaluate_pairs(self, state, I, J):
        tokens, offsets = state
        out = np.empty(len(I))
        _ssk_pairs(tokens, offsets, I, J, self.n, self.lam, out)
        return out

    def describe(self) -> dict:
        return {"kernel": self.name, "n": self.n, "lambda": self.lam}
