"""Token substitution scores for the alignment kernels.

Word pairs take their score from a precomputed symmetric table; edges score
1 against an identical edge (same function and direction) and 0 otherwise;
a word never substitutes for an edge. Every token scores 1 against itself.
"""

from __future__ import annotations

import io
import math
from typing import Iterable, Mapping, TextIO

import numpy as np

from .sequences import Token

HEADER = "#subst-matrix v1"


class MatrixFormatError(ValueError):
    pass


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _is_edge_key(key: str) -> bool:
    return key[:1] in ("<", ">")


class SubstitutionMatrix:
    """Immutable symmetric word-pair table plus the edge/mixed-kind rules."""

    def __init__(self, scores: Mapping[tuple[str, str], float] | None = None):
        table: dict[tuple[str, str], float] = {}
        for (a, b), s in (scores or {}).items():
            s = float(s)
            if not (0.0 <= s <= 1.0) or math.isnan(s):
                raise ValueError(f"score {s!r} for ({a}, {b}) outside [0, 1]")
            if a == b:
                continue
            key = _pair(a, b)
            if key in table and table[key] != s:
                raise ValueError(f"conflicting scores for ({a}, {b})")
            table[key] = s
        self._scores = table

    def __len__(self) -> int:
        return len(self._scores)

    def __eq__(self, other) -> bool:
        return isinstance(other, SubstitutionMatrix) and self._scores == other._scores

    def __repr__(self) -> str:
        return f"SubstitutionMatrix({len(self._scores)} word pairs)"

    def items(self):
        return self._scores.items()

    def words(self) -> set[str]:
        return {w for pair in self._scores for w in pair}

    def score(self, a: str, b: str) -> float:
        """Score two token keys (``<name``/``>name`` for edges, else words)."""
        if a == b:
            return 1.0
        if _is_edge_key(a) or _is_edge_key(b):
            return 0.0
        return self._scores.get(_pair(a, b), 0.0)

    def lookup(self, a: Token, b: Token) -> float:
        return self.score(a.key, b.key)

    __call__ = lookup

    def dense(self, keys: Iterable[str]) -> tuple[np.ndarray, dict[str, int]]:
        """Dense score matrix over ``keys`` and the key -> row index map."""
        keys = list(dict.fromkeys(keys))
        index = {k: i for i, k in enumerate(keys)}
        mat = np.zeros((len(keys), len(keys)))
        np.fill_diagonal(mat, 1.0)
        for (a, b), s in self._scores.items():
            ia, ib = index.get(a), index.get(b)
            if ia is not None and ib is not None:
                mat[ia, ib] = mat[ib, ia] = s
        return mat, index


def lookup(m: SubstitutionMatrix, a: Token, b: Token) -> float:
    return m.lookup(a, b)


def build(word_scores: Mapping[tuple[str, str], float]) -> SubstitutionMatrix:
    """Wrap a symmetric word table; self-pairs are forced to 1."""
    return SubstitutionMatrix(word_scores)


def random_matrix(vocabulary: Iterable[str], seed: int) -> SubstitutionMatrix:
    """Uniform [0, 1] scores for every unordered word pair, fixed by ``seed``."""
    words = sorted(set(vocabulary))
    rng = np.random.default_rng(seed)
    n = len(words)
    iu, ju = np.triu_indices(n, k=1)
    draws = rng.random(len(iu))
    return SubstitutionMatrix({(words[i], words[j]): float(s) for i, j, s in zip(iu, ju, draws)})


def save(m: SubstitutionMatrix, stream: TextIO | None = None) -> str:
    lines = [HEADER + "\n"]
    for (a, b), s in sorted(m.items()):
        lines.append(f"{a}\t{b}\t{s!r}\n")
    text = "".join(lines)
    if stream is not None:
        stream.write(text)
    return text


def load(stream: TextIO | str) -> SubstitutionMatrix:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    scores: dict[tuple[str, str], float] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MatrixFormatError(f"expected 3 tab-separated fields at line {lineno}")
        a, b, raw_score = fields
        if not a or not b:
            raise MatrixFormatError(f"empty word at line {lineno}")
        try:
            s = float(raw_score)
        except ValueError:
            raise MatrixFormatError(f"bad score {raw_score!r} at line {lineno}") from None
        if not 0.0 <= s <= 1.0:
            raise MatrixFormatError(f"score {s} outside [0, 1] at line {lineno}")
        if a == b:
            continue
        key = _pair(a, b)
        if key in scores and scores[key] != s:
            raise MatrixFormatError(f"conflicting score for ({a}, {b}) at line {lineno}")
        scores[key] = s
    return SubstitutionMatrix(scores)


def save_file(m: SubstitutionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        save(m, fh)


def load_file(path) -> SubstitutionMatrix:
    with open(path, encoding="utf-8") as fh:
        return load(fh)
