"""Word similarity from windowed co-occurrence counts.

Three measures over unsmoothed conditional probabilities P(c|x):
``dice`` on context sets, ``cosine`` on probability vectors, and the
Euclidean distance ``l2_raw``, which is turned into a similarity by
:func:`l2_rescale` before use.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

MEASURES = ("dice", "cosine", "l2")


@dataclass(frozen=True)
class WindowSpec:
    radius: int = 2

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("window radius must be >= 1")


@dataclass
class ContextCounts:
    counts: dict[str, Counter] = field(default_factory=dict)

    def __contains__(self, word: str) -> bool:
        return bool(self.counts.get(word))

    @property
    def vocabulary(self) -> set[str]:
        return {w for w, c in self.counts.items() if c}

    def total(self, word: str) -> int:
        return sum(self.counts.get(word, Counter()).values())

    def contexts(self, word: str) -> Counter:
        return self.counts.get(word, Counter())

    def probabilities(self, word: str) -> dict[str, float]:
        c = self.contexts(word)
        tot = sum(c.values())
        return {k: v / tot for k, v in c.items()} if tot else {}

    def merge(self, other: "ContextCounts") -> "ContextCounts":
        out = {w: Counter(c) for w, c in self.counts.items()}
        for w, c in other.counts.items():
            out.setdefault(w, Counter()).update(c)
        return ContextCounts(out)


def count_contexts(corpus: Iterable[str], targets: Iterable[str],
                   window: WindowSpec = WindowSpec()) -> ContextCounts:
    """Count tokens within ``window.radius`` of each target occurrence.

    ``corpus`` yields lines of whitespace-tokenised text; windows stop at
    line ends. Every occurrence counts separately, including repeats of the
    same context inside overlapping windows.
    """
    targets = set(targets)
    counts: dict[str, Counter] = {t: Counter() for t in targets}
    r = window.radius
    for line in corpus:
        toks = line.split()
        for i, tok in enumerate(toks):
            if tok not in targets:
                continue
            c = counts[tok]
            for j in range(max(0, i - r), min(len(toks), i + r + 1)):
                if j != i:
                    c[toks[j]] += 1
    return ContextCounts(counts)


def _require(word: str, counts: ContextCounts):
    if word not in counts:
        raise KeyError(f"unknown word {word!r}")


def dice(x: str, y: str, counts: ContextCounts) -> float:
    _require(x, counts)
    _require(y, counts)
    fx, fy = counts.contexts(x).keys(), counts.contexts(y).keys()
    return 2.0 * len(fx & fy) / (len(fx) + len(fy))


def cosine(x: str, y: str, counts: ContextCounts) -> float:
    _require(x, counts)
    _require(y, counts)
    px, py = counts.probabilities(x), counts.probabilities(y)
    # sorted iteration keeps the result exactly symmetric in (x, y)
    num = sum(px[c] * py[c] for c in sorted(px.keys() & py.keys()))
    nx = sum(px[c] ** 2 for c in sorted(px))
    ny = sum(py[c] ** 2 for c in sorted(py))
    return min(1.0, num / math.sqrt(nx * ny))


def l2_raw(x: str, y: str, counts: ContextCounts) -> float:
    _require(x, counts)
    _require(y, counts)
    px, py = counts.probabilities(x), counts.probabilities(y)
    return math.sqrt(sum((px.get(c, 0.0) - py.get(c, 0.0)) ** 2 for c in sorted(px.keys() | py.keys())))


_MEASURE_FNS = {"dice": dice, "cosine": cosine, "l2_raw": l2_raw, "l2": l2_raw}


def distributional_similarity(measure: str, x: str, y: str, counts: ContextCounts) -> float:
    try:
        fn = _MEASURE_FNS[measure]
    except KeyError:
        raise ValueError(f"unknown distributional measure {measure!r}") from None
    if x == y:
        _require(x, counts)
        return 0.0 if fn is l2_raw else 1.0
    return fn(x, y, counts)


def l2_rescale(scores: Iterable[tuple[tuple[str, str], float]]) -> list[tuple[tuple[str, str], float]]:
    """Map raw L2 distances to [0, 1] similarities, per first word.

    Within the group of pairs sharing their first word, each distance is
    divided by the group maximum and subtracted from 1. Identical-word
    pairs score 1; a group whose maximum is 0 scores 1 throughout.
    """
    scores = list(scores)
    group_max: dict[str, float] = defaultdict(float)
    for (a, _), v in scores:
        group_max[a] = max(group_max[a], v)
    out = []
    for (a, b), v in scores:
        m = group_max[a]
        s = 1.0 if (a == b or m == 0.0) else 1.0 - v / m
        out.append(((a, b), s))
    return out


def build_word_scores(counts: ContextCounts, vocabulary: Iterable[str], measure: str,
                      surface: Mapping[str, str] | None = None) -> dict[tuple[str, str], float]:
    """Symmetric similarity table over ``vocabulary``: k(k+1)/2 entries.

    Words missing from the corpus score 1 with themselves and 0 with
    everything else. ``surface`` optionally maps vocabulary keys (e.g.
    annotated tokens) to the corpus word they stand for.

    For ``l2`` the distances are rescaled per word over its whole row of
    seen partners, then the two directed values of each pair are averaged
    so the table stays symmetric.
    """
    if measure not in ("dice", "cosine", "l2"):
        raise ValueError(f"unknown distributional measure {measure!r}")
    words = sorted(set(vocabulary))
    surface = dict(surface or {})
    corpus_word = {w: surface.get(w, w) for w in words}
    seen = [w for w in words if corpus_word[w] in counts]

    table: dict[tuple[str, str], float] = {}
    for i, a in enumerate(words):
        table[(a, a)] = 1.0
        for b in words[i + 1:]:
            table[(a, b)] = 0.0

    if measure in ("dice", "cosine"):
        for i, a in enumerate(seen):
            for b in seen[i + 1:]:
                table[(a, b)] = distributional_similarity(measure, corpus_word[a], corpus_word[b], counts)
        return table

    directed = [((a, b), distributional_similarity("l2_raw", corpus_word[a], corpus_word[b], counts))
                for a in seen for b in seen]
    rescaled = dict(l2_rescale(directed))
    for i, a in enumerate(seen):
        for b in seen[i + 1:]:
            table[(a, b)] = 0.5 * (rescaled[(a, b)] + rescaled[(b, a)])
    return table


def read_corpus(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()
