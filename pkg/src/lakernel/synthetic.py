"""Seeded synthetic datasets and corpora for tests, benchmarks and demos.

The motif generator plants a relation signal that only a synonym-aware
substitution matrix can exploit. Positives contain three consecutive
words drawn from synonym clusters; negatives draw from the same clusters
in reverse order, so exact word overlap says little about the class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequences import Dataset, LabeledInstance, Token, DOWN, UP


def random_paths(n: int, mean_length: int = 10, vocab_size: int = 200, seed: int = 0):
    """Word/edge paths with Poisson lengths around ``mean_length``."""
    rng = np.random.default_rng(seed)
    words = [f"w{i}" for i in range(vocab_size)]
    edges = [Token.edge(f"r{i}", d) for i in range(4) for d in (UP, DOWN)]
    paths = []
    for _ in range(n):
        length = max(1, int(rng.poisson(mean_length)))
        path = []
        for pos in range(length):
            if pos % 2:
                path.append(edges[rng.integers(len(edges))])
            else:
                path.append(Token.word(words[rng.integers(vocab_size)]))
        paths.append(tuple(path))
    return paths


@dataclass(frozen=True)
class MotifConfig:
    n: int = 300
    positive_rate: float = 0.4
    cluster_size: int = 8
    n_fillers: int = 40
    min_fillers: int = 2
    max_fillers: int = 6
    scattered: int = 2
    motif_strays: bool = False


def _cluster_words(prefix: str, n_clusters: int, size: int) -> list[list[str]]:
    return [[f"{prefix}{c}_{k}" for k in range(size)] for c in range(n_clusters)]


def motif_vocabulary(cfg: MotifConfig = MotifConfig()):
    """(motif clusters, decoy clusters, filler words)."""
    motif = _cluster_words("syn", 4, cfg.cluster_size)
    decoy = _cluster_words("dec", 3, cfg.cluster_size)
    fillers = [f"fill{i}" for i in range(cfg.n_fillers)]
    return motif, decoy, fillers


def _pos_tag(word: str) -> str:
    # deterministic tags so the shortest-path kernel sees shared features
    return ("NN", "VB", "JJ")[sum(map(ord, word)) % 3]


def _word(w: str) -> Token:
    return Token.word(w, features=(_pos_tag(w),))


def motif_dataset(seed: int, cfg: MotifConfig = MotifConfig()) -> Dataset:
    """Labelled word paths with a synonym-expressed motif in the positives.

    Motif slots draw from clusters 0, then 1 or 3 (interchangeable), then 2.
    Negatives reverse the slot order. Both classes get the same number of
    stray decoy words, so path length carries no label information.
    """
    rng = np.random.default_rng(seed)
    motif, decoy, fillers = motif_vocabulary(cfg)
    stray = motif if cfg.motif_strays else decoy
    n_pos = int(round(cfg.n * cfg.positive_rate))
    labels = np.array([1] * n_pos + [0] * (cfg.n - n_pos))
    rng.shuffle(labels)

    def pick(words):
        return words[rng.integers(len(words))]

    def filler_run(k):
        return [pick(fillers) for _ in range(k)]

    instances = []
    for i, label in enumerate(labels):
        left = filler_run(int(rng.integers(cfg.min_fillers, cfg.max_fillers + 1)) // 2 + 1)
        right = filler_run(int(rng.integers(cfg.min_fillers, cfg.max_fillers + 1)) // 2 + 1)
        middle = motif[1] if rng.random() < 0.5 else motif[3]
        if label:
            core = [pick(motif[0]), pick(middle), pick(motif[2])]
        else:
            core = [pick(motif[2]), pick(middle), pick(motif[0])]
        for _ in range(cfg.scattered):
            w = pick(stray[int(rng.integers(len(stray)))])
            if rng.random() < 0.5:
                left = [w] + left
            else:
                right = right + [w]
        words = left + core + right
        instances.append(LabeledInstance(f"m{i}", int(label), tuple(_word(w) for w in words)))
    return Dataset(tuple(instances))


def motif_corpus(seed: int, cfg: MotifConfig = MotifConfig(), sentences_per_word: int = 6,
                 context_pool: int = 12) -> list[str]:
    """Sentences in which synonyms share a cluster-specific context pool.

    Every cluster (motif or decoy) and every filler word gets its own pool
    of context words, so distributional overlap tracks cluster membership.
    """
    rng = np.random.default_rng(seed + 1_000_003)
    motif, decoy, fillers = motif_vocabulary(cfg)
    groups = [(f"m{c}", words) for c, words in enumerate(motif)]
    groups += [(f"d{c}", words) for c, words in enumerate(decoy)]
    groups += [(f"f{i}", [w]) for i, w in enumerate(fillers)]
    lines = []
    for name, words in groups:
        pool = [f"ctx_{name}_{k}" for k in range(context_pool)]
        for w in words:
            for _ in range(sentences_per_word):
                ctx = rng.choice(pool, size=4, replace=True)
                lines.append(" ".join([ctx[0], ctx[1], w, ctx[2], ctx[3]]))
    return lines


def separable_dataset(n: int = 40, seed: int = 0, length: int = 5) -> Dataset:
    """Positives and negatives over disjoint word sets."""
    rng = np.random.default_rng(seed)
    instances = []
    for i in range(n):
        label = i % 2
        prefix = "p" if label else "q"
        words = [f"{prefix}{rng.integers(4)}" for _ in range(length)]
        instances.append(LabeledInstance(f"s{i}", label, tuple(Token.word(w) for w in words)))
    return Dataset(tuple(instances))
