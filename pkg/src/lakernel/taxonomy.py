"""Concept taxonomy with occurrence counts and five relatedness measures.

Depth counts nodes (the root has depth 1); path lengths count edges;
logarithms are natural. Occurrence counts propagate to every ancestor, so
p(c) is the probability of meeting c or anything below it.

File format (UTF-8 TSV), one concept per line::

    concept_id <TAB> parent_id or - <TAB> direct_count
"""

from __future__ import annotations

import io
import math
from typing import Iterable, Mapping, Sequence, TextIO

MEASURES = ("wup", "lch", "res", "jcn", "lin")


class TaxonomyError(ValueError):
    pass


class Taxonomy:
    """Single-rooted concept tree; immutable once built."""

    def __init__(self, parents: Mapping[str, str | None], counts: Mapping[str, int] | None = None):
        roots = [c for c, p in parents.items() if p is None]
        if not parents:
            raise TaxonomyError("empty taxonomy")
        if len(roots) != 1:
            raise TaxonomyError(f"expected exactly one root, found {len(roots)}")
        for c, p in parents.items():
            if p is not None and p not in parents:
                raise TaxonomyError(f"unknown parent {p!r} of {c!r}")
        self.root = roots[0]
        self._parent = dict(parents)
        counts = dict(counts or {})
        for c, v in counts.items():
            if c not in parents:
                raise TaxonomyError(f"count for unknown concept {c!r}")
            if v < 0:
                raise TaxonomyError(f"negative count for {c!r}")
        self._direct = {c: int(counts.get(c, 0)) for c in parents}

        self._depth: dict[str, int] = {}
        for c in parents:
            self._resolve_depth(c)
        self._max_depth = max(self._depth.values())

        prop = dict(self._direct)
        for c in sorted(parents, key=self._depth.__getitem__, reverse=True):
            p = self._parent[c]
            if p is not None:
                prop[p] += prop[c]
        self._propagated = prop

    def _resolve_depth(self, concept: str) -> int:
        chain = []
        c = concept
        while c not in self._depth:
            if c in chain:
                raise TaxonomyError(f"cycle through {c!r}")
            chain.append(c)
            p = self._parent[c]
            if p is None:
                self._depth[c] = 1
                chain.pop()
                break
            c = p
        for node in reversed(chain):
            self._depth[node] = self._depth[self._parent[node]] + 1
        return self._depth[concept]

    def __contains__(self, concept: str) -> bool:
        return concept in self._parent

    def __len__(self) -> int:
        return len(self._parent)

    @property
    def concepts(self) -> list[str]:
        return list(self._parent)

    @property
    def max_depth(self) -> int:
        return self._max_depth

    def parent(self, concept: str) -> str | None:
        self._check(concept)
        return self._parent[concept]

    def depth(self, concept: str) -> int:
        self._check(concept)
        return self._depth[concept]

    def count(self, concept: str) -> int:
        self._check(concept)
        return self._direct[concept]

    def propagated(self, concept: str) -> int:
        self._check(concept)
        return self._propagated[concept]

    def probability(self, concept: str) -> float:
        total = self._propagated[self.root]
        if total <= 0:
            raise TaxonomyError("taxonomy has no occurrence counts")
        p = self.propagated(concept) / total
        if p <= 0:
            raise TaxonomyError(f"zero probability for concept {concept!r}")
        return p

    def ancestors(self, concept: str) -> list[str]:
        """``concept`` and its ancestors, nearest first."""
        self._check(concept)
        out = []
        c = concept
        while c is not None:
            out.append(c)
            c = self._parent[c]
        return out

    def _check(self, concept: str):
        if concept not in self._parent:
            raise KeyError(f"unknown concept {concept!r}")


def lcs(t: Taxonomy, c1: str, c2: str) -> str:
    """Deepest concept subsuming both arguments (each subsumes itself)."""
    up1 = t.ancestors(c1)
    up2 = set(t.ancestors(c2))
    for c in up1:
        if c in up2:
            return c
    raise TaxonomyError("concepts share no ancestor")  # unreachable for a rooted tree


def path_length(t: Taxonomy, c1: str, c2: str) -> int:
    """Edges on the tree path between the concepts."""
    common = lcs(t, c1, c2)
    return t.depth(c1) + t.depth(c2) - 2 * t.depth(common)


def wup(t: Taxonomy, c1: str, c2: str) -> float:
    common = lcs(t, c1, c2)
    dl = t.depth(common)
    len1 = t.depth(c1) - dl
    len2 = t.depth(c2) - dl
    return 2.0 * dl / (len1 + len2 + 2.0 * dl)


def lch(t: Taxonomy, c1: str, c2: str) -> float:
    # len(c, c) = 0 would diverge; identical concepts use length 1
    length = max(path_length(t, c1, c2), 1)
    return -math.log(length / (2.0 * t.max_depth))


def res(t: Taxonomy, c1: str, c2: str) -> float:
    t.probability(c1)
    t.probability(c2)
    return -math.log(t.probability(lcs(t, c1, c2)))


def jcn(t: Taxonomy, c1: str, c2: str) -> float:
    """Jiang-Conrath as commonly printed: 2 ln p(lcs) - (ln p(c1) + ln p(c2)).

    This is a distance (0 for identical concepts); :func:`normalize_measure`
    turns it into a similarity.
    """
    lp = math.log(t.probability(lcs(t, c1, c2)))
    return 2.0 * lp - (math.log(t.probability(c1)) + math.log(t.probability(c2)))


def lin(t: Taxonomy, c1: str, c2: str) -> float:
    lp = math.log(t.probability(lcs(t, c1, c2)))
    denom = math.log(t.probability(c1)) + math.log(t.probability(c2))
    if denom == 0.0:  # both concepts are the root (p = 1)
        return 1.0
    return 2.0 * lp / denom


_FNS = {"wup": wup, "lch": lch, "res": res, "jcn": jcn, "lin": lin}


def taxonomy_similarity(measure: str, t: Taxonomy, c1: str, c2: str) -> float:
    try:
        fn = _FNS[measure]
    except KeyError:
        raise ValueError(f"unknown taxonomy measure {measure!r}") from None
    return fn(t, c1, c2)


def normalize_measure(measure: str, scores: Sequence[tuple[tuple[str, str], float]]) -> list[float]:
    """Bring raw scores for a population of concept pairs into [0, 1].

    ``wup`` is already in range. ``lch``, ``res`` and ``lin`` are divided by
    the population maximum; ``jcn`` is a distance and becomes 1 - v / max.
    Pairs of identical concepts always map to 1, as does everything when
    the maximum is 0.
    """
    if measure not in _FNS:
        raise ValueError(f"unknown taxonomy measure {measure!r}")
    scores = list(scores)
    if not scores:
        raise ValueError("empty score population")
    if measure == "wup":
        return [1.0 if a == b else float(v) for (a, b), v in scores]
    top = max(v for _, v in scores)
    out = []
    for (a, b), v in scores:
        if a == b or top <= 0.0:
            out.append(1.0)
        elif measure == "jcn":
            out.append(min(1.0, max(0.0, 1.0 - v / top)))
        else:
            out.append(min(1.0, max(0.0, v / top)))
    return out


def concept_scores(t: Taxonomy, concepts: Iterable[str], measure: str) -> dict[tuple[str, str], float]:
    """Normalised scores for every unordered pair of distinct concepts."""
    concepts = sorted(set(concepts))
    pairs = [(a, b) for i, a in enumerate(concepts) for b in concepts[i + 1:]]
    raw = [((a, b), taxonomy_similarity(measure, t, a, b)) for a, b in pairs]
    if not raw:
        return {}
    return dict(zip(pairs, normalize_measure(measure, raw)))


def parse_taxonomy(stream: TextIO | str) -> Taxonomy:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    parents: dict[str, str | None] = {}
    counts: dict[str, int] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise TaxonomyError(f"expected 3 tab-separated fields at line {lineno}")
        cid, parent, count = fields
        if not cid:
            raise TaxonomyError(f"empty concept id at line {lineno}")
        if cid in parents:
            raise TaxonomyError(f"duplicate concept {cid!r} at line {lineno}")
        try:
            n = int(count)
        except ValueError:
            raise TaxonomyError(f"bad count {count!r} at line {lineno}") from None
        if n < 0:
            raise TaxonomyError(f"negative count at line {lineno}")
        parents[cid] = None if parent == "-" else parent
        counts[cid] = n
    return Taxonomy(parents, counts)


def load_taxonomy(path) -> Taxonomy:
    with open(path, encoding="utf-8") as fh:
        return parse_taxonomy(fh)


def format_taxonomy(t: Taxonomy) -> str:
    lines = []
    for c in sorted(t.concepts, key=lambda c: (t.depth(c), c)):
        p = t.parent(c)
        lines.append(f"{c}\t{'-' if p is None else p}\t{t.count(c)}\n")
    return "".join(lines)
