"""Tokens, dependency paths and labeled instance files.

Instance files are UTF-8, one instance per line::

    id <TAB> label <TAB> token token ...

``label`` is ``0`` or ``1``. Tokens are space separated:

* ``<name`` / ``>name``: a syntactic-function edge traversed up (toward the
  governor) or down.
* anything else: a word, optionally annotated with a taxonomy concept as
  ``word%concept``.

Any token may carry extra features for the shortest-path kernel, appended
as ``|feat``: ``his|PRP|PERSON``. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

import numpy as np

WORD = "word"
EDGE = "edge"

UP = "up"
DOWN = "down"

_DIRECTION_MARK = {UP: "<", DOWN: ">"}
_MARK_DIRECTION = {"<": UP, ">": DOWN}


class InstanceFormatError(ValueError):
    """Raised for malformed instance files; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


@dataclass(frozen=True)
class Token:
    kind: str
    surface: str
    direction: str | None = None
    annotation: str | None = None
    features: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (WORD, EDGE):
            raise ValueError(f"unknown token kind {self.kind!r}")
        if not self.surface or any(ch in self.surface for ch in "\t\n\r "):
            raise ValueError(f"invalid token surface {self.surface!r}")
        if self.kind == EDGE:
            if self.direction not in (UP, DOWN):
                raise ValueError("edge tokens need a direction")
            if self.annotation is not None:
                raise ValueError("edge tokens cannot be annotated")
        elif self.direction is not None:
            raise ValueError("word tokens have no direction")

    @classmethod
    def word(cls, surface: str, annotation: str | None = None, features: Sequence[str] = ()) -> "Token":
        return cls(WORD, surface, None, annotation, tuple(features))

    @classmethod
    def edge(cls, name: str, direction: str, features: Sequence[str] = ()) -> "Token":
        return cls(EDGE, name, direction, None, tuple(features))

    @property
    def is_word(self) -> bool:
        return self.kind == WORD

    @property
    def is_edge(self) -> bool:
        return self.kind == EDGE

    @property
    def key(self) -> str:
        """Identity used by substitution matrices and exact-match kernels."""
        if self.kind == EDGE:
            return _DIRECTION_MARK[self.direction] + self.surface
        if self.annotation is not None:
            return f"{self.surface}%{self.annotation}"
        return self.surface

    @property
    def feature_set(self) -> frozenset[str]:
        return frozenset((self.key,) + self.features)

    def encode(self) -> str:
        return "|".join((self.key,) + self.features)

    def __str__(self) -> str:
        return self.encode()


PathSequence = tuple  # tuple[Token, ...]


def parse_token(text: str) -> Token:
    parts = text.split("|")
    base, features = parts[0], tuple(parts[1:])
    if any(not f for f in features):
        raise ValueError(f"empty feature in token {text!r}")
    if not base:
        raise ValueError(f"empty token {text!r}")
    if base[0] in _MARK_DIRECTION:
        return Token.edge(base[1:], _MARK_DIRECTION[base[0]], features)
    if "%" in base:
        surface, _, concept = base.rpartition("%")
        if not surface or not concept:
            raise ValueError(f"malformed annotation in token {text!r}")
        return Token.word(surface, concept, features)
    return Token.word(base, None, features)


def parse_path(text: str) -> tuple[Token, ...]:
    return tuple(parse_token(t) for t in text.split())


def format_path(path: Iterable[Token]) -> str:
    return " ".join(t.encode() for t in path)


@dataclass(frozen=True)
class LabeledInstance:
    id: str
    label: int
    path: tuple[Token, ...] = ()

    @property
    def sign(self) -> int:
        return 1 if self.label == 1 else -1


@dataclass(frozen=True)
class Dataset:
    instances: tuple[LabeledInstance, ...] = field(default_factory=tuple)

    def __post_init__(self):
        seen = set()
        for inst in self.instances:
            if inst.id in seen:
                raise ValueError(f"duplicate id {inst.id!r}")
            seen.add(inst.id)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[LabeledInstance]:
        return iter(self.instances)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Dataset(self.instances[i])
        return self.instances[i]

    @property
    def ids(self) -> list[str]:
        return [inst.id for inst in self.instances]

    @property
    def paths(self) -> list[tuple[Token, ...]]:
        return [inst.path for inst in self.instances]

    @property
    def labels(self) -> list[int]:
        return [inst.label for inst in self.instances]

    @property
    def signs(self) -> np.ndarray:
        return np.array([inst.sign for inst in self.instances], dtype=np.float64)

    @property
    def positive_count(self) -> int:
        return sum(1 for inst in self.instances if inst.label == 1)

    @property
    def negative_count(self) -> int:
        return len(self.instances) - self.positive_count

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(tuple(self.instances[i] for i in indices))

    def word_vocabulary(self) -> set[str]:
        return {t.key for p in self.paths for t in p if t.is_word}

    def words(self) -> dict[str, Token]:
        """Word key -> a representative token, first occurrence wins."""
        out: dict[str, Token] = {}
        for p in self.paths:
            for t in p:
                if t.is_word and t.key not in out:
                    out[t.key] = t
        return out


def parse_instances(stream: TextIO | str) -> Dataset:
    """Parse an instance file; errors report the offending line number."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    instances = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) == 2:
            fields.append("")
        if len(fields) != 3:
            raise InstanceFormatError("expected 3 tab-separated fields", lineno)
        ident, label, tokens = fields
        if not ident:
            raise InstanceFormatError("empty id", lineno)
        if ident in seen:
            raise InstanceFormatError("duplicate id", lineno)
        if label not in ("0", "1"):
            raise InstanceFormatError(f"unknown label {label!r}", lineno)
        try:
            path = parse_path(tokens)
        except ValueError as exc:
            raise InstanceFormatError(f"malformed token ({exc})", lineno) from None
        seen[ident] = lineno
        instances.append(LabeledInstance(ident, int(label), path))
    return Dataset(tuple(instances))


def serialize_instances(ds: Dataset, stream: TextIO | None = None) -> str:
    lines = [f"{inst.id}\t{inst.label}\t{format_path(inst.path)}\n" for inst in ds]
    text = "".join(lines)
    if stream is not None:
        stream.write(text)
    return text


def read_instances(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_instances(fh)


def write_instances(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        serialize_instances(ds, fh)


def relabel_arguments(ds: Dataset, positions: Mapping[str, Iterable[int]] | Sequence[Iterable[int]],
                      label_text: str) -> Dataset:
    """Replace relation-argument words with a placeholder such as ``PROTEIN``.

    ``positions`` maps instance id (or instance index) to token indices.
    Replaced tokens lose their taxonomy annotation; everything else is kept.
    """
    if not label_text or any(ch.isspace() for ch in label_text) or "|" in label_text:
        raise ValueError(f"invalid label text {label_text!r}")
    if isinstance(positions, Mapping):
        lookup = {k: set(v) for k, v in positions.items()}
        get = lambda i, inst: lookup.get(inst.id, ())  # noqa: E731
    else:
        seq = [set(v) for v in positions]
        if len(seq) != len(ds):
            raise ValueError("positions must have one entry per instance")
        get = lambda i, inst: seq[i]  # noqa: E731

    out = []
    for i, inst in enumerate(ds):
        idx = get(i, inst)
        if not idx:
            out.append(inst)
            continue
        tokens = list(inst.path)
        for k in idx:
            if not 0 <= k < len(tokens):
                raise IndexError(f"token index {k} out of range for instance {inst.id!r}")
            if not tokens[k].is_word:
                raise ValueError(f"token {k} of instance {inst.id!r} is an edge")
            tokens[k] = replace(tokens[k], surface=label_text, annotation=None)
        out.append(replace(inst, path=tuple(tokens)))
    return Dataset(tuple(out))
