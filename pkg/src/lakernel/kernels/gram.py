"""Gram matrix construction, cosine normalisation and persistence."""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .base import as_kernel

DEFAULT_EIG_BOUND = 2000


class GramFormatError(ValueError):
    pass


@dataclass
class GramMatrix:
    values: np.ndarray
    ids: list[str] = field(default_factory=list)
    normalized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("Gram matrix must be square")
        if not self.ids:
            self.ids = [str(i) for i in range(self.values.shape[0])]
        if len(self.ids) != self.values.shape[0]:
            raise ValueError("ids do not match matrix size")

    def __len__(self) -> int:
        return self.values.shape[0]

    def subset(self, rows, cols=None) -> np.ndarray:
        rows = np.asarray(rows)
        cols = rows if cols is None else np.asarray(cols)
        return self.values[np.ix_(rows, cols)]


def _chunks(n_items: int, n_chunks: int):
    bounds = np.linspace(0, n_items, n_chunks + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _evaluate(kernel, state, I, J, workers: int) -> np.ndarray:
    out = np.empty(len(I))
    if workers <= 1 or len(I) < 2:
        out[:] = kernel.evaluate_pairs(state, I, J)
        return out
    # Cells are independent, so any split gives bit-identical values.
    spans = _chunks(len(I), workers * 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(a, b, pool.submit(kernel.evaluate_pairs, state, I[a:b], J[a:b])) for a, b in spans]
        for a, b, fut in futures:
            out[a:b] = fut.result()
    return out


def compute_gram(data, kernel, workers: int = 1, ids: Sequence[str] | None = None) -> GramMatrix:
    """Kernel values for every pair of paths (a Dataset or a list of paths).

    The upper triangle is evaluated once, possibly across ``workers``
    threads, then mirrored, so the result is exactly symmetric.
    """
    kernel = as_kernel(kernel)
    if hasattr(data, "paths"):
        paths, ids = data.paths, data.ids
    else:
        paths = list(data)
    n = len(paths)
    I, J = np.triu_indices(n)
    state = kernel.prepare(paths)
    vals = _evaluate(kernel, state, I.astype(np.int64), J.astype(np.int64), workers)
    K = np.empty((n, n))
    K[I, J] = vals
    K[J, I] = vals
    return GramMatrix(K, list(ids) if ids is not None else [], normalized=False)


def compute_gram_sequential(paths, kernel) -> np.ndarray:
    """Plain double loop over the kernel's ``__call__``; a reference for tests."""
    kernel = as_kernel(kernel)
    n = len(paths)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            K[i, j] = kernel(paths[i], paths[j])
    return K


def compute_cross(rows, cols, kernel, workers: int = 1) -> np.ndarray:
    """Rectangular block k(rows[i], cols[j]), e.g. test-versus-train."""
    kernel = as_kernel(kernel)
    rows, cols = list(rows), list(cols)
    state = kernel.prepare(rows + cols)
    I, J = np.meshgrid(np.arange(len(rows)), np.arange(len(cols)) + len(rows), indexing="ij")
    vals = _evaluate(kernel, state, I.ravel().astype(np.int64), J.ravel().astype(np.int64), workers)
    return vals.reshape(len(rows), len(cols))


def self_kernels(paths, kernel, workers: int = 1) -> np.ndarray:
    kernel = as_kernel(kernel)
    paths = list(paths)
    state = kernel.prepare(paths)
    idx = np.arange(len(paths), dtype=np.int64)
    return _evaluate(kernel, state, idx, idx, workers)


def normalize_gram(g: GramMatrix) -> GramMatrix:
    """k(x, y) / sqrt(k(x, x) k(y, y)); the diagonal becomes exactly 1."""
    diag = np.diag(g.values).copy()
    bad = np.flatnonzero(~(diag > 0))
    if bad.size:
        raise ValueError(f"non-positive self-kernel for instance {g.ids[bad[0]]!r}")
    # sqrt of the product (not a product of roots) keeps k / k exactly 1
    K = g.values / np.sqrt(np.outer(diag, diag))
    np.fill_diagonal(K, 1.0)
    return GramMatrix(K, list(g.ids), normalized=True)


def normalize_cross(block: np.ndarray, row_diag, col_diag) -> np.ndarray:
    """Normalise a rectangular block given the self-kernels of both sides."""
    row_diag = np.asarray(row_diag, dtype=np.float64)
    col_diag = np.asarray(col_diag, dtype=np.float64)
    if np.any(~(row_diag > 0)) or np.any(~(col_diag > 0)):
        raise ValueError("non-positive self-kernel")
    return block / np.sqrt(np.outer(row_diag, col_diag))


def min_eigenvalue(g, bound: int = DEFAULT_EIG_BOUND) -> float:
    K = g.values if isinstance(g, GramMatrix) else np.asarray(g, dtype=np.float64)
    if K.shape[0] > bound:
        raise ValueError(f"matrix of size {K.shape[0]} exceeds eigensolver bound {bound}")
    if K.shape[0] == 0:
        raise ValueError("empty matrix")
    return float(np.linalg.eigvalsh(K)[0])


def save_gram(g: GramMatrix, stream: TextIO | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"#gram v1 normalized={int(g.normalized)}\n")
    buf.write(f"{len(g)}\n")
    for ident in g.ids:
        buf.write(f"{ident}\n")
    for i in range(len(g)):
        buf.write(" ".join("%.17g" % v for v in g.values[i, : i + 1]) + "\n")
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def load_gram(stream: TextIO | str) -> GramMatrix:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = [ln.rstrip("\r\n") for ln in stream]
    if not lines or not lines[0].startswith("#gram v1 normalized="):
        raise GramFormatError("missing '#gram v1' header")
    flag = lines[0].rsplit("=", 1)[1]
    if flag not in ("0", "1"):
        raise GramFormatError(f"bad normalized flag {flag!r}")
    try:
        n = int(lines[1])
    except (IndexError, ValueError):
        raise GramFormatError("missing instance count") from None
    if len(lines) < 2 + 2 * n:
        raise GramFormatError("truncated Gram file")
    ids = lines[2:2 + n]
    K = np.empty((n, n))
    for i in range(n):
        row = lines[2 + n + i].split()
        if len(row) != i + 1:
            raise GramFormatError(f"row {i} has {len(row)} values, expected {i + 1}")
        vals = np.array([float(v) for v in row])
        K[i, : i + 1] = vals
        K[: i + 1, i] = vals
    return GramMatrix(K, ids, normalized=flag == "1")


def save_gram_file(g: GramMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        save_gram(g, fh)


def load_gram_file(path) -> GramMatrix:
    with open(path, encoding="utf-8") as fh:
        return load_gram(fh)
