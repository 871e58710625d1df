"""Smith-Waterman and Needleman-Wunsch alignment scores with a linear gap."""

from __future__ import annotations

from typing import Callable, Sequence, Union

Scorer = Union[Callable[[object, object], float], tuple]


def as_scorer(subst: Scorer) -> Callable[[object, object], float]:
    """Accept a substitution callable or a ``(match, mismatch)`` pair.

    A pair compares elements by equality (``Token`` objects by their key).
    """
    if callable(subst):
        return subst
    match, mismatch = subst

    def score(a, b):
        ka = getattr(a, "key", a)
        kb = getattr(b, "key", b)
        return match if ka == kb else mismatch

    return score


def sw_table(x: Sequence, y: Sequence, subst: Scorer, gap) -> list[list]:
    d = as_scorer(subst)
    n, m = len(x), len(y)
    T = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        xi = x[i - 1]
        row, prev = T[i], T[i - 1]
        for j in range(1, m + 1):
            row[j] = max(0, prev[j - 1] + d(xi, y[j - 1]), prev[j] - gap, row[j - 1] - gap)
    return T


def sw_score(x: Sequence, y: Sequence, subst: Scorer, gap) -> float:
    """Best local alignment score: the largest cell of the SW table (>= 0)."""
    if gap < 0:
        raise ValueError("gap cost must be non-negative")
    return max(max(row) for row in sw_table(x, y, subst, gap))


def nw_table(x: Sequence, y: Sequence, subst: Scorer, gap) -> list[list]:
    d = as_scorer(subst)
    n, m = len(x), len(y)
    T = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        T[i][0] = -i * gap
    for j in range(m + 1):
        T[0][j] = -j * gap
    for i in range(1, n + 1):
        xi = x[i - 1]
        row, prev = T[i], T[i - 1]
        for j in range(1, m + 1):
            row[j] = max(prev[j - 1] + d(xi, y[j - 1]), prev[j] - gap, row[j - 1] - gap)
    return T


def nw_score(x: Sequence, y: Sequence, subst: Scorer, gap) -> float:
    """Global score: the largest value in the last row or last column.

    Borders are initialised to ``-i * gap``; with zero borders the method
    degenerates to a local score (5 instead of 3 on abacde/ace).
    Empty input scores 0.
    """
    if gap < 0:
        raise ValueError("gap cost must be non-negative")
    if not x or not y:
        return 0
    T = nw_table(x, y, subst, gap)
    last_row = T[-1][1:]
    last_col = [row[-1] for row in T[1:]]
    return max(max(last_row), max(last_col))
