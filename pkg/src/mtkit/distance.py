"""Levenshtein distance shared by network alignment and number repair."""

from __future__ import annotations

from typing import Sequence


def edit_distance(a: Sequence, b: Sequence) -> int:
    """Edit distance with unit substitution/insertion/deletion costs.

    Works on any sequences: token lists for word-level alignment, plain
    strings for digit-sequence matching.
    """
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        append = cur.append
        for j, y in enumerate(b, start=1):
            append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]
