"""Byte-pair encoding: learn merge operations, apply segmentation, reverse it."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import Sentence

logger = logging.getLogger(__name__)

MARKER = "@@"
_FILE_HEADER = "#version: bpe-merges 1"


@dataclass(frozen=True)
class BpeModel:
    merges: tuple[tuple[str, str], ...]
    marker: str = MARKER
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.merges)) != len(self.merges):
            raise ValueError("duplicate merge operations")

    @property
    def num_operations(self) -> int:
        return len(self.merges)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(_FILE_HEADER + "\n")
            for a, b in self.merges:
                fh.write(f"{a} {b}\n")

    @classmethod
    def load(cls, path: str | Path) -> "BpeModel":
        merges = []
        with open(path, encoding="utf-8", newline="") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split(" ")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'left right'")
                merges.append((parts[0], parts[1]))
        return cls(tuple(merges))


def _merge_word(syms: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    a, b = pair
    out = []
    i = 0
    n = len(syms)
    while i < n:
        if i + 1 < n and syms[i] == a and syms[i + 1] == b:
            out.append(a + b)
            i += 2
        else:
            out.append(syms[i])
            i += 1
    return tuple(out)


def bpe_learn(corpus: Iterable[Sentence], num_operations: int) -> BpeModel:
    """Greedy highest-frequency pair merging over a word-frequency table.

    Merges are word-internal only; ties break by lexicographic order of the
    pair, and learning stops early once no pair occurs at least twice.
    """
    if num_operations < 0:
        raise ValueError("num_operations must be >= 0")
    word_freq: Counter = Counter()
    for sent in corpus:
        word_freq.update(sent.tokens)
    if not word_freq:
        raise ValueError("empty training corpus")

    words = {w: tuple(w) for w in word_freq}
    merges: list[tuple[str, str]] = []
    for _ in range(num_operations):
        pair_freq: Counter = Counter()
        for w, syms in words.items():
            if len(syms) < 2:
                continue
            f = word_freq[w]
            for pair in zip(syms, syms[1:]):
                pair_freq[pair] += f
        candidates = [(-c, p) for p, c in pair_freq.items() if c >= 2]
        if not candidates:
            break
        best = min(candidates)[1]
        merges.append(best)
        words = {w: _merge_word(syms, best) if len(syms) > 1 else syms for w, syms in words.items()}
    return BpeModel(tuple(merges))


def _segment(model: BpeModel, word: str) -> tuple[str, ...]:
    pieces = model._cache.get(word)
    if pieces is None:
        syms = tuple(word)
        for pair in model.merges:
            if len(syms) < 2:
                break
            syms = _merge_word(syms, pair)
        marker = model.marker
        pieces = tuple(p + marker for p in syms[:-1]) + syms[-1:]
        model._cache[word] = pieces
    return pieces


def bpe_apply(model: BpeModel, s: Sentence) -> Sentence:
    """Segment every word; all pieces except the last carry the marker."""
    tokens: list[str] = []
    for word in s.tokens:
        tokens.extend(_segment(model, word))
    return Sentence.from_tokens(tokens, lang=s.lang)


def bpe_reverse(s: Sentence) -> Sentence:
    """Join marker-suffixed pieces with their successors (inverse of bpe_apply).

    A dangling marker on the final token joins with nothing and logs a warning.
    """
    marker = MARKER
    mlen = len(marker)
    out: list[str] = []
    glue = False
    for tok in s.tokens:
        if tok.endswith(marker):
            core = tok[:-mlen]
            cont = True
        else:
            core = tok
            cont = False
        if glue and out:
            out[-1] += core
        else:
            out.append(core)
        glue = cont
    if glue:
        logger.warning("dangling continuation marker at end of sentence: %r", s.raw)
    return Sentence.from_tokens([t for t in out if t], lang=s.lang)
