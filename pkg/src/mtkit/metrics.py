"""Corpus- and sentence-level BLEU with exact integer n-gram statistics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .corpus import tokenize

MAX_ORDER = 4


@dataclass(frozen=True)
class BleuStats:
    """Clipped n-gram matches and totals for n=1..4; additive across sentences."""

    matches: tuple[int, int, int, int]
    totals: tuple[int, int, int, int]
    hyp_len: int
    ref_len: int

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            tuple(a + b for a, b in zip(self.matches, other.matches)),
            tuple(a + b for a, b in zip(self.totals, other.totals)),
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    @classmethod
    def zero(cls) -> "BleuStats":
        return cls((0, 0, 0, 0), (0, 0, 0, 0), 0, 0)


@dataclass(frozen=True)
class BleuScore:
    bleu: float
    precisions: tuple[float, float, float, float]
    bp: float
    hyp_len: int
    ref_len: int


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def sentence_stats(hyp_tokens: Sequence[str], ref_tokens: Sequence[str]) -> BleuStats:
    matches = []
    totals = []
    for n in range(1, MAX_ORDER + 1):
        total = max(0, len(hyp_tokens) - n + 1)
        totals.append(total)
        if total == 0:
            matches.append(0)
            continue
        hyp_counts = _ngrams(hyp_tokens, n)
        ref_counts = _ngrams(ref_tokens, n)
        matches.append(sum(min(c, ref_counts[g]) for g, c in hyp_counts.items()))
    return BleuStats(tuple(matches), tuple(totals), len(hyp_tokens), len(ref_tokens))


def score_stats(stats: BleuStats, *, smooth: bool = False) -> BleuScore:
    """Geometric mean of modified precisions times the brevity penalty, 0..100.

    With smooth=True every order's match and total counts get add-one
    smoothing (sentence-level scoring); without it a zero precision at any
    order zeroes the score.
    """
    if smooth:
        precisions = tuple((m + 1) / (t + 1) for m, t in zip(stats.matches, stats.totals))
    else:
        precisions = tuple(m / t if t else 0.0 for m, t in zip(stats.matches, stats.totals))
    if stats.hyp_len == 0 or stats.ref_len == 0:
        return BleuScore(0.0, precisions, 0.0, stats.hyp_len, stats.ref_len)
    bp = math.exp(min(0.0, 1.0 - stats.ref_len / stats.hyp_len))
    if min(precisions) == 0.0:
        return BleuScore(0.0, precisions, bp, stats.hyp_len, stats.ref_len)
    mean = math.exp(sum(math.log(p) for p in precisions) / MAX_ORDER)
    return BleuScore(100.0 * bp * mean, precisions, bp, stats.hyp_len, stats.ref_len)


def corpus_stats(hyps: Sequence[Sequence[str]], refs: Sequence[Sequence[str]]) -> BleuStats:
    if len(hyps) != len(refs):
        raise ValueError(f"hypothesis/reference count mismatch: {len(hyps)} vs {len(refs)}")
    stats = BleuStats.zero()
    for hyp, ref in zip(hyps, refs):
        stats = stats + sentence_stats(hyp, ref)
    return stats


def bleu_corpus_tokens(hyps: Sequence[Sequence[str]], refs: Sequence[Sequence[str]]) -> float:
    return score_stats(corpus_stats(hyps, refs)).bleu


def bleu_corpus_report(hyps: Sequence[str], refs: Sequence[str], lang: str = "und") -> BleuScore:
    """Detokenized case-sensitive corpus BLEU: both sides are run through the
    toolkit tokenizer, so the score is reproducible on plain strings."""
    hyp_tokens = [tokenize(h, lang).tokens for h in hyps]
    ref_tokens = [tokenize(r, lang).tokens for r in refs]
    return score_stats(corpus_stats(hyp_tokens, ref_tokens))


def bleu_corpus(hyps: Sequence[str], refs: Sequence[str], lang: str = "und") -> float:
    return bleu_corpus_report(hyps, refs, lang).bleu


def bleu_sentence_tokens(hyp_tokens: Sequence[str], ref_tokens: Sequence[str]) -> float:
    if not ref_tokens:
        return 0.0
    return score_stats(sentence_stats(hyp_tokens, ref_tokens), smooth=True).bleu


def bleu_sentence(hyp: str, ref: str, lang: str = "und") -> float:
    return bleu_sentence_tokens(tokenize(hyp, lang).tokens, tokenize(ref, lang).tokens)
