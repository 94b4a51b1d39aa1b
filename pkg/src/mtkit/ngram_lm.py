"""N-gram language model with interpolated add-k smoothing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Sentence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"


def default_lambdas(order: int) -> tuple[float, ...]:
    """Interpolation weights proportional to (order index + 1), normalized."""
    total = order * (order + 1) / 2
    return tuple((j + 1) / total for j in range(order))


@dataclass
class NgramLm:
    order: int
    k: float
    lambdas: tuple[float, ...]
    vocab: frozenset[str]
    gram_counts: tuple[dict, ...]  # per order j: (history + (event,)) -> count
    hist_counts: tuple[dict, ...]  # per order j: history -> count
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def event_count(self) -> int:
        # events = known tokens + UNK + EOS; BOS is context only
        return len(self.vocab) + 2

    def map_token(self, tok: str) -> str:
        return tok if tok in self.vocab else UNK

    def cond_prob(self, history: tuple[str, ...], event: str) -> float:
        """p(event | history), interpolated add-k across orders 1..n.

        history is the (order-1)-token context with tokens already mapped
        into the vocabulary (UNK for unseen, BOS padding at sentence start).
        """
        key = (history, event)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        v = self.event_count
        k = self.k
        p = 0.0
        for j, lam in enumerate(self.lambdas, start=1):
            h = history[len(history) - j + 1 :] if j > 1 else ()
            num = self.gram_counts[j - 1].get(h + (event,), 0) + k
            den = self.hist_counts[j - 1].get(h, 0) + k * v
            p += lam * (num / den)
        self._cache[key] = p
        return p


def lm_train(
    corpus: Iterable[Sentence],
    order: int = 3,
    k: float = 0.1,
    lambdas: Sequence[float] | None = None,
    weights: Sequence[int] | None = None,
) -> NgramLm:
    """Collect n-gram counts with (order-1) begin padding and one end symbol.

    weights, when given, repeat each sentence's counts that many times
    (exact equivalent of training on a corpus with duplicates).
    """
    sentences = list(corpus)
    if not sentences:
        raise ValueError("empty training corpus")
    if order < 1:
        raise ValueError("order must be >= 1")
    if k <= 0:
        raise ValueError("smoothing constant k must be > 0")
    if lambdas is None:
        lams = default_lambdas(order)
    else:
        lams = tuple(float(x) for x in lambdas)
        if len(lams) != order or any(x < 0 for x in lams) or abs(sum(lams) - 1.0) > 1e-9:
            raise ValueError(f"invalid lambdas {lams!r}: need {order} nonnegative weights summing to 1")
    if weights is not None and len(weights) != len(sentences):
        raise ValueError("weights/corpus length mismatch")

    vocab: set[str] = set()
    for sent in sentences:
        vocab.update(sent.tokens)

    gram_counts: tuple[dict, ...] = tuple({} for _ in range(order))
    hist_counts: tuple[dict, ...] = tuple({} for _ in range(order))
    pad = (BOS,) * (order - 1)
    for idx, sent in enumerate(sentences):
        w = 1 if weights is None else int(weights[idx])
        if w <= 0:
            continue
        seq = pad + sent.tokens + (EOS,)
        for pos in range(order - 1, len(seq)):
            event = seq[pos]
            for j in range(1, order + 1):
                h = seq[pos - j + 1 : pos]
                grams = gram_counts[j - 1]
                hists = hist_counts[j - 1]
                grams[h + (event,)] = grams.get(h + (event,), 0) + w
                hists[h] = hists.get(h, 0) + w
    return NgramLm(order, float(k), lams, frozenset(vocab), gram_counts, hist_counts)


def lm_logprob(m: NgramLm, s: Sentence) -> float:
    """Natural-log probability of the sentence including the end symbol."""
    mapped = tuple(m.map_token(t) for t in s.tokens)
    seq = (BOS,) * (m.order - 1) + mapped + (EOS,)
    n = m.order
    total = 0.0
    for pos in range(n - 1, len(seq)):
        total += math.log(m.cond_prob(seq[pos - n + 1 : pos], seq[pos]))
    return total


def per_token_logprob(m: NgramLm, s: Sentence) -> float:
    """Length-normalized score used as the selection feature."""
    return lm_logprob(m, s) / max(1, len(s.tokens))


def lm_perplexity(m: NgramLm, corpus: Iterable[Sentence]) -> float:
    sentences = list(corpus)
    if not sentences:
        raise ValueError("empty corpus")
    total = 0.0
    events = 0
    for sent in sentences:
        total += lm_logprob(m, sent)
        events += len(sent.tokens) + 1
    return math.exp(-total / events)


def save_lm(m: NgramLm, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("#ngram-lm 1\n")
        fh.write(f"order\t{m.order}\n")
        fh.write(f"k\t{m.k!r}\n")
        fh.write("lambdas\t" + " ".join(repr(x) for x in m.lambdas) + "\n")
        fh.write(f"vocab\t{len(m.vocab)}\n")
        for tok in sorted(m.vocab):
            fh.write(tok + "\n")
        for j in range(1, m.order + 1):
            for gram in sorted(m.gram_counts[j - 1]):
                fh.write(f"{j}\t{' '.join(gram)}\t{m.gram_counts[j - 1][gram]}\n")


def load_lm(path: str | Path) -> NgramLm:
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith("#ngram-lm"):
            raise ValueError(f"{path}: not an n-gram model file")
        order = int(fh.readline().split("\t")[1])
        k = float(fh.readline().split("\t")[1])
        lambdas = tuple(float(x) for x in fh.readline().split("\t")[1].split())
        vocab_size = int(fh.readline().split("\t")[1])
        vocab = frozenset(fh.readline().rstrip("\n") for _ in range(vocab_size))
        gram_counts: tuple[dict, ...] = tuple({} for _ in range(order))
        hist_counts: tuple[dict, ...] = tuple({} for _ in range(order))
        for line in fh:
            j_s, gram_s, count_s = line.rstrip("\n").split("\t")
            j = int(j_s)
            gram = tuple(gram_s.split(" "))
            count = int(count_s)
            gram_counts[j - 1][gram] = count
            h = gram[:-1]
            hist_counts[j - 1][h] = hist_counts[j - 1].get(h, 0) + count
    return NgramLm(order, k, lambdas, vocab, gram_counts, hist_counts)
