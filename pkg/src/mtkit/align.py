"""IBM Model 1/2 word alignment trained by EM, plus Viterbi alignment scoring."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import SentencePair

NULL = "<null>"
OOV_FLOOR = 1e-9


@dataclass(frozen=True)
class LexiconTable:
    """Sparse translation table t(e|f): for each source token f the entries
    over target tokens e sum to 1."""

    t: dict[tuple[str, str], float]
    loglik_trace: tuple[float, ...] = ()

    def prob(self, e: str, f: str) -> float:
        return self.t.get((e, f), 0.0)

    def source_index(self) -> dict[str, list[tuple[str, float]]]:
        """Candidate target tokens per source token, best first."""
        idx: dict[str, list[tuple[str, float]]] = {}
        for (e, f), p in self.t.items():
            idx.setdefault(f, []).append((e, p))
        for cands in idx.values():
            cands.sort(key=lambda ep: (-ep[1], ep[0]))
        return idx


@dataclass(frozen=True)
class DistortionTable:
    """q(j | i, l, m): source position j (0 = NULL, 1..m) given target
    position i (0-based), target length l, source length m. Unseen
    configurations fall back to the uniform 1/(m+1)."""

    q: dict[tuple[int, int, int, int], float]
    loglik_trace: tuple[float, ...] = ()

    def prob(self, i: int, j: int, l: int, m: int) -> float:
        return self.q.get((i, j, l, m), 1.0 / (m + 1))


@dataclass(frozen=True)
class Alignment:
    links: tuple[int | None, ...]  # per target position: 0-based source index or None for NULL
    score: float


def _collapse(pairs: Iterable[SentencePair]) -> list[tuple[tuple[str, ...], tuple[str, ...], int]]:
    """Collapse duplicate pairs into (src, tgt, multiplicity) for exact
    weighted EM; keeps first-occurrence order."""
    counts: Counter = Counter()
    for p in pairs:
        counts[(p.src.tokens, p.tgt.tokens)] += 1
    return [(fs, es, w) for (fs, es), w in counts.items()]


def ibm1_train(pairs: Iterable[SentencePair], iters: int = 5) -> LexiconTable:
    """EM from uniform initialization; the per-iteration corpus log-likelihood
    (computed before each update) is recorded in loglik_trace."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    items = _collapse(pairs)
    if not items:
        raise ValueError("empty training corpus")

    t: dict[tuple[str, str], float] = {}
    for fs, es, _w in items:
        for f in (NULL,) + fs:
            for e in es:
                t.setdefault((e, f), 0.0)
    per_source: Counter = Counter()
    for e, f in t:
        per_source[f] += 1
    for key in t:
        t[key] = 1.0 / per_source[key[1]]

    trace = []
    for _ in range(iters):
        ll = 0.0
        count: dict[tuple[str, str], float] = {}
        total: dict[str, float] = {}
        for fs, es, w in items:
            srcs = (NULL,) + fs
            prior = 1.0 / len(srcs)
            for e in es:
                s = 0.0
                for f in srcs:
                    s += t[(e, f)]
                ll += w * math.log(s * prior)
                inv = w / s
                for f in srcs:
                    c = t[(e, f)] * inv
                    key = (e, f)
                    count[key] = count.get(key, 0.0) + c
                    total[f] = total.get(f, 0.0) + c
        for key, c in count.items():
            t[key] = c / total[key[1]]
        trace.append(ll)
    return LexiconTable(t, tuple(trace))


def ibm2_train(
    pairs: Iterable[SentencePair], iters: int, init: LexiconTable
) -> tuple[LexiconTable, DistortionTable]:
    """Joint EM over lexicon and distortion, starting from init's lexicon and
    uniform distortion. iters=0 returns init unchanged."""
    if iters < 0:
        raise ValueError("iters must be >= 0")
    items = _collapse(pairs)
    if not items:
        raise ValueError("empty training corpus")

    t = dict(init.t)
    q: dict[tuple[int, int, int, int], float] = {}
    trace = []
    for _ in range(iters):
        ll = 0.0
        tcount: dict[tuple[str, str], float] = {}
        ttotal: dict[str, float] = {}
        qcount: dict[tuple[int, int, int, int], float] = {}
        qtotal: dict[tuple[int, int, int], float] = {}
        for fs, es, w in items:
            srcs = (NULL,) + fs
            l, m = len(es), len(fs)
            uniform = 1.0 / (m + 1)
            for i, e in enumerate(es):
                terms = []
                s = 0.0
                for j, f in enumerate(srcs):
                    v = t.get((e, f), 0.0) * q.get((i, j, l, m), uniform)
                    terms.append(v)
                    s += v
                ll += w * math.log(s)
                inv = w / s
                for j, f in enumerate(srcs):
                    c = terms[j] * inv
                    tkey = (e, f)
                    tcount[tkey] = tcount.get(tkey, 0.0) + c
                    ttotal[f] = ttotal.get(f, 0.0) + c
                    qkey = (i, j, l, m)
                    qcount[qkey] = qcount.get(qkey, 0.0) + c
                    qtot_key = (i, l, m)
                    qtotal[qtot_key] = qtotal.get(qtot_key, 0.0) + c
        t = {key: c / ttotal[key[1]] for key, c in tcount.items()}
        q = {key: c / qtotal[(key[0], key[2], key[3])] for key, c in qcount.items()}
        trace.append(ll)
    return LexiconTable(t, tuple(trace)), DistortionTable(q, tuple(trace))


def _viterbi(lex: LexiconTable, dist: DistortionTable, pair: SentencePair):
    fs, es = pair.src.tokens, pair.tgt.tokens
    if not es:
        raise ValueError("empty target sentence")
    srcs = (NULL,) + fs
    l, m = len(es), len(fs)
    t = lex.t
    total = 0.0
    links: list[int | None] = []
    for i, e in enumerate(es):
        best = 0.0
        best_j = 0
        for j, f in enumerate(srcs):
            v = t.get((e, f), 0.0) * dist.prob(i, j, l, m)
            if v > best:
                best = v
                best_j = j
        total += math.log(max(best, OOV_FLOOR))
        links.append(None if best_j == 0 else best_j - 1)
    return tuple(links), total / l


def align_score(lex: LexiconTable, dist: DistortionTable, pair: SentencePair) -> float:
    """Per-target-token normalized Viterbi log-probability. Out-of-vocabulary
    tokens take a 1e-9 floor so scores stay finite."""
    return _viterbi(lex, dist, pair)[1]


def viterbi_align(lex: LexiconTable, dist: DistortionTable, pair: SentencePair) -> Alignment:
    links, score = _viterbi(lex, dist, pair)
    return Alignment(links, score)


def save_lexicon(lex: LexiconTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for (e, f) in sorted(lex.t):
            fh.write(f"{e} {f} {lex.t[(e, f)]!r}\n")


def load_lexicon(path: str | Path) -> LexiconTable:
    t = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            e, f, p = line.rstrip("\n").split(" ")
            t[(e, f)] = float(p)
    return LexiconTable(t)


def save_distortion(dist: DistortionTable, path: str | Path) -> None:
    # fields: target position i, source position j (0 = NULL), source length m,
    # target length l, probability
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for (i, j, l, m) in sorted(dist.q):
            fh.write(f"{i} {j} {m} {l} {dist.q[(i, j, l, m)]!r}\n")


def load_distortion(path: str | Path) -> DistortionTable:
    q = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            i, j, m, l, p = line.rstrip("\n").split(" ")
            q[(int(i), int(j), int(l), int(m))] = float(p)
    return DistortionTable(q)
