"""K-best batch MIRA reranking over the six-feature pool."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .align import DistortionTable, LexiconTable, align_score
from .corpus import Sentence, SentencePair
from .dataselect import SelectionConfig
from .metrics import bleu_corpus_tokens, bleu_sentence_tokens
from .ngram_lm import NgramLm, lm_logprob
from .toymt import NBestList, TranslatorSpec, score_hypothesis

FEATURE_NAMES = (
    "l2r_score",
    "r2l_score",
    "t2s_score",
    "lm_score",
    "align_score",
    "ratio_deviation",
)

_EMPTY_HYP_ALIGN = math.log(1e-9)


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} features, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("non-finite feature value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def dot(self, weights: Sequence[float]) -> float:
        return sum(w * v for w, v in zip(weights, self.values))


@dataclass(frozen=True)
class FeaturedNBest:
    """An n-best list annotated with rerank feature vectors; unordered
    relative to model score once reranked."""

    source: Sentence
    model_id: str
    hyps: tuple
    vectors: tuple[FeatureVector, ...]

    def __post_init__(self):
        if len(self.hyps) != len(self.vectors):
            raise ValueError("hypothesis/vector count mismatch")


@dataclass(frozen=True)
class MiraConfig:
    C: float = 0.01
    epochs: int = 10
    seed: int = 0
    init_weights: tuple[float, ...] = (1.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class MiraModel:
    weights: tuple[float, ...]
    C: float
    epochs: int
    seed: int


def extract_features(
    nbest: NBestList,
    *,
    r2l: TranslatorSpec,
    t2s: TranslatorSpec,
    lm: NgramLm,
    lex: LexiconTable,
    dist: DistortionTable,
    cfg: SelectionConfig,
    l2r: TranslatorSpec | None = None,
) -> FeaturedNBest:
    """Annotate every hypothesis with the full six-feature vector.

    The forward-model feature defaults to the hypothesis's stored decoder
    score; pass l2r to force-score under a designated forward model instead
    (needed for lists produced by the right-to-left system). The reverse-model
    feature reverses the hypothesis before scoring.
    """
    for name, scorer in (
        ("r2l_score", r2l),
        ("t2s_score", t2s),
        ("lm_score", lm),
        ("align_score", lex),
        ("align_score", dist),
    ):
        if scorer is None:
            raise ValueError(f"missing scorer for feature {name!r}")
    src = nbest.source
    hyp_lang = t2s.input_lang if t2s.input_lang != src.lang else src.lang + "+hyp"
    vectors = []
    for hyp in nbest.hyps:
        toks = hyp.tokens
        hyp_sent = Sentence.from_tokens(toks, lang=hyp_lang)
        l2r_v = hyp.logscore if l2r is None else score_hypothesis(l2r, src, toks)
        r2l_v = score_hypothesis(r2l, src, tuple(reversed(toks)))
        t2s_v = score_hypothesis(t2s, hyp_sent, src.tokens)
        lm_v = lm_logprob(lm, hyp_sent)
        if toks:
            align_v = align_score(lex, dist, SentencePair(src, hyp_sent))
        else:
            align_v = _EMPTY_HYP_ALIGN
        ratio_v = abs(len(src.tokens) / max(1, len(toks)) - cfg.optimal_ratio)
        vectors.append(FeatureVector((l2r_v, r2l_v, t2s_v, lm_v, align_v, ratio_v)))
    return FeaturedNBest(src, nbest.model_id, nbest.hyps, tuple(vectors))


def _argbest(fl: FeaturedNBest, weights: Sequence[float]) -> int:
    best = 0
    best_score = fl.vectors[0].dot(weights)
    for i in range(1, len(fl.vectors)):
        s = fl.vectors[i].dot(weights)
        if s > best_score:
            best, best_score = i, s
    return best


def mira_train(
    dev_nbests: Sequence[FeaturedNBest],
    references: Sequence[Sentence],
    cfg: MiraConfig = MiraConfig(),
    epoch_metric: Callable[[list[tuple[str, ...]]], float] | None = None,
) -> MiraModel:
    """K-best batch MIRA: per list pick the hope (max model+BLEU) and fear
    (max model-BLEU) hypotheses and apply the capped margin update.

    Lists are visited in fixed order; after each epoch the current weights are
    scored on the tuning set (reranked corpus BLEU by default, or
    epoch_metric applied to the reranked top-1 token sequences) and the
    best-scoring epoch, including the initial weights, is returned — so
    reranking the tuning set never falls below its unreranked score under the
    selection metric.
    """
    lists = list(dev_nbests)
    if not lists:
        raise ValueError("empty development set")
    if len(lists) != len(references):
        raise ValueError("n-best/reference count mismatch")
    bleus = [
        [bleu_sentence_tokens(h.tokens, ref.tokens) / 100.0 for h in fl.hyps]
        for fl, ref in zip(lists, references)
    ]
    ref_tokens = [ref.tokens for ref in references]

    def corpus_score(weights: Sequence[float]) -> float:
        tops = [fl.hyps[_argbest(fl, weights)].tokens for fl in lists]
        if epoch_metric is not None:
            return epoch_metric(tops)
        return bleu_corpus_tokens(tops, ref_tokens)

    w = list(cfg.init_weights)
    best_w = tuple(w)
    best_score = corpus_score(w)
    for _epoch in range(cfg.epochs):
        for fl, bl in zip(lists, bleus):
            n = len(fl.vectors)
            if n < 2:
                continue
            model = [v.dot(w) for v in fl.vectors]
            hope = max(range(n), key=lambda i: (model[i] + bl[i], -i))
            fear = max(range(n), key=lambda i: (model[i] - bl[i], -i))
            if hope == fear:
                continue
            delta = [
                a - b
                for a, b in zip(fl.vectors[hope].values, fl.vectors[fear].values)
            ]
            loss = (bl[hope] - bl[fear]) - (model[hope] - model[fear])
            if loss <= 0:
                continue
            norm2 = sum(d * d for d in delta)
            if norm2 == 0.0:
                continue
            eta = min(cfg.C, loss / norm2)
            w = [wi + eta * d for wi, d in zip(w, delta)]
        score = corpus_score(w)
        if score > best_score:
            best_score = score
            best_w = tuple(w)
    return MiraModel(best_w, cfg.C, cfg.epochs, cfg.seed)


def rerank_apply(model: MiraModel, nbest: FeaturedNBest) -> FeaturedNBest:
    """Reorder hypotheses by weights . features, descending; ties keep the
    original rank order."""
    if len(model.weights) != len(FEATURE_NAMES):
        raise ValueError("weight vector dimension mismatch")
    order = sorted(
        range(len(nbest.hyps)),
        key=lambda i: (-nbest.vectors[i].dot(model.weights), i),
    )
    return FeaturedNBest(
        nbest.source,
        nbest.model_id,
        tuple(nbest.hyps[i] for i in order),
        tuple(nbest.vectors[i] for i in order),
    )


def save_weights(model: MiraModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# C={model.C!r} epochs={model.epochs} seed={model.seed}\n")
        for name, value in zip(FEATURE_NAMES, model.weights):
            fh.write(f"{name}\t{value!r}\n")


def load_weights(path: str | Path) -> MiraModel:
    weights = dict.fromkeys(FEATURE_NAMES, 0.0)
    c, epochs, seed = 0.01, 10, 0
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                for part in line[1:].split():
                    key, _, value = part.partition("=")
                    if key == "C":
                        c = float(value)
                    elif key == "epochs":
                        epochs = int(value)
                    elif key == "seed":
                        seed = int(value)
                continue
            if not line:
                continue
            name, value = line.split("\t")
            if name not in weights:
                raise ValueError(f"unknown feature {name!r}")
            weights[name] = float(value)
    return MiraModel(tuple(weights[n] for n in FEATURE_NAMES), c, epochs, seed)
