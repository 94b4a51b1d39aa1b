"""Back translation, cycle translation, and big/small corpus construction."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Origin, Sentence, SentencePair
from .toymt import Direction, TranslatorSpec, decode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CycleConfig:
    """ratio selects the lowest-scoring fraction of sentences (per-token LM
    score ascending, ties by line order) for cycle translation."""

    ratio: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError("ratio must be in [0, 1]")


@dataclass(frozen=True)
class MixturePlan:
    mode: str = "small"  # "small" | "big"
    num_small_samples: int = 8
    parallel_repeat: int = 13
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("small", "big"):
            raise ValueError("mode must be 'small' or 'big'")
        if self.num_small_samples < 1 or self.parallel_repeat < 1:
            raise ValueError("counts must be >= 1")


@dataclass
class BackTranslationResult:
    pairs: list[SentencePair]
    skipped: int


@dataclass
class CycleResult:
    sentences: list[Sentence]
    cycled: tuple[bool, ...]
    replaced: int
    skipped: int


def back_translate(
    t2s: TranslatorSpec,
    mono_tgt: Sequence[Sentence],
    origins: Sequence[Origin] | None = None,
) -> BackTranslationResult:
    """Pair each target sentence with its 1-best back translation.

    Sentences the decoder cannot translate (empty input or output) are
    skipped and counted.
    """
    if t2s.direction != Direction.T2S:
        raise ValueError("back translation needs a target-to-source model")
    if origins is not None and len(origins) != len(mono_tgt):
        raise ValueError("origins/sentences length mismatch")
    pairs: list[SentencePair] = []
    skipped = 0
    for idx, y in enumerate(mono_tgt):
        if not y.tokens:
            skipped += 1
            continue
        hyp = decode(t2s, y, 1).hyps[0]
        if not hyp.tokens:
            skipped += 1
            continue
        src = Sentence.from_tokens(hyp.tokens, lang=t2s.output_lang)
        origin = origins[idx] if origins is not None else Origin.SYNTHETIC_BACK
        pairs.append(SentencePair(src, y, origin))
    if skipped:
        logger.info("back translation skipped %d sentences", skipped)
    return BackTranslationResult(pairs, skipped)


def cycle_translate(
    t2s: TranslatorSpec,
    s2t: TranslatorSpec,
    mono_tgt: Sequence[tuple[Sentence, float]],
    cfg: CycleConfig,
) -> CycleResult:
    """Replace the lowest-scoring ratio fraction of sentences by their
    round-trip translation; the rest pass through unchanged, order preserved.

    A sentence whose round trip fails (empty decode) keeps its original text
    and is counted as skipped.
    """
    items = list(mono_tgt)
    n = len(items)
    k = max(0, math.ceil(cfg.ratio * n - 1e-9))
    order = sorted(range(n), key=lambda i: (items[i][1], i))
    chosen = set(order[:k])

    out: list[Sentence] = []
    flags: list[bool] = []
    replaced = 0
    skipped = 0
    for idx, (sent, _score) in enumerate(items):
        if idx not in chosen or not sent.tokens:
            if idx in chosen:
                skipped += 1
            out.append(sent)
            flags.append(False)
            continue
        mid = decode(t2s, sent, 1).hyps[0]
        if not mid.tokens:
            skipped += 1
            out.append(sent)
            flags.append(False)
            continue
        roundtrip = decode(s2t, Sentence.from_tokens(mid.tokens, lang=t2s.output_lang), 1).hyps[0]
        if not roundtrip.tokens:
            skipped += 1
            out.append(sent)
            flags.append(False)
            continue
        out.append(Sentence.from_tokens(roundtrip.tokens, lang=sent.lang))
        flags.append(True)
        replaced += 1
    return CycleResult(out, tuple(flags), replaced, skipped)


def _rng(seed: int, label: str) -> random.Random:
    return random.Random(f"{seed}/{label}")


def construct_small_sample(
    parallel: Sequence[SentencePair],
    synthetic: Sequence[SentencePair],
    plan: MixturePlan,
    index: int,
) -> list[SentencePair]:
    """One small-construction mixture: the parallel corpus plus an equal-size
    sample of the synthetic corpus, shuffled. Each index draws from its own
    seed stream, so samples are reproducible individually."""
    if len(synthetic) < len(parallel):
        raise ValueError(
            f"synthetic corpus ({len(synthetic)}) smaller than parallel ({len(parallel)}); "
            "use big construction"
        )
    if not 0 <= index < plan.num_small_samples:
        raise ValueError(f"sample index {index} outside plan")
    rng = _rng(plan.seed, f"small/{index}")
    corpus = list(parallel) + rng.sample(list(synthetic), len(parallel))
    rng.shuffle(corpus)
    return corpus


def construct_small(
    parallel: Sequence[SentencePair],
    synthetic: Sequence[SentencePair],
    plan: MixturePlan,
) -> list[list[SentencePair]]:
    return [
        construct_small_sample(parallel, synthetic, plan, i)
        for i in range(plan.num_small_samples)
    ]


def construct_big(
    parallel: Sequence[SentencePair],
    synthetic: Sequence[SentencePair],
    plan: MixturePlan,
) -> list[SentencePair]:
    """The parallel corpus repeated, plus all synthetic data, shuffled."""
    rng = _rng(plan.seed, "big")
    corpus = list(parallel) * plan.parallel_repeat + list(synthetic)
    rng.shuffle(corpus)
    return corpus


def mixture_sizes(plan: MixturePlan, n_parallel: int, n_synthetic: int) -> dict[str, int]:
    """Closed-form output sizes, no materialization: each small corpus doubles
    the parallel count; big is repeat * parallel + all synthetic."""
    return {
        "small_each": 2 * n_parallel,
        "num_small_samples": plan.num_small_samples,
        "big": plan.parallel_repeat * n_parallel + n_synthetic,
    }
