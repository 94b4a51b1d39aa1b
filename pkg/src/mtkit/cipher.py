"""Deterministic synthetic cipher-language corpora for experiments and tests.

The language maps each source word to one or two target surface forms. Which
form an ambiguous word takes is a fixed function of the previous target word,
so a short-context language model can learn to pick it; corrupting a sentence
re-rolls those choices at random, producing text that keeps its meaning but
loses fluency. Numbers pass through unchanged on both sides. This gives the
quality filters, cycle translation, reranking, and the end-to-end pipeline
something real to improve, with exactly known references.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .corpus import Sentence, SentencePair

_SRC_SYLLABLES = ("ka", "ri", "to", "mu", "sa", "ne", "lo", "vi", "ta", "pe")
_TGT_SYLLABLES = ("ben", "dor", "fim", "gul", "hes", "jan", "wek", "yor", "zed", "cro")
_BOS_SALT = 0x9E3779B9


def _make_words(rng: random.Random, syllables: Sequence[str], count: int) -> tuple[str, ...]:
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < count:
        w = "".join(rng.choice(syllables) for _ in range(rng.randint(2, 3)))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return tuple(words)


@dataclass(frozen=True)
class CipherLanguage:
    seed: int
    src_lang: str
    tgt_lang: str
    src_words: tuple[str, ...]
    forms: dict[str, tuple[str, ...]]  # source word -> target surface forms
    salts: dict[str, int]              # word -> salt driving the form rule
    weights: tuple[float, ...]         # sampling weights over src_words

    def target_form(self, src_word: str, prev_tgt: str | None) -> str:
        opts = self.forms[src_word]
        if len(opts) == 1:
            return opts[0]
        prev_salt = _BOS_SALT if prev_tgt is None else self.salts.get(prev_tgt, _BOS_SALT)
        return opts[(prev_salt * 31 + self.salts[src_word]) & 1]

    @property
    def inverse(self) -> dict[str, str]:
        inv = {}
        for src, opts in self.forms.items():
            for form in opts:
                inv[form] = src
        return inv


def build_language(
    seed: int,
    *,
    vocab_size: int = 220,
    ambiguous_frac: float = 0.35,
    src_lang: str = "src",
    tgt_lang: str = "tgt",
) -> CipherLanguage:
    rng = random.Random(f"cipher-lang/{seed}")
    src_words = _make_words(rng, _SRC_SYLLABLES, vocab_size)
    n_ambiguous = int(round(vocab_size * ambiguous_frac))
    n_forms = vocab_size + n_ambiguous
    tgt_words = _make_words(rng, _TGT_SYLLABLES, n_forms)

    forms: dict[str, tuple[str, ...]] = {}
    extra = vocab_size
    for i, src in enumerate(src_words):
        if i < n_ambiguous:
            forms[src] = (tgt_words[i], tgt_words[extra])
            extra += 1
        else:
            forms[src] = (tgt_words[i],)

    salts = {w: rng.getrandbits(32) for w in src_words + tgt_words}
    weights = tuple(1.0 / (rank + 3) ** 0.9 for rank in range(vocab_size))
    return CipherLanguage(seed, src_lang, tgt_lang, src_words, forms, salts, weights)


def _make_number(rng: random.Random) -> str:
    kind = rng.randrange(3)
    if kind == 0:
        year = rng.randint(1900, 2029)
        return f"{year}-{(year + 1) % 100:02d}"
    if kind == 1:
        return str(rng.randint(1900, 2029))
    return str(rng.randint(10, 999))


def sample_pair(
    lang: CipherLanguage,
    rng: random.Random,
    *,
    min_len: int = 4,
    max_len: int = 11,
    number_prob: float = 0.08,
) -> tuple[list[str], list[str]]:
    """One fluent (source tokens, target tokens) pair, equal lengths, with at
    most one shared number token."""
    n = rng.randint(min_len, max_len)
    src = rng.choices(lang.src_words, weights=lang.weights, k=n)
    if rng.random() < number_prob:
        src.insert(rng.randrange(len(src) + 1), _make_number(rng))
    tgt: list[str] = []
    prev: str | None = None
    for tok in src:
        if tok in lang.forms:
            word = lang.target_form(tok, prev)
        else:
            word = tok  # numbers copy through
        tgt.append(word)
        prev = word
    return src, tgt


def corrupt_target(lang: CipherLanguage, tgt_tokens: Sequence[str], rng: random.Random) -> list[str]:
    """Re-roll every ambiguous form uniformly: same meaning, broken fluency."""
    inverse = lang.inverse
    out = []
    for tok in tgt_tokens:
        src = inverse.get(tok)
        if src is not None and len(lang.forms[src]) > 1:
            out.append(rng.choice(lang.forms[src]))
        else:
            out.append(tok)
    return out


def render(tokens: Sequence[str]) -> str:
    """Display form: sentence-initial capital, attached terminal period."""
    if not tokens:
        return "."
    first = tokens[0][:1].upper() + tokens[0][1:]
    return " ".join([first, *tokens[1:]]) + "."


def make_parallel(lang: CipherLanguage, count: int, seed_label: str) -> list[tuple[str, str]]:
    """Raw (source line, target line) pairs for corpus files."""
    rng = random.Random(f"cipher-par/{lang.seed}/{seed_label}")
    out = []
    for _ in range(count):
        src, tgt = sample_pair(lang, rng)
        out.append((render(src), render(tgt)))
    return out


def make_mono(
    lang: CipherLanguage, count: int, noise_frac: float, seed_label: str
) -> tuple[list[str], list[bool]]:
    """Raw target-side lines with a planted fraction of disfluent sentences."""
    rng = random.Random(f"cipher-mono/{lang.seed}/{seed_label}")
    lines = []
    noisy_flags = []
    for _ in range(count):
        _src, tgt = sample_pair(lang, rng)
        noisy = rng.random() < noise_frac
        if noisy:
            tgt = corrupt_target(lang, tgt, rng)
        lines.append(render(tgt))
        noisy_flags.append(noisy)
    return lines, noisy_flags


def pairs_as_sentences(
    lang: CipherLanguage, raw_pairs: Sequence[tuple[str, str]]
) -> list[SentencePair]:
    """Tokenized word-level pairs straight from generator output (no casing or
    punctuation shaping), handy for unit tests."""
    out = []
    for src_line, tgt_line in raw_pairs:
        src = Sentence.from_tokens(src_line.rstrip(" .").lower().split(), lang=lang.src_lang)
        tgt = Sentence.from_tokens(tgt_line.rstrip(" .").lower().split(), lang=lang.tgt_lang)
        out.append(SentencePair(src, tgt))
    return out
