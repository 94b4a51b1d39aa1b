"""Core text types: tokenization, truecasing, deduplication, corpus I/O."""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

#: Feature names allowed in SentencePair.scores.
KNOWN_SCORE_KEYS = frozenset({"lm", "align", "t2s", "ratio_dev"})


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class Sentence:
    """A tokenized sentence plus the string it was derived from."""

    tokens: tuple[str, ...]
    raw: str
    lang: str = "und"

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], lang: str = "und") -> "Sentence":
        toks = tuple(tokens)
        return cls(tokens=toks, raw=" ".join(toks), lang=lang)


class Origin(str, Enum):
    PARALLEL = "parallel"
    SYNTHETIC_BACK = "synthetic-back"
    SYNTHETIC_CYCLE = "synthetic-cycle"


@dataclass(frozen=True)
class SentencePair:
    src: Sentence
    tgt: Sentence
    origin: Origin = Origin.PARALLEL
    scores: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.src.lang == self.tgt.lang:
            raise ValueError(f"source and target share language tag {self.src.lang!r}")
        unknown = set(self.scores) - KNOWN_SCORE_KEYS
        if unknown:
            raise ValueError(f"unregistered score keys: {sorted(unknown)}")
        object.__setattr__(self, "scores", dict(self.scores))

    def with_scores(self, **scores: float) -> "SentencePair":
        merged = {**self.scores, **scores}
        return SentencePair(self.src, self.tgt, self.origin, merged)


def tokenize(text: str, lang: str = "und") -> Sentence:
    """Deterministic rule tokenizer.

    Splits on whitespace, then detaches leading/trailing punctuation of each
    chunk as separate tokens. Internal punctuation survives, so "2006-07" and
    "don't" stay single tokens. NFC-normalizes first. Idempotent on its own
    space-joined output; empty or whitespace-only input yields no tokens.
    """
    norm = unicodedata.normalize("NFC", text)
    tokens: list[str] = []
    for chunk in norm.split():
        i, j = 0, len(chunk)
        while i < j and _is_punct(chunk[i]):
            i += 1
        while j > i and _is_punct(chunk[j - 1]):
            j -= 1
        tokens.extend(chunk[:i])
        if i < j:
            tokens.append(chunk[i:j])
        tokens.extend(chunk[j:])
    return Sentence(tokens=tuple(tokens), raw=norm, lang=lang)


_CLOSER_CHARS = set(".,!?;:%…")
_OPENER_CHARS = set("¿¡")


def _attach_class(token: str) -> str:
    if not token or not all(_is_punct(c) for c in token):
        return "none"
    c = token[0]
    cat = unicodedata.category(c)
    if c in _CLOSER_CHARS or cat in ("Pe", "Pf"):
        return "left"
    if c in _OPENER_CHARS or cat in ("Ps", "Pi"):
        return "right"
    return "none"


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens, attaching closing punctuation left and openers right."""
    out: list[str] = []
    glue_next = False
    for tok in tokens:
        cls = _attach_class(tok)
        if out and (glue_next or cls == "left"):
            out[-1] = out[-1] + tok
        else:
            out.append(tok)
        glue_next = cls == "right"
    return " ".join(out)


@dataclass
class TruecaseModel:
    """Counts of surface casings observed sentence-internally."""

    counts: dict[str, Counter] = field(default_factory=dict)

    def dominant(self, lower: str) -> str | None:
        """Most frequent surface form for a lowercased key; ties prefer the
        lowercase form, then the lexicographically smallest."""
        forms = self.counts.get(lower)
        if not forms:
            return None
        top = max(forms.values())
        best = [form for form, c in forms.items() if c == top]
        if lower in best:
            return lower
        return min(best)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for lower in sorted(self.counts):
                for surface in sorted(self.counts[lower]):
                    fh.write(f"{surface}\t{self.counts[lower][surface]}\n")

    @classmethod
    def load(cls, path: str | Path) -> "TruecaseModel":
        model = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                surface, count = line.rsplit("\t", 1)
                model.counts.setdefault(surface.lower(), Counter())[surface] += int(count)
        return model


def train_truecaser(corpus: Iterable[Sentence]) -> TruecaseModel:
    """Collect casing counts for every token seen sentence-internally."""
    model = TruecaseModel()
    empty = True
    for sent in corpus:
        empty = False
        for tok in sent.tokens[1:]:
            model.counts.setdefault(tok.lower(), Counter())[tok] += 1
    if empty:
        raise ValueError("empty training corpus")
    return model


def apply_truecase(model: TruecaseModel, s: Sentence) -> Sentence:
    """Lowercase the sentence-initial token iff its dominant internal casing
    is lowercase; unseen tokens are left unchanged."""
    if not s.tokens:
        return s
    first = s.tokens[0]
    if model.dominant(first.lower()) == first.lower() and first != first.lower():
        return Sentence.from_tokens((first.lower(),) + s.tokens[1:], lang=s.lang)
    return s


def detruecase(model: TruecaseModel | None, s: Sentence) -> Sentence:
    """Restore display casing of the sentence-initial token.

    Tokens whose dominant casing is a marked (non-lowercase) form are kept
    as-is; everything else gets its first character capitalized, which is
    also the fallback for tokens the model has never seen.
    """
    if not s.tokens:
        return s
    first = s.tokens[0]
    dom = model.dominant(first.lower()) if model is not None else None
    if dom is not None and dom != first.lower():
        return s
    capped = first[:1].upper() + first[1:]
    if capped == first:
        return s
    return Sentence.from_tokens((capped,) + s.tokens[1:], lang=s.lang)


def dedup(pairs: Iterable[SentencePair]) -> Iterator[SentencePair]:
    """Drop exact (src.raw, tgt.raw) duplicates, keeping first occurrences.

    Case-sensitive; order otherwise preserved.
    """
    seen: set[tuple[str, str]] = set()
    for pair in pairs:
        key = (pair.src.raw, pair.tgt.raw)
        if key in seen:
            continue
        seen.add(key)
        yield pair


# ---------------------------------------------------------------------------
# Corpus I/O. Plain-text corpora are one sentence per line, UTF-8, LF.
# Pipeline-internal files carry space-joined tokens; raw input files are run
# through the tokenizer.
# ---------------------------------------------------------------------------


def read_text_corpus(path: str | Path, lang: str = "und", *, pretokenized: bool = False) -> list[Sentence]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if pretokenized:
                out.append(Sentence.from_tokens(line.split(), lang=lang))
            else:
                out.append(tokenize(line, lang=lang))
    return out


def write_text_corpus(path: str | Path, sentences: Iterable[Sentence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for sent in sentences:
            fh.write(" ".join(sent.tokens) + "\n")


def read_parallel_tsv(
    path: str | Path,
    src_lang: str,
    tgt_lang: str,
    *,
    pretokenized: bool = False,
    origin: Origin = Origin.PARALLEL,
) -> list[SentencePair]:
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected src<TAB>tgt, got {len(parts)} fields")
            if pretokenized:
                src = Sentence.from_tokens(parts[0].split(), lang=src_lang)
                tgt = Sentence.from_tokens(parts[1].split(), lang=tgt_lang)
            else:
                src = tokenize(parts[0], lang=src_lang)
                tgt = tokenize(parts[1], lang=tgt_lang)
            pairs.append(SentencePair(src, tgt, origin))
    return pairs


def read_parallel_files(
    src_path: str | Path,
    tgt_path: str | Path,
    src_lang: str,
    tgt_lang: str,
    *,
    pretokenized: bool = False,
) -> list[SentencePair]:
    srcs = read_text_corpus(src_path, src_lang, pretokenized=pretokenized)
    tgts = read_text_corpus(tgt_path, tgt_lang, pretokenized=pretokenized)
    if len(srcs) != len(tgts):
        raise ValueError(f"side length mismatch: {len(srcs)} vs {len(tgts)}")
    return [SentencePair(s, t) for s, t in zip(srcs, tgts)]


def write_pairs_tsv(path: str | Path, pairs: Iterable[SentencePair]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for pair in pairs:
            fh.write(" ".join(pair.src.tokens) + "\t" + " ".join(pair.tgt.tokens) + "\n")


def write_pairs_jsonl(path: str | Path, pairs: Iterable[SentencePair]) -> None:
    """Scored-pair interchange: one {src, tgt, origin, scores} object per line."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for pair in pairs:
            rec = {
                "src": " ".join(pair.src.tokens),
                "tgt": " ".join(pair.tgt.tokens),
                "origin": pair.origin.value,
                "scores": dict(sorted(pair.scores.items())),
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_pairs_jsonl(path: str | Path, src_lang: str, tgt_lang: str) -> list[SentencePair]:
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            pairs.append(
                SentencePair(
                    Sentence.from_tokens(rec["src"].split(), lang=src_lang),
                    Sentence.from_tokens(rec["tgt"].split(), lang=tgt_lang),
                    Origin(rec.get("origin", "parallel")),
                    rec.get("scores", {}),
                )
            )
    return pairs
