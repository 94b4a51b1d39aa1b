"""Final-surface cleanup: de-BPE, number repair, de-truecase, detokenize."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .corpus import Sentence, TruecaseModel, detokenize, detruecase
from .distance import edit_distance
from .subword import bpe_reverse

_DIGIT_RE = re.compile(r"\d")


@dataclass(frozen=True)
class NumberToken:
    surface: str
    char_class_signature: str
    position: int

    def __post_init__(self):
        if not _DIGIT_RE.search(self.surface):
            raise ValueError("number token must contain a digit")


def digit_signature(surface: str) -> str:
    """Collapse digit runs to 'D', keeping separators: '2006-07' -> 'D-D'."""
    return re.sub(r"\d+", "D", surface)


def _digits(surface: str) -> str:
    return "".join(_DIGIT_RE.findall(surface))


def extract_numbers(sentence: Sentence) -> list[NumberToken]:
    return [
        NumberToken(tok, digit_signature(tok), pos)
        for pos, tok in enumerate(sentence.tokens)
        if _DIGIT_RE.search(tok)
    ]


def repair_numbers(
    src: Sentence,
    hyp: Sentence,
    *,
    max_distance: int = 2,
    max_window: int = 7,
    max_gap: int = 1,
) -> Sentence:
    """Replace hypothesis numbers whose digit sequences are missing from the
    source with the best-matching source number.

    A candidate window is a contiguous token span starting and ending on
    digit-bearing tokens (at most max_gap non-digit tokens between
    consecutive digit tokens, at most max_window tokens overall); this covers
    split translations like "2006 at 07" for a source "2006-07". Longer
    windows are tried first. A window is rewritten only when the nearest
    source number by digit-sequence edit distance is within max_distance,
    unique, and not already matched elsewhere in the hypothesis; each source
    number is used at most once, and source numbers whose digit sequence the
    hypothesis already contains are reserved up front, which also makes the
    repair idempotent. Everything unrepairable passes through unchanged.
    """
    src_nums = [(tok, _digits(tok)) for tok in src.tokens if _DIGIT_RE.search(tok)]
    if not src_nums:
        return hyp
    src_digit_set = {d for _surface, d in src_nums}
    used = [False] * len(src_nums)
    toks = hyp.tokens

    digit_pos = [i for i, t in enumerate(toks) if _DIGIT_RE.search(t)]
    if not digit_pos:
        return hyp
    for i in digit_pos:
        d = _digits(toks[i])
        if d in src_digit_set:
            for idx, (_surface, sd) in enumerate(src_nums):
                if sd == d and not used[idx]:
                    used[idx] = True
                    break

    out: list[str] = []
    changed = False
    i = 0
    n = len(toks)
    while i < n:
        tok = toks[i]
        if not _DIGIT_RE.search(tok) or _digits(tok) in src_digit_set:
            out.append(tok)
            i += 1
            continue
        # candidate window ends: digit-bearing positions reachable within the
        # gap and length limits
        ends = [i]
        gap = 0
        p = i + 1
        while p < n and p - i < max_window:
            if _DIGIT_RE.search(toks[p]):
                ends.append(p)
                gap = 0
            else:
                gap += 1
                if gap > max_gap:
                    break
            p += 1
        repaired = False
        for j in reversed(ends):
            window_digits = "".join(_digits(t) for t in toks[i : j + 1])
            dists = [edit_distance(window_digits, sd) for _surface, sd in src_nums]
            dmin = min(dists)
            if dmin > max_distance:
                continue
            argmin = [idx for idx, d in enumerate(dists) if d == dmin]
            if len(argmin) != 1 or used[argmin[0]]:
                continue
            used[argmin[0]] = True
            out.append(src_nums[argmin[0]][0])
            i = j + 1
            repaired = True
            changed = True
            break
        if not repaired:
            out.append(tok)
            i += 1
    if not changed:
        return hyp
    return Sentence.from_tokens(out, lang=hyp.lang)


def finalize(
    hyp: Sentence,
    truecase: TruecaseModel | None = None,
    repair: Callable[[Sentence], Sentence] | None = None,
) -> str:
    """De-BPE, apply the caller-supplied repair step, restore sentence-initial
    casing, and detokenize into a plain string."""
    sent = bpe_reverse(hyp)
    if repair is not None:
        sent = repair(sent)
    sent = detruecase(truecase, sent)
    return detokenize(sent.tokens)
