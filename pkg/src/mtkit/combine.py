"""Greedy model-selection ensembling and confusion-network combination.

System outputs for one source are aligned to a backbone by edit distance,
stacked into a slot lattice, consensus-decoded, and the pooled candidate
closest to the consensus is emitted (minimum-Bayes-risk style selection).
Greedy forward selection over systems runs the same combination path on the
candidate subset, so its dev-metric guarantee transfers to the real output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .corpus import Sentence
from .distance import edit_distance
from .metrics import bleu_corpus_tokens

#: The "no word" alternative in a slot. The tokenizer never produces an empty
#: token, so the empty string is a safe sentinel.
EPSILON = ""


@dataclass(frozen=True)
class SystemPool:
    """Per-system 1-best outputs over one shared sentence list, plus the
    references used for selection."""

    systems: dict[str, list[Sentence]]
    dev_refs: list[Sentence]

    def __post_init__(self):
        n = len(self.dev_refs)
        for model_id, outputs in self.systems.items():
            if len(outputs) != n:
                raise ValueError(f"system {model_id!r} covers {len(outputs)} sentences, expected {n}")


@dataclass(frozen=True)
class ConfusionNetwork:
    backbone_id: str
    slots: tuple[Mapping[str, float], ...]
    sent_id: int = 0
    lang: str = "und"


def _edit_ops(backbone: Sequence[str], hyp: Sequence[str]) -> list[tuple]:
    """Minimum-edit alignment of hyp against the backbone.

    Ops: ("align", bi, word) for match/substitute into backbone slot bi,
    ("del", bi) for a backbone word the hyp skips, ("ins", gi, word) for a hyp
    word inserted in the gap before backbone slot gi. Backtrace prefers
    diagonal, then deletion, then insertion, so alignments are deterministic.
    """
    n, m = len(backbone), len(hyp)
    dp = [list(range(m + 1))] + [[i] + [0] * m for i in range(1, n + 1)]
    for i in range(1, n + 1):
        row = dp[i]
        prev = dp[i - 1]
        b = backbone[i - 1]
        for j in range(1, m + 1):
            row[j] = min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (b != hyp[j - 1]))
    ops: list[tuple] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + (backbone[i - 1] != hyp[j - 1]):
            ops.append(("align", i - 1, hyp[j - 1]))
            i -= 1
            j -= 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            ops.append(("del", i - 1))
            i -= 1
        else:
            ops.append(("ins", i, hyp[j - 1]))
            j -= 1
    ops.reverse()
    return ops


def choose_backbone(outputs: Sequence[tuple[str, Sentence]]) -> int:
    """Index of the output minimizing total edit distance to all others;
    ties go to the earlier model id."""
    best_idx = 0
    best_total = None
    for idx, (_mid, sent) in enumerate(outputs):
        total = sum(edit_distance(sent.tokens, other.tokens) for _m, other in outputs)
        if best_total is None or total < best_total:
            best_total = total
            best_idx = idx
    return best_idx


def build_confusion_network(
    outputs: Sequence[tuple[str, Sentence]], sent_id: int = 0
) -> ConfusionNetwork:
    """Align every system output to the backbone and accumulate slot votes.

    Matches and substitutions vote in the backbone slot, deletions vote
    epsilon there, and insertions open epsilon-padded slots in the gap where
    they occur. Every slot's votes sum to the number of systems.
    """
    if not outputs:
        raise ValueError("no system outputs to combine")
    n_sys = len(outputs)
    bb_idx = choose_backbone(outputs)
    backbone_id, backbone = outputs[bb_idx]
    bb_tokens = backbone.tokens
    length = len(bb_tokens)

    base: list[dict[str, float]] = [{w: 1.0} for w in bb_tokens]
    gaps: list[list[dict[str, float]]] = [[] for _ in range(length + 1)]

    for idx, (_mid, sent) in enumerate(outputs):
        if idx == bb_idx:
            continue
        gap_used = [0] * (length + 1)
        for op in _edit_ops(bb_tokens, sent.tokens):
            if op[0] == "align":
                _tag, bi, word = op
                base[bi][word] = base[bi].get(word, 0.0) + 1.0
            elif op[0] == "del":
                bi = op[1]
                base[bi][EPSILON] = base[bi].get(EPSILON, 0.0) + 1.0
            else:
                _tag, gi, word = op
                k = gap_used[gi]
                if k == len(gaps[gi]):
                    gaps[gi].append({})
                slot = gaps[gi][k]
                slot[word] = slot.get(word, 0.0) + 1.0
                gap_used[gi] += 1

    ordered: list[dict[str, float]] = []
    for i in range(length + 1):
        ordered.extend(gaps[i])
        if i < length:
            ordered.append(base[i])
    slots = []
    for slot in ordered:
        missing = n_sys - sum(slot.values())
        if missing > 0:
            slot[EPSILON] = slot.get(EPSILON, 0.0) + missing
        slots.append(dict(sorted(slot.items())))
    return ConfusionNetwork(backbone_id, tuple(slots), sent_id, backbone.lang)


def consensus_decode(cn: ConfusionNetwork) -> Sentence:
    """Per-slot argmax by vote weight; ties break lexicographically with
    epsilon losing all ties; epsilon choices vanish from the output."""
    out = []
    for slot in cn.slots:
        word = min(slot.items(), key=lambda kv: (-kv[1], kv[0] == EPSILON, kv[0]))[0]
        if word != EPSILON:
            out.append(word)
    return Sentence.from_tokens(out, lang=cn.lang)


def conmbr_loss(a: Sequence[str], b: Sequence[str]) -> float:
    """Word edit distance normalized by the longer length."""
    return edit_distance(a, b) / max(len(a), len(b), 1)


def conmbr_choice(
    outputs: Sequence[tuple[str, Sentence]], e_con: Sentence
) -> tuple[str, Sentence]:
    """The pooled candidate minimizing loss against the consensus decode;
    ties go to the earlier model id."""
    if not outputs:
        raise ValueError("empty candidate set")
    best = None
    best_loss = None
    for mid, sent in outputs:
        loss = conmbr_loss(sent.tokens, e_con.tokens)
        if best_loss is None or loss < best_loss:
            best_loss = loss
            best = (mid, sent)
    return best


def conmbr_select(outputs: Sequence[tuple[str, Sentence]], e_con: Sentence) -> Sentence:
    return conmbr_choice(outputs, e_con)[1]


@dataclass(frozen=True)
class CombinedSentence:
    sentence: Sentence
    backbone_id: str
    chosen_id: str
    network: ConfusionNetwork


def combine_sentence(outputs: Sequence[tuple[str, Sentence]], sent_id: int = 0) -> CombinedSentence:
    """Full combination path for one source: confusion network, consensus
    decode, then minimum-loss candidate selection."""
    cn = build_confusion_network(outputs, sent_id)
    e_con = consensus_decode(cn)
    chosen_id, chosen = conmbr_choice(outputs, e_con)
    return CombinedSentence(chosen, cn.backbone_id, chosen_id, cn)


def combine_corpus(
    pool_systems: Mapping[str, Sequence[Sentence]], subset: Sequence[str]
) -> list[CombinedSentence]:
    ids = list(subset)
    n = len(next(iter(pool_systems.values()))) if pool_systems else 0
    return [
        combine_sentence([(mid, pool_systems[mid][i]) for mid in ids], i) for i in range(n)
    ]


@dataclass(frozen=True)
class GmseResult:
    selected: tuple[str, ...]
    trace: tuple[tuple[str, float], ...]  # (system added, dev score after adding)


def gmse(
    pool: SystemPool,
    metric: Callable[[Sequence[Sentence], Sequence[Sentence]], float] | None = None,
) -> GmseResult:
    """Greedy forward selection on the dev metric over combined outputs.

    Starts from the best single system and keeps adding the system yielding
    the largest strict improvement, stopping when none improves. The returned
    selection therefore never scores below the best single system.
    """
    ids = list(pool.systems)
    if not ids:
        raise ValueError("empty system pool")
    if metric is None:
        metric = lambda hyps, refs: bleu_corpus_tokens(
            [h.tokens for h in hyps], [r.tokens for r in refs]
        )

    def evaluate(subset: list[str]) -> float:
        outputs = [c.sentence for c in combine_corpus(pool.systems, subset)]
        return metric(outputs, pool.dev_refs)

    best_id = ids[0]
    best_score = evaluate([best_id])
    for cand in ids[1:]:
        score = evaluate([cand])
        if score > best_score:
            best_id, best_score = cand, score

    selected = [best_id]
    trace = [(best_id, best_score)]
    remaining = [i for i in ids if i != best_id]
    while remaining:
        add_id = None
        add_score = best_score
        for cand in remaining:
            score = evaluate(selected + [cand])
            if score > add_score:
                add_id, add_score = cand, score
        if add_id is None:
            break
        selected.append(add_id)
        remaining.remove(add_id)
        best_score = add_score
        trace.append((add_id, add_score))
    return GmseResult(tuple(selected), tuple(trace))
