"""Pluggable translation-model interface with a toy statistical translator.

A translator is a lexicon (IBM 1+2 trained) plus an output-side n-gram LM,
decoded by a monotone word-by-word beam search. It fills the seq2seq role in
the pipeline behind a small surface: train on pairs, decode n-best lists,
force-score arbitrary hypotheses. Supports source-to-target/target-to-source
directions and a right-to-left variant trained on reversed output text.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .align import LexiconTable, ibm1_train, ibm2_train, load_lexicon, save_lexicon
from .corpus import Sentence, SentencePair
from .ngram_lm import BOS, EOS, NgramLm, lm_logprob, lm_train, load_lm, save_lm

LEX_FLOOR = 1e-9
#: Lexical candidates considered per source token. Fixed (not tied to the
#: beam width) so that widening the beam only ever grows the search space,
#: keeping the decoder's best score monotone in the beam.
MAX_FANOUT = 10


class Direction(str, Enum):
    S2T = "s2t"
    T2S = "t2s"


class Orientation(str, Enum):
    L2R = "l2r"
    R2L = "r2l"


@dataclass(frozen=True)
class TranslatorSpec:
    direction: Direction
    orientation: Orientation
    lexicon: LexiconTable
    lm: NgramLm
    weights: tuple[float, float, float] = (1.0, 0.5, 0.1)  # (lexicon, LM, length)
    beam: int = 10
    model_id: str = ""
    input_lang: str = "und"
    output_lang: str = "und"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.beam < 1:
            raise ValueError("beam width must be >= 1")
        if not all(math.isfinite(w) for w in self.weights):
            raise ValueError("non-finite decoder weights")


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[str, ...]
    logscore: float
    feature_breakdown: dict[str, float]  # raw "lex", "lm", "len" values


@dataclass(frozen=True)
class NBestList:
    source: Sentence
    hyps: tuple[Hypothesis, ...]
    model_id: str

    def __post_init__(self):
        scores = [h.logscore for h in self.hyps]
        for a, b in zip(scores, scores[1:]):
            if b > a + 1e-12:
                raise ValueError("n-best scores must be non-increasing")
        seqs = [h.tokens for h in self.hyps]
        if len(set(seqs)) != len(seqs):
            raise ValueError("n-best hypotheses must be distinct")


def toy_train(
    pairs: Iterable[SentencePair],
    direction: Direction,
    orientation: Orientation = Orientation.L2R,
    *,
    ibm1_iters: int = 5,
    ibm2_iters: int = 5,
    lm_order: int = 3,
    lm_k: float = 0.1,
    weights: tuple[float, float, float] = (1.0, 0.5, 0.1),
    beam: int = 10,
    model_id: str = "",
    pair_weights: Sequence[int] | None = None,
) -> TranslatorSpec:
    """Train lexicon (IBM 1 then 2) in the requested direction and an LM on
    the output side (reversed for R2L). T2S simply swaps the pair sides."""
    plist = list(pairs)
    if not plist:
        raise ValueError("empty training corpus")

    def sides(p: SentencePair) -> tuple[Sentence, Sentence]:
        return (p.src, p.tgt) if direction == Direction.S2T else (p.tgt, p.src)

    in_lang = sides(plist[0])[0].lang
    out_lang = sides(plist[0])[1].lang
    oriented: list[SentencePair] = []
    out_sents: list[Sentence] = []
    for p in plist:
        inp, out = sides(p)
        if orientation == Orientation.R2L:
            out = Sentence.from_tokens(tuple(reversed(out.tokens)), lang=out.lang)
        oriented.append(SentencePair(inp, out, p.origin))
        out_sents.append(out)

    if pair_weights is not None:
        expanded = []
        for p, w in zip(oriented, pair_weights):
            expanded.extend([p] * int(w))
        oriented = expanded
    lex1 = ibm1_train(oriented, ibm1_iters)
    lex, _dist = ibm2_train(oriented, ibm2_iters, lex1)
    lm = lm_train(
        out_sents,
        order=lm_order,
        k=lm_k,
        weights=list(pair_weights) if pair_weights is not None else None,
    )
    return TranslatorSpec(
        direction=direction,
        orientation=orientation,
        lexicon=lex,
        lm=lm,
        weights=weights,
        beam=beam,
        model_id=model_id,
        input_lang=in_lang,
        output_lang=out_lang,
    )


def candidates(spec: TranslatorSpec, token: str) -> tuple[tuple[str, float], ...]:
    """Best lexical candidates for a source token, capped at MAX_FANOUT.

    Unknown source tokens pass through verbatim with floor probability.
    """
    cached = spec._cache.get(token)
    if cached is not None:
        return cached
    index = spec._cache.get("\x00index")
    if index is None:
        index = spec.lexicon.source_index()
        spec._cache["\x00index"] = index
    cands = index.get(token)
    if not cands:
        result: tuple[tuple[str, float], ...] = ((token, LEX_FLOOR),)
    else:
        result = tuple(cands[:MAX_FANOUT])
    spec._cache[token] = result
    return result


def _sentence_lex_logs(spec: TranslatorSpec, src: tuple[str, ...], cand_lists) -> dict[str, float]:
    """log max_f t(e|f) over this sentence's source tokens, floored at 1e-9.

    This position-independent lexical attachment is the score the decoder and
    score_hypothesis share, which keeps forced scores of decoder output equal
    to the decoder's own hypothesis scores.
    """
    t = spec.lexicon.t
    out: dict[str, float] = {}
    for cands in cand_lists:
        for e, _p in cands:
            if e not in out:
                best = 0.0
                for f in src:
                    p = t.get((e, f), 0.0)
                    if p > best:
                        best = p
                out[e] = math.log(best) if best > LEX_FLOOR else math.log(LEX_FLOOR)
    return out


def _empty_hypothesis(spec: TranslatorSpec) -> Hypothesis:
    lm_score = lm_logprob(spec.lm, Sentence.from_tokens((), lang=spec.output_lang))
    lam_lex, lam_lm, lam_len = spec.weights
    return Hypothesis((), lam_lm * lm_score, {"lex": 0.0, "lm": lm_score, "len": 0.0})


def _nested_picks(ext_lists: list[list], width: int) -> list:
    """Pick up to width extensions where pick t may only draw from parents of
    rank <= t. The resulting frontiers are prefix-nested across widths, which
    makes the decoder's best score non-decreasing in the beam width."""
    ptrs = [0] * len(ext_lists)
    out = []
    for t in range(1, width + 1):
        limit = min(t, len(ext_lists))
        best_i = -1
        best_key = None
        for i in range(limit):
            p = ptrs[i]
            if p < len(ext_lists[i]):
                cand = ext_lists[i][p]
                key = (-cand[0], cand[1])
                if best_key is None or key < best_key:
                    best_key = key
                    best_i = i
        if best_i < 0:
            break
        out.append(ext_lists[best_i][ptrs[best_i]])
        ptrs[best_i] += 1
    return out


def decode(spec: TranslatorSpec, s: Sentence, n: int = 1) -> NBestList:
    """Monotone word-by-word beam search returning the top-n distinct
    completed hypotheses, scores non-increasing.

    The frontier is built with rank-nested picks (see _nested_picks) and the
    final source position is expanded without width pruning, with the
    end-symbol term included, so on small instances (candidate fan-out and
    length small enough that earlier steps never prune) the top-1 equals the
    exhaustive argmax of score_hypothesis over the candidate product space.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > spec.beam:
        raise ValueError(f"n={n} exceeds beam width {spec.beam}")
    src = s.tokens
    if not src:
        return NBestList(s, (_empty_hypothesis(spec),), spec.model_id)

    lam_lex, lam_lm, lam_len = spec.weights
    lm = spec.lm
    ctx = lm.order - 1
    cond_prob = lm.cond_prob
    map_token = lm.map_token
    log = math.log

    cand_lists = [candidates(spec, f) for f in src]
    lex_log = _sentence_lex_logs(spec, src, cand_lists)

    # frontier items: (partial_score, tokens, lex_sum, lm_sum, lm_history)
    frontier: list[tuple[float, tuple[str, ...], float, float, tuple[str, ...]]] = [
        (0.0, (), 0.0, 0.0, (BOS,) * ctx)
    ]
    last_pos = len(cand_lists) - 1
    finals: list[tuple[float, tuple[str, ...], float, float]] = []
    for pos, cands in enumerate(cand_lists):
        len_term = lam_len * (pos + 1)
        is_last = pos == last_pos
        ext_lists = []
        for _score, toks, lex_sum, lm_sum, hist in frontier:
            exts = []
            for e, _p in cands:
                we = map_token(e)
                new_lex = lex_sum + lex_log[e]
                new_lm = lm_sum + log(cond_prob(hist, we))
                new_hist = (hist + (we,))[-ctx:] if ctx else ()
                if is_last:
                    lm_total = new_lm + log(cond_prob(new_hist, EOS))
                    score = lam_lex * new_lex + lam_lm * lm_total + len_term
                    exts.append((score, toks + (e,), new_lex, lm_total, new_hist))
                else:
                    score = lam_lex * new_lex + lam_lm * new_lm + len_term
                    exts.append((score, toks + (e,), new_lex, new_lm, new_hist))
            exts.sort(key=lambda x: (-x[0], x[1]))
            ext_lists.append(exts)
        if is_last:
            finals = [ext for exts in ext_lists for ext in exts]
        else:
            frontier = _nested_picks(ext_lists, spec.beam)

    finals.sort(key=lambda item: (-item[0], item[1]))
    hyps = tuple(
        Hypothesis(toks, score, {"lex": lex_sum, "lm": lm_total, "len": float(len(toks))})
        for score, toks, lex_sum, lm_total, _hist in finals[:n]
    )
    return NBestList(s, hyps, spec.model_id)


def score_hypothesis(spec: TranslatorSpec, src: Sentence, hyp_tokens: Sequence[str]) -> float:
    """Forced score of an arbitrary hypothesis: each target token scored
    against its best source token, plus LM and length terms. Deterministic and
    consistent with decode's own hypothesis scores."""
    lam_lex, lam_lm, lam_len = spec.weights
    t = spec.lexicon.t
    src_toks = src.tokens
    lex_sum = 0.0
    for e in hyp_tokens:
        best = 0.0
        for f in src_toks:
            p = t.get((e, f), 0.0)
            if p > best:
                best = p
        lex_sum += math.log(best) if best > LEX_FLOOR else math.log(LEX_FLOOR)
    lm_sum = lm_logprob(spec.lm, Sentence.from_tokens(hyp_tokens, lang=spec.output_lang))
    return lam_lex * lex_sum + lam_lm * lm_sum + lam_len * len(hyp_tokens)


def decode_corpus(spec: TranslatorSpec, sentences: Sequence[Sentence], n: int = 1) -> list[NBestList]:
    return [decode(spec, s, n) for s in sentences]


# ---------------------------------------------------------------------------
# N-best interchange and model persistence
# ---------------------------------------------------------------------------


def write_nbest_jsonl(path: str | Path, lists: Sequence[NBestList]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for sent_id, nbest in enumerate(lists):
            for rank, hyp in enumerate(nbest.hyps):
                rec = {
                    "sent_id": sent_id,
                    "model_id": nbest.model_id,
                    "rank": rank,
                    "tokens": list(hyp.tokens),
                    "logscore": hyp.logscore,
                    "features": {
                        "l2r": hyp.logscore,
                        "lm": hyp.feature_breakdown["lm"],
                        "lex": hyp.feature_breakdown["lex"],
                        "len": hyp.feature_breakdown["len"],
                    },
                }
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_nbest_jsonl(path: str | Path, sources: Sequence[Sentence]) -> list[NBestList]:
    by_sent: dict[int, list[dict]] = {}
    model_id = ""
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            model_id = rec["model_id"]
            by_sent.setdefault(rec["sent_id"], []).append(rec)
    lists = []
    for sent_id in sorted(by_sent):
        recs = sorted(by_sent[sent_id], key=lambda r: r["rank"])
        hyps = tuple(
            Hypothesis(
                tuple(r["tokens"]),
                r["logscore"],
                {"lex": r["features"]["lex"], "lm": r["features"]["lm"], "len": r["features"]["len"]},
            )
            for r in recs
        )
        lists.append(NBestList(sources[sent_id], hyps, model_id))
    return lists


def save_translator(spec: TranslatorSpec, model_dir: str | Path) -> None:
    model_dir = Path(model_dir)
    model_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "direction": spec.direction.value,
        "orientation": spec.orientation.value,
        "weights": list(spec.weights),
        "beam": spec.beam,
        "model_id": spec.model_id,
        "input_lang": spec.input_lang,
        "output_lang": spec.output_lang,
    }
    (model_dir / "meta.json").write_text(
        json.dumps(meta, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    save_lexicon(spec.lexicon, model_dir / "lexicon.txt")
    save_lm(spec.lm, model_dir / "lm.txt")


def load_translator(model_dir: str | Path) -> TranslatorSpec:
    model_dir = Path(model_dir)
    meta = json.loads((model_dir / "meta.json").read_text(encoding="utf-8"))
    return TranslatorSpec(
        direction=Direction(meta["direction"]),
        orientation=Orientation(meta["orientation"]),
        lexicon=load_lexicon(model_dir / "lexicon.txt"),
        lm=load_lm(model_dir / "lm.txt"),
        weights=tuple(meta["weights"]),
        beam=meta["beam"],
        model_id=meta["model_id"],
        input_lang=meta["input_lang"],
        output_lang=meta["output_lang"],
    )
