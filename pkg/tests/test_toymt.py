import itertools
import random

import pytest

from mtkit.align import LexiconTable
from mtkit.corpus import Sentence, SentencePair
from mtkit.ngram_lm import lm_train
from mtkit.toymt import (
    Direction,
    Hypothesis,
    NBestList,
    Orientation,
    TranslatorSpec,
    candidates,
    decode,
    load_translator,
    read_nbest_jsonl,
    save_translator,
    score_hypothesis,
    toy_train,
    write_nbest_jsonl,
)


def S(text, lang="fi"):
    return Sentence.from_tokens(text.split() if isinstance(text, str) else text, lang=lang)


def P(src, tgt):
    return SentencePair(S(src, "fi"), S(tgt, "en"))


def identity_pairs():
    words = "alpha beta gamma delta epsilon zeta".split()
    return [P(w, w.upper()) for w in words] * 3


def cipher_pairs(n=80, vocab=10, seed=11):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        ids = [rng.randrange(vocab) for _ in range(rng.randint(2, 5))]
        out.append(P(" ".join(f"f{i}" for i in ids), " ".join(f"e{i}" for i in ids)))
    return out


def random_spec(rng: random.Random, fanout: int = 3) -> TranslatorSpec:
    """A spec with a random sparse lexicon (fan-out <= fanout) and a small LM."""
    src_vocab = [f"f{i}" for i in range(4)]
    tgt_vocab = [f"e{i}" for i in range(5)]
    t = {}
    for f in src_vocab:
        choices = rng.sample(tgt_vocab, rng.randint(1, fanout))
        probs = [rng.random() + 0.05 for _ in choices]
        z = sum(probs)
        for e, p in zip(choices, probs):
            t[(e, f)] = p / z
    lm_corpus = [
        Sentence.from_tokens(rng.choices(tgt_vocab, k=rng.randint(1, 5)), lang="en")
        for _ in range(8)
    ]
    lm = lm_train(lm_corpus, order=2, k=0.3)
    return TranslatorSpec(
        direction=Direction.S2T,
        orientation=Orientation.L2R,
        lexicon=LexiconTable(t),
        lm=lm,
        weights=(1.0, rng.choice([0.3, 0.5, 1.0]), rng.choice([0.0, 0.1])),
        beam=10,
        model_id="rand",
        input_lang="fi",
        output_lang="en",
    )


class TestTrain:
    def test_identity_lexicon_copies_input(self):
        spec = toy_train(identity_pairs(), Direction.S2T)
        out = decode(spec, S("alpha gamma zeta"), 1)
        assert out.hyps[0].tokens == ("ALPHA", "GAMMA", "ZETA")

    def test_t2s_equals_swapped_s2t(self):
        pairs = cipher_pairs()
        swapped = [SentencePair(p.tgt, p.src) for p in pairs]
        spec_t2s = toy_train(pairs, Direction.T2S)
        spec_s2t = toy_train(swapped, Direction.S2T)
        assert spec_t2s.lexicon.t == pytest.approx(spec_s2t.lexicon.t)
        assert spec_t2s.input_lang == "en" and spec_t2s.output_lang == "fi"

    def test_r2l_unreversed_tokens_match_l2r_on_cipher(self):
        pairs = cipher_pairs()
        l2r = toy_train(pairs, Direction.S2T, Orientation.L2R)
        r2l = toy_train(pairs, Direction.S2T, Orientation.R2L)
        src = pairs[0].src
        l2r_tokens = {h.tokens for h in decode(l2r, src, 1).hyps}
        r2l_tokens = {tuple(reversed(h.tokens)) for h in decode(r2l, src, 1).hyps}
        assert l2r_tokens == r2l_tokens

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            toy_train([], Direction.S2T)


class TestDecode:
    def test_beam_one_equals_greedy_argmax(self):
        # greedy per-token argmax: each position extends the single running
        # prefix with its best candidate; the final token's argmax includes
        # the end-symbol completion its choice determines
        rng = random.Random(0)
        for _ in range(20):
            spec = random_spec(rng)
            narrow = TranslatorSpec(
                spec.direction, spec.orientation, spec.lexicon, spec.lm,
                spec.weights, 1, "narrow", spec.input_lang, spec.output_lang,
            )
            src = Sentence.from_tokens([f"f{rng.randrange(4)}" for _ in range(rng.randint(1, 3))], lang="fi")
            prefix: list[str] = []
            for pos, tok in enumerate(src.tokens):
                last = pos == len(src.tokens) - 1
                best = None
                for e, _p in candidates(narrow, tok):
                    cand = prefix + [e]
                    if last:
                        score = score_hypothesis(narrow, src, cand)
                    else:
                        score = partial_score(narrow, src, cand)
                    key = (-score, tuple(cand))
                    if best is None or key < best[0]:
                        best = (key, cand)
                prefix = best[1]
            assert decode(narrow, src, 1).hyps[0].tokens == tuple(prefix)

    def test_exhaustive_oracle_small_instances(self):
        rng = random.Random(42)
        for _ in range(120):
            spec = random_spec(rng)
            length = rng.randint(1, 3)
            src = Sentence.from_tokens([f"f{rng.randrange(4)}" for _ in range(length)], lang="fi")
            top = decode(spec, src, 1).hyps[0]
            cands = [candidates(spec, tok) for tok in src.tokens]
            best = None
            for combo in itertools.product(*[[e for e, _p in c] for c in cands]):
                score = score_hypothesis(spec, src, combo)
                key = (-score, combo)
                if best is None or key < best[0]:
                    best = (key, combo, score)
            assert top.tokens == best[1]
            assert top.logscore == pytest.approx(best[2], abs=1e-12)

    def test_nbest_equals_full_enumeration_when_space_fits(self):
        rng = random.Random(7)
        spec = random_spec(rng, fanout=3)
        src = Sentence.from_tokens(["f0", "f1"], lang="fi")
        cands = [candidates(spec, tok) for tok in src.tokens]
        scored = []
        for combo in itertools.product(*[[e for e, _p in c] for c in cands]):
            scored.append((score_hypothesis(spec, src, combo), combo))
        scored.sort(key=lambda x: (-x[0], x[1]))
        n = min(10, len(scored))
        got = decode(spec, src, n)
        assert [h.tokens for h in got.hyps] == [c for _s, c in scored[:n]]

    def test_scores_non_increasing(self):
        spec = toy_train(cipher_pairs(), Direction.S2T)
        nb = decode(spec, S("f1 f2 f3"), 5)
        scores = [h.logscore for h in nb.hyps]
        assert scores == sorted(scores, reverse=True)

    def test_beam_width_monotonicity(self):
        rng = random.Random(3)
        for _ in range(25):
            spec = random_spec(rng)
            src = Sentence.from_tokens([f"f{rng.randrange(4)}" for _ in range(rng.randint(1, 4))], lang="fi")
            best = []
            for beam in (1, 2, 3, 5):
                variant = TranslatorSpec(
                    spec.direction, spec.orientation, spec.lexicon, spec.lm,
                    spec.weights, beam, "b", spec.input_lang, spec.output_lang,
                )
                best.append(decode(variant, src, 1).hyps[0].logscore)
            assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(best, best[1:]))

    def test_empty_source_yields_single_empty_hypothesis(self):
        spec = toy_train(cipher_pairs(), Direction.S2T)
        nb = decode(spec, S(""), 1)
        assert len(nb.hyps) == 1
        hyp = nb.hyps[0]
        assert hyp.tokens == ()
        lam_lex, lam_lm, lam_len = spec.weights
        assert hyp.logscore == pytest.approx(lam_lm * hyp.feature_breakdown["lm"])

    def test_unknown_source_tokens_pass_through(self):
        spec = toy_train(cipher_pairs(), Direction.S2T)
        nb = decode(spec, S("zz f1"), 1)
        assert nb.hyps[0].tokens[0] == "zz"

    def test_n_must_fit_beam(self):
        spec = toy_train(cipher_pairs(), Direction.S2T)
        with pytest.raises(ValueError, match="beam"):
            decode(spec, S("f1"), spec.beam + 1)
        with pytest.raises(ValueError):
            decode(spec, S("f1"), 0)


def partial_score(spec, src, tokens):
    """Prefix score without the end-symbol term, mirroring the decoder's
    mid-search ranking."""
    import math

    from mtkit.ngram_lm import BOS

    lam_lex, lam_lm, lam_len = spec.weights
    t = spec.lexicon.t
    lex_sum = 0.0
    for e in tokens:
        best = max((t.get((e, f), 0.0) for f in src.tokens), default=0.0)
        lex_sum += math.log(best) if best > 1e-9 else math.log(1e-9)
    lm = spec.lm
    ctx = lm.order - 1
    seq = (BOS,) * ctx + tuple(lm.map_token(tok) for tok in tokens)
    lm_sum = 0.0
    for pos in range(ctx, len(seq)):
        lm_sum += math.log(lm.cond_prob(seq[pos - ctx : pos] if ctx else (), seq[pos]))
    return lam_lex * lex_sum + lam_lm * lm_sum + lam_len * len(tokens)


class TestScoreHypothesis:
    def test_consistent_with_decode(self):
        spec = toy_train(cipher_pairs(), Direction.S2T)
        for text in ["f1 f2", "f3", "f0 f0 f4"]:
            src = S(text)
            hyp = decode(spec, src, 1).hyps[0]
            assert score_hypothesis(spec, src, hyp.tokens) == hyp.logscore

    def test_permutation_changes_only_lm_term(self):
        spec = toy_train(cipher_pairs(), Direction.S2T)
        src = S("f1 f2 f3")
        hyp = decode(spec, src, 1).hyps[0].tokens
        permuted = (hyp[2], hyp[0], hyp[1])
        lam_lex, lam_lm, lam_len = spec.weights
        from mtkit.ngram_lm import lm_logprob

        def lex_part(tokens):
            lm_term = lm_logprob(spec.lm, Sentence.from_tokens(tokens, lang="en"))
            return score_hypothesis(spec, src, tokens) - lam_lm * lm_term - lam_len * len(tokens)

        assert lex_part(hyp) == pytest.approx(lex_part(permuted), abs=1e-12)

    def test_empty_hypothesis_is_lm_end_only(self):
        spec = toy_train(cipher_pairs(), Direction.S2T)
        from mtkit.ngram_lm import lm_logprob

        expected = spec.weights[1] * lm_logprob(spec.lm, Sentence.from_tokens((), lang="en"))
        assert score_hypothesis(spec, S("f1 f2"), ()) == pytest.approx(expected)


class TestNBestList:
    def test_rejects_increasing_scores(self):
        hyps = (
            Hypothesis(("a",), -2.0, {"lex": 0, "lm": 0, "len": 1}),
            Hypothesis(("b",), -1.0, {"lex": 0, "lm": 0, "len": 1}),
        )
        with pytest.raises(ValueError, match="non-increasing"):
            NBestList(S("x"), hyps, "m")

    def test_rejects_duplicate_hypotheses(self):
        hyps = (
            Hypothesis(("a",), -1.0, {"lex": 0, "lm": 0, "len": 1}),
            Hypothesis(("a",), -2.0, {"lex": 0, "lm": 0, "len": 1}),
        )
        with pytest.raises(ValueError, match="distinct"):
            NBestList(S("x"), hyps, "m")

    def test_jsonl_roundtrip(self, tmp_path):
        spec = toy_train(cipher_pairs(), Direction.S2T)
        sources = [S("f1 f2"), S("f3 f0")]
        lists = [decode(spec, s, 3) for s in sources]
        path = tmp_path / "nbest.jsonl"
        write_nbest_jsonl(path, lists)
        loaded = read_nbest_jsonl(path, sources)
        for orig, back in zip(lists, loaded):
            assert [h.tokens for h in back.hyps] == [h.tokens for h in orig.hyps]
            assert [h.logscore for h in back.hyps] == pytest.approx([h.logscore for h in orig.hyps])
            assert back.model_id == orig.model_id


class TestPersistence:
    def test_save_load_translator_decodes_identically(self, tmp_path):
        spec = toy_train(cipher_pairs(), Direction.S2T, model_id="m0")
        save_translator(spec, tmp_path / "model")
        loaded = load_translator(tmp_path / "model")
        src = S("f1 f4 f2")
        a = decode(spec, src, 3)
        b = decode(loaded, src, 3)
        assert [h.tokens for h in a.hyps] == [h.tokens for h in b.hyps]
        assert [h.logscore for h in a.hyps] == pytest.approx([h.logscore for h in b.hyps], abs=1e-12)
