import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtkit.corpus import Sentence
from mtkit.ngram_lm import (
    EOS,
    UNK,
    lm_logprob,
    lm_perplexity,
    lm_train,
    load_lm,
    per_token_logprob,
    save_lm,
)


def S(text: str) -> Sentence:
    return Sentence.from_tokens(text.split())


class TestTrain:
    def test_mle_limit_unigram_content_ratio(self):
        m = lm_train([S("a a a b")], order=1, k=1e-9)
        pa, pb = m.cond_prob((), "a"), m.cond_prob((), "b")
        assert pa / (pa + pb) == pytest.approx(0.75, abs=1e-6)

    def test_bigram_mle_limit(self):
        m = lm_train([S("a b"), S("a b")], order=2, k=1e-9, lambdas=[0.0, 1.0])
        assert m.cond_prob(("a",), "b") == pytest.approx(1.0, abs=1e-6)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            lm_train([], order=2)

    def test_invalid_lambdas_rejected(self):
        with pytest.raises(ValueError, match="lambdas"):
            lm_train([S("a")], order=2, lambdas=[0.5, 0.6])
        with pytest.raises(ValueError, match="lambdas"):
            lm_train([S("a")], order=2, lambdas=[1.0])

    def test_weighted_training_equals_duplicated_corpus(self):
        plain = lm_train([S("a b"), S("b c")] * 3 + [S("c d")], order=2)
        weighted = lm_train([S("a b"), S("b c"), S("c d")], order=2, weights=[3, 3, 1])
        probe = [((), "a"), (("a",), "b"), (("c",), "d"), (("b",), "c")]
        for h, w in probe:
            assert weighted.cond_prob(h, w) == pytest.approx(plain.cond_prob(h, w))


class TestLogprob:
    def test_hand_computed_smoothed_unigram_sum(self):
        # corpus "a a a b": events a:3, b:1, EOS:1 of 5 total; event space
        # {a, b, UNK, EOS} has size 4; add-k with k = 0.1
        k = 0.1
        m = lm_train([S("a a a b")], order=1, k=k)
        v = 4
        p_a = (3 + k) / (5 + k * v)
        p_b = (1 + k) / (5 + k * v)
        p_eos = (1 + k) / (5 + k * v)
        expected = 3 * math.log(p_a) + math.log(p_b) + math.log(p_eos)
        assert lm_logprob(m, S("a a a b")) == pytest.approx(expected, abs=1e-12)

    def test_always_nonpositive(self):
        m = lm_train([S("a b c"), S("c b a")], order=3)
        for text in ["a b c", "z z z", "a", ""]:
            assert lm_logprob(m, S(text)) <= 0.0

    def test_fluent_scores_above_disfluent(self):
        fluent = [S("the cat sat on the mat"), S("the dog sat on the rug"),
                  S("a cat sat on a rug"), S("the dog ran on the mat")] * 5
        m = lm_train(fluent, order=2)
        good = per_token_logprob(m, S("the cat sat on the rug"))
        bad = per_token_logprob(m, S("rug the on sat cat the"))
        assert good > bad

    def test_unseen_tokens_fall_back_to_unk(self):
        m = lm_train([S("a b")], order=1)
        assert m.map_token("zz") == UNK
        assert math.isfinite(lm_logprob(m, S("zz zz")))


class TestPerplexity:
    def test_uniform_model_perplexity_equals_event_count(self):
        corpus = [S("a b c"), S("d e")]
        m = lm_train(corpus, order=1, k=1e12)
        assert lm_perplexity(m, corpus) == pytest.approx(m.event_count, rel=1e-6)

    def test_at_least_one(self):
        corpus = [S("a a a a")]
        m = lm_train(corpus, order=2)
        assert lm_perplexity(m, corpus) >= 1.0

    def test_training_set_beats_disjoint_heldout(self):
        train = [S("a b c d"), S("b c d a")]
        held_out = [S("p q r s"), S("q r s p")]
        m = lm_train(train, order=2)
        assert lm_perplexity(m, train) <= lm_perplexity(m, held_out)

    def test_empty_corpus_rejected(self):
        m = lm_train([S("a")], order=1)
        with pytest.raises(ValueError, match="empty"):
            lm_perplexity(m, [])


_corpus_strategy = st.lists(
    st.lists(st.sampled_from("abcdefg"), min_size=0, max_size=6).map(lambda toks: Sentence.from_tokens(toks)),
    min_size=1,
    max_size=8,
)


class TestProperties:
    @given(_corpus_strategy, st.integers(min_value=1, max_value=3), st.floats(min_value=0.01, max_value=5.0))
    @settings(max_examples=100, deadline=None)
    def test_conditionals_normalize(self, corpus, order, k):
        m = lm_train(corpus, order=order, k=k)
        events = sorted(m.vocab) + [UNK, EOS]
        rng = random.Random(0)
        pool = sorted(m.vocab) + [UNK]
        for _ in range(3):
            history = tuple(rng.choice(pool) for _ in range(order - 1))
            total = sum(m.cond_prob(history, e) for e in events)
            assert abs(total - 1.0) <= 1e-9

    @given(_corpus_strategy, st.integers(min_value=1, max_value=3))
    @settings(max_examples=60, deadline=None)
    def test_increasing_k_moves_toward_uniform(self, corpus, order):
        m1 = lm_train(corpus, order=order, k=0.1)
        m2 = lm_train(corpus, order=order, k=1.0)
        events = sorted(m1.vocab) + [UNK, EOS]
        uniform = 1.0 / len(events)
        rng = random.Random(1)
        pool = sorted(m1.vocab) + [UNK]
        for _ in range(3):
            history = tuple(rng.choice(pool) for _ in range(order - 1))
            d1 = max(abs(m1.cond_prob(history, e) - uniform) for e in events)
            d2 = max(abs(m2.cond_prob(history, e) - uniform) for e in events)
            assert d2 <= d1 + 1e-12

    @given(_corpus_strategy)
    @settings(max_examples=60, deadline=None)
    def test_unigram_logprob_additive_up_to_end_symbol(self, corpus):
        # lm_logprob includes one end-symbol term per call, so concatenation
        # satisfies lp(s1+s2) == lp(s1) + lp(s2) - lp(empty)
        m = lm_train(corpus, order=1)
        s1 = corpus[0]
        s2 = corpus[-1]
        joined = Sentence.from_tokens(s1.tokens + s2.tokens)
        lp_empty = lm_logprob(m, Sentence.from_tokens(()))
        lhs = lm_logprob(m, joined)
        rhs = lm_logprob(m, s1) + lm_logprob(m, s2) - lp_empty
        assert lhs == pytest.approx(rhs, abs=1e-9)


class TestPersistence:
    def test_save_load_preserves_scores(self, tmp_path):
        m = lm_train([S("a b c"), S("b c d"), S("a c")], order=3, k=0.2)
        save_lm(m, tmp_path / "lm.txt")
        loaded = load_lm(tmp_path / "lm.txt")
        for text in ["a b c", "d c b", "zz a"]:
            assert lm_logprob(loaded, S(text)) == pytest.approx(lm_logprob(m, S(text)), abs=1e-12)
