from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtkit.corpus import Sentence
from mtkit.subword import BpeModel, bpe_apply, bpe_learn, bpe_reverse


def S(text: str) -> Sentence:
    return Sentence.from_tokens(text.split())


def brute_force_best_pair(sentences):
    """Independent oracle: count adjacent symbol pairs over whole words."""
    word_freq = Counter()
    for s in sentences:
        word_freq.update(s.tokens)
    pair_freq = Counter()
    for word, freq in word_freq.items():
        for a, b in zip(word, word[1:]):
            pair_freq[(a, b)] += freq
    eligible = [(c, p) for p, c in pair_freq.items() if c >= 2]
    if not eligible:
        return None
    best_count = max(c for c, _ in eligible)
    return min(p for c, p in eligible if c == best_count)


class TestLearn:
    def test_first_merge_matches_brute_force(self):
        corpus = [S("low low lower")]
        model = bpe_learn(corpus, 1)
        assert model.merges == (brute_force_best_pair(corpus),)
        assert model.merges == (("l", "o"),)

    def test_zero_operations(self):
        assert bpe_learn([S("abc")], 0).merges == ()

    def test_no_pair_reaches_frequency_two(self):
        model = bpe_learn([S("ab cd ef")], 10)
        assert model.merges == ()

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            bpe_learn([], 5)

    def test_negative_operations_rejected(self):
        with pytest.raises(ValueError):
            bpe_learn([S("aa")], -1)

    def test_merge_list_prefix_property(self):
        corpus = [S("low lower lowest low slow")] * 3
        small = bpe_learn(corpus, 3).merges
        big = bpe_learn(corpus, 8).merges
        assert big[: len(small)] == small

    def test_deterministic(self):
        corpus = [S("banana bandana ananas")] * 2
        assert bpe_learn(corpus, 6).merges == bpe_learn(corpus, 6).merges

    def test_save_load(self, tmp_path):
        model = bpe_learn([S("low lower low")], 4)
        model.save(tmp_path / "m.bpe")
        assert BpeModel.load(tmp_path / "m.bpe").merges == model.merges


class TestApply:
    def test_character_fallback_with_markers(self):
        model = bpe_learn([S("xyz")], 0)
        assert bpe_apply(model, S("cat")).tokens == ("c@@", "a@@", "t")

    def test_fully_merged_word_is_single_unmarked_piece(self):
        model = bpe_learn([S("cat cat")], 10)
        assert bpe_apply(model, S("cat")).tokens == ("cat",)

    def test_digit_free_merge_table_splits_year_range(self):
        model = bpe_learn([S("alpha beta alpha beta")], 20)
        out = bpe_apply(model, S("2006-07"))
        assert out.tokens == ("2@@", "0@@", "0@@", "6@@", "-@@", "0@@", "7")

    def test_concatenation_restores_word(self):
        model = bpe_learn([S("low lower slow")] * 2, 5)
        out = bpe_apply(model, S("lowest"))
        assert "".join(p[:-2] if p.endswith("@@") else p for p in out.tokens) == "lowest"


class TestReverse:
    def test_marker_join(self):
        assert bpe_reverse(S("2006 -@@ 07")).tokens == ("2006", "-07")

    def test_character_pieces(self):
        assert bpe_reverse(S("c@@ a@@ t")).tokens == ("cat",)

    def test_marker_free_identity(self):
        assert bpe_reverse(S("plain words here")).tokens == ("plain", "words", "here")

    def test_dangling_final_marker_joins_with_nothing(self, caplog):
        import logging

        with caplog.at_level(logging.WARNING, logger="mtkit.subword"):
            out = bpe_reverse(S("ca@@ t@@"))
        assert out.tokens == ("cat",)
        assert any("dangling" in r.message for r in caplog.records)


_words = st.lists(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789-", min_size=1, max_size=10),
    min_size=1,
    max_size=8,
)


class TestProperties:
    @given(_words, _words, st.integers(min_value=0, max_value=30))
    @settings(max_examples=150, deadline=None)
    def test_roundtrip(self, train_words, words, ops):
        model = bpe_learn([Sentence.from_tokens(train_words)], ops)
        sent = Sentence.from_tokens(words)
        assert bpe_reverse(bpe_apply(model, sent)).tokens == sent.tokens

    @given(_words, st.integers(min_value=0, max_value=12), st.integers(min_value=0, max_value=12))
    @settings(max_examples=100, deadline=None)
    def test_monotone_vocabulary(self, train_words, k1, k2):
        corpus = [Sentence.from_tokens(train_words)]
        lo, hi = sorted((k1, k2))
        small = bpe_learn(corpus, lo).merges
        big = bpe_learn(corpus, hi).merges
        assert big[: len(small)] == small
