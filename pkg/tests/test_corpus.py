import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtkit.corpus import (
    Origin,
    Sentence,
    SentencePair,
    apply_truecase,
    dedup,
    detokenize,
    detruecase,
    read_pairs_jsonl,
    tokenize,
    train_truecaser,
    write_pairs_jsonl,
    TruecaseModel,
)


class TestTokenize:
    def test_punctuation_detached(self):
        assert tokenize("Hello, world!").tokens == ("Hello", ",", "world", "!")

    def test_hyphenated_year_range_stays_whole(self):
        assert tokenize("2006-07").tokens == ("2006-07",)

    def test_whitespace_collapse(self):
        assert tokenize("a  b").tokens == ("a", "b")

    def test_empty_and_whitespace_only(self):
        assert tokenize("").tokens == ()
        assert tokenize(" \t ").tokens == ()

    def test_internal_apostrophe_kept(self):
        assert tokenize("don't stop").tokens == ("don't", "stop")

    def test_multiple_edge_punctuation(self):
        assert tokenize("(word)...").tokens == ("(", "word", ")", ".", ".", ".")

    def test_idempotent_on_rejoined_output(self):
        for text in ["Hello, world!", "(a) b-c... 2006-07", "¡Hola! ¿qué?", "x---", "'q'"]:
            toks = tokenize(text).tokens
            assert tokenize(" ".join(toks)).tokens == toks


class TestDetokenize:
    def test_attaches_closers_left_and_openers_right(self):
        assert detokenize(["Hello", ",", "world", "!"]) == "Hello, world!"
        assert detokenize(["(", "word", ")"]) == "(word)"

    def test_plain_tokens_space_joined(self):
        assert detokenize(["2006", "-07"]) == "2006 -07"

    def test_roundtrip_examples(self):
        for text in ["Hello, world!", "One (two) three.", "Stop!", "a b c"]:
            assert detokenize(tokenize(text).tokens) == text


# words made of letters/digits with optional unambiguous attached punctuation
_word = st.text(alphabet="abcdefghijklmnopqrstuvwxyzãéß0123456789", min_size=1, max_size=8)
_opener = st.sampled_from(["", "(", "[", "{", "¿", "¡"])
_closer = st.sampled_from(["", ")", "]", "}", ".", ",", "!", "?", ";", ":", "%"])


@st.composite
def natural_sentences(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    chunks = []
    for _ in range(n):
        chunks.append(draw(_opener) + draw(_word) + draw(_closer))
    return " ".join(chunks)


class TestRoundtripProperties:
    @given(natural_sentences())
    @settings(max_examples=300)
    def test_detokenize_inverts_tokenize_on_natural_text(self, text):
        assert detokenize(tokenize(text).tokens) == text

    @given(st.text(alphabet=st.characters(max_codepoint=0x2FFF, categories=("L", "N", "P", "Zs")), max_size=40))
    @settings(max_examples=300)
    def test_tokens_preserve_all_non_whitespace(self, text):
        import unicodedata

        sent = tokenize(text)
        detok = detokenize(sent.tokens)
        strip = lambda s: "".join(s.split())
        assert strip(detok) == strip(unicodedata.normalize("NFC", text))

    @given(natural_sentences())
    @settings(max_examples=200)
    def test_tokenizer_idempotent(self, text):
        toks = tokenize(text).tokens
        assert tokenize(" ".join(toks)).tokens == toks


class TestTruecase:
    def test_internal_lowercase_evidence_lowers_initial(self, sent):
        model = train_truecaser([sent("the cat"), sent("The dog sat on the mat")])
        out = apply_truecase(model, sent("The cat"))
        assert out.tokens == ("the", "cat")

    def test_unseen_token_unchanged(self, sent):
        model = train_truecaser([sent("the cat")])
        assert apply_truecase(model, sent("Zebra runs")).tokens == ("Zebra", "runs")

    def test_dominant_uppercase_kept(self, sent):
        model = train_truecaser([sent("NASA NASA")])
        assert apply_truecase(model, sent("NASA launched")).tokens == ("NASA", "launched")

    def test_tie_resolves_to_lowercase(self, sent):
        model = train_truecaser([sent("x Word x word")])
        assert apply_truecase(model, sent("Word up")).tokens == ("word", "up")

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty training corpus"):
            train_truecaser([])

    def test_truecase_then_detruecase_restores_initial_casing(self, sent):
        model = train_truecaser([sent("the cat"), sent("The dog sat on the mat"), sent("we like NASA")])
        for original in [sent("The cat sat"), sent("NASA launched it")]:
            cased = apply_truecase(model, original)
            assert detruecase(model, cased).tokens == original.tokens

    def test_detruecase_default_capitalizes(self, sent):
        assert detruecase(None, sent("plain text")).tokens == ("Plain", "text")
        assert detruecase(TruecaseModel(), sent("plain text")).tokens == ("Plain", "text")

    def test_save_load_roundtrip(self, sent, tmp_path):
        model = train_truecaser([sent("the cat"), sent("we like NASA")])
        model.save(tmp_path / "tc.tsv")
        loaded = TruecaseModel.load(tmp_path / "tc.tsv")
        assert loaded.counts == model.counts


class TestDedup:
    def test_exact_duplicates_dropped(self, pair):
        pairs = [pair("a", "b"), pair("a", "b")]
        assert list(dedup(pairs)) == [pairs[0]]

    def test_different_target_not_duplicate(self, pair):
        pairs = [pair("a", "b"), pair("a", "c")]
        assert list(dedup(pairs)) == pairs

    def test_case_sensitive(self, pair):
        pairs = [pair("a", "b"), pair("A", "b")]
        assert list(dedup(pairs)) == pairs

    def test_idempotent(self, pair):
        pairs = [pair("a", "b"), pair("a", "b"), pair("c", "d"), pair("a", "b")]
        once = list(dedup(pairs))
        assert list(dedup(once)) == once


class TestTypes:
    def test_pair_requires_distinct_languages(self, sent):
        with pytest.raises(ValueError, match="language"):
            SentencePair(sent("a", "en"), sent("b", "en"))

    def test_unknown_score_keys_rejected(self, sent):
        with pytest.raises(ValueError, match="unregistered"):
            SentencePair(sent("a", "fi"), sent("b", "en"), scores={"bogus": 1.0})

    def test_scores_merge(self, pair):
        p = pair("a", "b").with_scores(lm=-1.0)
        q = p.with_scores(align=-2.0)
        assert q.scores == {"lm": -1.0, "align": -2.0}

    def test_jsonl_roundtrip(self, pair, tmp_path):
        pairs = [
            pair("a b", "c d").with_scores(lm=-0.5),
            SentencePair(
                Sentence.from_tokens(["x"], lang="fi"),
                Sentence.from_tokens(["y"], lang="en"),
                Origin.SYNTHETIC_BACK,
            ),
        ]
        path = tmp_path / "pairs.jsonl"
        write_pairs_jsonl(path, pairs)
        loaded = read_pairs_jsonl(path, "fi", "en")
        assert [p.src.tokens for p in loaded] == [p.src.tokens for p in pairs]
        assert loaded[0].scores == {"lm": -0.5}
        assert loaded[1].origin == Origin.SYNTHETIC_BACK
