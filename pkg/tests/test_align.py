import random

import pytest

from conftest import random_token_corpus
from mtkit.align import (
    DistortionTable,
    align_score,
    ibm1_train,
    ibm2_train,
    load_distortion,
    load_lexicon,
    save_distortion,
    save_lexicon,
    viterbi_align,
)
from mtkit.corpus import Sentence, SentencePair


def P(src: str, tgt: str) -> SentencePair:
    return SentencePair(Sentence.from_tokens(src.split(), lang="fi"), Sentence.from_tokens(tgt.split(), lang="en"))


def cipher_pairs(n_sentences=60, vocab=12, seed=3):
    """Order-preserving invertible token cipher: f{i} <-> e{i}."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(n_sentences):
        length = rng.randint(2, 5)
        ids = [rng.randrange(vocab) for _ in range(length)]
        pairs.append(P(" ".join(f"f{i}" for i in ids), " ".join(f"e{i}" for i in ids)))
    return pairs


class TestIbm1:
    def test_single_cooccurrence_converges_to_one(self):
        lex = ibm1_train([P("a", "b")] * 3, 8)
        assert lex.prob("b", "a") > 0.99

    def test_das_haus_ordering(self):
        pairs = [P("das Haus", "the house"), P("das Buch", "the book")]
        lex = ibm1_train(pairs, 5)
        assert lex.prob("the", "das") > lex.prob("house", "das")
        assert lex.prob("house", "Haus") > lex.prob("the", "Haus")

    def test_ordering_confirmed_by_two_iteration_hand_em(self):
        # independent oracle: two EM iterations with explicit dicts, NULL
        # included, mirroring the uniform-start arithmetic
        pairs = [(("das", "Haus"), ("the", "house")), (("das", "Buch"), ("the", "book"))]
        t = {}
        cooc = {}
        for fs, es in pairs:
            for f in ("<null>",) + fs:
                for e in es:
                    cooc.setdefault(f, set()).add(e)
        for f, es in cooc.items():
            for e in es:
                t[(e, f)] = 1.0 / len(es)
        for _ in range(2):
            count, total = {}, {}
            for fs, es in pairs:
                srcs = ("<null>",) + fs
                for e in es:
                    z = sum(t[(e, f)] for f in srcs)
                    for f in srcs:
                        c = t[(e, f)] / z
                        count[(e, f)] = count.get((e, f), 0.0) + c
                        total[f] = total.get(f, 0.0) + c
            t = {key: c / total[key[1]] for key, c in count.items()}
        assert t[("the", "das")] > t[("house", "das")]
        assert t[("house", "Haus")] > t[("the", "Haus")]

    def test_zero_iterations_rejected(self):
        with pytest.raises(ValueError):
            ibm1_train([P("a", "b")], 0)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            ibm1_train([], 3)

    def test_lexicon_normalizes_per_source(self):
        lex = ibm1_train(cipher_pairs(), 4)
        totals = {}
        for (e, f), p in lex.t.items():
            assert 0.0 <= p <= 1.0 + 1e-12
            totals[f] = totals.get(f, 0.0) + p
        for f, total in totals.items():
            assert total == pytest.approx(1.0, abs=1e-6)


class TestIbm2:
    def test_zero_iterations_returns_init_with_uniform_distortion(self):
        pairs = [P("a b", "x y")]
        init = ibm1_train(pairs, 3)
        lex, dist = ibm2_train(pairs, 0, init)
        assert lex.t == init.t
        assert dist.q == {}
        assert dist.prob(0, 1, 2, 2) == pytest.approx(1.0 / 3)

    def test_loglik_nondecreasing(self):
        pairs = cipher_pairs()
        init = ibm1_train(pairs, 5)
        lex, dist = ibm2_train(pairs, 10, init)
        trace = lex.loglik_trace
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))

    def test_monotone_cipher_aligns_diagonal(self):
        # target is a token-wise cipher of the source with equal lengths, so
        # Viterbi links must be the diagonal
        pairs = cipher_pairs(n_sentences=80, vocab=10)
        init = ibm1_train(pairs, 5)
        lex, dist = ibm2_train(pairs, 5, init)
        total = correct = 0
        for pair in pairs:
            links = viterbi_align(lex, dist, pair).links
            for i, link in enumerate(links):
                total += 1
                correct += link == i
        assert correct == total

    def test_distortion_normalizes(self):
        pairs = cipher_pairs()
        init = ibm1_train(pairs, 3)
        _lex, dist = ibm2_train(pairs, 3, init)
        totals = {}
        for (i, j, l, m), p in dist.q.items():
            totals[(i, l, m)] = totals.get((i, l, m), 0.0) + p
        for total in totals.values():
            assert total == pytest.approx(1.0, abs=1e-6)


class TestEmMonotonicity:
    def test_ibm1_and_ibm2_on_random_corpora(self):
        rng = random.Random(17)
        for case in range(25):
            pairs = random_token_corpus(rng, rng.randint(5, 20), vocab=rng.randint(4, 10))
            lex = ibm1_train(pairs, 10)
            t1 = lex.loglik_trace
            assert all(b >= a - 1e-9 for a, b in zip(t1, t1[1:])), f"ibm1 case {case}"
            lex2, _dist = ibm2_train(pairs, 10, lex)
            t2 = lex2.loglik_trace
            assert all(b >= a - 1e-9 for a, b in zip(t2, t2[1:])), f"ibm2 case {case}"


class TestScore:
    def setup_method(self):
        self.pairs = cipher_pairs(n_sentences=60, vocab=10)
        init = ibm1_train(self.pairs, 5)
        self.lex, self.dist = ibm2_train(self.pairs, 5, init)

    def test_true_pairs_beat_shuffled_mismatches(self):
        rng = random.Random(5)
        true_scores = [align_score(self.lex, self.dist, p) for p in self.pairs[:20]]
        mismatched = []
        for p in self.pairs[:20]:
            other = self.pairs[rng.randrange(20, len(self.pairs))]
            shuffled = list(other.tgt.tokens)
            rng.shuffle(shuffled)
            mismatched.append(
                SentencePair(p.src, Sentence.from_tokens(shuffled, lang="en"))
            )
        bad_scores = [align_score(self.lex, self.dist, p) for p in mismatched]
        assert min(true_scores) > max(bad_scores)

    def test_training_pair_score_near_zero(self):
        score = align_score(self.lex, self.dist, self.pairs[0])
        assert -0.7 < score <= 0.0

    def test_empty_target_rejected(self):
        pair = SentencePair(Sentence.from_tokens(["f1"], lang="fi"), Sentence.from_tokens([], lang="en"))
        with pytest.raises(ValueError, match="empty target"):
            align_score(self.lex, self.dist, pair)

    def test_oov_floor_keeps_score_finite(self):
        import math

        pair = P("zz qq", "ww vv")
        assert math.isfinite(align_score(self.lex, self.dist, pair))


class TestPersistence:
    def test_lexicon_and_distortion_files(self, tmp_path):
        pairs = cipher_pairs(n_sentences=20)
        init = ibm1_train(pairs, 3)
        lex, dist = ibm2_train(pairs, 3, init)
        save_lexicon(lex, tmp_path / "lex.txt")
        save_distortion(dist, tmp_path / "dist.txt")
        assert load_lexicon(tmp_path / "lex.txt").t == pytest.approx(lex.t)
        assert load_distortion(tmp_path / "dist.txt").q == pytest.approx(dist.q)
