import random

import pytest

from mtkit.corpus import Sentence, SentencePair


@pytest.fixture
def sent():
    def make(text: str, lang: str = "en") -> Sentence:
        return Sentence.from_tokens(text.split(), lang=lang)

    return make


@pytest.fixture
def pair(sent):
    def make(src: str, tgt: str) -> SentencePair:
        return SentencePair(sent(src, "fi"), sent(tgt, "en"))

    return make


def random_token_corpus(rng: random.Random, n_pairs: int, vocab: int = 10, max_len: int = 6):
    """Small random parallel corpora for EM property tests."""
    src_vocab = [f"f{i}" for i in range(vocab)]
    tgt_vocab = [f"e{i}" for i in range(vocab)]
    pairs = []
    for _ in range(n_pairs):
        ls = rng.randint(1, max_len)
        lt = rng.randint(1, max_len)
        src = Sentence.from_tokens(rng.choices(src_vocab, k=ls), lang="fi")
        tgt = Sentence.from_tokens(rng.choices(tgt_vocab, k=lt), lang="en")
        pairs.append(SentencePair(src, tgt))
    return pairs
