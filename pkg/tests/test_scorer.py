from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqlab.errors import InvalidInputError
from seqlab.rng import Rng
from seqlab.scorer import MatchCounts, corpus_counts, corpus_prf, sentence_counts, token_accuracy
from seqlab.tagcodec import TagScheme, convert_scheme, decode_segments

TAGS = ["O", "B-PER", "I-PER", "B-LOC", "I-LOC"]


def random_sentence_pair(rng: Rng, max_len=10):
    n = 1 + rng.randint(max_len)
    return [rng.choice(TAGS) for _ in range(n)], [rng.choice(TAGS) for _ in range(n)]


class TestTokenAccuracy:
    def test_identity_is_one(self):
        gold = [["A", "B"], ["C"]]
        assert token_accuracy(gold, gold) == 1.0

    def test_half(self):
        assert token_accuracy([["A", "B"]], [["A", "C"]]) == 0.5

    def test_empty_corpus_rejected(self):
        with pytest.raises(InvalidInputError):
            token_accuracy([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            token_accuracy([["A"]], [["A", "B"]])


class TestSentenceCounts:
    def test_exact_match(self):
        c = sentence_counts(["B-PER", "O"], ["B-PER", "O"], TagScheme.BIO)
        assert (c.tp, c.fp, c.fn) == (1, 0, 0)

    def test_span_mismatch(self):
        c = sentence_counts(["B-PER", "I-PER"], ["B-PER", "O"], TagScheme.BIO)
        assert (c.tp, c.fp, c.fn) == (0, 1, 1)

    def test_matches_set_intersection_oracle(self):
        rng = Rng(2024)
        for _ in range(100):
            gold, pred = random_sentence_pair(rng)
            c = sentence_counts(gold, pred, TagScheme.BIO)
            gs = set(decode_segments(gold, TagScheme.BIO))
            ps = set(decode_segments(pred, TagScheme.BIO))
            assert c.tp == len(gs & ps)
            assert c.fp == len(ps - gs)
            assert c.fn == len(gs - ps)


class TestCorpusPrf:
    def test_perfect(self):
        prf = corpus_prf([MatchCounts(1, 0, 0)])
        assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)

    def test_balanced_half(self):
        prf = corpus_prf([MatchCounts(1, 1, 1)])
        assert (prf.precision, prf.recall, prf.f1) == (0.5, 0.5, 0.5)

    def test_all_zero_convention(self):
        prf = corpus_prf([MatchCounts(0, 0, 0)])
        assert (prf.precision, prf.recall, prf.f1) == (0.0, 0.0, 0.0)


def random_corpus_pair(seed, n_sent=20):
    rng = Rng(seed)
    gold, pred = [], []
    for _ in range(n_sent):
        g, p = random_sentence_pair(rng)
        gold.append(g)
        pred.append(p)
    return gold, pred


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_per_sentence_sums_equal_concatenated_corpus(seed):
    gold, pred = random_corpus_pair(seed)
    per_sentence = corpus_prf(corpus_counts(gold, pred, TagScheme.BIO))
    # Concatenate sentences with an "O" spacer so segments cannot merge.
    flat_gold, flat_pred = [], []
    for g, p in zip(gold, pred):
        flat_gold.extend(g + ["O"])
        flat_pred.extend(p + ["O"])
    whole = corpus_prf([sentence_counts(flat_gold, flat_pred, TagScheme.BIO)])
    assert whole == per_sentence


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_swapping_gold_and_pred_swaps_p_and_r(seed):
    gold, pred = random_corpus_pair(seed)
    a = corpus_prf(corpus_counts(gold, pred, TagScheme.BIO))
    b = corpus_prf(corpus_counts(pred, gold, TagScheme.BIO))
    assert a.precision == b.recall and a.recall == b.precision
    assert a.f1 == b.f1


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_f1_invariant_under_scheme_conversion(seed):
    gold, pred = random_corpus_pair(seed)
    base = corpus_prf(corpus_counts(gold, pred, TagScheme.BIO))
    gold_i = [convert_scheme(g, TagScheme.BIO, TagScheme.IOBES) for g in gold]
    pred_i = [convert_scheme(p, TagScheme.BIO, TagScheme.IOBES) for p in pred]
    conv = corpus_prf(corpus_counts(gold_i, pred_i, TagScheme.IOBES))
    assert conv == base
