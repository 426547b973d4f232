"""Sanity checks for the reference implementations the real tests lean on."""

import pytest

from oracles import (
    CIDER_FIXTURE,
    bleu_precision,
    cider_score,
    clipped_matches,
    is_subsequence,
    lcs_dp,
    lcs_exhaustive,
    ngram_list,
    rouge_l_fraction,
)


def test_ngram_list():
    assert ngram_list(["a", "b", "c"], 2) == [("a", "b"), ("b", "c")]
    assert ngram_list(["a"], 2) == []


def test_clipped_matches_caps_repeats():
    # candidate repeats "the" three times, best reference has it twice
    got = clipped_matches(["the", "the", "the"], [["the", "cat", "the"]], 1)
    assert got == 2
    got = clipped_matches(["the", "the", "the"], [["the", "cat"]], 1)
    assert got == 1


def test_bleu_precision_counts():
    corpus = [(["the", "cat", "sat"], [["the", "cat", "sat", "down"]])]
    assert bleu_precision(corpus, 1) == (3, 3)
    assert bleu_precision(corpus, 2) == (2, 2)


def test_subsequence():
    assert is_subsequence(["a", "c"], ["a", "b", "c"])
    assert not is_subsequence(["c", "a"], ["a", "b", "c"])


def test_lcs_agreement():
    a, b = list("abcd"), list("acbd")
    assert lcs_exhaustive(a, b) == 3
    assert lcs_dp(a, b) == 3
    assert lcs_dp(list("abc"), list("xyz")) == 0


def test_rouge_fraction_hand_value():
    assert rouge_l_fraction(list("abcd"), [list("acbd")]) == pytest.approx(0.75)


def test_cider_identity_single_image_is_zero():
    # with one item every idf weight is log(1) = 0
    corpus = [(["a", "b"], [["a", "b"]])]
    assert cider_score(corpus, variant="cider") == 0.0
    assert cider_score(corpus, variant="cider_d") == 0.0


def test_cider_fixture_values_are_pinned():
    assert cider_score(CIDER_FIXTURE, variant="cider_d") == pytest.approx(
        4.86063311202821, abs=1e-12
    )
    assert cider_score(CIDER_FIXTURE, variant="cider") == pytest.approx(
        4.9314516274442965, abs=1e-12
    )
