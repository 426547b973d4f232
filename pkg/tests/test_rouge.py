import random

import pytest

from oracles import lcs_dp, lcs_exhaustive, rouge_l_fraction
from skybench.errors import DataError
from skybench.metrics.rouge import lcs_length, rouge_l


def test_hand_value():
    assert rouge_l(list("abcd"), [list("acbd")]) == pytest.approx(75.0, abs=1e-9)


def test_identity_is_100():
    assert rouge_l(["x", "y", "z"], [["x", "y", "z"]]) == 100.0


def test_no_overlap_is_0():
    assert rouge_l(["a", "b"], [["x", "y"]]) == 0.0


def test_empty_candidate_is_0():
    assert rouge_l([], [["a", "b"]]) == 0.0


def test_empty_reference_list_raises():
    with pytest.raises(DataError):
        rouge_l(["a"], [])


def test_takes_best_reference():
    refs = [list("xxxx"), list("abcd")]
    assert rouge_l(list("abcd"), refs) == 100.0


def test_beta_weighting_favors_recall():
    # same LCS, recall differs: longer reference drops recall and the score
    short_ref = rouge_l(["a", "b"], [["a", "b", "c"]])
    long_ref = rouge_l(["a", "b"], [["a", "b", "c", "d", "e"]])
    assert short_ref > long_ref


def test_lcs_matches_both_oracles_on_random_strings():
    rng = random.Random(41)
    for _ in range(200):
        a = [rng.choice("abcd") for _ in range(rng.randint(0, 9))]
        b = [rng.choice("abcd") for _ in range(rng.randint(0, 9))]
        got = lcs_length(a, b)
        assert got == lcs_dp(a, b)
        assert got == lcs_exhaustive(a, b)


def test_engine_matches_fraction_oracle():
    rng = random.Random(42)
    for _ in range(100):
        cand = [rng.choice("abcdef") for _ in range(rng.randint(1, 10))]
        refs = [
            [rng.choice("abcdef") for _ in range(rng.randint(1, 10))]
            for _ in range(rng.randint(1, 3))
        ]
        assert rouge_l(cand, refs) == pytest.approx(
            100.0 * rouge_l_fraction(cand, refs), abs=1e-9
        )
