"""Corpus-level clipped n-gram precision score.

A corpus is a list of (candidate tokens, list of reference token lists).
Per order n the candidate n-gram counts are clipped to the maximum count of
that n-gram in any reference, summed over the corpus, and divided by the
total candidate n-gram count. The reported value for order k is

    100 * BP * geomean(p_1 .. p_k)

with BP = 1 when the candidate corpus is longer than the reference length r
(sum of per-item closest reference lengths, ties resolved to the shorter)
and exp(1 - r/c) otherwise.
"""

from __future__ import annotations

import math
from collections import Counter

from ..errors import DataError

Corpus = list[tuple[list[str], list[list[str]]]]


def ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def closest_reference_length(candidate_length: int, references: list[list[str]]) -> int:
    return min(
        (len(ref) for ref in references),
        key=lambda length: (abs(length - candidate_length), length),
    )


def precision_totals(corpus: Corpus, n: int) -> tuple[int, int]:
    """Summed clipped matches and candidate n-gram count for order n."""
    correct = 0
    guess = 0
    for candidate, references in corpus:
        counts = ngram_counts(candidate, n)
        if counts:
            max_ref: Counter = Counter()
            for ref in references:
                for gram, count in ngram_counts(ref, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            correct += sum(min(count, max_ref[gram]) for gram, count in counts.items())
        guess += max(len(candidate) - n + 1, 0)
    return correct, guess


def bleu(corpus: Corpus, max_n: int = 4, smooth: bool = False) -> list[float]:
    """Percent score per order 1..max_n.

    smooth applies add-one smoothing to orders >= 2 (sentence-level use);
    the default is the plain corpus-level computation.
    """
    if not corpus:
        raise DataError("empty corpus")
    if not 1 <= max_n <= 4:
        raise DataError(f"max_n must be 1..4, got {max_n}")
    for _, references in corpus:
        if not references:
            raise DataError("corpus item without references")

    candidate_total = sum(len(candidate) for candidate, _ in corpus)
    if candidate_total == 0:
        return [0.0] * max_n
    reference_total = sum(
        closest_reference_length(len(candidate), references)
        for candidate, references in corpus
    )
    if candidate_total > reference_total:
        brevity = 1.0
    else:
        brevity = math.exp(1 - reference_total / candidate_total)

    scores = []
    log_sum = 0.0
    dead = False
    for n in range(1, max_n + 1):
        correct, guess = precision_totals(corpus, n)
        if smooth and n >= 2:
            correct += 1
            guess += 1
        precision = correct / guess if guess else 0.0
        if precision == 0.0:
            dead = True
        if dead:
            scores.append(0.0)
        else:
            log_sum += math.log(precision)
            scores.append(100.0 * brevity * math.exp(log_sum / n))
    return scores
