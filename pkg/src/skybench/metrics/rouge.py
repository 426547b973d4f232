"""LCS-based F-score for a candidate against multiple references."""

from __future__ import annotations

from ..errors import DataError

DEFAULT_BETA = 1.2


def lcs_length(a: list[str], b: list[str]) -> int:
    """Longest common subsequence length, rolling-row DP."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0] * (len(b) + 1)
        for j, other in enumerate(b, start=1):
            if token == other:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[len(b)]


def rouge_l(candidate: list[str], references: list[list[str]], beta: float = DEFAULT_BETA) -> float:
    """Percent F-score, best over references.

    F = (1 + beta^2) P R / (R + beta^2 P) with P = LCS/|candidate| and
    R = LCS/|reference|. Empty candidates score 0.
    """
    if not references:
        raise DataError("no references")
    if not candidate:
        return 0.0
    best = 0.0
    for ref in references:
        if not ref:
            continue
        lcs = lcs_length(candidate, ref)
        if lcs == 0:
            continue
        precision = lcs / len(candidate)
        recall = lcs / len(ref)
        score = (1 + beta ** 2) * precision * recall / (recall + beta ** 2 * precision)
        best = max(best, score)
    return 100.0 * best
