"""Unigram alignment score with a fragmentation penalty.

Matching runs in two stages: exact token identity first, then stemmed
identity over whatever is left. Within each stage matching is greedy
left to right across the candidate, preferring the reference position
that continues the previous match so the alignment has as few chunks
as a greedy pass can manage.
"""

from __future__ import annotations

from typing import Callable

from ..errors import DataError
from .stem import porter_stem


def _stage_matches(
    candidate: list[str],
    reference: list[str],
    cand_taken: list[bool],
    ref_taken: list[bool],
    key: Callable[[str], str],
) -> list[tuple[int, int]]:
    pairs: list[tuple[int, int]] = []
    ref_keys = [key(t) for t in reference]
    prev_i = prev_j = -2
    for i, token in enumerate(candidate):
        if cand_taken[i]:
            continue
        want = key(token)
        chosen = -1
        if i == prev_i + 1:
            j = prev_j + 1
            if j < len(reference) and not ref_taken[j] and ref_keys[j] == want:
                chosen = j
        if chosen < 0:
            for j, rk in enumerate(ref_keys):
                if not ref_taken[j] and rk == want:
                    chosen = j
                    break
        if chosen < 0:
            continue
        cand_taken[i] = True
        ref_taken[chosen] = True
        pairs.append((i, chosen))
        prev_i, prev_j = i, chosen
    return pairs


def _chunk_count(pairs: list[tuple[int, int]]) -> int:
    if not pairs:
        return 0
    ordered = sorted(pairs)
    chunks = 1
    for (pi, pj), (ci, cj) in zip(ordered, ordered[1:]):
        if ci != pi + 1 or cj != pj + 1:
            chunks += 1
    return chunks


def meteor(
    candidate: list[str],
    references: list[list[str]],
    stem: Callable[[str], str] = porter_stem,
) -> float:
    """Percent score, best over references.

    F = 10 P R / (R + 9 P), penalized by 0.5 * (chunks / matches)^3.
    """
    if not references:
        raise DataError("no references")
    if not candidate:
        return 0.0
    best = 0.0
    for ref in references:
        if not ref:
            continue
        cand_taken = [False] * len(candidate)
        ref_taken = [False] * len(ref)
        pairs = _stage_matches(candidate, ref, cand_taken, ref_taken, lambda t: t)
        pairs += _stage_matches(candidate, ref, cand_taken, ref_taken, stem)
        m = len(pairs)
        if m == 0:
            continue
        precision = m / len(candidate)
        recall = m / len(ref)
        f_mean = 10 * precision * recall / (recall + 9 * precision)
        penalty = 0.5 * (_chunk_count(pairs) / m) ** 3
        best = max(best, f_mean * (1.0 - penalty))
    return 100.0 * best
