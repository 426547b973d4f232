"""Consensus scoring over TF-IDF weighted n-gram vectors.

Document frequency for a gram counts how many items have it in at
least one reference. The "cider_d" variant clips candidate counts to
the reference count inside the dot product and applies a Gaussian
length penalty per reference; norms stay unclipped.
"""

from __future__ import annotations

import math
from collections import Counter

from ..errors import DataError
from .bleu import Corpus, ngram_counts

VARIANTS = ("cider", "cider_d")
DEFAULT_SIGMA = 6.0


def _tf_idf(counts: Counter, idf: dict[tuple[str, ...], float]) -> dict[tuple[str, ...], float]:
    return {gram: tf * idf[gram] for gram, tf in counts.items()}


def _norm(vec: dict[tuple[str, ...], float]) -> float:
    return math.sqrt(math.fsum(v * v for v in vec.values()))


def cider(
    corpus: Corpus,
    variant: str = "cider_d",
    max_n: int = 4,
    sigma: float = DEFAULT_SIGMA,
) -> float:
    """Raw consensus score (typically reported scaled by 100)."""
    if variant not in VARIANTS:
        raise DataError(f"unknown variant: {variant!r}")
    if not corpus:
        raise DataError("empty corpus")
    for _, references in corpus:
        if not references:
            raise DataError("item without references")

    size = len(corpus)
    log_size = math.log(size)
    item_scores: list[float] = []
    for n in range(1, max_n + 1):
        doc_freq: Counter = Counter()
        for _, references in corpus:
            seen: set[tuple[str, ...]] = set()
            for ref in references:
                seen.update(ngram_counts(ref, n))
            doc_freq.update(seen)

        per_item: list[float] = []
        for candidate, references in corpus:
            cand_counts = ngram_counts(candidate, n)
            grams = set(cand_counts)
            for ref in references:
                grams.update(ngram_counts(ref, n))
            idf = {g: log_size - math.log(max(doc_freq[g], 1)) for g in grams}
            cand_vec = _tf_idf(cand_counts, idf)
            cand_norm = _norm(cand_vec)
            sims: list[float] = []
            for ref in references:
                ref_counts = ngram_counts(ref, n)
                ref_vec = _tf_idf(ref_counts, idf)
                ref_norm = _norm(ref_vec)
                if cand_norm == 0.0 or ref_norm == 0.0:
                    sims.append(0.0)
                    continue
                if variant == "cider_d":
                    dot = math.fsum(
                        min(weight, ref_vec[gram]) * ref_vec[gram]
                        for gram, weight in cand_vec.items()
                        if gram in ref_vec
                    )
                    delta = len(candidate) - len(ref)
                    penalty = math.exp(-(delta * delta) / (2 * sigma * sigma))
                    sims.append(penalty * dot / (cand_norm * ref_norm))
                else:
                    dot = math.fsum(
                        weight * ref_vec[gram]
                        for gram, weight in cand_vec.items()
                        if gram in ref_vec
                    )
                    sims.append(dot / (cand_norm * ref_norm))
            per_item.append(math.fsum(sims) / len(references))
        item_scores.append(math.fsum(per_item))

    # average over n-gram orders, then over items; 10x scaling
    total = math.fsum(item_scores) / max_n
    return 10.0 * total / size
