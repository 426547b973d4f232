"""Descriptive statistics over a caption corpus."""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .corpus import CaptionRecord, ImageRecord
from .errors import DataError
from .metrics.tokenizer import tokenize

_SENTENCE_BREAK = re.compile(r"[.!?]+")


def split_sentences(text: str) -> list[str]:
    parts = _SENTENCE_BREAK.split(text)
    return [p.strip() for p in parts if p.strip()]


def histogram(
    values: Iterable[int | float],
    bin_width: int,
    density: bool = False,
) -> dict[int, float]:
    """Counts (or fractions per unit width) keyed by the left bin edge."""
    if bin_width < 1:
        raise DataError("bin width must be positive")
    counts: dict[int, int] = {}
    n = 0
    for v in values:
        edge = int(v // bin_width) * bin_width
        counts[edge] = counts.get(edge, 0) + 1
        n += 1
    if not density:
        return {k: counts[k] for k in sorted(counts)}
    if n == 0:
        return {}
    return {k: counts[k] / (n * bin_width) for k in sorted(counts)}


@dataclass(frozen=True)
class CorpusStats:
    total_tokens: int
    distinct_tokens: int
    total_sentences: int
    avg_caption_tokens: float
    max_caption_tokens: int
    avg_sentences_per_caption: float
    max_sentences_per_caption: int
    pan_images: int
    color_images: int
    modality_ratio: float | None
    token_length_histogram: dict[int, float]
    sentence_count_histogram: dict[int, float]

    def to_dict(self) -> dict:
        return asdict(self)


def corpus_stats(
    captions: Sequence[CaptionRecord],
    images: Sequence[ImageRecord] = (),
    token_bin_width: int = 20,
    sentence_bin_width: int = 1,
) -> CorpusStats:
    if not captions:
        raise DataError("no captions")
    token_counts: list[int] = []
    sentence_counts: list[int] = []
    vocabulary: set[str] = set()
    for record in captions:
        tokens = tokenize(record.text)
        token_counts.append(len(tokens))
        vocabulary.update(tokens)
        sentence_counts.append(len(split_sentences(record.text)))

    pan = sum(1 for img in images if img.modality == "panchromatic")
    color = sum(1 for img in images if img.modality == "color")
    return CorpusStats(
        total_tokens=sum(token_counts),
        distinct_tokens=len(vocabulary),
        total_sentences=sum(sentence_counts),
        avg_caption_tokens=math.fsum(token_counts) / len(captions),
        max_caption_tokens=max(token_counts),
        avg_sentences_per_caption=math.fsum(sentence_counts) / len(captions),
        max_sentences_per_caption=max(sentence_counts),
        pan_images=pan,
        color_images=color,
        modality_ratio=(pan / color) if color else None,
        token_length_histogram=histogram(token_counts, token_bin_width),
        sentence_count_histogram=histogram(sentence_counts, sentence_bin_width),
    )
