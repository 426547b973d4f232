"""Caption quality metrics and the corpus-level evaluation entry point."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

from ..errors import DataError
from .bleu import Corpus, bleu, closest_reference_length, ngram_counts
from .cider import cider
from .meteor import meteor
from .rouge import rouge_l
from .stem import porter_stem
from .tokenizer import tokenize

METRIC_NAMES = ("bleu", "meteor", "rouge", "cider")


@dataclass(frozen=True)
class MetricConfig:
    """Everything that can change a score, pinned in one place."""

    max_n: int = 4
    bleu_smooth: bool = False
    rouge_beta: float = 1.2
    cider_variant: str = "cider_d"
    cider_sigma: float = 6.0
    meteor_matching: str = "exact+stem"
    tokenizer: str = "lower-punct-space-v1"

    def as_dict(self) -> dict:
        return asdict(self)

    def fingerprint(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class CaptionScores:
    """One model's corpus scores; None means the metric was not requested."""

    bleu_1: float | None = None
    bleu_2: float | None = None
    bleu_3: float | None = None
    bleu_4: float | None = None
    meteor: float | None = None
    rouge_l: float | None = None
    cider: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate_captions(
    predictions: dict[str, dict[str, str]],
    references: dict[str, list[str]],
    config: MetricConfig | None = None,
    metrics: tuple[str, ...] = METRIC_NAMES,
) -> dict[str, CaptionScores]:
    """Score every model's predictions against shared references.

    ``predictions`` maps model id -> {image id -> caption text};
    ``references`` maps image id -> list of reference texts. Every
    predicted image must have at least one reference.
    """
    if config is None:
        config = MetricConfig()
    for name in metrics:
        if name not in METRIC_NAMES:
            raise DataError(f"unknown metric: {name!r}")

    ref_tokens = {
        image_id: [tokenize(text) for text in texts]
        for image_id, texts in references.items()
    }

    results: dict[str, CaptionScores] = {}
    for model_id in sorted(predictions):
        model_preds = predictions[model_id]
        if not model_preds:
            raise DataError(f"no predictions for model {model_id!r}")
        corpus: Corpus = []
        for image_id in sorted(model_preds):
            if image_id not in ref_tokens or not ref_tokens[image_id]:
                raise DataError(f"no reference captions for image {image_id!r}")
            corpus.append((tokenize(model_preds[image_id]), ref_tokens[image_id]))

        scores = CaptionScores()
        if "bleu" in metrics:
            values = bleu(corpus, max_n=config.max_n, smooth=config.bleu_smooth)
            scores.bleu_1, scores.bleu_2, scores.bleu_3, scores.bleu_4 = values[:4]
        if "meteor" in metrics:
            scores.meteor = math.fsum(
                meteor(cand, refs) for cand, refs in corpus
            ) / len(corpus)
        if "rouge" in metrics:
            scores.rouge_l = math.fsum(
                rouge_l(cand, refs, beta=config.rouge_beta) for cand, refs in corpus
            ) / len(corpus)
        if "cider" in metrics:
            raw = cider(
                corpus,
                variant=config.cider_variant,
                max_n=config.max_n,
                sigma=config.cider_sigma,
            )
            scores.cider = 100.0 * raw
        results[model_id] = scores
    return results
