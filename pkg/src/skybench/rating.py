"""Human quality grades: an append-only log plus pure aggregation.

Raters grade model captions A (best) through D (worst) on three
dimensions. The log keeps every submission; aggregates are computed
from the log alone, so replaying a log file reproduces every number.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

from .errors import DataError

GRADES = ("A", "B", "C", "D")
DIMENSIONS = ("detail", "position", "hallucination")

DEFAULT_RUBRIC = {
    "detail": {
        "A": "Rich, specific description; counts and object types are right.",
        "B": "Covers the main content with minor omissions.",
        "C": "Generic or sparse; misses salient objects.",
        "D": "Barely describes the scene.",
    },
    "position": {
        "A": "Spatial relations between objects are all correct.",
        "B": "Mostly correct layout with one slip.",
        "C": "Several placement errors.",
        "D": "Layout is wrong throughout.",
    },
    "hallucination": {
        "A": "Nothing mentioned that is absent from the image.",
        "B": "One doubtful detail.",
        "C": "Clearly invents an object or attribute.",
        "D": "Largely fabricated content.",
    },
}


@dataclass(frozen=True)
class RatingRecord:
    rating_id: str
    rater_id: str
    model_id: str
    image_id: str
    dimension: str
    grade: str
    created_at: float = 0.0


@dataclass
class GradeDistribution:
    counts: dict[str, int]

    def total(self) -> int:
        return sum(self.counts.values())

    def compact(self) -> str:
        return "/".join(str(self.counts[g]) for g in GRADES)

    def share(self, grade: str) -> float | None:
        total = self.total()
        if total == 0:
            return None
        return 100.0 * self.counts[grade] / total


class RatingLog:
    """Ordered rating store with idempotent writes."""

    def __init__(
        self,
        known_models: set[str] | None = None,
        known_images: set[str] | None = None,
    ) -> None:
        self._records: list[RatingRecord] = []
        self._ids: set[str] = set()
        self._known_models = known_models
        self._known_images = known_images

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[RatingRecord]:
        return list(self._records)

    def record(self, rating: RatingRecord) -> str:
        """Append a rating; returns "stored" or "duplicate"."""
        if rating.grade not in GRADES:
            raise DataError(f"unknown grade: {rating.grade!r}")
        if rating.dimension not in DIMENSIONS:
            raise DataError(f"unknown dimension: {rating.dimension!r}")
        if not rating.rating_id or not rating.rater_id:
            raise DataError("rating_id and rater_id are required")
        if self._known_models is not None and rating.model_id not in self._known_models:
            raise DataError(f"unknown model: {rating.model_id!r}")
        if self._known_images is not None and rating.image_id not in self._known_images:
            raise DataError(f"unknown image: {rating.image_id!r}")
        if rating.rating_id in self._ids:
            return "duplicate"
        self._ids.add(rating.rating_id)
        self._records.append(rating)
        return "stored"

    def distribution(self, model_id: str, dimension: str) -> GradeDistribution:
        """Per-image consensus grades, counted.

        For each (rater, image) only the latest submission in log order
        counts. Each image's grade is the majority across raters; a tie
        goes to the worst grade among those tied.
        """
        if dimension not in DIMENSIONS:
            raise DataError(f"unknown dimension: {dimension!r}")
        latest: dict[tuple[str, str], str] = {}
        for r in self._records:
            if r.model_id != model_id or r.dimension != dimension:
                continue
            latest[(r.rater_id, r.image_id)] = r.grade
        per_image: dict[str, dict[str, int]] = {}
        for (_, image_id), grade in latest.items():
            votes = per_image.setdefault(image_id, {g: 0 for g in GRADES})
            votes[grade] += 1
        counts = {g: 0 for g in GRADES}
        for votes in per_image.values():
            top = max(votes.values())
            tied = [g for g in GRADES if votes[g] == top]
            counts[tied[-1]] += 1
        return GradeDistribution(counts=counts)


def load_ratings(path: str | Path, **log_kwargs) -> RatingLog:
    """Replay a log file; a torn final line is dropped, not fatal."""
    path = Path(path)
    log = RatingLog(**log_kwargs)
    with path.open("r", encoding="utf-8") as handle:
        lines = handle.readlines()
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            if lineno == len(lines):
                break
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        try:
            record = RatingRecord(
                rating_id=obj["rating_id"],
                rater_id=obj["rater_id"],
                model_id=obj["model_id"],
                image_id=obj["image_id"],
                dimension=obj["dimension"],
                grade=obj["grade"],
                created_at=obj.get("created_at", 0.0),
            )
        except KeyError as exc:
            raise DataError(f"{path}:{lineno}: missing field {exc}") from exc
        log.record(record)
    return log


def save_ratings(log: RatingLog, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for record in log.records():
            handle.write(json.dumps(asdict(record), ensure_ascii=False) + "\n")


def rating_report(
    log: RatingLog,
    models: Iterable[str],
    dimensions: Iterable[str] = DIMENSIONS,
    metadata: dict[str, str] | None = None,
):
    """Grade distribution table, one row per model/dimension pair."""
    from .report import MetricReport

    columns = ["A/B/C/D", "A %", "B %", "C %", "D %"]
    rows: dict[str, list] = {}
    for model_id in models:
        for dimension in dimensions:
            dist = log.distribution(model_id, dimension)
            rows[f"{model_id}/{dimension}"] = [dist.compact()] + [
                dist.share(g) for g in GRADES
            ]
    return MetricReport(
        task="caption-rating",
        columns=columns,
        rows=rows,
        metadata=metadata or {},
    )
