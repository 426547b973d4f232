"""Dataset records and JSONL loaders.

Files are UTF-8 JSON lines. Blank lines are skipped, unknown fields
are ignored, and every validation error carries the 1-based line
number it came from.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

from .errors import DataError

CATEGORIES = (
    "presence",
    "quantity",
    "color",
    "absolute_position",
    "relative_position",
    "area_comparison",
    "road_direction",
    "image",
    "scene",
    "reasoning",
)
SPLITS = ("train", "val", "test")
MODALITIES = ("color", "panchromatic")
CAPTION_TARGET = "caption"


class CorpusError(DataError):
    """A dataset file failed validation."""


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    width: int
    height: int
    modality: str
    split: str = "test"
    uri: str | None = None


@dataclass(frozen=True)
class CaptionRecord:
    image_id: str
    caption_id: str
    text: str
    split: str = "test"


@dataclass(frozen=True)
class QARecord:
    question_id: str
    image_id: str
    category: str
    question: str
    gold_answer: str
    split: str = "test"


@dataclass(frozen=True)
class PredictionRecord:
    model_id: str
    image_id: str
    target: str
    text: str


def _iter_lines(path: str | Path) -> Iterable[tuple[int, dict]]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected an object")
            yield lineno, obj


def _need_str(obj: dict, key: str, path: Path, lineno: int) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value.strip():
        raise CorpusError(f"{path}:{lineno}: field {key!r} must be a non-empty string")
    return value


def _need_text(obj: dict, key: str, path: Path, lineno: int) -> str:
    # predictions may legitimately be empty strings
    value = obj.get(key)
    if not isinstance(value, str):
        raise CorpusError(f"{path}:{lineno}: field {key!r} must be a string")
    return value


def _need_int(obj: dict, key: str, path: Path, lineno: int) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise CorpusError(f"{path}:{lineno}: field {key!r} must be a positive integer")
    return value


def _need_enum(obj: dict, key: str, allowed: tuple[str, ...], path: Path, lineno: int, default: str | None = None) -> str:
    value = obj.get(key, default)
    if value not in allowed:
        raise CorpusError(f"{path}:{lineno}: field {key!r} must be one of {allowed}")
    return value


def load_images(path: str | Path) -> list[ImageRecord]:
    path = Path(path)
    records: list[ImageRecord] = []
    seen: set[str] = set()
    for lineno, obj in _iter_lines(path):
        image_id = _need_str(obj, "image_id", path, lineno)
        if image_id in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate image_id {image_id!r}")
        seen.add(image_id)
        uri = obj.get("uri")
        if uri is not None and not isinstance(uri, str):
            raise CorpusError(f"{path}:{lineno}: field 'uri' must be a string")
        records.append(
            ImageRecord(
                image_id=image_id,
                width=_need_int(obj, "width", path, lineno),
                height=_need_int(obj, "height", path, lineno),
                modality=_need_enum(obj, "modality", MODALITIES, path, lineno),
                split=_need_enum(obj, "split", SPLITS, path, lineno, default="test"),
                uri=uri,
            )
        )
    return records


def load_captions(path: str | Path) -> list[CaptionRecord]:
    path = Path(path)
    records: list[CaptionRecord] = []
    seen: set[str] = set()
    for lineno, obj in _iter_lines(path):
        caption_id = _need_str(obj, "caption_id", path, lineno)
        if caption_id in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate caption_id {caption_id!r}")
        seen.add(caption_id)
        records.append(
            CaptionRecord(
                image_id=_need_str(obj, "image_id", path, lineno),
                caption_id=caption_id,
                text=_need_str(obj, "text", path, lineno),
                split=_need_enum(obj, "split", SPLITS, path, lineno, default="test"),
            )
        )
    return records


def load_qa(path: str | Path) -> list[QARecord]:
    path = Path(path)
    records: list[QARecord] = []
    seen: set[str] = set()
    for lineno, obj in _iter_lines(path):
        question_id = _need_str(obj, "question_id", path, lineno)
        if question_id in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate question_id {question_id!r}")
        seen.add(question_id)
        records.append(
            QARecord(
                question_id=question_id,
                image_id=_need_str(obj, "image_id", path, lineno),
                category=_need_enum(obj, "category", CATEGORIES, path, lineno),
                question=_need_str(obj, "question", path, lineno),
                gold_answer=_need_str(obj, "answer", path, lineno),
                split=_need_enum(obj, "split", SPLITS, path, lineno, default="test"),
            )
        )
    return records


def _load_predictions(path: str | Path, caption_style: bool) -> list[PredictionRecord]:
    path = Path(path)
    records: list[PredictionRecord] = []
    seen: set[tuple[str, str, str]] = set()
    for lineno, obj in _iter_lines(path):
        model_id = _need_str(obj, "model_id", path, lineno)
        image_id = _need_str(obj, "image_id", path, lineno)
        if caption_style:
            target = obj.get("target", CAPTION_TARGET)
            if target != CAPTION_TARGET:
                raise CorpusError(f"{path}:{lineno}: field 'target' must be {CAPTION_TARGET!r}")
        else:
            target = _need_str(obj, "target", path, lineno)
            if target == CAPTION_TARGET:
                raise CorpusError(f"{path}:{lineno}: field 'target' must name a question")
        key = (model_id, image_id, target)
        if key in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate prediction for {key}")
        seen.add(key)
        records.append(
            PredictionRecord(
                model_id=model_id,
                image_id=image_id,
                target=target,
                text=_need_text(obj, "text", path, lineno),
            )
        )
    return records


def load_caption_predictions(path: str | Path) -> list[PredictionRecord]:
    return _load_predictions(path, caption_style=True)


def load_vqa_predictions(path: str | Path) -> list[PredictionRecord]:
    return _load_predictions(path, caption_style=False)


def _dump(records: Iterable, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(asdict(record), ensure_ascii=False) + "\n")


def save_images(records: Iterable[ImageRecord], path: str | Path) -> None:
    _dump(records, path)


def save_captions(records: Iterable[CaptionRecord], path: str | Path) -> None:
    _dump(records, path)


def save_qa(records: Iterable[QARecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            obj = asdict(record)
            obj["answer"] = obj.pop("gold_answer")
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")


def save_predictions(records: Iterable[PredictionRecord], path: str | Path) -> None:
    _dump(records, path)


def resolve_predictions(
    predictions: Iterable[PredictionRecord],
    captions: Iterable[CaptionRecord] | None = None,
    qa: Iterable[QARecord] | None = None,
) -> tuple[list[PredictionRecord], list[PredictionRecord]]:
    """Split predictions into those with a known target and the rest.

    Caption predictions resolve against image ids present in the
    caption set; question predictions resolve against question ids.
    Order is preserved in both outputs.
    """
    caption_images = {c.image_id for c in captions} if captions is not None else set()
    question_ids = {q.question_id for q in qa} if qa is not None else set()
    resolved: list[PredictionRecord] = []
    unresolved: list[PredictionRecord] = []
    for pred in predictions:
        if pred.target == CAPTION_TARGET:
            ok = pred.image_id in caption_images
        else:
            ok = pred.target in question_ids
        (resolved if ok else unresolved).append(pred)
    return resolved, unresolved
