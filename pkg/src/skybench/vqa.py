"""Short-answer scoring: normalization, judging, accuracy tables.

Answers are judged correct by normalized equality in every category.
Quantity questions additionally parse a number out of both sides and
compare; all other categories fall back to whole-word containment of
the gold phrase in the prediction.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import CATEGORIES, QARecord, PredictionRecord
from .errors import DataError
from .metrics.tokenizer import tokenize

_ARTICLES = ("a", "an", "the")

_NUMBER_WORDS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4,
    "five": 5, "six": 6, "seven": 7, "eight": 8, "nine": 9,
    "ten": 10, "eleven": 11, "twelve": 12, "thirteen": 13,
    "fourteen": 14, "fifteen": 15, "sixteen": 16, "seventeen": 17,
    "eighteen": 18, "nineteen": 19, "twenty": 20, "thirty": 30,
    "forty": 40, "fifty": 50, "sixty": 60, "seventy": 70,
    "eighty": 80, "ninety": 90, "hundred": 100,
}


def normalize_answer(text: str) -> str:
    tokens = tokenize(text)
    while tokens and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    return " ".join(tokens)


def parse_quantity(text: str) -> int | None:
    """First integer found in the text, as digits or a single number word."""
    for token in tokenize(text):
        if token.isdigit():
            return int(token)
        if token in _NUMBER_WORDS:
            return _NUMBER_WORDS[token]
    return None


def judge(prediction: str, gold: str, category: str) -> str:
    """Return "correct" or "incorrect"."""
    if category not in CATEGORIES:
        raise DataError(f"unknown category: {category!r}")
    pred = normalize_answer(prediction)
    g = normalize_answer(gold)
    if pred == g and g:
        return "correct"
    if category == "quantity":
        pn = parse_quantity(pred)
        gn = parse_quantity(g)
        if pn is not None and gn is not None and pn == gn:
            return "correct"
        return "incorrect"
    if g and f" {pred} ".find(f" {g} ") >= 0:
        return "correct"
    return "incorrect"


@dataclass(frozen=True)
class Judgment:
    question_id: str
    model_id: str
    verdict: str
    source: str
    rater_id: str | None = None
    judgment_id: str | None = None
    created_at: float | None = None


def auto_judge(
    qa_records: Sequence[QARecord],
    predictions: Sequence[PredictionRecord],
) -> list[Judgment]:
    by_question = {q.question_id: q for q in qa_records}
    out: list[Judgment] = []
    for pred in predictions:
        question = by_question.get(pred.target)
        if question is None:
            raise DataError(f"prediction for unknown question {pred.target!r}")
        verdict = judge(pred.text, question.gold_answer, question.category)
        out.append(
            Judgment(
                question_id=question.question_id,
                model_id=pred.model_id,
                verdict=verdict,
                source="auto",
            )
        )
    return out


def merge_judgments(
    auto: Iterable[Judgment],
    human: Iterable[Judgment],
) -> list[Judgment]:
    """Combine machine and human verdicts; humans always win.

    Among multiple human verdicts for the same (question, model) the
    latest by created_at wins, with input position breaking ties.
    Output order is deterministic: sorted by (question_id, model_id).
    """
    merged: dict[tuple[str, str], Judgment] = {}
    for j in auto:
        merged[(j.question_id, j.model_id)] = j
    winners: dict[tuple[str, str], tuple[float, int, Judgment]] = {}
    for pos, j in enumerate(human):
        key = (j.question_id, j.model_id)
        stamp = j.created_at if j.created_at is not None else 0.0
        prev = winners.get(key)
        if prev is None or (stamp, pos) >= (prev[0], prev[1]):
            winners[key] = (stamp, pos, j)
    for key, (_, _, j) in winners.items():
        merged[key] = j
    return [merged[key] for key in sorted(merged)]


@dataclass
class VqaAccuracyRow:
    per_category: dict[str, float | None]
    average: float | None
    judged: int
    unjudged: int


def accuracy_table(
    judgments: Sequence[Judgment],
    qa_records: Sequence[QARecord],
) -> dict[str, VqaAccuracyRow]:
    """Per-model accuracy percent per category plus a question-weighted average."""
    by_question = {q.question_id: q for q in qa_records}
    tallies: dict[str, dict[str, list[int]]] = {}
    for j in judgments:
        question = by_question.get(j.question_id)
        if question is None:
            raise DataError(f"judgment for unknown question {j.question_id!r}")
        if j.verdict not in ("correct", "incorrect"):
            raise DataError(f"bad verdict {j.verdict!r}")
        per_cat = tallies.setdefault(j.model_id, {c: [0, 0] for c in CATEGORIES})
        bucket = per_cat[question.category]
        bucket[1] += 1
        if j.verdict == "correct":
            bucket[0] += 1

    total_questions = len(qa_records)
    out: dict[str, VqaAccuracyRow] = {}
    for model_id in sorted(tallies):
        per_cat = tallies[model_id]
        per_category: dict[str, float | None] = {}
        correct_sum = 0
        judged_sum = 0
        for cat in CATEGORIES:
            correct, judged = per_cat[cat]
            per_category[cat] = 100.0 * correct / judged if judged else None
            correct_sum += correct
            judged_sum += judged
        average = 100.0 * correct_sum / judged_sum if judged_sum else None
        out[model_id] = VqaAccuracyRow(
            per_category=per_category,
            average=average,
            judged=judged_sum,
            unjudged=total_questions - judged_sum,
        )
    return out


@dataclass
class QuantityError:
    mean_relative_error: float | None
    pair_count: int
    unparsed_count: int


def quantity_relative_error(pairs: Sequence[tuple[str, str]]) -> QuantityError:
    """Mean of |pred - gold| / max(gold, 1) over parseable pairs."""
    errors: list[float] = []
    unparsed = 0
    for pred_text, gold_text in pairs:
        pn = parse_quantity(pred_text)
        gn = parse_quantity(gold_text)
        if pn is None or gn is None:
            unparsed += 1
            continue
        errors.append(abs(pn - gn) / max(gn, 1))
    if not errors:
        return QuantityError(None, 0, unparsed)
    return QuantityError(math.fsum(errors) / len(errors), len(errors), unparsed)


def quantity_pairs(
    qa_records: Sequence[QARecord],
    predictions: Sequence[PredictionRecord],
) -> dict[str, list[tuple[str, str]]]:
    """Per-model (prediction, gold) text pairs for quantity questions."""
    quantity_questions = {
        q.question_id: q for q in qa_records if q.category == "quantity"
    }
    out: dict[str, list[tuple[str, str]]] = {}
    for pred in predictions:
        question = quantity_questions.get(pred.target)
        if question is None:
            continue
        out.setdefault(pred.model_id, []).append((pred.text, question.gold_answer))
    return out


def load_judgments(path: str | Path) -> list[Judgment]:
    path = Path(path)
    out: list[Judgment] = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                out.append(
                    Judgment(
                        question_id=obj["question_id"],
                        model_id=obj["model_id"],
                        verdict=obj["verdict"],
                        source=obj.get("source", "human"),
                        rater_id=obj.get("rater_id"),
                        judgment_id=obj.get("judgment_id"),
                        created_at=obj.get("created_at"),
                    )
                )
            except KeyError as exc:
                raise DataError(f"{path}:{lineno}: missing field {exc}") from exc
    return out


def save_judgments(judgments: Iterable[Judgment], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for j in judgments:
            obj = {k: v for k, v in asdict(j).items() if v is not None}
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
