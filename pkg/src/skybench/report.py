"""Result tables: one in-memory shape, three wire formats.

Markdown is for humans (fixed decimals, best value bolded when there
is a contest). CSV and JSON lines are lossless round-trip formats
carrying floats at full precision; both embed the header so a file is
self-describing.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import CATEGORIES
from .errors import DataError

Cell = float | int | str | None

FORMATS = ("markdown", "csv", "json-lines")

CAPTION_COLUMNS = [
    "BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "METEOR", "ROUGE_L", "CIDEr",
]

CATEGORY_LABELS = {
    "presence": "Presence",
    "quantity": "Quantity",
    "color": "Color",
    "absolute_position": "Absolute pos.",
    "relative_position": "Relative pos.",
    "area_comparison": "Area comp.",
    "road_direction": "Road dir.",
    "image": "Image",
    "scene": "Scene",
    "reasoning": "Reasoning",
}
VQA_COLUMNS = [CATEGORY_LABELS[c] for c in CATEGORIES] + ["Avg accuracy"]

QUANTITY_COLUMNS = ["Relative error", "Unparsed"]


@dataclass
class MetricReport:
    task: str
    columns: list[str]
    rows: dict[str, list[Cell]]
    metadata: dict[str, str] = field(default_factory=dict)
    decimals: int = 2
    better: str = "max"

    def __post_init__(self) -> None:
        for model, cells in self.rows.items():
            if len(cells) != len(self.columns):
                raise DataError(
                    f"row {model!r} has {len(cells)} cells for "
                    f"{len(self.columns)} columns"
                )
        if self.better not in ("max", "min"):
            raise DataError(f"better must be 'max' or 'min', got {self.better!r}")


def _format_cell(value: Cell, decimals: int) -> str:
    if value is None:
        return "-"
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        raise DataError("boolean cells are not supported")
    if isinstance(value, int):
        return str(value)
    return f"{value:.{decimals}f}"


def _best_flags(report: MetricReport) -> dict[tuple[str, int], bool]:
    """Which (row, column index) cells get bolded in markdown."""
    flags: dict[tuple[str, int], bool] = {}
    if len(report.rows) < 2:
        return flags
    pick = max if report.better == "max" else min
    for idx in range(len(report.columns)):
        numeric = [
            (model, cells[idx])
            for model, cells in report.rows.items()
            if isinstance(cells[idx], (int, float)) and not isinstance(cells[idx], bool)
        ]
        if len(numeric) < 2:
            continue
        best = pick(v for _, v in numeric)
        for model, v in numeric:
            if v == best:
                flags[(model, idx)] = True
    return flags


def _render_markdown(report: MetricReport) -> str:
    flags = _best_flags(report)
    lines = ["| Model | " + " | ".join(report.columns) + " |"]
    lines.append("| :-- |" + " --: |" * len(report.columns))
    for model, cells in report.rows.items():
        rendered = []
        for idx, cell in enumerate(cells):
            text = _format_cell(cell, report.decimals)
            if flags.get((model, idx)):
                text = f"**{text}**"
            rendered.append(text)
        lines.append("| " + model + " | " + " | ".join(rendered) + " |")
    out = "\n".join(lines) + "\n"
    if report.metadata:
        notes = "".join(
            f"<!-- {key}: {report.metadata[key]} -->\n"
            for key in sorted(report.metadata)
        )
        out += "\n" + notes
    return out


def _header_obj(report: MetricReport) -> dict:
    return {
        "task": report.task,
        "columns": report.columns,
        "decimals": report.decimals,
        "better": report.better,
        "metadata": report.metadata,
    }


def _cell_to_wire(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_csv(report: MetricReport) -> str:
    buffer = io.StringIO()
    buffer.write("#header " + json.dumps(_header_obj(report), sort_keys=True) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["model"] + report.columns)
    for model, cells in report.rows.items():
        writer.writerow([model] + [_cell_to_wire(c) for c in cells])
    return buffer.getvalue()


def _render_json_lines(report: MetricReport) -> str:
    lines = [json.dumps(_header_obj(report), sort_keys=True)]
    for model, cells in report.rows.items():
        lines.append(json.dumps({"model": model, "values": cells}, sort_keys=True))
    return "\n".join(lines) + "\n"


def render(report: MetricReport, fmt: str = "markdown") -> str:
    if fmt == "markdown":
        return _render_markdown(report)
    if fmt == "csv":
        return _render_csv(report)
    if fmt == "json-lines":
        return _render_json_lines(report)
    raise DataError(f"unknown format: {fmt!r}")


_INT_CELL = re.compile(r"^-?\d+$")


def _cell_from_wire(text: str) -> Cell:
    if text == "":
        return None
    if _INT_CELL.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def _parse_csv(text: str) -> MetricReport:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#header "):
        raise DataError("missing #header line")
    header = json.loads(lines[0][len("#header "):])
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    rows_in = list(reader)
    if not rows_in or rows_in[0][:1] != ["model"]:
        raise DataError("missing column row")
    if rows_in[0][1:] != header["columns"]:
        raise DataError("column row does not match header")
    rows: dict[str, list[Cell]] = {}
    for row in rows_in[1:]:
        if not row:
            continue
        rows[row[0]] = [_cell_from_wire(c) for c in row[1:]]
    return MetricReport(
        task=header["task"],
        columns=header["columns"],
        rows=rows,
        metadata=header.get("metadata", {}),
        decimals=header.get("decimals", 2),
        better=header.get("better", "max"),
    )


def _parse_json_lines(text: str) -> MetricReport:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines:
        raise DataError("empty report")
    header = json.loads(lines[0])
    if "columns" not in header:
        raise DataError("first line is not a report header")
    rows: dict[str, list[Cell]] = {}
    for raw in lines[1:]:
        obj = json.loads(raw)
        rows[obj["model"]] = list(obj["values"])
    return MetricReport(
        task=header["task"],
        columns=header["columns"],
        rows=rows,
        metadata=header.get("metadata", {}),
        decimals=header.get("decimals", 2),
        better=header.get("better", "max"),
    )


def parse(text: str, fmt: str) -> MetricReport:
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "json-lines":
        return _parse_json_lines(text)
    if fmt == "markdown":
        raise DataError("markdown is render-only")
    raise DataError(f"unknown format: {fmt!r}")


def fingerprint_config(mapping: Mapping) -> str:
    blob = json.dumps(dict(mapping), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def fingerprint_files(paths: Iterable[str | Path]) -> str:
    digest = hashlib.sha256()
    for path in sorted(str(p) for p in paths):
        digest.update(Path(path).read_bytes())
    return digest.hexdigest()[:12]


def build_caption_report(
    scores: Mapping[str, "CaptionScores"],
    metadata: dict[str, str] | None = None,
) -> MetricReport:
    rows: dict[str, list[Cell]] = {}
    for model_id in sorted(scores):
        s = scores[model_id]
        rows[model_id] = [
            s.bleu_1, s.bleu_2, s.bleu_3, s.bleu_4, s.meteor, s.rouge_l, s.cider,
        ]
    return MetricReport(
        task="captioning",
        columns=list(CAPTION_COLUMNS),
        rows=rows,
        metadata=metadata or {},
    )


def build_vqa_report(
    table: Mapping[str, "VqaAccuracyRow"],
    metadata: dict[str, str] | None = None,
) -> MetricReport:
    rows: dict[str, list[Cell]] = {}
    for model_id in sorted(table):
        row = table[model_id]
        rows[model_id] = [row.per_category[c] for c in CATEGORIES] + [row.average]
    return MetricReport(
        task="vqa-accuracy",
        columns=list(VQA_COLUMNS),
        rows=rows,
        metadata=metadata or {},
    )


def build_quantity_report(
    errors: Mapping[str, "QuantityError"],
    metadata: dict[str, str] | None = None,
) -> MetricReport:
    rows: dict[str, list[Cell]] = {}
    for model_id in sorted(errors):
        err = errors[model_id]
        rows[model_id] = [err.mean_relative_error, err.unparsed_count]
    return MetricReport(
        task="quantity-error",
        columns=list(QUANTITY_COLUMNS),
        rows=rows,
        metadata=metadata or {},
        decimals=4,
        better="min",
    )
