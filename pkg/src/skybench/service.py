"""Local annotation backend for human rating and VQA adjudication.

Tasks are built once at startup from the prediction files in the data
directory. Submissions go through a single lock and are flushed and
fsynced to an append-only log before the response is sent, so a crash
at any point replays to the same state. Client-generated ids make
retries idempotent.
"""

from __future__ import annotations

import json
import mimetypes
import os
import threading
import time
from dataclasses import asdict, dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .corpus import (
    load_caption_predictions,
    load_images,
    load_qa,
    load_vqa_predictions,
)
from .errors import DataError
from .rating import DEFAULT_RUBRIC, RatingLog, RatingRecord, load_ratings
from .vqa import Judgment

RATINGS_FILE = "ratings.jsonl"
JUDGMENTS_FILE = "judgments.jsonl"
CAPTION_PREDICTIONS_FILE = "caption_predictions.jsonl"
VQA_PREDICTIONS_FILE = "vqa_predictions.jsonl"
QA_FILE = "qa.jsonl"
IMAGES_FILE = "images.jsonl"
RUBRIC_FILE = "rubric.json"

CAPTION_TASK = "caption-rating"
VQA_TASK = "vqa-adjudication"


class ServiceError(Exception):
    def __init__(self, status: int, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass(frozen=True)
class TaskItem:
    index: int
    image_id: str
    model_id: str
    payload: str
    gold: str | None = None
    question_id: str | None = None
    question: str | None = None


@dataclass(frozen=True)
class Task:
    task_id: str
    kind: str
    items: tuple[TaskItem, ...]


def _append_durable(path: Path, line: str) -> None:
    with path.open("a", encoding="utf-8") as handle:
        handle.write(line + "\n")
        handle.flush()
        os.fsync(handle.fileno())


def read_log_objects(path: str | Path) -> list[dict]:
    """JSON objects from an append-only log; a torn final line is dropped."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        lines = handle.readlines()
    out: list[dict] = []
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            out.append(json.loads(raw))
        except json.JSONDecodeError as exc:
            if lineno == len(lines):
                break
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    return out


class AnnotationBackend:
    """All service state; the HTTP layer is a thin shell around this."""

    def __init__(self, data_dir: str | Path) -> None:
        self.data_dir = Path(data_dir)
        if not self.data_dir.is_dir():
            raise DataError(f"data directory not found: {self.data_dir}")
        self._lock = threading.Lock()
        self._tasks: dict[str, Task] = {}
        self._build_tasks()
        self._load_rubric()
        self._replay_logs()

    def _build_tasks(self) -> None:
        cap_path = self.data_dir / CAPTION_PREDICTIONS_FILE
        if cap_path.exists():
            preds = load_caption_predictions(cap_path)
            items = tuple(
                TaskItem(
                    index=i,
                    image_id=p.image_id,
                    model_id=p.model_id,
                    payload=p.text,
                )
                for i, p in enumerate(
                    sorted(preds, key=lambda p: (p.image_id, p.model_id))
                )
            )
            if items:
                self._tasks[CAPTION_TASK] = Task(CAPTION_TASK, "caption_rating", items)

        vqa_path = self.data_dir / VQA_PREDICTIONS_FILE
        qa_path = self.data_dir / QA_FILE
        if vqa_path.exists():
            if not qa_path.exists():
                raise DataError(f"{VQA_PREDICTIONS_FILE} present without {QA_FILE}")
            questions = {q.question_id: q for q in load_qa(qa_path)}
            preds = load_vqa_predictions(vqa_path)
            for p in preds:
                if p.target not in questions:
                    raise DataError(f"prediction for unknown question {p.target!r}")
            items = tuple(
                TaskItem(
                    index=i,
                    image_id=p.image_id,
                    model_id=p.model_id,
                    payload=p.text,
                    gold=questions[p.target].gold_answer,
                    question_id=p.target,
                    question=questions[p.target].question,
                )
                for i, p in enumerate(
                    sorted(preds, key=lambda p: (p.image_id, p.target, p.model_id))
                )
            )
            if items:
                self._tasks[VQA_TASK] = Task(VQA_TASK, "vqa_adjudication", items)

        self._caption_keys = {
            (it.image_id, it.model_id)
            for it in self._tasks.get(CAPTION_TASK, Task("", "", ())).items
        }
        self._vqa_keys = {
            (it.question_id, it.model_id)
            for it in self._tasks.get(VQA_TASK, Task("", "", ())).items
        }

        self._images: dict[str, str] = {}
        img_path = self.data_dir / IMAGES_FILE
        if img_path.exists():
            for record in load_images(img_path):
                if record.uri:
                    self._images[record.image_id] = record.uri

    def _load_rubric(self) -> None:
        rubric_path = self.data_dir / RUBRIC_FILE
        if rubric_path.exists():
            self.rubric = json.loads(rubric_path.read_text(encoding="utf-8"))
        else:
            self.rubric = DEFAULT_RUBRIC

    def _replay_logs(self) -> None:
        ratings_path = self.data_dir / RATINGS_FILE
        if ratings_path.exists():
            self._ratings = load_ratings(ratings_path)
        else:
            self._ratings = RatingLog()

        self._judgments: list[Judgment] = []
        self._judgment_ids: set[str] = set()
        judgments_path = self.data_dir / JUDGMENTS_FILE
        if judgments_path.exists():
            for obj in read_log_objects(judgments_path):
                self._store_judgment_obj(obj, persist=False)

    # -- submissions ---------------------------------------------------

    def record_rating(self, obj: dict) -> str:
        try:
            record = RatingRecord(
                rating_id=obj["rating_id"],
                rater_id=obj["rater_id"],
                model_id=obj["model_id"],
                image_id=obj["image_id"],
                dimension=obj["dimension"],
                grade=obj["grade"],
                created_at=float(obj.get("created_at") or time.time()),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError(400, f"bad rating submission: {exc}") from exc
        if (record.image_id, record.model_id) not in self._caption_keys:
            raise ServiceError(404, "no such item in the rating task")
        with self._lock:
            try:
                status = self._ratings.record(record)
            except DataError as exc:
                raise ServiceError(400, str(exc)) from exc
            if status == "stored":
                line = json.dumps(asdict(record), ensure_ascii=False)
                _append_durable(self.data_dir / RATINGS_FILE, line)
        return status

    def _store_judgment_obj(self, obj: dict, persist: bool) -> str:
        try:
            judgment = Judgment(
                question_id=obj["question_id"],
                model_id=obj["model_id"],
                verdict=obj["verdict"],
                source=obj.get("source", "human"),
                rater_id=obj.get("rater_id"),
                judgment_id=obj["judgment_id"],
                created_at=float(obj.get("created_at") or time.time()),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError(400, f"bad judgment submission: {exc}") from exc
        if judgment.verdict not in ("correct", "incorrect"):
            raise ServiceError(400, f"bad verdict {judgment.verdict!r}")
        if not judgment.rater_id:
            raise ServiceError(400, "rater_id is required")
        if persist and (judgment.question_id, judgment.model_id) not in self._vqa_keys:
            # only new submissions must match an item; replay accepts any
            # record the log already holds
            raise ServiceError(404, "no such item in the adjudication task")
        if judgment.judgment_id in self._judgment_ids:
            return "duplicate"
        self._judgment_ids.add(judgment.judgment_id)
        self._judgments.append(judgment)
        if persist:
            obj_out = {k: v for k, v in asdict(judgment).items() if v is not None}
            _append_durable(
                self.data_dir / JUDGMENTS_FILE,
                json.dumps(obj_out, ensure_ascii=False),
            )
        return "stored"

    def record_judgment(self, obj: dict) -> str:
        with self._lock:
            return self._store_judgment_obj(obj, persist=True)

    # -- task queue ----------------------------------------------------

    def task(self, task_id: str) -> Task:
        task = self._tasks.get(task_id)
        if task is None:
            raise ServiceError(404, f"unknown task: {task_id!r}")
        return task

    def task_list(self) -> dict:
        return {
            "tasks": [
                {
                    "task_id": t.task_id,
                    "kind": t.kind,
                    "total": len(t.items),
                }
                for t in self._tasks.values()
            ],
            "rubric": self.rubric,
        }

    def _item_done(self, task: Task, item: TaskItem, rater_id: str) -> bool:
        if task.kind == "caption_rating":
            rated = {
                r.dimension
                for r in self._ratings.records()
                if r.rater_id == rater_id
                and r.model_id == item.model_id
                and r.image_id == item.image_id
            }
            return len(rated) == 3
        return any(
            j.rater_id == rater_id
            and j.question_id == item.question_id
            and j.model_id == item.model_id
            for j in self._judgments
        )

    def next_item(self, task_id: str, rater_id: str) -> TaskItem | None:
        if not rater_id:
            raise ServiceError(400, "rater_id is required")
        task = self.task(task_id)
        with self._lock:
            for item in task.items:
                if not self._item_done(task, item, rater_id):
                    return item
        return None

    def progress(self, task_id: str, rater_id: str | None = None) -> dict:
        task = self.task(task_id)
        with self._lock:
            raters: set[str] = set()
            if task.kind == "caption_rating":
                raters = {r.rater_id for r in self._ratings.records()}
            else:
                raters = {j.rater_id for j in self._judgments if j.rater_id}
            per_rater = {
                r: sum(1 for item in task.items if self._item_done(task, item, r))
                for r in sorted(raters)
            }
        out = {"task_id": task_id, "total": len(task.items), "per_rater": per_rater}
        if rater_id is not None:
            out["done"] = per_rater.get(rater_id, 0)
        return out

    def export(self, task_id: str) -> str:
        task = self.task(task_id)
        with self._lock:
            if task.kind == "caption_rating":
                lines = [
                    json.dumps(asdict(r), ensure_ascii=False)
                    for r in self._ratings.records()
                ]
            else:
                lines = [
                    json.dumps(
                        {k: v for k, v in asdict(j).items() if v is not None},
                        ensure_ascii=False,
                    )
                    for j in self._judgments
                ]
        return "".join(line + "\n" for line in lines)

    def image_bytes(self, image_id: str) -> tuple[bytes, str]:
        uri = self._images.get(image_id)
        if uri is None:
            raise ServiceError(404, f"unknown image: {image_id!r}")
        path = (self.data_dir / uri).resolve()
        if not path.is_relative_to(self.data_dir.resolve()):
            raise ServiceError(403, "image path escapes the data directory")
        if not path.is_file():
            raise ServiceError(404, f"image file missing: {uri}")
        ctype = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return path.read_bytes(), ctype


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    backend: AnnotationBackend
    ui_dir: Path | None = None

    def log_message(self, format: str, *args) -> None:
        pass

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, obj: dict) -> None:
        body = json.dumps(obj, ensure_ascii=False).encode("utf-8")
        self._send(status, body, "application/json; charset=utf-8")

    def _send_error(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _query(self) -> dict[str, str]:
        qs = parse_qs(urlparse(self.path).query)
        return {k: v[0] for k, v in qs.items()}

    def do_GET(self) -> None:
        path = urlparse(self.path).path
        try:
            if path == "/api/tasks":
                self._send_json(200, self.backend.task_list())
            elif path.startswith("/api/tasks/") and path.endswith("/next"):
                task_id = path[len("/api/tasks/"):-len("/next")]
                rater_id = self._query().get("rater_id", "")
                item = self.backend.next_item(task_id, rater_id)
                if item is None:
                    self._send_json(200, {"exhausted": True, "item": None})
                else:
                    self._send_json(200, {"exhausted": False, "item": asdict(item)})
            elif path == "/api/progress":
                params = self._query()
                task_id = params.get("task_id", "")
                self._send_json(
                    200, self.backend.progress(task_id, params.get("rater_id"))
                )
            elif path == "/api/export":
                task_id = self._query().get("task_id", "")
                body = self.backend.export(task_id).encode("utf-8")
                self._send(200, body, "text/plain; charset=utf-8")
            elif path.startswith("/api/images/"):
                image_id = path[len("/api/images/"):]
                body, ctype = self.backend.image_bytes(image_id)
                self._send(200, body, ctype)
            elif self.ui_dir is not None:
                self._send_static(path)
            else:
                self._send_error(404, f"no such endpoint: {path}")
        except ServiceError as exc:
            self._send_error(exc.status, exc.message)
        except Exception as exc:  # pragma: no cover - last resort
            self._send_error(500, f"internal error: {exc}")

    def _send_static(self, path: str) -> None:
        assert self.ui_dir is not None
        relative = path.lstrip("/") or "index.html"
        target = (self.ui_dir / relative).resolve()
        if not target.is_relative_to(self.ui_dir.resolve()):
            self._send_error(403, "path escapes the UI directory")
            return
        if not target.is_file():
            self._send_error(404, f"not found: {path}")
            return
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), ctype)

    def do_POST(self) -> None:
        path = urlparse(self.path).path
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            try:
                obj = json.loads(raw) if raw else {}
            except json.JSONDecodeError as exc:
                raise ServiceError(400, f"invalid JSON body: {exc}") from exc
            if not isinstance(obj, dict):
                raise ServiceError(400, "body must be a JSON object")
            if path == "/api/ratings":
                status = self.backend.record_rating(obj)
                self._send_json(200, {"status": status})
            elif path == "/api/judgments":
                status = self.backend.record_judgment(obj)
                self._send_json(200, {"status": status})
            else:
                self._send_error(404, f"no such endpoint: {path}")
        except ServiceError as exc:
            self._send_error(exc.status, exc.message)
        except Exception as exc:  # pragma: no cover - last resort
            self._send_error(500, f"internal error: {exc}")


def make_server(
    backend: AnnotationBackend,
    host: str = "127.0.0.1",
    port: int = 0,
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "backend": backend,
            "ui_dir": Path(ui_dir) if ui_dir is not None else None,
        },
    )
    return ThreadingHTTPServer((host, port), handler)
