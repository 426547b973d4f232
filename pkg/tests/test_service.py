import http.client
import json
import shutil
import subprocess
import sys
import threading
import time
import urllib.error
import urllib.request
from pathlib import Path

import pytest

from skybench.errors import DataError
from skybench.service import (
    AnnotationBackend,
    ServiceError,
    make_server,
    read_log_objects,
)

FIXTURES = Path(__file__).parent / "fixtures"

DATA_FILES = (
    "captions.jsonl", "qa.jsonl", "caption_predictions.jsonl",
    "vqa_predictions.jsonl", "images.jsonl",
)


def _make_data_dir(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    for name in DATA_FILES:
        shutil.copy(FIXTURES / name, data / name)
    return data


def _rating(rating_id, grade="A", rater="r1", image="img1", model="m-exact",
            dimension="detail"):
    return {
        "rating_id": rating_id, "rater_id": rater, "model_id": model,
        "image_id": image, "dimension": dimension, "grade": grade,
    }


def _judgment(judgment_id, question="q1", model="m1", verdict="correct",
              rater="r1"):
    return {
        "judgment_id": judgment_id, "question_id": question,
        "model_id": model, "verdict": verdict, "rater_id": rater,
    }


# -- backend -----------------------------------------------------------

def test_tasks_built_from_prediction_files(tmp_path):
    backend = AnnotationBackend(_make_data_dir(tmp_path))
    listing = backend.task_list()
    by_id = {t["task_id"]: t for t in listing["tasks"]}
    assert by_id["caption-rating"]["total"] == 6
    assert by_id["caption-rating"]["kind"] == "caption_rating"
    assert by_id["vqa-adjudication"]["total"] == 5
    assert set(listing["rubric"]) == {"detail", "position", "hallucination"}


def test_empty_data_dir_has_no_tasks(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    backend = AnnotationBackend(empty)
    assert backend.task_list()["tasks"] == []


def test_missing_data_dir_raises(tmp_path):
    with pytest.raises(DataError):
        AnnotationBackend(tmp_path / "void")


def test_next_item_order_and_stability(tmp_path):
    backend = AnnotationBackend(_make_data_dir(tmp_path))
    first = backend.next_item("caption-rating", "r1")
    assert (first.image_id, first.model_id) == ("img1", "m-exact")
    assert backend.next_item("caption-rating", "r1") == first


def test_item_completes_after_all_three_dimensions(tmp_path):
    backend = AnnotationBackend(_make_data_dir(tmp_path))
    for n, dimension in enumerate(("detail", "position", "hallucination")):
        backend.record_rating(_rating(f"x{n}", dimension=dimension))
        item = backend.next_item("caption-rating", "r1")
        if dimension != "hallucination":
            assert (item.image_id, item.model_id) == ("img1", "m-exact")
    assert (item.image_id, item.model_id) == ("img1", "m-short")


def test_progress_is_per_rater(tmp_path):
    backend = AnnotationBackend(_make_data_dir(tmp_path))
    for n, dimension in enumerate(("detail", "position", "hallucination")):
        backend.record_rating(_rating(f"x{n}", dimension=dimension, rater="r1"))
    backend.record_rating(_rating("y0", rater="r2"))
    progress = backend.progress("caption-rating", rater_id="r1")
    assert progress["total"] == 6
    assert progress["done"] == 1
    assert progress["per_rater"] == {"r1": 1, "r2": 0}


def test_duplicate_rating_not_persisted_twice(tmp_path):
    data = _make_data_dir(tmp_path)
    backend = AnnotationBackend(data)
    assert backend.record_rating(_rating("x1")) == "stored"
    assert backend.record_rating(_rating("x1")) == "duplicate"
    lines = (data / "ratings.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1


def test_rating_validation_errors(tmp_path):
    backend = AnnotationBackend(_make_data_dir(tmp_path))
    with pytest.raises(ServiceError) as err:
        backend.record_rating(_rating("x1", grade="E"))
    assert err.value.status == 400
    with pytest.raises(ServiceError) as err:
        backend.record_rating(_rating("x1", image="ghost"))
    assert err.value.status == 404
    with pytest.raises(ServiceError):
        backend.record_rating({"rating_id": "x"})


def test_judgment_flow_and_idempotency(tmp_path):
    data = _make_data_dir(tmp_path)
    backend = AnnotationBackend(data)
    first = backend.next_item("vqa-adjudication", "r1")
    assert first.question_id == "q1"
    assert first.gold == "yes"
    assert backend.record_judgment(_judgment("j1")) == "stored"
    assert backend.record_judgment(_judgment("j1")) == "duplicate"
    lines = (data / "judgments.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1
    second = backend.next_item("vqa-adjudication", "r1")
    assert second.question_id == "q2"


def test_judgment_validation(tmp_path):
    backend = AnnotationBackend(_make_data_dir(tmp_path))
    with pytest.raises(ServiceError) as err:
        backend.record_judgment(_judgment("j1", verdict="maybe"))
    assert err.value.status == 400
    with pytest.raises(ServiceError) as err:
        backend.record_judgment(_judgment("j1", question="q99"))
    assert err.value.status == 404


def test_unknown_task_raises_404(tmp_path):
    backend = AnnotationBackend(_make_data_dir(tmp_path))
    with pytest.raises(ServiceError) as err:
        backend.next_item("captions", "r1")
    assert err.value.status == 404


def test_export_contains_exactly_the_stored_records(tmp_path):
    backend = AnnotationBackend(_make_data_dir(tmp_path))
    backend.record_rating(_rating("x1", grade="A"))
    backend.record_rating(_rating("x2", grade="B", dimension="position"))
    backend.record_rating(_rating("x1", grade="D"))  # duplicate, dropped
    lines = backend.export("caption-rating").splitlines()
    assert [json.loads(l)["rating_id"] for l in lines] == ["x1", "x2"]
    assert json.loads(lines[0])["grade"] == "A"


def test_crash_replay_reconstructs_state(tmp_path):
    data = _make_data_dir(tmp_path)
    backend = AnnotationBackend(data)
    for n, dimension in enumerate(("detail", "position", "hallucination")):
        backend.record_rating(_rating(f"x{n}", dimension=dimension))
    backend.record_judgment(_judgment("j1"))
    # simulate a crash mid-append: torn trailing line in both logs
    with (data / "ratings.jsonl").open("a", encoding="utf-8") as f:
        f.write('{"rating_id": "torn')
    with (data / "judgments.jsonl").open("a", encoding="utf-8") as f:
        f.write('{"judgment_id": "torn')

    reborn = AnnotationBackend(data)
    assert reborn.export("caption-rating") == backend.export("caption-rating")
    assert reborn.export("vqa-adjudication") == backend.export("vqa-adjudication")
    assert reborn.progress("caption-rating", "r1")["done"] == 1
    next_item = reborn.next_item("vqa-adjudication", "r1")
    assert next_item.question_id == "q2"


def test_concurrent_raters_do_not_lose_updates(tmp_path):
    data = _make_data_dir(tmp_path)
    backend = AnnotationBackend(data)
    errors = []

    def submit(rater, start):
        try:
            for n in range(20):
                backend.record_rating(
                    _rating(f"{rater}-{n}", rater=rater,
                            dimension="detail", grade="B"))
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [
        threading.Thread(target=submit, args=(f"r{i}", i)) for i in range(4)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    lines = (data / "ratings.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 80
    ids = {json.loads(l)["rating_id"] for l in lines}
    assert len(ids) == 80


# -- HTTP layer --------------------------------------------------------

@pytest.fixture
def server(tmp_path):
    data = _make_data_dir(tmp_path)
    # give one image a real raster so /api/images has something to serve
    png = bytes.fromhex(
        "89504e470d0a1a0a0000000d49484452000000010000000108060000001f15c489"
        "0000000d4944415478da63fccff0bf1e000554027aabad28660000000049454e44"
        "ae426082"
    )
    (data / "img1.png").write_bytes(png)
    rows = [json.loads(l) for l in
            (data / "images.jsonl").read_text(encoding="utf-8").splitlines()]
    rows[0]["uri"] = "img1.png"
    rows.append({"image_id": "escape", "width": 1, "height": 1,
                 "modality": "color", "uri": "../outside.png"})
    (data / "images.jsonl").write_text(
        "".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")

    ui_dir = tmp_path / "ui"
    ui_dir.mkdir()
    (ui_dir / "index.html").write_text("<h1>rater</h1>", encoding="utf-8")
    (tmp_path / "secret.txt").write_text("keep out", encoding="utf-8")

    backend = AnnotationBackend(data)
    httpd = make_server(backend, port=0, ui_dir=ui_dir)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{httpd.server_address[1]}"
    finally:
        httpd.shutdown()
        httpd.server_close()


def _get(url):
    try:
        with urllib.request.urlopen(url) as resp:
            return resp.status, resp.read(), resp.headers.get("Content-Type", "")
    except urllib.error.HTTPError as err:
        return err.code, err.read(), err.headers.get("Content-Type", "")


def _post(url, obj):
    request = urllib.request.Request(
        url, data=json.dumps(obj).encode("utf-8"),
        headers={"Content-Type": "application/json"}, method="POST")
    try:
        with urllib.request.urlopen(request) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def test_http_task_listing(server):
    status, body, ctype = _get(f"{server}/api/tasks")
    assert status == 200
    assert ctype.startswith("application/json")
    listing = json.loads(body)
    assert {t["task_id"] for t in listing["tasks"]} == {
        "caption-rating", "vqa-adjudication",
    }
    assert "detail" in listing["rubric"]


def test_http_rating_round_trip(server):
    status, body, _ = _get(f"{server}/api/tasks/caption-rating/next?rater_id=r1")
    assert status == 200
    item = json.loads(body)["item"]
    assert item["image_id"] == "img1"

    submission = _rating("http-1")
    submission["image_id"] = item["image_id"]
    submission["model_id"] = item["model_id"]
    status, reply = _post(f"{server}/api/ratings", submission)
    assert (status, reply["status"]) == (200, "stored")
    status, reply = _post(f"{server}/api/ratings", submission)
    assert (status, reply["status"]) == (200, "duplicate")

    status, body, _ = _get(f"{server}/api/progress?task_id=caption-rating&rater_id=r1")
    progress = json.loads(body)
    assert progress["total"] == 6
    assert progress["done"] == 0  # one dimension is not a finished item

    status, body, ctype = _get(f"{server}/api/export?task_id=caption-rating")
    assert status == 200
    assert ctype.startswith("text/plain")
    assert len(body.decode("utf-8").splitlines()) == 1


def test_http_judgment_round_trip(server):
    status, body, _ = _get(f"{server}/api/tasks/vqa-adjudication/next?rater_id=r9")
    item = json.loads(body)["item"]
    assert item["question_id"] == "q1"
    assert item["gold"] == "yes"
    assert item["question"].startswith("Is there")

    status, reply = _post(f"{server}/api/judgments", _judgment("http-j1", rater="r9"))
    assert reply["status"] == "stored"
    status, body, _ = _get(f"{server}/api/tasks/vqa-adjudication/next?rater_id=r9")
    assert json.loads(body)["item"]["question_id"] == "q2"


def test_http_exhaustion_marker(server):
    for n, question in enumerate(["q1", "q2", "q3", "q4", "q5"]):
        _post(f"{server}/api/judgments",
              _judgment(f"ex-{n}", question=question, rater="r-all"))
    status, body, _ = _get(f"{server}/api/tasks/vqa-adjudication/next?rater_id=r-all")
    assert status == 200
    reply = json.loads(body)
    assert reply["exhausted"] is True
    assert reply["item"] is None


def test_http_validation_errors(server):
    status, reply = _post(f"{server}/api/ratings", _rating("bad-1", grade="E"))
    assert status == 400
    assert "grade" in reply["error"]
    status, _, _ = _get(f"{server}/api/tasks/nope/next?rater_id=r1")
    assert status == 404
    status, _, _ = _get(f"{server}/api/tasks/caption-rating/next")
    assert status == 400
    status, reply = _post(f"{server}/api/judgments", {"judgment_id": "x"})
    assert status == 400


def test_http_image_serving(server):
    status, body, ctype = _get(f"{server}/api/images/img1")
    assert status == 200
    assert ctype == "image/png"
    assert body[:4] == b"\x89PNG"
    status, _, _ = _get(f"{server}/api/images/ghost")
    assert status == 404
    # manifest uri pointing outside the data dir is refused
    status, _, _ = _get(f"{server}/api/images/escape")
    assert status == 403


def test_http_static_ui(server):
    status, body, ctype = _get(f"{server}/")
    assert status == 200
    assert b"rater" in body
    assert ctype.startswith("text/html")
    status, _, _ = _get(f"{server}/missing.js")
    assert status == 404


def test_http_path_traversal_blocked(server):
    host = server[len("http://"):]
    conn = http.client.HTTPConnection(host, timeout=5)
    # raw request line; urllib would normalize the dots away
    conn.putrequest("GET", "/../secret.txt", skip_host=False)
    conn.endheaders()
    resp = conn.getresponse()
    assert resp.status in (403, 404)
    assert b"keep out" not in resp.read()
    conn.close()


def test_serve_command_boots_and_answers(tmp_path):
    data = _make_data_dir(tmp_path)
    proc = subprocess.Popen(
        [sys.executable, "-m", "skybench", "serve", "--port", "0",
         "--data", str(data)],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
    )
    try:
        line = proc.stdout.readline().strip()
        assert line.startswith("serving on http://")
        base = line.split(" ", 2)[2]
        deadline = time.time() + 10
        while True:
            try:
                status, body, _ = _get(f"{base}/api/tasks")
                break
            except OSError:
                if time.time() > deadline:
                    raise
                time.sleep(0.05)
        assert status == 200
        assert json.loads(body)["tasks"]
    finally:
        proc.terminate()
        proc.wait(timeout=10)
