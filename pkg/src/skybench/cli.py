"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or file error, 3
anything unexpected. The default data directory for serve/export can
be set through the SKYBENCH_DATA environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (
    ImageRecord,
    load_captions,
    load_caption_predictions,
    load_images,
    load_qa,
    load_vqa_predictions,
    resolve_predictions,
    save_images,
)
from .errors import DataError
from .metrics import METRIC_NAMES, MetricConfig, evaluate_captions
from .rating import load_ratings, rating_report
from .report import (
    build_caption_report,
    build_quantity_report,
    build_vqa_report,
    fingerprint_config,
    fingerprint_files,
    parse,
    render,
)
from .service import AnnotationBackend, make_server, read_log_objects
from .stats import corpus_stats
from .tiling import crop, patch_name, plan_tiles, sample_windows
from .vqa import (
    accuracy_table,
    auto_judge,
    load_judgments,
    merge_judgments,
    quantity_pairs,
    quantity_relative_error,
)

DATA_ENV_VAR = "SKYBENCH_DATA"

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp")

_FORMAT_BY_SUFFIX = {
    ".md": "markdown",
    ".markdown": "markdown",
    ".csv": "csv",
    ".jsonl": "json-lines",
}


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


def _pick_format(out: str | None, explicit: str | None) -> str:
    if explicit:
        return explicit
    if out is None:
        return "markdown"
    fmt = _FORMAT_BY_SUFFIX.get(Path(out).suffix.lower())
    if fmt is None:
        raise UsageError(
            f"cannot infer format from {out!r}; pass --format"
        )
    return fmt


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _report_metadata(args, config_fp: str, input_paths: list[str]) -> dict[str, str]:
    metadata = {
        "config": config_fp,
        "corpus": fingerprint_files(input_paths),
    }
    if not args.reproducible:
        metadata["created_at"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    return metadata


# -- subcommands -------------------------------------------------------


def _cmd_tile(args) -> int:
    from PIL import Image

    input_path = Path(args.input)
    if input_path.is_dir():
        sources = sorted(
            p for p in input_path.iterdir()
            if p.suffix.lower() in _IMAGE_SUFFIXES
        )
        if not sources:
            raise DataError(f"no image files in {input_path}")
    elif input_path.is_file():
        sources = [input_path]
    else:
        raise DataError(f"input not found: {input_path}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: list[ImageRecord] = []
    for source in sources:
        raster = np.asarray(Image.open(source))
        height, width = raster.shape[:2]
        modality = "panchromatic" if raster.ndim == 2 else "color"
        windows = plan_tiles(width, height, tile=args.size)
        if args.sample is not None:
            windows = sample_windows(windows, args.sample, seed=args.seed)
        for window in windows:
            name = patch_name(source.stem, window)
            patch = crop(raster, window)
            Image.fromarray(patch).save(out_dir / f"{name}.png")
            manifest.append(
                ImageRecord(
                    image_id=name,
                    width=window.w,
                    height=window.h,
                    modality=modality,
                    uri=f"{name}.png",
                )
            )
    save_images(manifest, out_dir / "images.jsonl")
    print(f"wrote {len(manifest)} patches to {out_dir}")
    return 0


def _cmd_stats(args) -> int:
    captions = load_captions(args.captions)
    images = load_images(args.images) if args.images else ()
    stats = corpus_stats(captions, images)
    text = json.dumps(stats.to_dict(), indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    if args.hist_csv:
        lines = ["histogram,bin,count"]
        for name, hist in (
            ("token_length", stats.token_length_histogram),
            ("sentence_count", stats.sentence_count_histogram),
        ):
            for edge in sorted(hist):
                lines.append(f"{name},{edge},{hist[edge]}")
        Path(args.hist_csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _parse_metrics(raw: str) -> tuple[str, ...]:
    names = tuple(name.strip() for name in raw.split(",") if name.strip())
    for name in names:
        if name not in METRIC_NAMES:
            raise UsageError(f"unknown metric {name!r}; choose from {METRIC_NAMES}")
    if not names:
        raise UsageError("at least one metric is required")
    return names


def _cmd_eval_captions(args) -> int:
    references = load_captions(args.refs)
    predictions = load_caption_predictions(args.preds)
    resolved, unresolved = resolve_predictions(predictions, captions=references)
    if unresolved:
        first = unresolved[0]
        raise DataError(
            f"{len(unresolved)} predictions have no reference captions "
            f"(first: model {first.model_id!r}, image {first.image_id!r})"
        )
    if not resolved:
        raise DataError("no predictions to score")

    by_model: dict[str, dict[str, str]] = {}
    for pred in resolved:
        by_model.setdefault(pred.model_id, {})[pred.image_id] = pred.text
    by_image: dict[str, list[str]] = {}
    for ref in references:
        by_image.setdefault(ref.image_id, []).append(ref.text)

    config = MetricConfig(
        bleu_smooth=args.smooth,
        cider_variant=args.cider_variant,
    )
    scores = evaluate_captions(
        by_model, by_image, config=config, metrics=_parse_metrics(args.metrics)
    )
    metadata = _report_metadata(args, config.fingerprint(), [args.refs, args.preds])
    report = build_caption_report(scores, metadata=metadata)
    fmt = _pick_format(args.out, args.format)
    _emit(render(report, fmt), args.out)
    return 0


def _cmd_eval_vqa(args) -> int:
    qa_records = load_qa(args.qa)
    predictions = load_vqa_predictions(args.preds)
    resolved, unresolved = resolve_predictions(predictions, qa=qa_records)
    if unresolved:
        first = unresolved[0]
        raise DataError(
            f"{len(unresolved)} predictions reference unknown questions "
            f"(first: model {first.model_id!r}, target {first.target!r})"
        )
    if not resolved:
        raise DataError("no predictions to score")

    judgments = auto_judge(qa_records, resolved)
    if args.mode == "adjudicated":
        if not args.judgments:
            raise UsageError("--mode adjudicated requires --judgments")
        human = load_judgments(args.judgments)
        judgments = merge_judgments(judgments, human)

    config_fp = fingerprint_config({"judge": "equality-first-v1", "mode": args.mode})
    input_paths = [args.qa, args.preds]
    if args.judgments:
        input_paths.append(args.judgments)
    metadata = _report_metadata(args, config_fp, input_paths)

    table = accuracy_table(judgments, qa_records)
    report = build_vqa_report(table, metadata=metadata)
    fmt = _pick_format(args.out, args.format)
    _emit(render(report, fmt), args.out)

    if args.quantity_out:
        pairs = quantity_pairs(qa_records, resolved)
        errors = {
            model: quantity_relative_error(model_pairs)
            for model, model_pairs in pairs.items()
        }
        q_report = build_quantity_report(errors, metadata=metadata)
        q_fmt = _pick_format(args.quantity_out, args.format)
        _emit(render(q_report, q_fmt), args.quantity_out)
    return 0


def _data_dir(args) -> str:
    data = args.data or os.environ.get(DATA_ENV_VAR)
    if not data:
        raise UsageError(f"--data is required (or set {DATA_ENV_VAR})")
    return data


def _cmd_serve(args) -> int:
    backend = AnnotationBackend(_data_dir(args))
    server = make_server(backend, host=args.host, port=args.port, ui_dir=args.ui)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_export(args) -> int:
    data_dir = Path(_data_dir(args))
    if args.kind == "ratings":
        path = data_dir / "ratings.jsonl"
        if not path.exists():
            raise DataError(f"no ratings log in {data_dir}")
        log = load_ratings(path)
        lines = [json.dumps(asdict(r), ensure_ascii=False) for r in log.records()]
    else:
        path = data_dir / "judgments.jsonl"
        if not path.exists():
            raise DataError(f"no judgments log in {data_dir}")
        seen: set[str] = set()
        lines = []
        for obj in read_log_objects(path):
            jid = obj.get("judgment_id")
            if jid is not None:
                if jid in seen:
                    continue
                seen.add(jid)
            lines.append(json.dumps(obj, ensure_ascii=False))
    _emit("".join(line + "\n" for line in lines), args.out)
    return 0


def _cmd_report(args) -> int:
    if (args.infile is None) == (args.ratings is None):
        raise UsageError("pass exactly one of --in or --ratings")
    if args.infile is not None:
        text = Path(args.infile).read_text(encoding="utf-8")
        in_fmt = _pick_format(args.infile, None)
        report = parse(text, in_fmt)
    else:
        if not args.models:
            raise UsageError("--ratings requires --models")
        log = load_ratings(args.ratings)
        models = [m.strip() for m in args.models.split(",") if m.strip()]
        report = rating_report(log, models)
    fmt = _pick_format(args.out, args.format)
    _emit(render(report, fmt), args.out)
    return 0


# -- parser ------------------------------------------------------------


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="skybench",
        description="Evaluation harness for remote-sensing captioning and VQA.",
    )
    parser.add_argument("--version", action="version", version=f"skybench {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    p_tile = sub.add_parser("tile", help="cut large rasters into fixed-size patches")
    p_tile.add_argument("--input", required=True, help="image file or directory")
    p_tile.add_argument("--size", type=int, default=512)
    p_tile.add_argument("--sample", type=int, default=None, help="windows per image")
    p_tile.add_argument("--seed", type=int, default=0)
    p_tile.add_argument("--out", required=True, help="output directory")
    p_tile.set_defaults(func=_cmd_tile)

    p_stats = sub.add_parser("stats", help="corpus statistics")
    p_stats.add_argument("--captions", required=True)
    p_stats.add_argument("--images", default=None)
    p_stats.add_argument("--out", default=None)
    p_stats.add_argument("--hist-csv", dest="hist_csv", default=None)
    p_stats.set_defaults(func=_cmd_stats)

    p_cap = sub.add_parser("eval-captions", help="score caption predictions")
    p_cap.add_argument("--refs", required=True, help="reference captions (jsonl)")
    p_cap.add_argument("--preds", required=True, help="caption predictions (jsonl)")
    p_cap.add_argument("--metrics", default=",".join(METRIC_NAMES))
    p_cap.add_argument("--cider-variant", dest="cider_variant",
                       choices=["cider", "cider_d"], default="cider_d")
    p_cap.add_argument("--smooth", action="store_true",
                       help="add-one smoothing for BLEU n>=2")
    p_cap.add_argument("--out", default=None)
    p_cap.add_argument("--format", choices=["markdown", "csv", "json-lines"],
                       default=None)
    p_cap.add_argument("--reproducible", action="store_true",
                       help="omit timestamps so output is byte-stable")
    p_cap.set_defaults(func=_cmd_eval_captions)

    p_vqa = sub.add_parser("eval-vqa", help="score short-answer predictions")
    p_vqa.add_argument("--qa", required=True, help="questions with gold answers (jsonl)")
    p_vqa.add_argument("--preds", required=True, help="answer predictions (jsonl)")
    p_vqa.add_argument("--mode", choices=["auto", "adjudicated"], default="auto")
    p_vqa.add_argument("--judgments", default=None, help="human judgments (jsonl)")
    p_vqa.add_argument("--out", default=None)
    p_vqa.add_argument("--quantity-out", dest="quantity_out", default=None,
                       help="also write the quantity relative-error table here")
    p_vqa.add_argument("--format", choices=["markdown", "csv", "json-lines"],
                       default=None)
    p_vqa.add_argument("--reproducible", action="store_true",
                       help="omit timestamps so output is byte-stable")
    p_vqa.set_defaults(func=_cmd_eval_vqa)

    p_serve = sub.add_parser("serve", help="run the annotation service")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data", default=None,
                         help=f"data directory (default ${DATA_ENV_VAR})")
    p_serve.add_argument("--ui", default=None, help="static UI directory to serve at /")
    p_serve.set_defaults(func=_cmd_serve)

    p_export = sub.add_parser("export", help="dump annotation logs")
    p_export.add_argument("--data", default=None,
                          help=f"data directory (default ${DATA_ENV_VAR})")
    p_export.add_argument("--kind", choices=["ratings", "judgments"], required=True)
    p_export.add_argument("--out", default=None)
    p_export.set_defaults(func=_cmd_export)

    p_report = sub.add_parser("report", help="re-render a saved report")
    p_report.add_argument("--in", dest="infile", default=None,
                          help="machine-readable report (csv or jsonl)")
    p_report.add_argument("--ratings", default=None, help="ratings log (jsonl)")
    p_report.add_argument("--models", default=None,
                          help="comma-separated model ids for --ratings")
    p_report.add_argument("--out", default=None)
    p_report.add_argument("--format", choices=["markdown", "csv", "json-lines"],
                          default=None)
    p_report.set_defaults(func=_cmd_report)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # argparse exits directly for --help/--version
        code = exc.code
        return 0 if code in (0, None) else 1

    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - catch-all for exit code 3
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
