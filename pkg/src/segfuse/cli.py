"""``segfuse`` command line: augment, predict, fuse, evaluate, report and friends.

Exit codes: 0 success, 2 usage error, 3 validation failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .augment import AugSpec, load_spec
from .baseline import BaselinePredictor
from .dataset import corpus_stats, expand_offline, load_manifest, sample_online, verify_files
from .errors import IoError, SegfuseError
from .labelcore import read_class_file
from .report import ReportRow, fmt, render_table, report_csv, rows_from_csv, rows_to_csv

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4


def _write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write ({exc.strerror})", path) from exc


def cmd_evaluate(args):
    cs = read_class_file(args.classes, args.ignore_index)
    cm, row = pipeline.evaluate_dirs(args.gt, args.pred, cs, args.threads, args.model_id)
    print(f"mIoU {fmt(row.miou)}")
    print(f"pixels {row.pixel_count}")
    width = max(len(n) for n in cs.names)
    for info, value in zip(cs.classes, row.per_class_iou):
        print(f"{info.index:>3}  {info.name:<{width}}  {fmt(value)}")
    if args.csv:
        _write_text(args.csv, rows_to_csv([row]))
    return EXIT_OK


def cmd_fuse(args):
    names = pipeline.fuse_dirs(args.member, args.out, args.threads, args.ignore_index)
    print(f"fused {len(names)} file(s) from {len(args.member)} member(s) into {args.out}")
    return EXIT_OK


def _parse_member(text):
    name, sep, value = text.rpartition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected ID=MIOU, got {text!r}")
    try:
        return ReportRow(name, float(value))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _read_rows(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read ({exc.strerror})", path) from exc
    return rows_from_csv(text)


def cmd_report(args):
    rows = list(args.member or [])
    for path in args.member_csv or []:
        rows += _read_rows(path)
    if args.fused is not None:
        fused = ReportRow("fused", args.fused)
    else:
        fused_rows = _read_rows(args.fused_csv)
        if len(fused_rows) != 1:
            print(f"segfuse report: {args.fused_csv} must hold exactly one row", file=sys.stderr)
            return EXIT_VALIDATION
        fused = fused_rows[0]
    if not rows:
        print("segfuse report: at least one member row is required", file=sys.stderr)
        return EXIT_USAGE
    text = render_table(rows, fused)
    sys.stdout.write(text)
    if args.out:
        _write_text(args.out, text)
    if args.csv:
        _write_text(args.csv, report_csv(rows, fused))
    return EXIT_OK


def cmd_augment(args):
    spec = load_spec(args.spec) if args.spec else AugSpec()
    manifest = load_manifest(args.manifest)
    out = expand_offline(manifest, spec, args.out, args.threads)
    print(f"{len(manifest)} record(s) in, {len(out)} record(s) out; manifest at {Path(args.out) / 'manifest.tsv'}")
    if args.online_samples:
        online = sample_online(manifest, spec, args.out, args.online_samples, args.threads)
        print(f"{len(online)} online sample(s); manifest at {Path(args.out) / 'online_manifest.tsv'}")
    return EXIT_OK


def cmd_stats(args):
    stats = corpus_stats(load_manifest(args.manifest), args.threads)
    d = stats.to_dict()
    print(f"records {d['num_records']}")
    print(f"scenes {d['num_scenes']}")
    for split in ("train", "val", "test"):
        print(f"split {split} {d['split_counts'].get(split, 0)}")
    print(f"pixels {d['total_pixels']}")
    print(f"ignored fraction {fmt(d['ignored_fraction'])}")
    for cls, count in d["class_histogram"].items():
        print(f"class {cls} {count}")
    for f in stats.failures:
        print(f, file=sys.stderr)
    if args.json:
        _write_text(args.json, json.dumps(d, indent=2, sort_keys=True) + "\n")
    return EXIT_VALIDATION if stats.failures else EXIT_OK


def cmd_verify(args):
    report = verify_files(load_manifest(args.manifest), args.threads)
    for f in report.failures:
        print(f)
    print(f"{report.num_records} record(s) checked, {len(report.failures)} failure(s)")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_predict(args):
    cs = read_class_file(args.classes, args.ignore_index)
    if args.constant is not None:
        predictor = BaselinePredictor.constant(args.constant, cs)
    else:
        predictor = BaselinePredictor.nearest_color(cs)
    names = pipeline.predict_dir(predictor, args.images, args.out, args.threads)
    print(f"predicted {len(names)} file(s) into {args.out}")
    return EXIT_OK


def cmd_colorize(args):
    cs = read_class_file(args.classes, args.ignore_index)
    names = pipeline.colorize_dir(args.labels, cs, args.out, args.threads)
    print(f"colorized {len(names)} file(s) into {args.out}")
    return EXIT_OK


def _threads(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="segfuse",
        description="Segmentation pipeline tools. Exit codes: 0 ok, 2 usage, 3 validation, 4 I/O.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_threads, default=None,
                        help="worker threads (default: $SEGFUSE_THREADS or 1)")
    common.add_argument("--ignore-index", type=int, default=255)

    p = sub.add_parser("evaluate", parents=[common], help="mIoU of predictions against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--classes", required=True)
    p.add_argument("--csv")
    p.add_argument("--model-id", default="model")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fuse", parents=[common], help="hard-vote several prediction directories")
    p.add_argument("--member", action="append", required=True, metavar="DIR")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("report", help="member vs fused mIoU table")
    p.add_argument("--member", action="append", type=_parse_member, metavar="ID=MIOU")
    p.add_argument("--member-csv", action="append", metavar="CSV", help="row CSV written by evaluate --csv")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--fused", type=float, metavar="MIOU")
    g.add_argument("--fused-csv", metavar="CSV")
    p.add_argument("--out", help="also write the text table here")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("augment", parents=[common], help="offline contrast/brightness expansion")
    p.add_argument("--manifest", required=True)
    p.add_argument("--spec")
    p.add_argument("--out", required=True)
    p.add_argument("--online-samples", type=int, default=0, metavar="N",
                   help="also write N seeded pad/crop/flip samples per train record")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("stats", parents=[common], help="corpus statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--json")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("verify", parents=[common], help="check manifest files")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("predict", parents=[common], help="baseline label-map predictions")
    p.add_argument("--images", required=True)
    p.add_argument("--classes", required=True)
    p.add_argument("--out", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--constant", type=int, metavar="CLASS")
    g.add_argument("--nearest-color", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("colorize", parents=[common], help="render label maps with class colors")
    p.add_argument("--labels", required=True)
    p.add_argument("--classes", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_colorize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "threads"):
        try:
            args.threads = pipeline.resolve_threads(args.threads)
        except ValueError as exc:
            parser.error(f"SEGFUSE_THREADS: {exc}")
    try:
        return args.func(args)
    except SegfuseError as exc:
        print(f"segfuse {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"segfuse {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"segfuse {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
