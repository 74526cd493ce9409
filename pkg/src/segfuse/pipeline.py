"""Directory-level operations behind the CLI subcommands.

Files are paired across directories by name, never by listing order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import reduce
from pathlib import Path

from .baseline import BaselinePredictor, predict
from .errors import ClassOutOfRange, DimensionMismatch, IoError, MemberShapeMismatch, MissingCounterpart
from .fusion import VoteStack, hard_vote
from .labelcore import (
    ClassSet,
    ConfusionMatrix,
    colorize,
    confusion_counts,
    iou_per_class,
    merge,
    miou,
    read_image_png,
    read_label_png,
    write_image_png,
    write_label_png,
)
from .report import ReportRow


def resolve_threads(threads=None) -> int:
    """``--threads`` value, else ``SEGFUSE_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("SEGFUSE_THREADS", "").strip()
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def parallel_map(fn, items, threads=1):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def list_pngs(directory) -> list[str]:
    directory = Path(directory)
    if not directory.is_dir():
        raise IoError("not a directory", directory)
    return sorted(p.name for p in directory.iterdir() if p.is_file() and p.suffix.lower() == ".png")


def match_files(*dirs) -> list[str]:
    """Names present in every directory; any name missing from one of them is an error."""
    listings = [set(list_pngs(d)) for d in dirs]
    common = set.intersection(*listings)
    for d, names in zip(dirs, listings):
        extra = sorted(names - common)
        if extra:
            raise MissingCounterpart(
                f"{len(extra)} file(s) in {d} have no counterpart in every other directory, e.g. {extra[0]}"
            )
    if not common:
        raise MissingCounterpart(f"no label maps to pair across {', '.join(str(d) for d in dirs)}")
    return sorted(common)


def evaluate_dirs(gt_dir, pred_dir, cs: ClassSet, threads=1, model_id="model"):
    """Confusion matrix over every gt/pred pair, computed per file and merged."""
    names = match_files(gt_dir, pred_dir)
    n = cs.num_classes

    def one(name):
        gt = read_label_png(Path(gt_dir) / name, cs.ignore_index)
        pred = read_label_png(Path(pred_dir) / name, cs.ignore_index)
        try:
            return ConfusionMatrix(confusion_counts(gt, pred, n))
        except (ClassOutOfRange, DimensionMismatch) as exc:
            raise type(exc)(f"{name}: {exc}") from None

    cm = reduce(merge, parallel_map(one, names, threads), ConfusionMatrix.zeros(n))
    row = ReportRow(model_id, miou(cm), tuple(v for _, v in iou_per_class(cm)), cm.total)
    return cm, row


def fuse_dirs(member_dirs, out_dir, threads=1, ignore_index=255) -> list[str]:
    names = match_files(*member_dirs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = [str(d) for d in member_dirs]

    def one(name):
        maps = [read_label_png(Path(d) / name, ignore_index) for d in member_dirs]
        try:
            stack = VoteStack(maps, ids)
        except MemberShapeMismatch as exc:
            raise MemberShapeMismatch(f"{name}: {exc}") from None
        write_label_png(hard_vote(stack), out_dir / name)

    parallel_map(one, names, threads)
    return names


def predict_dir(predictor: BaselinePredictor, image_dir, out_dir, threads=1) -> list[str]:
    names = list_pngs(image_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(name):
        write_label_png(predict(predictor, read_image_png(Path(image_dir) / name)), out_dir / name)

    parallel_map(one, names, threads)
    return names


def colorize_dir(label_dir, cs: ClassSet, out_dir, threads=1) -> list[str]:
    names = list_pngs(label_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(name):
        label = read_label_png(Path(label_dir) / name, cs.ignore_index)
        try:
            image = colorize(label, cs)
        except (ClassOutOfRange, DimensionMismatch) as exc:
            raise type(exc)(f"{name}: {exc}") from None
        write_image_png(image, out_dir / name)

    parallel_map(one, names, threads)
    return names
