"""Pixel-grid types, class metadata, confusion matrices and IoU metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import (
    ClassCountMismatch,
    ClassOutOfRange,
    DimensionMismatch,
    EmptyMatrix,
    IoError,
    ParseError,
)

DEFAULT_IGNORE_INDEX = 255


@dataclass(frozen=True, eq=False)
class LabelMap:
    """A ``height x width`` grid of uint8 class indices."""

    data: np.ndarray
    ignore_index: int = DEFAULT_IGNORE_INDEX

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise DimensionMismatch(f"label map must be 2-D, got shape {data.shape}")
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise ClassOutOfRange("label values must fit in 8 bits")
            data = data.astype(np.uint8)
        data = np.ascontiguousarray(data).view()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def from_list(cls, values, width, height, ignore_index=DEFAULT_IGNORE_INDEX):
        arr = np.asarray(values, dtype=np.int64)
        if arr.size != width * height:
            raise DimensionMismatch(f"{arr.size} values for a {width}x{height} map")
        return cls(arr.reshape(height, width), ignore_index)

    @classmethod
    def full(cls, width, height, value, ignore_index=DEFAULT_IGNORE_INDEX):
        return cls(np.full((height, width), value, dtype=np.uint8), ignore_index)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self):
        return self.data.shape

    def validate(self, num_classes: int) -> None:
        bad = (self.data >= num_classes) & (self.data != self.ignore_index)
        if bad.any():
            y, x = np.argwhere(bad)[0]
            raise ClassOutOfRange(
                f"value {int(self.data[y, x])} at (x={x}, y={y}) is not < {num_classes}"
                f" and not the ignore index {self.ignore_index}"
            )

    def __eq__(self, other):
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.ignore_index == other.ignore_index and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """8-bit image stored as ``(height, width, channels)`` with 1 or 3 channels."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise DimensionMismatch(f"image must be HxW, HxWx1 or HxWx3, got {data.shape}")
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise ValueError("image intensities must fit in 8 bits")
            data = data.astype(np.uint8)
        data = np.ascontiguousarray(data).view()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class ClassInfo:
    index: int
    name: str
    color: tuple


@dataclass(frozen=True)
class ClassSet:
    classes: tuple
    ignore_index: int = DEFAULT_IGNORE_INDEX

    def __post_init__(self):
        classes = tuple(self.classes)
        if not classes:
            raise ParseError("class set needs at least one class")
        for i, c in enumerate(classes):
            if c.index != i:
                raise ParseError(f"class indices must be contiguous from 0, got {c.index} at position {i}")
            if len(c.color) != 3 or any(not 0 <= v <= 255 for v in c.color):
                raise ParseError(f"class {c.name!r} has an invalid color {c.color}")
        names = [c.name for c in classes]
        if len(set(names)) != len(names):
            raise ParseError("class names must be unique")
        if self.ignore_index < len(classes):
            raise ParseError(f"ignore index {self.ignore_index} collides with a class index")
        object.__setattr__(self, "classes", classes)

    @classmethod
    def from_pairs(cls, pairs, ignore_index=DEFAULT_IGNORE_INDEX):
        """Build from ``[(name, (r, g, b)), ...]`` in index order."""
        return cls(tuple(ClassInfo(i, n, tuple(c)) for i, (n, c) in enumerate(pairs)), ignore_index)

    def __len__(self):
        return len(self.classes)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def names(self):
        return [c.name for c in self.classes]

    def palette(self) -> np.ndarray:
        return np.array([c.color for c in self.classes], dtype=np.uint8).reshape(-1, 3)


def read_class_file(path, ignore_index=DEFAULT_IGNORE_INDEX) -> ClassSet:
    """Parse ``index<TAB>name<TAB>#RRGGBB`` lines; ``#`` at line start is a comment."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read class file ({exc.strerror})", path) from exc
    classes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", lineno, path)
        idx, name, color = parts
        try:
            index = int(idx)
        except ValueError:
            raise ParseError(f"bad class index {idx!r}", lineno, path) from None
        if len(color) != 7 or not color.startswith("#"):
            raise ParseError(f"bad color {color!r}, expected #RRGGBB", lineno, path)
        try:
            rgb = tuple(int(color[i:i + 2], 16) for i in (1, 3, 5))
        except ValueError:
            raise ParseError(f"bad color {color!r}, expected #RRGGBB", lineno, path) from None
        if not name:
            raise ParseError("empty class name", lineno, path)
        classes.append(ClassInfo(index, name, rgb))
    if not classes:
        raise ParseError("no classes defined", path=path)
    classes.sort(key=lambda c: c.index)
    try:
        return ClassSet(tuple(classes), ignore_index)
    except ParseError as exc:
        raise ParseError(exc.reason, path=path) from None


def write_class_file(cs: ClassSet, path) -> None:
    lines = [f"{c.index}\t{c.name}\t#{c.color[0]:02X}{c.color[1]:02X}{c.color[2]:02X}" for c in cs.classes]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[g, p]`` = pixels with ground truth ``g`` predicted as ``p`` (int64)."""

    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] < 1:
            raise ClassCountMismatch(f"confusion matrix must be CxC, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")
        counts = counts.copy()
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @classmethod
    def zeros(cls, num_classes: int) -> "ConfusionMatrix":
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64))

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other):
        return merge(self, other)

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    __hash__ = None

    def __repr__(self):
        return f"ConfusionMatrix(num_classes={self.num_classes}, total={self.total})"


def confusion_counts(gt: LabelMap, pred: LabelMap, num_classes: int) -> np.ndarray:
    if gt.shape != pred.shape:
        raise DimensionMismatch(f"ground truth is {gt.width}x{gt.height}, prediction is {pred.width}x{pred.height}")
    g = gt.data.ravel()
    keep = g != gt.ignore_index
    g = g[keep]
    p = pred.data.ravel()[keep]
    if g.size and int(g.max()) >= num_classes:
        raise ClassOutOfRange(f"ground-truth value {int(g.max())} is not < {num_classes}")
    if p.size and int(p.max()) >= num_classes:
        raise ClassOutOfRange(f"predicted value {int(p.max())} at a non-ignored pixel is not < {num_classes}")
    flat = g.astype(np.int64) * num_classes + p
    return np.bincount(flat, minlength=num_classes * num_classes).reshape(num_classes, num_classes)


def accumulate(cm: ConfusionMatrix, gt: LabelMap, pred: LabelMap) -> ConfusionMatrix:
    """Return ``cm`` plus the tally of one (ground truth, prediction) pair.

    Pixels whose ground truth is the ignore index are skipped whatever the
    prediction says there.
    """
    return ConfusionMatrix(cm.counts + confusion_counts(gt, pred, cm.num_classes))


def merge(a: ConfusionMatrix, b: ConfusionMatrix) -> ConfusionMatrix:
    if a.num_classes != b.num_classes:
        raise ClassCountMismatch(f"cannot merge {a.num_classes}-class and {b.num_classes}-class matrices")
    return ConfusionMatrix(a.counts + b.counts)


def iou_per_class(cm: ConfusionMatrix) -> list[tuple[int, Optional[float]]]:
    """IoU for each class, ``None`` where the class has an empty union."""
    counts = cm.counts
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    union = tp + fp + fn
    return [
        (c, int(tp[c]) / int(union[c]) if union[c] else None)
        for c in range(cm.num_classes)
    ]


def miou(cm: ConfusionMatrix) -> float:
    present = [v for _, v in iou_per_class(cm) if v is not None]
    if not present:
        raise EmptyMatrix("no class has a non-empty union")
    return sum(present) / len(present)


def pixel_accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix is empty")
    return int(np.trace(cm.counts)) / total


def colorize(label: LabelMap, cs: ClassSet) -> ImageBuffer:
    label.validate(cs.num_classes)
    lut = np.zeros((256, 3), dtype=np.uint8)
    lut[: cs.num_classes] = cs.palette()
    lut[label.ignore_index] = 0
    return ImageBuffer(lut[label.data])


# PNG I/O


def read_label_png(path, ignore_index=DEFAULT_IGNORE_INDEX) -> LabelMap:
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "P"):
                raise IoError(f"label map must be 8-bit single channel, got mode {im.mode}", path)
            # palette PNGs store indices directly; never convert through the palette
            data = np.array(im)
    except OSError as exc:
        raise IoError(f"cannot decode label map ({exc})", path) from exc
    return LabelMap(data, ignore_index)


def write_label_png(label: LabelMap, path) -> None:
    try:
        Image.fromarray(np.asarray(label.data)).save(path, format="PNG")
    except OSError as exc:
        raise IoError(f"cannot write label map ({exc})", path) from exc


def read_image_png(path) -> ImageBuffer:
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "RGB"):
                data = np.array(im)
            elif im.mode in ("LA", "I", "I;16", "F"):
                data = np.array(im.convert("L"))
            else:
                data = np.array(im.convert("RGB"))
    except OSError as exc:
        raise IoError(f"cannot decode image ({exc})", path) from exc
    return ImageBuffer(data)


def write_image_png(img: ImageBuffer, path) -> None:
    data = img.data[:, :, 0] if img.channels == 1 else img.data
    try:
        Image.fromarray(np.ascontiguousarray(data)).save(path, format="PNG")
    except OSError as exc:
        raise IoError(f"cannot write image ({exc})", path) from exc
