"""Model-free prediction sources for exercising the fuse/evaluate pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ChannelMismatch, ClassOutOfRange
from .labelcore import DEFAULT_IGNORE_INDEX, ClassSet, ImageBuffer, LabelMap


@dataclass(frozen=True)
class BaselinePredictor:
    kind: str
    class_set: ClassSet
    constant_class: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("constant", "nearest_color"):
            raise ValueError(f"unknown predictor kind {self.kind!r}")
        if self.kind == "constant":
            if self.constant_class is None or not 0 <= self.constant_class < self.class_set.num_classes:
                raise ClassOutOfRange(
                    f"constant class {self.constant_class} is not < {self.class_set.num_classes}"
                )

    @classmethod
    def constant(cls, class_index: int, class_set: ClassSet) -> "BaselinePredictor":
        return cls("constant", class_set, class_index)

    @classmethod
    def nearest_color(cls, class_set: ClassSet) -> "BaselinePredictor":
        return cls("nearest_color", class_set)


def predict(p: BaselinePredictor, img: ImageBuffer) -> LabelMap:
    ignore = p.class_set.ignore_index
    if p.kind == "constant":
        return LabelMap.full(img.width, img.height, p.constant_class, ignore)
    if img.channels != 3:
        raise ChannelMismatch(f"nearest_color needs a 3-channel image, got {img.channels}")
    palette = p.class_set.palette().astype(np.int32)
    pixels = img.data.astype(np.int32)
    best = np.zeros((img.height, img.width), dtype=np.uint8)
    best_dist = np.full((img.height, img.width), np.iinfo(np.int32).max, dtype=np.int32)
    # strict "<" keeps the earlier (smaller) class on ties
    for c, color in enumerate(palette):
        dist = ((pixels - color) ** 2).sum(axis=2)
        closer = dist < best_dist
        best[closer] = c
        best_dist[closer] = dist[closer]
    return LabelMap(best, ignore)


def perturb_labels(gt: LabelMap, error_rate: float, num_classes: int, rng: np.random.Generator) -> LabelMap:
    """Symmetric label noise.

    Every pixel consumes two uniforms in row-major order: the first decides
    whether the label is kept (kept iff ``u >= error_rate``), the second picks
    a replacement uniformly from the other ``num_classes - 1`` classes.
    Ignored pixels consume their draws too but are never changed.
    """
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError(f"error_rate must be in [0, 1], got {error_rate}")
    if num_classes < 2:
        raise ValueError("perturb_labels needs at least 2 classes")
    gt.validate(num_classes)
    g = gt.data.astype(np.int64)
    u = rng.random((g.size, 2)).reshape(g.shape + (2,))
    flip = (u[..., 0] < error_rate) & (g != gt.ignore_index)
    r = np.minimum((u[..., 1] * (num_classes - 1)).astype(np.int64), num_classes - 2)
    replacement = r + (r >= g)
    return LabelMap(np.where(flip, replacement, g).astype(np.uint8), gt.ignore_index)


def random_label_map(width, height, num_classes, rng, ignore_index=DEFAULT_IGNORE_INDEX) -> LabelMap:
    return LabelMap(rng.integers(0, num_classes, size=(height, width), dtype=np.uint8), ignore_index)
