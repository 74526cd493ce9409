"""Segmentation pipeline tooling: augmentation, hard-vote fusion and mIoU evaluation."""

from .augment import (
    AugSpec,
    SamplePair,
    adjust_brightness,
    adjust_contrast,
    derive_stream,
    flip_horizontal,
    offline_expand,
    online_augment,
    pad_to_min,
    random_crop,
    random_flip,
)
from .baseline import BaselinePredictor, perturb_labels, predict
from .dataset import (
    DatasetManifest,
    SceneRecord,
    corpus_stats,
    expand_offline,
    load_manifest,
    sample_online,
    verify_files,
    write_manifest,
)
from .fusion import VoteStack, agreement_map, hard_vote
from .labelcore import (
    ClassSet,
    ConfusionMatrix,
    ImageBuffer,
    LabelMap,
    accumulate,
    colorize,
    iou_per_class,
    merge,
    miou,
    pixel_accuracy,
)
from .report import ReportRow, render_table

__version__ = "0.1.0"
