import numpy as np
import pytest

from segfuse.augment import derive_stream
from segfuse.baseline import BaselinePredictor, perturb_labels, predict
from segfuse.errors import ChannelMismatch, ClassOutOfRange
from segfuse.labelcore import ClassSet, ImageBuffer, LabelMap, colorize

CS = ClassSet.from_pairs([("a", (0, 0, 0)), ("b", (10, 0, 0)), ("c", (0, 200, 0)), ("d", (0, 0, 255))])


def test_constant():
    img = ImageBuffer(np.random.default_rng(0).integers(0, 256, (3, 5, 3), dtype=np.uint8))
    out = predict(BaselinePredictor.constant(2, CS), img)
    assert (out.data == 2).all() and out.shape == (3, 5)


def test_constant_out_of_range():
    with pytest.raises(ClassOutOfRange):
        BaselinePredictor.constant(4, CS)


def test_nearest_color_recovers_painted_map():
    truth = LabelMap(np.random.default_rng(1).integers(0, 4, (6, 7), dtype=np.uint8))
    assert predict(BaselinePredictor.nearest_color(CS), colorize(truth, CS)) == truth


def test_nearest_color_tie_goes_to_smaller_index():
    # (5, 0, 0) is at squared distance 25 from both class 0 and class 1
    img = ImageBuffer(np.array([[[5, 0, 0]]], dtype=np.uint8))
    assert predict(BaselinePredictor.nearest_color(CS), img).data.tolist() == [[0]]


def test_nearest_color_needs_rgb():
    with pytest.raises(ChannelMismatch):
        predict(BaselinePredictor.nearest_color(CS), ImageBuffer(np.zeros((2, 2), np.uint8)))


def test_perturb_zero_and_one():
    rng = np.random.default_rng(2)
    gt = LabelMap(rng.integers(0, 5, (20, 20), dtype=np.uint8))
    assert perturb_labels(gt, 0.0, 5, derive_stream(0, "a")) == gt
    out = perturb_labels(gt, 1.0, 5, derive_stream(0, "b"))
    assert not (out.data == gt.data).any()
    assert out.data.max() < 5


def test_perturb_leaves_ignored_pixels():
    data = np.random.default_rng(3).integers(0, 3, (10, 10)).astype(np.uint8)
    data[::3] = 255
    out = perturb_labels(LabelMap(data), 1.0, 3, derive_stream(0, "c"))
    assert (out.data[::3] == 255).all()
    assert (out.data[data != 255] < 3).all()


def test_perturb_replacement_is_uniform_over_other_classes():
    gt = LabelMap.full(1000, 100, 2)
    out = perturb_labels(gt, 1.0, 5, derive_stream(4, "u")).data
    freq = np.bincount(out.ravel(), minlength=5) / out.size
    assert freq[2] == 0
    assert np.allclose(freq[[0, 1, 3, 4]], 0.25, atol=0.005)


def test_perturb_accuracy_rate():
    gt = LabelMap(np.random.default_rng(5).integers(0, 5, (1000, 1000), dtype=np.uint8))
    out = perturb_labels(gt, 0.2, 5, derive_stream(11, "rate"))
    assert abs((out.data == gt.data).mean() - 0.8) <= 0.005


def test_perturb_deterministic():
    gt = LabelMap.full(30, 30, 1)
    a = perturb_labels(gt, 0.3, 4, derive_stream(9, "k"))
    b = perturb_labels(gt, 0.3, 4, derive_stream(9, "k"))
    assert a == b
