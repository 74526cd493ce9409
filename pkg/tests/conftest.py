import hashlib
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from segfuse.dataset import DatasetManifest, SceneRecord, write_manifest
from segfuse.labelcore import ClassSet, ImageBuffer, LabelMap, write_class_file, write_image_png, write_label_png

PALETTE = [("road", (128, 64, 128)), ("sky", (70, 130, 180)), ("tree", (107, 142, 35)), ("car", (0, 0, 142))]


@pytest.fixture
def classes():
    return ClassSet.from_pairs(PALETTE)


@pytest.fixture
def class_file(tmp_path, classes):
    path = tmp_path / "classes.tsv"
    write_class_file(classes, path)
    return path


def tree_hash(root):
    """sha256 over (relative path, bytes) of every file under ``root``."""
    root = Path(root)
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(root).as_posix().encode())
            h.update(b"\0")
            h.update(p.read_bytes())
    return h.hexdigest()


def make_corpus(root, splits, size=(6, 4), seed=0, num_classes=4):
    """Write a tiny paired corpus; ``splits`` lists one split name per record."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    w, h = size
    for sub in ("clear", "adverse", "labels"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    cls_path = root / "classes.tsv"
    write_class_file(ClassSet.from_pairs(PALETTE[:num_classes]), cls_path)
    records = []
    for i, split in enumerate(splits):
        scene, frame = f"scene{i // 3:03d}", f"{i % 3:04d}"
        name = f"{scene}_{frame}.png"
        write_image_png(ImageBuffer(rng.integers(0, 256, (h, w, 3), dtype=np.uint8)), root / "clear" / name)
        write_image_png(ImageBuffer(rng.integers(0, 256, (h, w, 3), dtype=np.uint8)), root / "adverse" / name)
        write_label_png(LabelMap(rng.integers(0, num_classes, (h, w), dtype=np.uint8)), root / "labels" / name)
        records.append(SceneRecord(scene, frame, str(root / "clear" / name), str(root / "adverse" / name),
                                   str(root / "labels" / name), split, ("rain",) if i % 2 else ()))
    manifest = DatasetManifest(tuple(records), str(cls_path))
    write_manifest(manifest, root / "manifest.tsv")
    return manifest
