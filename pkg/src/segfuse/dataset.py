"""Manifests for paired clear/adverse segmentation corpora.

Manifest file format (UTF-8, one item per line, fields separated by TAB)::

    # comment lines start with '#'
    @classes<TAB>classes.tsv
    scene_id<TAB>frame_id<TAB>clear_path<TAB>adverse_path<TAB>label_path<TAB>split<TAB>weather_tags

``split`` is one of ``train``, ``val``, ``test``. ``weather_tags`` is a
comma-separated list, or ``-`` when empty. Relative paths are resolved
against the directory holding the manifest; in memory every path is
absolute.

Class-definition file: one class per line, ``index<TAB>name<TAB>#RRGGBB``.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .augment import AugSpec, SamplePair, offline_expand, online_augment, variant_names
from .errors import DuplicateRecord, IoError, ParseError, SegfuseError, UnknownSplit
from .labelcore import (
    DEFAULT_IGNORE_INDEX,
    ClassSet,
    read_class_file,
    read_image_png,
    read_label_png,
    write_image_png,
    write_label_png,
)
from .pipeline import parallel_map

SPLITS = ("train", "val", "test")
NUM_FIELDS = 7


def _abs(p) -> str:
    return os.path.abspath(os.fspath(p))


@dataclass(frozen=True)
class SceneRecord:
    scene_id: str
    frame_id: str
    clear_path: str
    adverse_path: str
    label_path: str
    split: str
    weather_tags: tuple = ()

    def __post_init__(self):
        for name in ("scene_id", "frame_id", "clear_path", "adverse_path", "label_path"):
            value = getattr(self, name)
            if not value or not str(value).strip():
                raise ParseError(f"{name} must be non-empty")
        for name in ("scene_id", "frame_id"):
            if any(ch in getattr(self, name) for ch in "\t\n\r"):
                raise ParseError(f"{name} may not contain tabs or newlines")
        if self.split not in SPLITS:
            raise UnknownSplit(f"unknown split {self.split!r}, expected one of {', '.join(SPLITS)}")
        for name in ("clear_path", "adverse_path", "label_path"):
            object.__setattr__(self, name, _abs(getattr(self, name)))
        object.__setattr__(self, "weather_tags", tuple(self.weather_tags))

    @property
    def key(self) -> str:
        return f"{self.scene_id}/{self.frame_id}"


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple
    class_set_path: str

    def __post_init__(self):
        records = tuple(self.records)
        if not records:
            raise ParseError("manifest has no records")
        seen = set()
        for r in records:
            k = (r.scene_id, r.frame_id)
            if k in seen:
                raise DuplicateRecord(f"duplicate record {r.key}")
            seen.add(k)
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "class_set_path", _abs(self.class_set_path))

    def __len__(self):
        return len(self.records)

    def split(self, name):
        return [r for r in self.records if r.split == name]

    def load_classes(self, ignore_index=DEFAULT_IGNORE_INDEX) -> ClassSet:
        return read_class_file(self.class_set_path, ignore_index)


def parse_manifest(text: str, base_dir, path=None) -> DatasetManifest:
    base_dir = _abs(base_dir)

    def resolve(p):
        # join() keeps p unchanged when it is already absolute
        return os.path.join(base_dir, p)

    if not text.strip():
        raise ParseError("empty manifest", path=path)
    class_set_path = None
    records = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if parts[0] == "@classes":
            if len(parts) != 2 or not parts[1]:
                raise ParseError("expected '@classes<TAB>path'", lineno, path)
            if class_set_path is not None:
                raise ParseError("duplicate @classes directive", lineno, path)
            class_set_path = resolve(parts[1])
            continue
        if len(parts) != NUM_FIELDS:
            raise ParseError(f"expected {NUM_FIELDS} tab-separated fields, got {len(parts)}", lineno, path)
        scene, frame, clear, adverse, label, split, tags = parts
        key = (scene, frame)
        if key in seen:
            raise DuplicateRecord(f"duplicate record {scene}/{frame} (first on line {seen[key]})", lineno, path)
        seen[key] = lineno
        tag_list = () if tags in ("", "-") else tuple(t for t in tags.split(",") if t)
        try:
            records.append(SceneRecord(scene, frame, resolve(clear), resolve(adverse), resolve(label), split, tag_list))
        except UnknownSplit as exc:
            raise UnknownSplit(exc.reason, lineno, path) from None
        except ParseError as exc:
            raise ParseError(exc.reason, lineno, path) from None
    if class_set_path is None:
        raise ParseError("missing '@classes' directive", path=path)
    if not records:
        raise ParseError("manifest has no records", path=path)
    return DatasetManifest(tuple(records), class_set_path)


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read manifest ({exc.strerror})", path) from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8 ({exc.reason})", path=path) from None
    return parse_manifest(text, path.parent, path)


def format_manifest(m: DatasetManifest, base_dir) -> str:
    base_dir = _abs(base_dir)

    def rel(p):
        return Path(os.path.relpath(p, base_dir)).as_posix()

    lines = [f"@classes\t{rel(m.class_set_path)}"]
    for r in m.records:
        tags = ",".join(r.weather_tags) or "-"
        lines.append("\t".join(
            [r.scene_id, r.frame_id, rel(r.clear_path), rel(r.adverse_path), rel(r.label_path), r.split, tags]
        ))
    return "\n".join(lines) + "\n"


def write_manifest(m: DatasetManifest, path) -> None:
    path = Path(path)
    try:
        path.write_text(format_manifest(m, path.parent), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write manifest ({exc.strerror})", path) from exc


# verification


@dataclass(frozen=True)
class Failure:
    record: str
    path: str
    kind: str
    message: str

    def __str__(self):
        return f"{self.kind}: {self.record}: {self.path}: {self.message}"


@dataclass
class VerificationReport:
    num_records: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _load_classes_or_fail(m):
    try:
        return m.load_classes(), []
    except SegfuseError as exc:
        return None, [Failure("-", m.class_set_path, type(exc).__name__, str(exc))]


def _verify_record(r: SceneRecord, cs: Optional[ClassSet]) -> list:
    failures = []
    sizes = {}
    for role, p in (("clear", r.clear_path), ("adverse", r.adverse_path), ("label", r.label_path)):
        if not os.path.isfile(p):
            failures.append(Failure(r.key, p, "MissingFile", f"{role} file does not exist"))
            continue
        try:
            if role == "label":
                lab = read_label_png(p)
                sizes[role] = (lab.width, lab.height)
                if cs is not None:
                    bad = (lab.data >= cs.num_classes) & (lab.data != cs.ignore_index)
                    if bad.any():
                        values = sorted(int(v) for v in np.unique(lab.data[bad]))
                        failures.append(Failure(
                            r.key, p, "ClassOutOfRange",
                            f"{int(bad.sum())} pixels with values {values} outside 0..{cs.num_classes - 1}",
                        ))
            else:
                img = read_image_png(p)
                sizes[role] = (img.width, img.height)
        except IoError as exc:
            failures.append(Failure(r.key, p, "DecodeError", str(exc)))
    if "label" in sizes:
        for role, p in (("clear", r.clear_path), ("adverse", r.adverse_path)):
            if role in sizes and sizes[role] != sizes["label"]:
                (w, h), (lw, lh) = sizes[role], sizes["label"]
                failures.append(Failure(r.key, p, "DimensionMismatch", f"{role} image is {w}x{h}, label is {lw}x{lh}"))
    return failures


def verify_files(m: DatasetManifest, threads: int = 1) -> VerificationReport:
    """Check every record's files; collects all failures instead of stopping at the first."""
    cs, failures = _load_classes_or_fail(m)
    for chunk in parallel_map(lambda r: _verify_record(r, cs), m.records, threads):
        failures.extend(chunk)
    return VerificationReport(len(m.records), failures)


# statistics


@dataclass
class CorpusStats:
    num_records: int
    split_counts: dict
    scene_frames: dict
    class_histogram: dict
    total_pixels: int
    ignored_pixels: int
    failures: list = field(default_factory=list)

    @property
    def num_scenes(self) -> int:
        return len(self.scene_frames)

    @property
    def ignored_fraction(self) -> float:
        return self.ignored_pixels / self.total_pixels if self.total_pixels else 0.0

    def to_dict(self) -> dict:
        return {
            "num_records": self.num_records,
            "num_scenes": self.num_scenes,
            "split_counts": dict(self.split_counts),
            "scene_frames": dict(self.scene_frames),
            "class_histogram": {str(k): v for k, v in sorted(self.class_histogram.items())},
            "total_pixels": self.total_pixels,
            "ignored_pixels": self.ignored_pixels,
            "ignored_fraction": self.ignored_fraction,
            "failures": [str(f) for f in self.failures],
        }


def corpus_stats(m: DatasetManifest, threads: int = 1) -> CorpusStats:
    """Split counts, frames per scene, class pixel histogram and ignored fraction.

    Label files shared by several records are decoded once.
    """
    cs, failures = _load_classes_or_fail(m)
    num_classes = cs.num_classes if cs is not None else 256
    ignore = cs.ignore_index if cs is not None else DEFAULT_IGNORE_INDEX

    def tally(p):
        try:
            lab = read_label_png(p, ignore)
        except IoError as exc:
            return None, exc
        return np.bincount(lab.data.ravel(), minlength=256), None

    paths = sorted({r.label_path for r in m.records})
    tallies = dict(zip(paths, parallel_map(tally, paths, threads)))

    hist = np.zeros(256, dtype=np.int64)
    total = ignored = 0
    for r in m.records:
        counts, err = tallies[r.label_path]
        if err is not None:
            failures.append(Failure(r.key, r.label_path, "DecodeError", str(err)))
            continue
        hist += counts
        total += int(counts.sum())
        ignored += int(counts[ignore])
    out_of_range = [v for v in range(num_classes, 256) if v != ignore and hist[v]]
    if out_of_range:
        failures.append(Failure("-", "-", "ClassOutOfRange", f"label values {out_of_range} are not valid classes"))

    return CorpusStats(
        num_records=len(m.records),
        split_counts={s: c for s, c in Counter(r.split for r in m.records).items()},
        scene_frames=dict(Counter(r.scene_id for r in m.records)),
        class_histogram={c: int(hist[c]) for c in range(num_classes) if hist[c]},
        total_pixels=total,
        ignored_pixels=ignored,
        failures=failures,
    )


# offline expansion


def expand_offline(m: DatasetManifest, spec: AugSpec, out_dir, threads: int = 1) -> DatasetManifest:
    """Write photometric variants of every train record's adverse image.

    Each train record is followed by one new record per variant (frame id
    ``<frame>__<variant>``); its label and clear paths point at the original
    files. Val and test records pass through unchanged. The new manifest is
    written to ``out_dir/manifest.tsv`` and returned.
    """
    out_dir = Path(out_dir)
    names = variant_names(spec)
    if len(set(names)) != len(names):
        raise ValueError(f"augmentation grid produces duplicate variant names: {names}")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory ({exc.strerror})", out_dir) from exc

    def expand(r: SceneRecord):
        if r.split != "train":
            return [r]
        pair = SamplePair(read_image_png(r.adverse_path), read_label_png(r.label_path))
        variants = offline_expand(pair, spec)
        out = [r]
        target_dir = out_dir / "adverse" / r.scene_id
        try:
            target_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoError(f"cannot create directory ({exc.strerror})", target_dir) from exc
        for name, variant in zip(names[1:], variants[1:]):
            dest = target_dir / f"{r.frame_id}__{name}.png"
            write_image_png(variant.image, dest)
            out.append(SceneRecord(
                r.scene_id, f"{r.frame_id}__{name}", r.clear_path, str(dest), r.label_path, r.split, r.weather_tags,
            ))
        return out

    records = [x for chunk in parallel_map(expand, m.records, threads) for x in chunk]
    result = DatasetManifest(tuple(records), m.class_set_path)
    write_manifest(result, out_dir / "manifest.tsv")
    return result


def sample_online(m: DatasetManifest, spec: AugSpec, out_dir, samples: int, threads: int = 1) -> DatasetManifest:
    """Write ``samples`` pad/crop/flip draws per train record.

    Sample ``n`` of a record uses the stream keyed ``scene_id/frame_id#n``;
    the clear image, adverse image and label all get the same window and
    flip. The result is written to ``out_dir/online_manifest.tsv``.
    """
    out_dir = Path(out_dir)
    train = m.split("train")
    if samples < 1 or not train:
        raise ValueError("online sampling needs samples >= 1 and at least one train record")

    def draw(r: SceneRecord):
        label = read_label_png(r.label_path)
        adverse = SamplePair(read_image_png(r.adverse_path), label)
        clear = SamplePair(read_image_png(r.clear_path), label)
        target_dir = out_dir / "online" / r.scene_id
        try:
            target_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoError(f"cannot create directory ({exc.strerror})", target_dir) from exc
        out = []
        for n in range(samples):
            key = f"{r.key}#{n}"
            a = online_augment(adverse, spec, key)
            c = online_augment(clear, spec, key)
            stem = target_dir / f"{r.frame_id}__online{n}"
            paths = [Path(f"{stem}_{role}.png") for role in ("clear", "adverse", "label")]
            write_image_png(c.image, paths[0])
            write_image_png(a.image, paths[1])
            write_label_png(a.label, paths[2])
            out.append(SceneRecord(r.scene_id, f"{r.frame_id}__online{n}", *map(str, paths), r.split, r.weather_tags))
        return out

    records = [x for chunk in parallel_map(draw, train, threads) for x in chunk]
    result = DatasetManifest(tuple(records), m.class_set_path)
    write_manifest(result, out_dir / "online_manifest.tsv")
    return result
