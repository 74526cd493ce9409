"""Seedable photometric and geometric augmentation.

Geometric transforms act on a ``SamplePair`` so the image and its label map
always receive the same spatial mapping. Photometric transforms act on the
image only.

Random draws follow a fixed order so runs can be replayed exactly:
``random_crop`` consumes two uniforms (x offset, then y offset) and
``random_flip`` consumes one.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, InvalidFactor, IoError, ParseError
from .labelcore import DEFAULT_IGNORE_INDEX, ImageBuffer, LabelMap


@dataclass(frozen=True)
class AugSpec:
    crop_size: int = 960
    flip_probability: float = 0.5
    pad_image_fill: int = 0
    pad_label_fill: int = DEFAULT_IGNORE_INDEX
    contrast_factors: tuple = (0.8, 1.2)
    brightness_deltas: tuple = (-30, 30)
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "contrast_factors", tuple(float(f) for f in self.contrast_factors))
        object.__setattr__(self, "brightness_deltas", tuple(int(d) for d in self.brightness_deltas))
        if self.crop_size < 1:
            raise ValueError(f"crop_size must be >= 1, got {self.crop_size}")
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ValueError(f"flip_probability must be in [0, 1], got {self.flip_probability}")
        if any(f <= 0 for f in self.contrast_factors):
            raise InvalidFactor(f"contrast factors must be > 0, got {self.contrast_factors}")
        if not 0 <= self.pad_image_fill <= 255 or not 0 <= self.pad_label_fill <= 255:
            raise ValueError("pad fills must be 8-bit values")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")


_LIST_KEYS = {"contrast_factors", "brightness_deltas"}


def _format_value(value):
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_spec(spec: AugSpec) -> str:
    return "".join(f"{f.name}={_format_value(getattr(spec, f.name))}\n" for f in fields(AugSpec))


def parse_spec(text: str, path=None) -> AugSpec:
    """Parse ``key=value`` lines. Unknown keys are rejected, missing keys keep defaults."""
    types = {f.name: f.type for f in fields(AugSpec)}
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {raw.strip()!r}", lineno, path)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ParseError(f"unknown key {key!r}", lineno, path)
        if key in kwargs:
            raise ParseError(f"duplicate key {key!r}", lineno, path)
        try:
            if key in _LIST_KEYS:
                conv = float if key == "contrast_factors" else int
                kwargs[key] = tuple(conv(v) for v in value.split(",") if v.strip())
            elif types[key] in ("float", float):
                kwargs[key] = float(value)
            else:
                kwargs[key] = int(value)
        except ValueError:
            raise ParseError(f"bad value {value!r} for {key}", lineno, path) from None
    try:
        return AugSpec(**kwargs)
    except (ValueError, InvalidFactor) as exc:
        raise ParseError(str(exc), path=path) from None


def load_spec(path) -> AugSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read augmentation spec ({exc.strerror})", path) from exc
    return parse_spec(text, path)


def save_spec(spec: AugSpec, path) -> None:
    Path(path).write_text(dump_spec(spec), encoding="utf-8")


@dataclass(frozen=True)
class SamplePair:
    image: ImageBuffer
    label: LabelMap

    def __post_init__(self):
        if (self.image.width, self.image.height) != (self.label.width, self.label.height):
            raise DimensionMismatch(
                f"image is {self.image.width}x{self.image.height}, label is {self.label.width}x{self.label.height}"
            )

    @property
    def width(self):
        return self.label.width

    @property
    def height(self):
        return self.label.height


def derive_stream(master_seed: int, item_key: str) -> np.random.Generator:
    """Random generator keyed by ``(master_seed, item_key)``.

    The key is hashed, so streams do not depend on the order items are
    processed in.
    """
    digest = hashlib.sha256(f"{int(master_seed)}\x00{item_key}".encode("utf-8")).digest()
    words = np.frombuffer(digest, dtype="<u4")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words.tolist())))


def adjust_brightness(img: ImageBuffer, delta: int) -> ImageBuffer:
    out = np.clip(img.data.astype(np.int16) + int(delta), 0, 255)
    return ImageBuffer(out.astype(np.uint8))


def adjust_contrast(img: ImageBuffer, factor: float) -> ImageBuffer:
    """Scale intensities about mid-gray 128, rounding half away from zero."""
    if not factor > 0:
        raise InvalidFactor(f"contrast factor must be > 0, got {factor}")
    x = 128.0 + float(factor) * (img.data.astype(np.float64) - 128.0)
    rounded = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return ImageBuffer(np.clip(rounded, 0, 255).astype(np.uint8))


def flip_horizontal(pair: SamplePair) -> SamplePair:
    return SamplePair(
        ImageBuffer(pair.image.data[:, ::-1]),
        LabelMap(pair.label.data[:, ::-1], pair.label.ignore_index),
    )


def pad_to_min(pair: SamplePair, min_w: int, min_h: int, spec: AugSpec) -> SamplePair:
    """Pad on the bottom and right up to ``min_w x min_h``."""
    pad_w = max(0, min_w - pair.width)
    pad_h = max(0, min_h - pair.height)
    if not pad_w and not pad_h:
        return pair
    img = np.pad(pair.image.data, ((0, pad_h), (0, pad_w), (0, 0)), constant_values=spec.pad_image_fill)
    lab = np.pad(pair.label.data, ((0, pad_h), (0, pad_w)), constant_values=spec.pad_label_fill)
    return SamplePair(ImageBuffer(img), LabelMap(lab, pair.label.ignore_index))


def crop(pair: SamplePair, x: int, y: int, w: int, h: int) -> SamplePair:
    return SamplePair(
        ImageBuffer(pair.image.data[y:y + h, x:x + w]),
        LabelMap(pair.label.data[y:y + h, x:x + w], pair.label.ignore_index),
    )


def crop_offsets(width: int, height: int, size: int, rng: np.random.Generator) -> tuple[int, int]:
    u = rng.random(2)
    x = min(int(u[0] * (width - size + 1)), width - size)
    y = min(int(u[1] * (height - size + 1)), height - size)
    return x, y


def random_crop(pair: SamplePair, spec: AugSpec, rng: np.random.Generator) -> SamplePair:
    size = spec.crop_size
    pair = pad_to_min(pair, size, size, spec)
    x, y = crop_offsets(pair.width, pair.height, size, rng)
    return crop(pair, x, y, size, size)


def random_flip(pair: SamplePair, spec: AugSpec, rng: np.random.Generator) -> SamplePair:
    if rng.random() < spec.flip_probability:
        return flip_horizontal(pair)
    return pair


def online_augment(pair: SamplePair, spec: AugSpec, item_key: str) -> SamplePair:
    """Pad, random-crop and random-flip one sample with its own keyed stream."""
    rng = derive_stream(spec.master_seed, item_key)
    return random_flip(random_crop(pair, spec, rng), spec, rng)


def variant_names(spec: AugSpec) -> list[str]:
    """Suffixes for the variants ``offline_expand`` emits, in emission order."""
    names = ["orig"]
    names += [f"contrast{f:g}" for f in spec.contrast_factors]
    names += [f"brightness{d:+d}" for d in spec.brightness_deltas]
    return names


def offline_expand(pair: SamplePair, spec: AugSpec) -> list[SamplePair]:
    """Original pair, then one contrast variant per factor, then one brightness variant per delta."""
    out = [pair]
    out += [SamplePair(adjust_contrast(pair.image, f), pair.label) for f in spec.contrast_factors]
    out += [SamplePair(adjust_brightness(pair.image, d), pair.label) for d in spec.brightness_deltas]
    return out
