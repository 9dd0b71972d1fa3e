"""Integer raster images, PGM round-tripping and corpus loading.

Every stage of the pipeline trades in :class:`ImageGrid`: a square (or, for
loaded corpora, possibly rectangular) grid of integer intensities at a fixed
bit depth. Arrays are frozen after construction so grids can be shared
read-only between worker processes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_DTYPES = {8: np.uint8, 16: np.uint16}


@dataclass(frozen=True)
class ImageGrid:
    """Row-major integer intensities in [0, 2**bit_depth - 1]."""

    pixels: np.ndarray
    bit_depth: int = 16

    def __post_init__(self):
        if self.bit_depth not in _DTYPES:
            raise ValueError(f"bit depth must be 8 or 16, got {self.bit_depth}")
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {px.shape}")
        if not np.issubdtype(px.dtype, np.integer):
            raise ValueError("pixels must be integer valued; use from_float for reals")
        if px.size and (px.min() < 0 or px.max() > self.max_value):
            raise ValueError(f"pixel values outside [0, {self.max_value}]")
        px = px.astype(_DTYPES[self.bit_depth], copy=True)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    def as_float(self) -> np.ndarray:
        return self.pixels.astype(np.float64)

    def flatten(self) -> np.ndarray:
        """Row-major float vector, the layout measurement matrices act on."""
        return self.as_float().ravel()


def quantize(values: np.ndarray, bit_depth: int = 16) -> ImageGrid:
    """Clip to the representable range and round half away from zero.

    np.round would round halves to even; after clipping to [0, max] the
    half-away-from-zero rule reduces to floor(x + 0.5).
    """
    vmax = (1 << bit_depth) - 1
    clipped = np.clip(np.asarray(values, dtype=np.float64), 0.0, vmax)
    return ImageGrid(np.floor(clipped + 0.5).astype(np.int64), bit_depth)


def widen_to_16bit(image: ImageGrid) -> ImageGrid:
    """8-bit to 16-bit by multiplying with 257 (0 -> 0, 255 -> 65535 exactly)."""
    if image.bit_depth == 16:
        return image
    return ImageGrid(image.pixels.astype(np.int64) * 257, 16)


# ---------------------------------------------------------------------------
# PGM (P5 binary, big-endian 16-bit samples per the format convention)
# ---------------------------------------------------------------------------

def write_pgm(path, image: ImageGrid) -> None:
    header = f"P5\n{image.width} {image.height}\n{image.max_value}\n".encode("ascii")
    if image.bit_depth == 16:
        body = image.pixels.astype(">u2").tobytes()
    else:
        body = image.pixels.astype(np.uint8).tobytes()
    Path(path).write_bytes(header + body)


def read_pgm(path) -> ImageGrid:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # header = magic, width, height, maxval; '#' comments allowed between tokens
    tokens, pos = [], 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval == 65535:
        px = np.frombuffer(data, dtype=">u2", offset=pos, count=width * height)
        depth = 16
    elif maxval == 255:
        px = np.frombuffer(data, dtype=np.uint8, offset=pos, count=width * height)
        depth = 8
    else:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    return ImageGrid(px.reshape(height, width).astype(np.int64), depth)


# ---------------------------------------------------------------------------
# External corpora
# ---------------------------------------------------------------------------

def load_image_corpus(directory, target_size: int, bit_depth: int = 16) -> list[ImageGrid]:
    """Load every readable image in a directory as grayscale test material.

    Each file is converted to grayscale, center-cropped square, resampled to
    target_size x target_size (bilinear) and rescaled to the requested bit
    depth. Unreadable files are skipped with a warning; an empty or fully
    unreadable directory is an error.
    """
    from PIL import Image

    directory = Path(directory)
    if not directory.is_dir():
        raise ValueError(f"{directory} is not a directory")
    corpus = []
    for p in sorted(directory.iterdir()):
        if not p.is_file():
            continue
        try:
            with Image.open(p) as img:
                corpus.append(_standardize(img, target_size, bit_depth))
        except Exception as exc:  # noqa: BLE001 - per-file skip is the contract
            warnings.warn(f"skipping {p.name}: {exc}", stacklevel=2)
    if not corpus:
        raise ValueError(f"no readable images in {directory}")
    return corpus


def _standardize(img, target_size: int, bit_depth: int) -> ImageGrid:
    from PIL import Image

    if img.mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(img, dtype=np.float64)
        source_max = 65535.0
    else:
        arr = np.asarray(img.convert("L"), dtype=np.float64)
        source_max = 255.0
    h, w = arr.shape
    side = min(h, w)
    top, left = (h - side) // 2, (w - side) // 2
    arr = arr[top:top + side, left:left + side]
    if side != target_size:
        resized = Image.fromarray(arr.astype(np.float32), mode="F").resize(
            (target_size, target_size), Image.BILINEAR)
        arr = np.asarray(resized, dtype=np.float64)
    scale = ((1 << bit_depth) - 1) / source_max
    return quantize(arr * scale, bit_depth)
