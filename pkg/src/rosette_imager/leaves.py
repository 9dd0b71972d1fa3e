"""Scale-invariant dead-leaves test images.

Occluding discs with power-law radii (density ~ r^-exponent, exponent 3 for
the scale-invariant case) are layered front-to-back: a disc only paints the
pixels no earlier disc claimed, which yields the same final image law as the
backwards construction while terminating exactly at full coverage.

All randomness comes from numpy's PCG64 generator. Per-disc draws are taken
from pre-filled blocks in a fixed order (radius, x, y, intensity), so images
are bit-identical across runs and platforms for a given seed; corpora derive
one child seed per image via SeedSequence.spawn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .images import ImageGrid
from .scan import SampleGrid  # noqa: F401  (re-export convenience for scripts)

_DRAW_BLOCK = 1024


@dataclass(frozen=True)
class LeavesConfig:
    size: int = 256
    r_min: float = 2.0
    r_max: float | None = None   # defaults to size / 2
    exponent: float = 3.0
    bit_depth: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("size must be positive")
        r_max = self.size / 2 if self.r_max is None else self.r_max
        if not 0 < self.r_min < r_max:
            raise ValueError(f"need 0 < r_min < r_max, got {self.r_min}, {r_max}")
        if r_max > self.size:
            raise ValueError("r_max cannot exceed the image size")
        object.__setattr__(self, "r_max", float(r_max))


def sample_radii(rng: np.random.Generator, config: LeavesConfig, count: int) -> np.ndarray:
    """Inverse-CDF draws from the truncated power law r^-exponent."""
    u = rng.random(count)
    a = config.exponent
    lo, hi = config.r_min, config.r_max
    if a == 1.0:
        return lo * (hi / lo) ** u
    p = 1.0 - a
    return (lo**p + u * (hi**p - lo**p)) ** (1.0 / p)


def generate_dead_leaves(config: LeavesConfig, rng: np.random.Generator | None = None) -> ImageGrid:
    """Generate one image; pixels are covered exactly once, front leaf wins."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    size = config.size
    vmax = (1 << config.bit_depth) - 1
    out = np.zeros((size, size), dtype=np.int64)
    uncovered = np.ones((size, size), dtype=bool)
    remaining = size * size

    yy = np.arange(size, dtype=np.float64)
    while remaining:
        radii = sample_radii(rng, config, _DRAW_BLOCK)
        cx = rng.random(_DRAW_BLOCK) * size
        cy = rng.random(_DRAW_BLOCK) * size
        shade = rng.integers(0, vmax + 1, _DRAW_BLOCK)
        for r, x, y, val in zip(radii, cx, cy, shade):
            r0 = max(int(np.floor(y - r)), 0)
            r1 = min(int(np.ceil(y + r)) + 1, size)
            c0 = max(int(np.floor(x - r)), 0)
            c1 = min(int(np.ceil(x + r)) + 1, size)
            if r0 >= r1 or c0 >= c1:
                continue
            dy2 = (yy[r0:r1] - y) ** 2
            dx2 = (yy[c0:c1] - x) ** 2
            disc = dy2[:, None] + dx2[None, :] <= r * r
            patch = uncovered[r0:r1, c0:c1]
            fresh = disc & patch
            n = int(np.count_nonzero(fresh))
            if n:
                out[r0:r1, c0:c1][fresh] = val
                patch[fresh] = False
                remaining -= n
                if not remaining:
                    break
    return ImageGrid(out, config.bit_depth)


def generate_corpus(config: LeavesConfig, count: int) -> list[ImageGrid]:
    """count images from independent child streams of config.seed."""
    if count < 1:
        raise ValueError("count must be positive")
    children = np.random.SeedSequence(config.seed).spawn(count)
    return [generate_dead_leaves(config, np.random.default_rng(c)) for c in children]
