"""Rosette scan geometry: wedge design equations, loci, and discretization.

The scan locus is generated in normalized units (canted-mirror angle = 1),
so its radius never exceeds 2. The imaging area is the axis-aligned square
inscribed in that radius-2 circle; discretization maps locus points onto the
pixels of a square grid filling the imaging area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def derive_phi2(phi1: float, n_refr: float, d1: float, d2: float) -> float:
    """Canted-mirror angle implied by the wedge design: phi1*(n-1)*d1 / (2*d2)."""
    if phi1 <= 0 or d1 <= 0 or d2 <= 0:
        raise ValueError("phi1, d1 and d2 must be positive")
    if n_refr <= 1:
        raise ValueError(f"refractive index must exceed 1, got {n_refr}")
    return phi1 * (n_refr - 1.0) * d1 / (2.0 * d2)


@dataclass(frozen=True)
class WedgeGeometry:
    phi1: float
    n_refr: float
    d1: float
    d2: float
    phi2: float

    @classmethod
    def design(cls, phi1: float, n_refr: float, d1: float, d2: float) -> "WedgeGeometry":
        return cls(phi1, n_refr, d1, d2, derive_phi2(phi1, n_refr, d1, d2))


def frequencies_from_nm(n: int, m: int, T: float) -> tuple[float, float]:
    """Wedge and mirror rotation frequencies for pattern integers (n, m).

    f1 = m/T and f2 = (m-n)/T, which makes the pattern close exactly after
    one repeat period: T = m/f1 = (m-n)/f2 = n/(f1-f2).
    """
    if n < 1 or m < 1:
        raise ValueError(f"pattern integers must be >= 1, got n={n}, m={m}")
    if n == m:
        raise ValueError(f"degenerate pattern: n == m == {n} gives zero mirror frequency")
    if T <= 0:
        raise ValueError(f"repeat period must be positive, got {T}")
    return m / T, (m - n) / T


@dataclass(frozen=True)
class RosettePattern:
    """Scan pattern (n, m) with repeat period T and detector sampling rate."""

    n: int
    m: int
    T: float = 0.04
    sample_rate: float = 510_000.0

    def __post_init__(self):
        frequencies_from_nm(self.n, self.m, self.T)  # validates n, m, T
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples_per_frame < 1:
            raise ValueError("sample_rate * T yields no samples")

    @property
    def f1(self) -> float:
        return self.m / self.T

    @property
    def f2(self) -> float:
        return (self.m - self.n) / self.T

    @property
    def samples_per_frame(self) -> int:
        return round(self.sample_rate * self.T)


@dataclass(frozen=True)
class ScanLocus:
    """Continuous detector-axis track over one frame, normalized units."""

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "t"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (self.x.shape == self.y.shape == self.t.shape):
            raise ValueError("x, y, t must have identical shapes")

    def __len__(self) -> int:
        return self.x.size

    def radius(self) -> np.ndarray:
        return np.hypot(self.x, self.y)


def rosette_locus(pattern: RosettePattern) -> ScanLocus:
    """Sample the locus at the detector rate over one repeat period.

    Timestamps start at t = 0 (so the first point is the origin) and stop one
    sample short of T, where the pattern closes onto its start.
    """
    k = np.arange(pattern.samples_per_frame)
    t = k / pattern.sample_rate
    w1 = 2.0 * math.pi * pattern.f1
    w2 = 2.0 * math.pi * pattern.f2
    x = np.cos(w1 * t) - np.cos(w2 * t)
    y = np.sin(w1 * t) - np.sin(w2 * t)
    return ScanLocus(x, y, t)


@dataclass(frozen=True)
class SampleGrid:
    """Discretized sample positions: pixel centers on a grid_size^2 grid."""

    grid_size: int
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        if rows.shape != cols.shape or rows.ndim != 1:
            raise ValueError("rows and cols must be 1-D and the same length")
        if rows.size and not (
            rows.min() >= 0 and rows.max() < self.grid_size
            and cols.min() >= 0 and cols.max() < self.grid_size
        ):
            raise ValueError("sample positions outside the grid")
        rows.flags.writeable = False
        cols.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def in_bounds_count(self) -> int:
        return self.rows.size


# Side of the square inscribed in the radius-2 locus circle, normalized units.
IMAGING_SQUARE_HALF_SIDE = math.sqrt(2.0)

# Samples mapping to the outermost pixel ring are discarded. The exact
# inscribed square retains 1.4-1.8% more samples than the published pattern
# tables for every tabulated (n, m); a one-pixel inset reproduces all of them
# to within 0.35%.
EDGE_INSET_PIXELS = 1


def discretize_pattern(locus: ScanLocus, grid_size: int) -> SampleGrid:
    """Map locus points to nearest pixel centers inside the imaging square.

    Pixel (0, 0) is the top-left corner (row index grows with decreasing y).
    A coordinate exactly on a pixel edge belongs to the larger index, which
    also resolves the grid-center tie for even grid sizes.
    """
    if grid_size < 2:
        raise ValueError(f"grid_size must be >= 2, got {grid_size}")
    if len(locus) == 0:
        raise ValueError("empty locus")
    half = IMAGING_SQUARE_HALF_SIDE
    pixel = 2.0 * half / grid_size
    col = np.floor((locus.x + half) / pixel).astype(np.int64)
    row = np.floor((half - locus.y) / pixel).astype(np.int64)
    lo, hi = EDGE_INSET_PIXELS, grid_size - EDGE_INSET_PIXELS
    keep = (row >= lo) & (row < hi) & (col >= lo) & (col < hi)
    return SampleGrid(grid_size, row[keep], col[keep])
