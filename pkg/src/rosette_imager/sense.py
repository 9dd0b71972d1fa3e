"""Detector probe rasterization and sparse measurement-matrix assembly.

One detector reading integrates the scene over a disc (the probe) centered
on a pixel. Each reading contributes one matrix row whose entries are the
per-pixel coverage fractions of that disc, so a measurement is the row-wise
dot product with the flattened image.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .scan import SampleGrid

MAGIC_MEASUREMENT = b"RCSM"

# Subpixel grid used to estimate pixel/disc overlap. 64x64 keeps every
# boundary weight within 1% of the true intersection area down to r ~ 0.4.
DEFAULT_SUPERSAMPLE = 64


@dataclass(frozen=True)
class Probe:
    """Disc footprint as a dense patch of per-pixel coverage fractions.

    patch[i, j] is the covered fraction of the pixel offset
    (i + anchor, j + anchor) from the probe center; anchor is negative.
    """

    radius: float
    patch: np.ndarray
    anchor: int

    def __post_init__(self):
        patch = np.asarray(self.patch, dtype=np.float64)
        patch.flags.writeable = False
        object.__setattr__(self, "patch", patch)

    @property
    def weight_sum(self) -> float:
        return float(self.patch.sum())

    def nonzero_offsets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(row_offsets, col_offsets, weights) for all covered pixels."""
        ii, jj = np.nonzero(self.patch)
        return ii + self.anchor, jj + self.anchor, self.patch[ii, jj]


def rasterize_probe(radius: float, supersample: int = DEFAULT_SUPERSAMPLE) -> Probe:
    """Fractional pixel coverage of a disc centered on a pixel center.

    Interior pixels get weight 1, exterior 0, and boundary pixels the covered
    area fraction estimated by counting supersample^2 subpixel centers.
    """
    if radius <= 0:
        raise ValueError(f"probe radius must be positive, got {radius}")
    if supersample < 1:
        raise ValueError("supersample must be >= 1")
    rint = int(np.ceil(radius + 0.5))
    offsets = np.arange(-rint, rint + 1, dtype=np.float64)
    sub = (np.arange(supersample) + 0.5) / supersample - 0.5

    # Separable distance table: for each pixel offset, the squared distances
    # of its subpixel columns (and by symmetry rows) from the probe center.
    d = offsets[:, None] + sub[None, :]              # (npix, supersample)
    d2 = d * d
    side = offsets.size
    counts = np.zeros((side, side), dtype=np.int64)
    r2 = radius * radius
    for i in range(side):
        # broadcast row-offset distances against all column distances
        inside = d2[i][:, None, None] + d2[None, :, :] <= r2
        counts[i] = inside.sum(axis=(0, 2))
    patch = counts / float(supersample * supersample)
    return Probe(radius, patch, -rint)


@dataclass(frozen=True)
class MeasurementMatrix:
    """Sparse rows mapping flattened image pixels to detector samples."""

    matrix: sparse.csr_matrix
    grid_size: int

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(row, col, weight) triples sorted by (row, col)."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]


def build_measurement_matrix(samples: SampleGrid, probe: Probe) -> MeasurementMatrix:
    """One row per sample, in sample order; probe pixels outside the grid
    are truncated from the row."""
    g = samples.grid_size
    if probe.patch.shape[0] > 2 * g:
        raise ValueError("probe patch larger than twice the grid")
    nsamp = samples.in_bounds_count
    if nsamp == 0:
        raise ValueError("no samples to measure")

    di, dj, w = probe.nonzero_offsets()
    rr = samples.rows[:, None] + di[None, :]          # (nsamp, npatch)
    cc = samples.cols[:, None] + dj[None, :]
    ok = (rr >= 0) & (rr < g) & (cc >= 0) & (cc < g)

    row_idx = np.broadcast_to(np.arange(nsamp)[:, None], ok.shape)[ok]
    col_idx = (rr * g + cc)[ok]
    data = np.broadcast_to(w[None, :], ok.shape)[ok]

    mat = sparse.csr_matrix((data, (row_idx, col_idx)), shape=(nsamp, g * g))
    empty = np.flatnonzero(np.diff(mat.indptr) == 0)
    if empty.size:
        raise ValueError(f"sample {empty[0]} produced an empty matrix row")
    return MeasurementMatrix(mat, g)


def measure(mm: MeasurementMatrix, image) -> np.ndarray:
    """Detector output: matrix times the row-major flattened image."""
    if image.pixels.shape != (mm.grid_size, mm.grid_size):
        raise ValueError(
            f"image shape {image.pixels.shape} does not match grid {mm.grid_size}")
    return mm.matrix @ image.flatten()


# ---------------------------------------------------------------------------
# Binary serialization: "RCSM", u32 rows, u32 cols, u64 nnz, then nnz
# little-endian records of (u32 row, u32 col, f64 weight) sorted by (row, col).
# ---------------------------------------------------------------------------

_RECORD = np.dtype([("row", "<u4"), ("col", "<u4"), ("weight", "<f8")])


def save_measurement_matrix(path, mm: MeasurementMatrix) -> None:
    rows, cols, data = mm.entries()
    rec = np.empty(data.size, dtype=_RECORD)
    rec["row"], rec["col"], rec["weight"] = rows, cols, data
    header = MAGIC_MEASUREMENT + struct.pack("<IIQ", mm.rows, mm.cols, data.size)
    Path(path).write_bytes(header + rec.tobytes())


def load_measurement_matrix(path) -> MeasurementMatrix:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC_MEASUREMENT:
        raise ValueError(f"{path}: bad magic, not a measurement matrix file")
    nrows, ncols, nnz = struct.unpack_from("<IIQ", blob, 4)
    rec = np.frombuffer(blob, dtype=_RECORD, count=nnz, offset=20)
    grid_size = int(round(np.sqrt(ncols)))
    if grid_size * grid_size != ncols:
        raise ValueError(f"{path}: column count {ncols} is not a square grid")
    mat = sparse.csr_matrix(
        (rec["weight"], (rec["row"].astype(np.int64), rec["col"].astype(np.int64))),
        shape=(nrows, ncols))
    return MeasurementMatrix(mat, grid_size)
