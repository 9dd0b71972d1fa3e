"""Precomputed linear reconstruction from a known measurement matrix.

The expensive step (an SVD-based pseudoinverse) runs once per sampling
pattern; imaging afterwards is a single matrix-vector product. Two flavors:

* ``plain_pseudoinverse`` — truncated-SVD Moore-Penrose pseudoinverse.
* ``frequency_weighted`` — P = W pinv(M W) with W a low-pass spectral
  weighting applied in the 2-D DFT basis, W(w1, w2) =
  1/sqrt(mu^2 + (1-mu)(sin^2(w1/2) + sin^2(w2/2))), mu = 0.5. A documented
  stand-in for Fourier-domain regularized inversion, not a fidelity claim.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .images import ImageGrid, quantize
from .sense import MeasurementMatrix

MAGIC_RECONSTRUCTION = b"RCSP"

PLAIN = "plain_pseudoinverse"
FREQUENCY_WEIGHTED = "frequency_weighted"
_METHOD_CODES = {PLAIN: 0, FREQUENCY_WEIGHTED: 1}

DEFAULT_TOLERANCE = 1e-10
SPECTRAL_MU = 0.5


@dataclass(frozen=True)
class ReconstructionMatrix:
    """Dense (grid_size^2 x samples) matrix applied once per frame."""

    matrix: np.ndarray
    method: str
    tolerance: float
    grid_size: int

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.float64)
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def pixels(self) -> int:
        return self.matrix.shape[0]

    @property
    def samples(self) -> int:
        return self.matrix.shape[1]


def _truncated_pinv(a: np.ndarray, tolerance: float) -> np.ndarray:
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise ValueError("measurement matrix is all zero")
    keep = s > tolerance * s[0]
    return (vt[keep].T / s[keep]) @ u[:, keep].T


def spectral_weights(grid_size: int, mu: float = SPECTRAL_MU) -> np.ndarray:
    """Diagonal of W over the 2-D DFT frequencies, in fft2 layout."""
    w = 2.0 * np.pi * np.fft.fftfreq(grid_size)
    s2 = np.sin(w / 2.0) ** 2
    return 1.0 / np.sqrt(mu * mu + (1.0 - mu) * (s2[:, None] + s2[None, :]))


def _filter_rows(mat: np.ndarray, diag: np.ndarray, grid_size: int) -> np.ndarray:
    imgs = mat.reshape(-1, grid_size, grid_size)
    return np.real(np.fft.ifft2(np.fft.fft2(imgs) * diag)).reshape(mat.shape)


def build_reconstruction_matrix(
    mm: MeasurementMatrix,
    method: str = PLAIN,
    tolerance: float = DEFAULT_TOLERANCE,
) -> ReconstructionMatrix:
    """Compute the reconstruction matrix for a fixed sampling pattern.

    Singular values below tolerance * sigma_max are discarded, which handles
    the numerically rank-deficient matrices heavy probe overlap produces.
    """
    if method not in _METHOD_CODES:
        raise ValueError(f"unknown reconstruction method {method!r}")
    if mm.nnz == 0:
        raise ValueError("measurement matrix is all zero")
    dense = mm.matrix.toarray()
    if method == PLAIN:
        p = _truncated_pinv(dense, tolerance)
    else:
        diag = spectral_weights(mm.grid_size)
        weighted = _filter_rows(dense, diag, mm.grid_size)
        p0 = _truncated_pinv(weighted, tolerance)
        p = _filter_rows(p0.T, diag, mm.grid_size).T
    return ReconstructionMatrix(p, method, tolerance, mm.grid_size)


def reconstruct_values(recon: ReconstructionMatrix, v: np.ndarray) -> np.ndarray:
    """Unclipped real-valued image estimate as a grid_size^2 array."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (recon.samples,):
        raise ValueError(f"expected {recon.samples} measurements, got {v.shape}")
    return (recon.matrix @ v).reshape(recon.grid_size, recon.grid_size)


def reconstruct(recon: ReconstructionMatrix, v: np.ndarray, bit_depth: int = 16) -> ImageGrid:
    """Image estimate clipped and quantized to the grid's bit depth."""
    return quantize(reconstruct_values(recon, v), bit_depth)


# ---------------------------------------------------------------------------
# Binary serialization: "RCSP", u32 rows, u32 cols, u8 method, f64 tolerance,
# then row-major little-endian f64 values. rows/cols are the reconstruction
# matrix's own shape (pixels x samples).
# ---------------------------------------------------------------------------

def save_reconstruction_matrix(path, recon: ReconstructionMatrix) -> None:
    header = MAGIC_RECONSTRUCTION + struct.pack(
        "<IIBd", recon.pixels, recon.samples,
        _METHOD_CODES[recon.method], recon.tolerance)
    Path(path).write_bytes(header + recon.matrix.astype("<f8").tobytes())


def load_reconstruction_matrix(path) -> ReconstructionMatrix:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC_RECONSTRUCTION:
        raise ValueError(f"{path}: bad magic, not a reconstruction matrix file")
    rows, cols, code, tolerance = struct.unpack_from("<IIBd", blob, 4)
    offset = 4 + struct.calcsize("<IIBd")
    values = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=offset)
    method = {v: k for k, v in _METHOD_CODES.items()}.get(code)
    if method is None:
        raise ValueError(f"{path}: unknown method code {code}")
    grid_size = int(round(np.sqrt(rows)))
    if grid_size * grid_size != rows:
        raise ValueError(f"{path}: row count {rows} is not a square grid")
    return ReconstructionMatrix(values.reshape(rows, cols), method, tolerance, grid_size)
