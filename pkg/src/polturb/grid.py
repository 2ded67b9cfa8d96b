"""Periodic 2D grid, complex field pair and region-of-interest bookkeeping.

Arrays are indexed ``[iy, ix]``; the x axis runs along the last dimension.
Wavevector axes follow FFT ordering with spacing 2*pi/L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

#: default side of the central observation window (dimensionless length)
DEFAULT_ROI_SIDE = 24.0


@dataclass(frozen=True)
class Grid2D:
    """Square periodic grid of n x n points spanning a box of side ``length``."""

    n: int
    length: float

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dx

    y = x

    @property
    def kx(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.dx)

    ky = kx

    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid (X, Y) with X varying along the last axis."""
        return np.meshgrid(self.x, self.y)

    def k2(self) -> np.ndarray:
        """|k|^2 on the FFT-ordered grid."""
        kx = self.kx
        return kx[None, :] ** 2 + kx[:, None] ** 2

    @property
    def k_max(self) -> float:
        return np.pi / self.dx


def make_grid(n: int, length: float) -> Grid2D:
    if n <= 0 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two, got n={n}")
    if length <= 0:
        raise ValueError(f"grid length must be positive, got {length}")
    return Grid2D(n=n, length=float(length))


@dataclass
class FieldPair:
    """Photon and exciton fields on a shared grid at a common time."""

    grid: Grid2D
    psi_c: np.ndarray
    psi_x: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        shape = (self.grid.n, self.grid.n)
        if self.psi_c.shape != shape or self.psi_x.shape != shape:
            raise ValueError(
                f"field shapes {self.psi_c.shape}/{self.psi_x.shape} do not "
                f"match grid {shape}"
            )

    def copy(self) -> "FieldPair":
        return FieldPair(self.grid, self.psi_c.copy(), self.psi_x.copy(), self.t)

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.psi_c).all() and np.isfinite(self.psi_x).all()
        )


def empty_fields(grid: Grid2D, dtype=np.complex128) -> FieldPair:
    shape = (grid.n, grid.n)
    return FieldPair(grid, np.zeros(shape, dtype), np.zeros(shape, dtype), 0.0)


@dataclass(frozen=True)
class Roi:
    """Axis-aligned window given by a center offset and side lengths."""

    center: tuple[float, float] = (0.0, 0.0)
    size: tuple[float, float] = (DEFAULT_ROI_SIDE, DEFAULT_ROI_SIDE)

    def resolve(self, grid: Grid2D) -> tuple[slice, slice]:
        """Index window (y slice, x slice) on ``grid``.

        The window is snapped to whole pixels; it must lie inside the grid.
        """
        cx, cy = self.center
        sx, sy = self.size
        if sx <= 0 or sy <= 0:
            raise ValueError(f"roi sides must be positive, got {self.size}")
        slices = []
        for c, s in ((cy, sy), (cx, sx)):
            count = int(round(s / grid.dx))
            i0 = grid.n // 2 + int(round((c - s / 2.0) / grid.dx))
            i1 = i0 + count
            if i0 < 0 or i1 > grid.n or count == 0:
                raise ValueError(
                    f"roi {self} resolves to [{i0}, {i1}) outside grid n={grid.n}"
                )
            slices.append(slice(i0, i1))
        return slices[0], slices[1]


def roi_view(fields: FieldPair, roi: Roi) -> tuple[np.ndarray, np.ndarray]:
    """Read-only windows of (psi_c, psi_x) over ``roi``."""
    sy, sx = roi.resolve(fields.grid)
    vc = fields.psi_c[sy, sx]
    vx = fields.psi_x[sy, sx]
    vc.flags.writeable = False
    vx.flags.writeable = False
    return vc, vx


def forward_spectrum(field: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Unitary 2D DFT of a field sampled on ``grid``."""
    if field.shape != (grid.n, grid.n):
        raise ValueError(f"field shape {field.shape} does not match grid n={grid.n}")
    return sfft.fft2(field, norm="ortho")


def inverse_spectrum(spec: np.ndarray, grid: Grid2D) -> np.ndarray:
    if spec.shape != (grid.n, grid.n):
        raise ValueError(f"spectrum shape {spec.shape} does not match grid n={grid.n}")
    return sfft.ifft2(spec, norm="ortho")


def pad_spectrum_2x(spec: np.ndarray) -> np.ndarray:
    """Zero-pad an FFT-ordered spectrum to twice the linear size.

    The Nyquist row/column is split in half between its two aliases so that
    the padded spectrum represents the same band-limited function exactly.
    """
    n = spec.shape[0]
    h = n // 2
    out = np.zeros((2 * n, 2 * n), dtype=spec.dtype)
    s = spec.copy()
    # split Nyquist row/column between +/- positions
    s[h, :] *= 0.5
    s[:, h] *= 0.5
    pos = np.r_[0 : h + 1]
    neg = np.r_[h:n]
    out[np.ix_(pos, pos)] = s[np.ix_(pos, pos)]
    out[np.ix_(pos, 2 * n - (n - h) + np.arange(n - h))] = s[np.ix_(pos, neg)]
    out[np.ix_(2 * n - (n - h) + np.arange(n - h), pos)] = s[np.ix_(neg, pos)]
    out[np.ix_(2 * n - (n - h) + np.arange(n - h), 2 * n - (n - h) + np.arange(n - h))] = s[
        np.ix_(neg, neg)
    ]
    return out


def truncate_spectrum_2x(spec: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pad_spectrum_2x`: fold a 2n spectrum back to n modes."""
    n2 = spec.shape[0]
    n = n2 // 2
    h = n // 2
    out = np.zeros((n, n), dtype=spec.dtype)
    pos = np.r_[0 : h + 1]
    neg = np.r_[h:n]
    src_neg = n2 - (n - h) + np.arange(n - h)
    out[np.ix_(pos, pos)] += spec[np.ix_(pos, pos)]
    out[np.ix_(pos, neg)] += spec[np.ix_(pos, src_neg)]
    out[np.ix_(neg, pos)] += spec[np.ix_(src_neg, pos)]
    out[np.ix_(neg, neg)] += spec[np.ix_(src_neg, src_neg)]
    return out
