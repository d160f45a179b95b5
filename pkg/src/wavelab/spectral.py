"""Periodic anisotropic grids, discrete Fourier transforms and field files."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft


def fft_workers() -> int:
    """Worker count for transforms, capped by ``WAVELAB_THREADS``."""
    raw = os.environ.get("WAVELAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec2D:
    """Box ``[-L1, L1) x [-L2, L2)`` with ``N1 x N2`` points.

    Sample ``j`` sits at ``-L + 2 L j / N`` so the origin is index ``N/2``.
    """

    L1: float
    L2: float
    N1: int
    N2: int

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError("half-lengths must be positive")
        for n in (self.N1, self.N2):
            if n < 64 or not _is_pow2(int(n)):
                raise ValueError(f"point counts must be powers of two >= 64, got {n}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N1, self.N2)

    @property
    def dx1(self) -> float:
        return 2.0 * self.L1 / self.N1

    @property
    def dx2(self) -> float:
        return 2.0 * self.L2 / self.N2

    @property
    def cell_area(self) -> float:
        return self.dx1 * self.dx2

    @property
    def x1(self) -> np.ndarray:
        return -self.L1 + self.dx1 * np.arange(self.N1)

    @property
    def x2(self) -> np.ndarray:
        return -self.L2 + self.dx2 * np.arange(self.N2)

    @property
    def xi1(self) -> np.ndarray:
        return np.pi * sfft.fftfreq(self.N1, 1.0 / self.N1) / self.L1

    @property
    def xi2(self) -> np.ndarray:
        return np.pi * sfft.fftfreq(self.N2, 1.0 / self.N2) / self.L2

    def mesh(self):
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def wavenumbers(self):
        return np.meshgrid(self.xi1, self.xi2, indexing="ij")

    def scaled(self, s1: float, s2: float) -> "GridSpec2D":
        return GridSpec2D(self.L1 * s1, self.L2 * s2, self.N1, self.N2)


@dataclass
class Field2D:
    """Real samples on a grid."""

    values: np.ndarray
    grid: GridSpec2D

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")

    def spectrum(self) -> "SpectrumField2D":
        return SpectrumField2D(fft2(self.values), self.grid)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_area)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2) * self.grid.cell_area))

    def like(self, values) -> "Field2D":
        return Field2D(values, self.grid)


@dataclass
class SpectrumField2D:
    coeffs: np.ndarray
    grid: GridSpec2D

    def to_field(self) -> Field2D:
        return Field2D(ifft2_real(self.coeffs), self.grid)


def fft2(a):
    return sfft.fft2(a, workers=fft_workers())


def ifft2(a):
    return sfft.ifft2(a, workers=fft_workers())


def ifft2_real(a):
    return np.real(ifft2(a))


def apply_symbol(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Multiply the transform of real samples by ``symbol`` and return the real part."""
    return ifft2_real(symbol * fft2(values))


def safe_divide(num, den):
    """``num / den`` with zero wherever ``den == 0``."""
    num, den = np.broadcast_arrays(np.asarray(num, dtype=float), np.asarray(den, dtype=float))
    out = np.zeros(num.shape)
    mask = den != 0
    out[mask] = num[mask] / den[mask]
    return out


def spectral_derivative(values: np.ndarray, grid: GridSpec2D, order1: int = 0, order2: int = 0):
    """``d1**order1 d2**order2`` of a periodic field.

    Odd derivatives drop the unmatched Nyquist mode so the result stays real.
    """
    xi1, xi2 = grid.wavenumbers()
    sym = np.ones(grid.shape, dtype=complex)
    if order1:
        k1 = xi1.copy()
        if order1 % 2:
            k1[grid.N1 // 2, :] = 0.0
        sym = sym * (1j * k1) ** order1
    if order2:
        k2 = xi2.copy()
        if order2 % 2:
            k2[:, grid.N2 // 2] = 0.0
        sym = sym * (1j * k2) ** order2
    return ifft2_real(sym * fft2(values))


def x1_mean_defect(values: np.ndarray) -> float:
    """Largest per-line mean along x1, relative to the field's max."""
    scale = np.max(np.abs(values))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(values.mean(axis=0))) / scale)


def project_zero_x1_mean(values: np.ndarray) -> np.ndarray:
    """Remove the ``xi1 = 0`` plane."""
    return values - values.mean(axis=0, keepdims=True)


# field files: raw little-endian float64 plus a one-line text header

def write_field(path, field: Field2D) -> tuple[Path, Path]:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    field.values.astype("<f8").tofile(path)
    g = field.grid
    header = path.with_name(path.name + ".hdr")
    header.write_text(f"{g.N1} {g.N2} {g.L1!r} {g.L2!r}\n")
    return path, header


def read_field(path) -> Field2D:
    path = Path(path)
    header = path.with_name(path.name + ".hdr")
    parts = header.read_text().split()
    if len(parts) != 4:
        raise ValueError(f"malformed field header {header}")
    grid = GridSpec2D(float(parts[2]), float(parts[3]), int(parts[0]), int(parts[1]))
    data = np.fromfile(path, dtype="<f8")
    if data.size != grid.N1 * grid.N2:
        raise ValueError(f"{path}: expected {grid.N1 * grid.N2} values, found {data.size}")
    return Field2D(data.reshape(grid.shape), grid)
