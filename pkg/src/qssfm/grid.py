"""Uniform periodic grids, complex fields and the unitary DFT pair.

Multi-dimensional fields are stored flat in row-major order with axis 0 = x,
so a 2D sample at (lx, ly) lives at index ``lx * Ny + ly``.  The same
ordering is the bit-to-coordinate contract used by :mod:`qssfm.qsim`: the
x register occupies the most significant qubits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class Representation(enum.Enum):
    POSITION = "position"
    SPECTRAL = "spectral"


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    shape: tuple[int, ...]
    lengths: tuple[float, ...]
    origins: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.shape) == len(self.lengths) == len(self.origins)):
            raise ValueError("shape, lengths and origins must have the same number of axes")
        if len(self.shape) not in (1, 2):
            raise ValueError(f"only 1D and 2D grids are supported, got ndim={len(self.shape)}")
        for axis, (n, length) in enumerate(zip(self.shape, self.lengths)):
            if not _is_power_of_two(int(n)):
                raise ValueError(f"axis {axis}: point count {n} is not a power of two >= 2")
            if not length > 0:
                raise ValueError(f"axis {axis}: length must be positive, got {length}")

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(length / n for n, length in zip(self.shape, self.lengths))

    @property
    def qubits_per_axis(self) -> tuple[int, ...]:
        return tuple(int(n).bit_length() - 1 for n in self.shape)

    @property
    def n_qubits(self) -> int:
        return sum(self.qubits_per_axis)

    def axis_coordinates(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return self.origins[axis] + np.arange(n) * self.spacings[axis]

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Meshgrid of point coordinates, each array shaped like the grid."""
        axes = [self.axis_coordinates(d) for d in range(self.ndim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def flat_coordinates(self) -> tuple[np.ndarray, ...]:
        return tuple(c.ravel() for c in self.coordinates())


def make_grid(
    shape: Sequence[int],
    lengths: Sequence[float],
    origins: Sequence[float] | None = None,
) -> Grid:
    """Build a grid; ``origins`` defaults to a domain centred on zero."""
    shape = tuple(int(n) for n in shape)
    lengths = tuple(float(x) for x in lengths)
    if origins is None:
        origins = tuple(-x / 2 for x in lengths)
    return Grid(shape, lengths, tuple(float(x) for x in origins))


def wavenumbers(grid: Grid, axis: int) -> np.ndarray:
    """FFT-ordered wavenumbers ``(2*pi/L) * [0, 1, ..., N/2-1, -N/2, ..., -1]``."""
    if not 0 <= axis < grid.ndim:
        raise IndexError(f"axis {axis} out of range for a {grid.ndim}D grid")
    n = grid.shape[axis]
    idx = np.arange(n)
    idx = np.where(idx < n // 2, idx, idx - n)
    return (2 * np.pi / grid.lengths[axis]) * idx


def wavenumber_mesh(grid: Grid) -> tuple[np.ndarray, ...]:
    ks = [wavenumbers(grid, d) for d in range(grid.ndim)]
    return tuple(np.meshgrid(*ks, indexing="ij"))


def k_squared(grid: Grid) -> np.ndarray:
    """Flat array of |k|^2 over spectral indices."""
    return sum(k**2 for k in wavenumber_mesh(grid)).ravel()


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    values: np.ndarray
    representation: Representation = Representation.POSITION

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).ravel()
        if values.size != self.grid.size:
            raise ValueError(
                f"field has {values.size} values but the grid has {self.grid.size} points"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def as_array(self) -> np.ndarray:
        """Values reshaped to the grid shape (read-only view)."""
        return self.values.reshape(self.grid.shape)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def with_values(self, values: np.ndarray) -> ComplexField:
        return ComplexField(self.grid, values, self.representation)


def _check_rep(f: ComplexField, expected: Representation) -> None:
    if f.representation is not expected:
        raise ValueError(
            f"expected a {expected.value} field, got {f.representation.value}"
        )


def dft_forward(f: ComplexField) -> ComplexField:
    """Unitary multidimensional DFT, exp(-i k x) kernel and 1/sqrt(N) scaling."""
    _check_rep(f, Representation.POSITION)
    out = np.fft.fftn(f.as_array(), norm="ortho")
    return ComplexField(f.grid, out, Representation.SPECTRAL)


def dft_inverse(f: ComplexField) -> ComplexField:
    _check_rep(f, Representation.SPECTRAL)
    out = np.fft.ifftn(f.as_array(), norm="ortho")
    return ComplexField(f.grid, out, Representation.POSITION)


def l2_norm(f: ComplexField | np.ndarray) -> float:
    values = f.values if isinstance(f, ComplexField) else np.asarray(f)
    return float(np.linalg.norm(values.ravel()))


def normalize(f: ComplexField) -> ComplexField:
    norm = l2_norm(f)
    if norm == 0.0:
        raise ValueError("cannot normalize an all-zero field")
    return f.with_values(f.values / norm)
