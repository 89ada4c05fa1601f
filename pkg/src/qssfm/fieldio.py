"""Binary and CSV serialization of complex fields.

Binary layout (little-endian)::

    magic      8 bytes   b"QSSFMFLD"
    version    uint32
    ndim       uint32
    rep        uint32    0 = position, 1 = spectral
    shape      ndim * uint64
    lengths    ndim * float64
    origins    ndim * float64
    values     N * (float64 re, float64 im), flat row-major index order
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .grid import ComplexField, Grid, Representation

MAGIC = b"QSSFMFLD"
VERSION = 1
_REP_TAGS = {Representation.POSITION: 0, Representation.SPECTRAL: 1}


def write_field(path: str | Path, f: ComplexField) -> None:
    g = f.grid
    header = MAGIC + struct.pack("<III", VERSION, g.ndim, _REP_TAGS[f.representation])
    header += struct.pack(f"<{g.ndim}Q", *g.shape)
    header += struct.pack(f"<{g.ndim}d", *g.lengths)
    header += struct.pack(f"<{g.ndim}d", *g.origins)
    body = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    Path(path).write_bytes(header + body)


def read_field(path: str | Path) -> ComplexField:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: not a field file (bad magic)")
    version, ndim, tag = struct.unpack_from("<III", data, 8)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported field file version {version}")
    off = 20
    shape = struct.unpack_from(f"<{ndim}Q", data, off)
    off += 8 * ndim
    lengths = struct.unpack_from(f"<{ndim}d", data, off)
    off += 8 * ndim
    origins = struct.unpack_from(f"<{ndim}d", data, off)
    off += 8 * ndim
    rep = {v: k for k, v in _REP_TAGS.items()}[tag]
    grid = Grid(tuple(int(n) for n in shape), lengths, origins)
    values = np.frombuffer(data, dtype="<c16", offset=off)
    if values.size != grid.size:
        raise ValueError(f"{path}: expected {grid.size} values, found {values.size}")
    return ComplexField(grid, values.astype(complex), rep)


def write_field_csv(path: str | Path, f: ComplexField) -> None:
    """One row per point: index coordinates, re, im, |psi|^2."""
    g = f.grid
    idx = np.unravel_index(np.arange(g.size), g.shape)
    axis_names = ["ix", "iy"][: g.ndim]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(axis_names + ["re", "im", "density"])
        for row in zip(*idx, f.values.real, f.values.imag, f.density):
            w.writerow([int(i) for i in row[: g.ndim]] + [repr(float(v)) for v in row[g.ndim :]])


def write_scalar_csv(path: str | Path, grid: Grid, columns: dict[str, np.ndarray]) -> None:
    """Write real-valued fields keyed by grid coordinates."""
    coords = grid.flat_coordinates()
    names = ["x", "y"][: grid.ndim]
    cols = [np.asarray(c).ravel() for c in columns.values()]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + list(columns))
        for i in range(grid.size):
            w.writerow([repr(float(c[i])) for c in coords] + [repr(float(c[i])) for c in cols])
