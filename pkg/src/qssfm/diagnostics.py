"""Error metrics and superfluid flow diagnostics.

Velocity is the Madelung field ``u = Im(psi* grad psi) / max(|psi|^2, floor)``
with spectral gradients; the floor regularizes vortex cores.  Vorticity is the
spectral curl of ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import ComplexField, Grid, Representation, dft_forward, wavenumbers
from .ssfm import Trajectory


def _same_grid(a: ComplexField, b: ComplexField) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def density_error_field(psi_c: ComplexField, psi_q: ComplexField) -> np.ndarray:
    """Signed ``|psi_c|^2 - |psi_q|^2``, shaped like the grid."""
    _same_grid(psi_c, psi_q)
    return (psi_c.density - psi_q.density).reshape(psi_c.grid.shape)


def relative_l2_error(psi_c: ComplexField, psi_q: ComplexField, mask: np.ndarray | None = None) -> float:
    """``|| |psi_c|^2 - |psi_q|^2 || / || |psi_c|^2 ||``, optionally over a boolean mask."""
    err = density_error_field(psi_c, psi_q).ravel()
    ref = psi_c.density
    if mask is not None:
        mask = np.asarray(mask, dtype=bool).ravel()
        err, ref = err[mask], ref[mask]
    denom = np.linalg.norm(ref)
    if denom == 0.0:
        raise ValueError("reference density is identically zero")
    return float(np.linalg.norm(err) / denom)


@dataclass
class ErrorReport:
    relative_l2_density_error: float = 0.0
    max_pointwise_density_error: float = 0.0
    norm_deficit: float = 0.0
    times: list[float] = field(default_factory=list)
    relative_l2_series: list[float] = field(default_factory=list)
    max_pointwise_series: list[float] = field(default_factory=list)
    norm_deficit_series: list[float] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"relative_l2_density_error {self.relative_l2_density_error!r}",
            f"max_pointwise_density_error {self.max_pointwise_density_error!r}",
            f"norm_deficit {self.norm_deficit!r}",
            "# time relative_l2 max_pointwise norm_deficit",
        ]
        for row in zip(self.times, self.relative_l2_series, self.max_pointwise_series, self.norm_deficit_series):
            lines.append(" ".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def error_report(reference: Trajectory, candidate: Trajectory, atol: float = 1e-9) -> ErrorReport:
    """Compare two trajectories snapshot by snapshot; the last snapshot fills the scalars."""
    if len(reference) != len(candidate) or any(
        abs(a - b) > atol for a, b in zip(reference.times, candidate.times)
    ):
        raise ValueError("trajectories do not share sample times")
    rep = ErrorReport()
    for t, c, q in zip(reference.times, reference.fields, candidate.fields):
        rep.times.append(t)
        rep.relative_l2_series.append(relative_l2_error(c, q))
        rep.max_pointwise_series.append(float(np.max(np.abs(density_error_field(c, q)))))
        rep.norm_deficit_series.append(1.0 - float(np.linalg.norm(q.values)))
    rep.relative_l2_density_error = rep.relative_l2_series[-1]
    rep.max_pointwise_density_error = rep.max_pointwise_series[-1]
    rep.norm_deficit = rep.norm_deficit_series[-1]
    return rep


def spectrum_magnitudes(f: ComplexField) -> np.ndarray:
    """``|DFT|`` in FFT ordering (flat)."""
    spec = f if f.representation is Representation.SPECTRAL else dft_forward(f)
    return np.abs(spec.values)


def _gauge_index(grid: Grid, gauge_point) -> int:
    if gauge_point is None:
        return 0
    if isinstance(gauge_point, (int, np.integer)):
        return int(gauge_point)
    return int(np.ravel_multi_index(tuple(gauge_point), grid.shape))


def phase_field(f: ComplexField, gauge_point=None) -> np.ndarray:
    """``arg(psi) - arg(psi[gauge_point])`` wrapped to (-pi, pi]; gauge defaults to the first corner."""
    idx = _gauge_index(f.grid, gauge_point)
    ref = f.values[idx]
    rot = np.conj(ref) / abs(ref) if abs(ref) > 0 else 1.0
    phase = np.angle(f.values * rot)
    # np.angle returns [-pi, pi]; fold -pi onto +pi
    phase = np.where(phase <= -np.pi, np.pi, phase)
    phase[idx] = 0.0
    return phase.reshape(f.grid.shape)


def _spectral_derivative(values: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    k = wavenumbers(grid, axis)
    shape = [1] * grid.ndim
    shape[axis] = k.size
    spec = np.fft.fftn(values, norm="ortho")
    return np.fft.ifftn(1j * k.reshape(shape) * spec, norm="ortho")


def _floor(f: ComplexField, floor: float | None) -> float:
    if floor is None:
        return 1e-6 * float(np.max(f.density))
    if not floor > 0:
        raise ValueError(f"density floor must be positive, got {floor}")
    return float(floor)


def velocity_field(f: ComplexField, floor: float | None = None) -> tuple[np.ndarray, ...]:
    """Madelung velocity, one array per axis shaped like the grid.

    ``floor`` defaults to ``1e-6 * max |psi|^2``.
    """
    delta = _floor(f, floor)
    psi = f.as_array()
    rho = np.maximum(np.abs(psi) ** 2, delta)
    out = []
    for axis in range(f.grid.ndim):
        grad = _spectral_derivative(psi, f.grid, axis)
        out.append(np.imag(np.conj(psi) * grad) / rho)
    return tuple(out)


def vorticity_field(f: ComplexField, floor: float | None = None) -> np.ndarray:
    if f.grid.ndim != 2:
        raise ValueError("vorticity needs a 2D field")
    ux, uy = velocity_field(f, floor)
    return np.real(_spectral_derivative(uy, f.grid, 0) - _spectral_derivative(ux, f.grid, 1))


def square_loop(center: Sequence[int], half_width: int) -> list[tuple[int, int]]:
    """Counter-clockwise square of grid indices around ``center`` (x index first)."""
    if half_width < 1:
        raise ValueError("half_width must be >= 1")
    i, j = center
    h = half_width
    pts = [(i + k, j - h) for k in range(-h, h)]
    pts += [(i + h, j + k) for k in range(-h, h)]
    pts += [(i - k, j + h) for k in range(-h, h)]
    pts += [(i - h, j - k) for k in range(-h, h)]
    return pts


def circulation(velocity: Sequence[np.ndarray], grid: Grid, loop: Sequence[tuple[int, int]]) -> float:
    """Trapezoidal line integral of ``u . dl`` around a closed loop of grid points.

    Consecutive points must be grid neighbours along one axis; indices wrap periodically.
    """
    if grid.ndim != 2:
        raise ValueError("circulation needs a 2D grid")
    pts = [tuple(int(v) for v in p) for p in loop]
    if len(set((p[0] % grid.shape[0], p[1] % grid.shape[1]) for p in pts)) < 3:
        raise ValueError("degenerate loop: need at least three distinct points")
    ux, uy = velocity
    dx, dy = grid.spacings
    nx, ny = grid.shape
    total = 0.0
    for a, b in zip(pts, pts[1:] + pts[:1]):
        sx, sy = b[0] - a[0], b[1] - a[1]
        if abs(sx) + abs(sy) != 1:
            raise ValueError(f"loop points {a} -> {b} are not grid neighbours")
        ia, ib = (a[0] % nx, a[1] % ny), (b[0] % nx, b[1] % ny)
        if sx:
            total += 0.5 * (ux[ia] + ux[ib]) * sx * dx
        else:
            total += 0.5 * (uy[ia] + uy[ib]) * sy * dy
    return float(total)


def circulation_map(velocity: Sequence[np.ndarray], grid: Grid, half_width: int) -> np.ndarray:
    """Circulation of :func:`square_loop` centred on every grid point (vectorized)."""
    ux, uy = velocity
    dx, dy = grid.spacings
    h = half_width

    def shifted(a, si, sj):
        # value at (i + si, j + sj) stored at (i, j)
        return np.roll(a, (-si, -sj), axis=(0, 1))

    out = np.zeros(grid.shape)
    for k in range(-h, h):
        out += 0.5 * (shifted(ux, k, -h) + shifted(ux, k + 1, -h)) * dx
        out += 0.5 * (shifted(uy, h, k) + shifted(uy, h, k + 1)) * dy
        out -= 0.5 * (shifted(ux, k, h) + shifted(ux, k + 1, h)) * dx
        out -= 0.5 * (shifted(uy, -h, k) + shifted(uy, -h, k + 1)) * dy
    return out
