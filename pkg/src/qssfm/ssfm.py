"""Classical Strang-split Fourier solver for the NLSE.

Solves ``i psi_t = (-1/2 lap + g C |a|^2 + V) psi`` where ``a`` is the unit-norm
sample vector and ``C`` a density scale, so ``C |a|^2`` is the physical density
of the unnormalized field.  One step is::

    F^-1 e^{-i tau k^2/4} F  .  e^{-i tau H_p}  .  F^-1 e^{-i tau k^2/4} F
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .fieldio import read_field, write_field
from .grid import ComplexField, Grid, Representation, k_squared

logger = logging.getLogger(__name__)

PotentialFn = Callable[[Grid, float], np.ndarray]


@dataclass(frozen=True)
class SsfmConfig:
    tau: float
    g: float = 0.0
    potential: Optional[PotentialFn] = None
    density_scale: float = 1.0
    merge_halves: bool = False

    def __post_init__(self):
        # negative tau is allowed and runs the scheme backward in time
        if self.tau == 0 or not np.isfinite(self.tau):
            raise ValueError(f"tau must be a finite non-zero number, got {self.tau}")
        if not self.density_scale > 0:
            raise ValueError(f"density_scale must be positive, got {self.density_scale}")


def potential_values(grid: Grid, potential: Optional[PotentialFn], t: float) -> np.ndarray:
    if potential is None:
        return np.zeros(grid.size)
    v = np.asarray(potential(grid, t), dtype=float).ravel()
    if v.size != grid.size:
        raise ValueError(f"potential returned {v.size} values for a grid of {grid.size}")
    return v


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    fields: list[ComplexField] = field(default_factory=list)
    aux: dict = field(default_factory=dict)

    def append(self, t: float, f: ComplexField) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError("trajectory times must be strictly increasing")
        self.times.append(float(t))
        self.fields.append(f)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> ComplexField:
        return self.fields[-1]

    def at(self, t: float, atol: float = 1e-9) -> ComplexField:
        for ti, f in zip(self.times, self.fields):
            if abs(ti - t) <= atol:
                return f
        raise KeyError(f"no snapshot at t={t}")

    def save(self, directory: str | Path, config_echo: dict | None = None) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = []
        for i, f in enumerate(self.fields):
            name = f"snapshot_{i:05d}.bin"
            write_field(directory / name, f)
            files.append(name)
        manifest = {"times": self.times, "files": files, "config": config_echo or {}}
        (directory / "trajectory.json").write_text(json.dumps(manifest, indent=2))

    @classmethod
    def load(cls, directory: str | Path) -> "Trajectory":
        directory = Path(directory)
        manifest = json.loads((directory / "trajectory.json").read_text())
        traj = cls()
        for t, name in zip(manifest["times"], manifest["files"]):
            traj.append(t, read_field(directory / name))
        return traj


def kinetic_half_phase(grid: Grid, tau: float) -> np.ndarray:
    """Phase ``-tau/4 * |k|^2`` of the half kinetic step, flat over spectral indices."""
    return -(tau / 4.0) * k_squared(grid)


def _nonlinear_phase(values: np.ndarray, grid: Grid, config: SsfmConfig, t: float) -> np.ndarray:
    rho = np.abs(values.ravel()) ** 2
    v = potential_values(grid, config.potential, t)
    return -config.tau * (config.g * config.density_scale * rho + v)


def nonlinear_phase(f: ComplexField, config: SsfmConfig, t: float) -> np.ndarray:
    """Phase ``-tau (g C |a|^2 + V(x, t))`` over position indices."""
    if f.representation is not Representation.POSITION:
        raise ValueError("nonlinear_phase needs a position-space field")
    return _nonlinear_phase(f.values, f.grid, config, t)


def _fft(a):
    return np.fft.fftn(a, norm="ortho")


def _ifft(a):
    return np.fft.ifftn(a, norm="ortho")


def strang_step(f: ComplexField, config: SsfmConfig, t: float) -> ComplexField:
    grid = f.grid
    half = np.exp(1j * kinetic_half_phase(grid, config.tau)).reshape(grid.shape)
    a = _ifft(_fft(f.as_array()) * half)
    a = a * np.exp(1j * _nonlinear_phase(a, grid, config, t)).reshape(grid.shape)
    a = _ifft(_fft(a) * half)
    return ComplexField(grid, a)


def step_count(t_end: float, tau: float) -> int:
    steps = int(round(t_end / tau))
    if steps < 0 or abs(steps * tau - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError(f"t_end={t_end} is not a non-negative integer multiple of tau={tau}")
    return steps


def sample_steps(steps: int, sample_every: int | None, sample_times: Sequence[float] | None, tau: float) -> set[int]:
    """Step indices at which snapshots are taken; always includes 0 and the last step."""
    marks = {0, steps}
    if sample_times is not None:
        marks |= {step_count(t, tau) for t in sample_times if t <= steps * tau + 1e-12}
    else:
        every = sample_every or max(steps, 1)
        if every < 1:
            raise ValueError("sample_every must be >= 1")
        marks |= set(range(0, steps + 1, every))
    return marks


def evolve(
    initial: ComplexField,
    config: SsfmConfig,
    t_end: float,
    sample_every: int | None = 1,
    sample_times: Sequence[float] | None = None,
) -> Trajectory:
    if config.tau <= 0:
        raise ValueError("evolve needs a positive time step")
    grid = initial.grid
    tau = config.tau
    steps = step_count(t_end, tau)
    marks = sample_steps(steps, sample_every, sample_times, tau)

    traj = Trajectory()
    traj.append(0.0, initial)
    if steps == 0:
        return traj

    half = np.exp(1j * kinetic_half_phase(grid, tau)).reshape(grid.shape)
    a = initial.as_array().copy()

    if not config.merge_halves:
        for j in range(steps):
            a = _ifft(_fft(a) * half)
            a = a * np.exp(1j * _nonlinear_phase(a, grid, config, j * tau)).reshape(grid.shape)
            a = _ifft(_fft(a) * half)
            if j + 1 in marks:
                traj.append((j + 1) * tau, ComplexField(grid, a))
        return traj

    # fused path: trailing half of step j and opening half of step j+1 become one full kinetic step
    full = half * half
    spec = _fft(a) * half
    for j in range(steps):
        a = _ifft(spec)
        a = a * np.exp(1j * _nonlinear_phase(a, grid, config, j * tau)).reshape(grid.shape)
        spec = _fft(a)
        if j + 1 in marks:
            traj.append((j + 1) * tau, ComplexField(grid, _ifft(spec * half)))
        spec = spec * full
    return traj
