"""Filtered hybrid split-step loop.

Each step Fourier transforms the register, applies the kinetic phase, reads
out the retained low-frequency modes with Hadamard tests, rebuilds the
position-space field classically from those modes (optionally renormalized),
turns its density into the nonlinear phase gate and finishes the Strang step.
The register itself is never truncated; only the nonlinear potential sees the
filter.
"""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import qsim
from .grid import ComplexField, Grid, Representation
from .qsim import GateCostLedger, Part, ShotBudget, StateVector
from .ssfm import PotentialFn, Trajectory, potential_values, sample_steps, step_count

logger = logging.getLogger(__name__)


class FidelityMode(enum.Enum):
    IDEAL = "ideal"
    EMULATED_HARDWARE = "emulated-hardware"


@dataclass(frozen=True)
class FilterSpec:
    """Retained qubits per axis; axis d keeps ``M_d = 2**m[d]`` modes."""

    m: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        if any(v < 1 for v in m):
            raise ValueError(f"retained qubits must be >= 1, got {m}")
        object.__setattr__(self, "m", m)

    @classmethod
    def full(cls, grid: Grid) -> "FilterSpec":
        return cls(grid.qubits_per_axis)

    @property
    def modes_per_axis(self) -> tuple[int, ...]:
        return tuple(2**v for v in self.m)

    @property
    def n_modes(self) -> int:
        return int(np.prod(self.modes_per_axis))


def axis_retained(n: int, m_modes: int) -> np.ndarray:
    half = m_modes // 2
    return np.concatenate([np.arange(half), np.arange(n - half, n)])


def retained_indices(filt: FilterSpec, grid: Grid) -> np.ndarray:
    """Flat spectral indices kept by the filter, ascending.

    Per axis the first M/2 (positive) and last M/2 (negative) FFT-ordered
    modes are kept; the multi-axis set is their tensor product.
    """
    if len(filt.m) != grid.ndim:
        raise ValueError(f"filter has {len(filt.m)} axes, grid has {grid.ndim}")
    per_axis = []
    for axis, (n, mm) in enumerate(zip(grid.shape, filt.modes_per_axis)):
        if mm > n:
            raise ValueError(f"axis {axis}: {mm} retained modes exceed {n} grid points")
        per_axis.append(axis_retained(n, mm))
    mesh = np.meshgrid(*per_axis, indexing="ij")
    return np.sort(np.ravel_multi_index(tuple(a.ravel() for a in mesh), grid.shape))


@dataclass(frozen=True)
class HybridConfig:
    tau: float
    g: float = 0.0
    density_scale: float = 1.0
    potential: Optional[PotentialFn] = None
    filter: Optional[FilterSpec] = None  # None keeps every mode
    normalize_reconstruction: bool = True
    fidelity_mode: FidelityMode = FidelityMode.IDEAL
    shot_budget: ShotBudget = field(default_factory=ShotBudget.exact)
    merge_halves: bool = False
    qft_method: str = "fft"
    potential_units_per_mode: int = 2

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.density_scale > 0:
            raise ValueError(f"density_scale must be positive, got {self.density_scale}")
        if self.fidelity_mode is FidelityMode.EMULATED_HARDWARE and self.shot_budget.is_exact:
            raise ValueError("emulated-hardware mode needs a finite shot budget")

    def filter_for(self, grid: Grid) -> FilterSpec:
        return self.filter or FilterSpec.full(grid)


@dataclass
class StepCost:
    step: int
    shots: int
    depth_units: int
    repreparations: int


@dataclass
class CostReport:
    total_shots: int = 0
    total_repreparations: int = 0
    cumulative_depth_units: int = 0
    predicted_runtime_units: int = 0
    per_step: list[StepCost] = field(default_factory=list)

    def add(self, row: StepCost) -> None:
        self.per_step.append(row)
        self.total_shots += row.shots
        self.total_repreparations += row.repreparations
        self.cumulative_depth_units += row.depth_units

    def to_text(self) -> str:
        keys = ["total_shots", "total_repreparations", "cumulative_depth_units", "predicted_runtime_units"]
        lines = [f"{k} {getattr(self, k)}" for k in keys]
        lines.append(f"steps {len(self.per_step)}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "shots", "depth_units", "repreparations"])
            for r in self.per_step:
                w.writerow([r.step, r.shots, r.depth_units, r.repreparations])


def predicted_runtime(n_steps: int, n_modes: int, n_qubits: int, shots: int) -> int:
    """Unit-normalized runtime ``sum_j 2 M shots j n^2 = M shots n^2 N_t (N_t + 1)``.

    The factor 2 counts the real and imaginary readout circuits; the depth of
    the circuit re-prepared at step j grows like ``j n^2``.
    """
    for name, v in [("n_steps", n_steps), ("n_modes", n_modes), ("n_qubits", n_qubits), ("shots", shots)]:
        if v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")
    # python ints keep the closed form exact at any size
    return int(n_modes) * int(shots) * int(n_qubits) ** 2 * int(n_steps) * (int(n_steps) + 1)


def measure_retained_modes(
    spectral_state: StateVector,
    indices: np.ndarray,
    budget: ShotBudget,
    mode: FidelityMode = FidelityMode.IDEAL,
    step: int = 0,
) -> np.ndarray:
    """Complex coefficients of the register at ``indices`` (aligned with them).

    Ideal mode reads amplitudes exactly.  Emulated hardware runs two Hadamard
    tests per mode, each on its own seeded stream ``(step, index, part)``.
    """
    indices = np.asarray(indices)
    if indices.size == 0:
        raise ValueError("no retained modes to measure")
    if mode is FidelityMode.IDEAL:
        return spectral_state.amplitudes[indices].copy()
    out = np.empty(indices.size, dtype=complex)
    for i, idx in enumerate(indices):
        re = qsim.hadamard_test(spectral_state, int(idx), Part.REAL, budget, stream=(step, idx, 0))
        im = qsim.hadamard_test(spectral_state, int(idx), Part.IMAG, budget, stream=(step, idx, 1))
        # shot noise can push |c| above 1; kept unclipped to avoid biasing the estimator
        out[i] = re + 1j * im
    return out


def reconstruct_field(coeffs: np.ndarray, indices: np.ndarray, grid: Grid, normalize: bool) -> ComplexField:
    spectrum = np.zeros(grid.size, dtype=complex)
    spectrum[np.asarray(indices)] = coeffs
    values = np.fft.ifftn(spectrum.reshape(grid.shape), norm="ortho").ravel()
    if normalize:
        norm = np.linalg.norm(values)
        if norm == 0.0:
            raise ValueError("reconstruction is identically zero; cannot normalize")
        values = values / norm
    return ComplexField(grid, values, Representation.POSITION)


def build_potential_phases(recon: ComplexField, config: HybridConfig, t: float) -> np.ndarray:
    """``-tau (g C |recon|^2 + V(x, t))`` on every grid point."""
    if recon.representation is not Representation.POSITION:
        raise ValueError("reconstruction must be in position space")
    v = potential_values(recon.grid, config.potential, t)
    return -config.tau * (config.g * config.density_scale * recon.density + v)


class _Loop:
    """Shared machinery for one hybrid run on a persistent emulated register."""

    def __init__(self, grid: Grid, config: HybridConfig, ledger: GateCostLedger):
        self.grid = grid
        self.config = config
        self.ledger = ledger
        self.axes = grid.qubits_per_axis
        self.indices = retained_indices(config.filter_for(grid), grid)
        self.recon_norms: list[float] = []

    def qft(self, s):
        return qsim.apply_qft(s, self.axes, self.ledger, self.config.qft_method)

    def iqft(self, s):
        return qsim.apply_iqft(s, self.axes, self.ledger, self.config.qft_method)

    def kinetic(self, s, fraction=0.5):
        return qsim.apply_kinetic_diagonal(s, self.grid, self.config.tau, self.ledger, fraction)

    def nonlinear(self, spectral: StateVector, t: float, step: int) -> tuple[StateVector, int]:
        """Readout at the spectral point, classical rebuild, then U_p in position space.

        Also returns the register depth at the readout point, which is what a
        re-prepared readout circuit has to replay.
        """
        cfg = self.config
        depth_to_readout = self.ledger.circuit_depth_units
        coeffs = measure_retained_modes(spectral, self.indices, cfg.shot_budget, cfg.fidelity_mode, step)
        raw = reconstruct_field(coeffs, self.indices, self.grid, normalize=False)
        norm = float(np.linalg.norm(raw.values))
        self.recon_norms.append(norm)
        if cfg.normalize_reconstruction:
            if norm == 0.0:
                raise ValueError(f"step {step}: reconstruction is identically zero; cannot normalize")
            recon = raw.with_values(raw.values / norm)
        else:
            recon = raw
        phases = build_potential_phases(recon, cfg, t)
        pos = self.iqft(spectral)
        pos = qsim.apply_potential(pos, phases, self.ledger, self.indices.size, cfg.potential_units_per_mode)
        return pos, depth_to_readout


def hybrid_step(state: StateVector, grid: Grid, config: HybridConfig, t: float,
                ledger: GateCostLedger, step: int = 0) -> StateVector:
    """One unmerged hybrid Strang step from a position-space register."""
    loop = _Loop(grid, config, ledger)
    s = loop.kinetic(loop.qft(state))
    pos, _ = loop.nonlinear(s, t, step)
    return loop.iqft(loop.kinetic(loop.qft(pos)))


def evolve_hybrid(
    initial: ComplexField,
    config: HybridConfig,
    t_end: float,
    sample_every: int | None = 1,
    sample_times: Sequence[float] | None = None,
    ledger: GateCostLedger | None = None,
) -> tuple[Trajectory, CostReport]:
    """Run the hybrid loop; snapshots are decoded copies of the register.

    ``trajectory.aux["reconstruction_norm"]`` holds the norm of the raw
    (pre-normalization) reconstruction at every step.
    """
    grid = initial.grid
    tau = config.tau
    steps = step_count(t_end, tau)
    marks = sample_steps(steps, sample_every, sample_times, tau)
    ledger = ledger if ledger is not None else GateCostLedger()
    loop = _Loop(grid, config, ledger)
    cost = CostReport()
    traj = Trajectory()
    traj.append(0.0, initial)
    traj.aux["reconstruction_norm"] = loop.recon_norms
    if steps == 0:
        return traj, cost

    emulated = config.fidelity_mode is FidelityMode.EMULATED_HARDWARE
    circuits = 2 * loop.indices.size
    state = qsim.encode(initial)
    half_phase = np.exp(1j * qsim.kinetic_phases(grid, tau))
    spectral = loop.kinetic(loop.qft(state))
    depth_mark = 0
    for j in range(steps):
        pos, depth_to_readout = loop.nonlinear(spectral, j * tau, j)
        last = j == steps - 1
        if config.merge_halves and not last:
            spectral = loop.qft(pos)
            if j + 1 in marks:
                # observation of the pending half step; emulator-side, not charged
                view = np.fft.ifftn((spectral.amplitudes * half_phase).reshape(grid.shape), norm="ortho")
                traj.append((j + 1) * tau, ComplexField(grid, view))
            spectral = loop.kinetic(spectral, fraction=1.0)
        else:
            state = loop.iqft(loop.kinetic(loop.qft(pos)))
            if j + 1 in marks:
                traj.append((j + 1) * tau, qsim.decode(state, grid))
            if not last:
                spectral = loop.kinetic(loop.qft(state))
        if emulated:
            # every readout circuit replays the evolution from t0 up to this step's readout point
            row = StepCost(j + 1, circuits * config.shot_budget.shots, circuits * depth_to_readout, circuits)
        else:
            row = StepCost(j + 1, 0, ledger.circuit_depth_units - depth_mark, 0)
        depth_mark = ledger.circuit_depth_units
        cost.add(row)

    shots = 1 if config.shot_budget.is_exact else config.shot_budget.shots
    cost.predicted_runtime_units = predicted_runtime(steps, loop.indices.size, grid.n_qubits, shots)
    return traj, cost
