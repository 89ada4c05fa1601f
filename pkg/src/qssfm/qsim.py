"""Exact statevector emulation of the split-step circuit components.

Basis index ``l`` reads qubit 0 as the most significant bit.  For a 2D grid the
x register is qubits ``0 .. n_x-1`` and the y register the remaining ones, which
matches the row-major flattening in :mod:`qssfm.grid`.

Diagonal unitaries are applied straight to the amplitudes; their Pauli-Z
decomposition is only used to charge gate costs.  The QFT has two back ends,
an FFT and a gate-level circuit (Hadamards, controlled phases, swaps); both
realize the unitary DFT with the ``exp(-i k x)`` kernel used by the classical
solver.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .grid import ComplexField, Grid, Representation, k_squared

NORM_TOL = 1e-10
ENCODE_TOL = NORM_TOL


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size != 2**self.n_qubits:
            raise ValueError(f"{self.n_qubits} qubits need {2**self.n_qubits} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass
class GateCostLedger:
    """Monotone resource counters; depth follows a serial model (one unit per basic gate)."""

    qft_count: int = 0
    diag_kinetic_count: int = 0
    diag_potential_count: int = 0
    basic_gate_units: int = 0
    circuit_depth_units: int = 0

    def _charge(self, units: int) -> None:
        self.basic_gate_units += units
        self.circuit_depth_units += units

    def charge_qft(self, axes: Sequence[int]) -> None:
        self.qft_count += 1
        self._charge(sum(n * (n + 1) // 2 for n in axes))

    def charge_kinetic(self, axes: Sequence[int]) -> None:
        self.diag_kinetic_count += 1
        self._charge(sum(kinetic_term_count(n) for n in axes))

    def charge_potential(self, units: int) -> None:
        self.diag_potential_count += 1
        self._charge(units)

    def copy(self) -> "GateCostLedger":
        return GateCostLedger(**gate_cost_snapshot(self))

    def to_text(self) -> str:
        return "".join(f"{k} {v}\n" for k, v in gate_cost_snapshot(self).items())


def gate_cost_snapshot(ledger: GateCostLedger) -> dict[str, int]:
    return {f.name: getattr(ledger, f.name) for f in fields(ledger)}


@dataclass(frozen=True)
class ShotBudget:
    """``shots=None`` means exact readout of the amplitude."""

    shots: Optional[int] = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.shots is not None and (int(self.shots) != self.shots or self.shots < 1):
            raise ValueError(f"shots must be a positive integer, got {self.shots}")

    @classmethod
    def exact(cls) -> "ShotBudget":
        return cls(None)

    @property
    def is_exact(self) -> bool:
        return self.shots is None


class Part(enum.Enum):
    REAL = 0
    IMAG = 1


def stream_rng(seed: int, key: Sequence[int]) -> np.random.Generator:
    """Independent generator for one readout task, split off a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


# encoding ------------------------------------------------------------------

def encode(f: ComplexField) -> StateVector:
    if f.representation is not Representation.POSITION:
        raise ValueError("only position-space fields are encoded")
    norm = np.linalg.norm(f.values)
    if abs(norm - 1.0) > ENCODE_TOL:
        raise ValueError(f"field must be unit-norm for amplitude encoding (norm={norm!r})")
    # amplitudes are taken verbatim so encode/decode round-trips bit-exactly
    return StateVector(f.grid.n_qubits, f.values.copy())


def decode(state: StateVector, grid: Grid) -> ComplexField:
    if grid.n_qubits != state.n_qubits:
        raise ValueError(f"grid needs {grid.n_qubits} qubits, state has {state.n_qubits}")
    return ComplexField(grid, state.amplitudes)


# gate-level primitives -------------------------------------------------------

def _tensor(amps: np.ndarray, n: int) -> np.ndarray:
    return np.array(amps, dtype=complex).reshape((2,) * n)


def _sel(n: int, fixed: dict[int, int]):
    idx = [slice(None)] * n
    for q, v in fixed.items():
        idx[q] = v
    return tuple(idx)


def _hadamard(t: np.ndarray, q: int) -> None:
    n = t.ndim
    a0 = t[_sel(n, {q: 0})].copy()
    a1 = t[_sel(n, {q: 1})]
    t[_sel(n, {q: 0})] = (a0 + a1) / np.sqrt(2)
    t[_sel(n, {q: 1})] = (a0 - a1) / np.sqrt(2)


def _controlled_phase(t: np.ndarray, control: int, target: int, theta: float) -> None:
    t[_sel(t.ndim, {control: 1, target: 1})] *= np.exp(1j * theta)


def qft_circuit(qubits: Sequence[int], inverse: bool = False) -> list[tuple]:
    """Gate list realizing the DFT on ``qubits`` (first listed = most significant).

    Forward uses negative controlled-phase angles so the kernel is exp(-2 pi i jk/N).
    """
    sign = 1.0 if inverse else -1.0
    m = len(qubits)
    ops: list[tuple] = []
    for i in range(m):
        ops.append(("h", qubits[i]))
        for j in range(i + 1, m):
            ops.append(("cp", qubits[j], qubits[i], sign * 2 * np.pi / 2 ** (j - i + 1)))
    for i in range(m // 2):
        ops.append(("swap", qubits[i], qubits[m - 1 - i]))
    return ops


def run_circuit(state: StateVector, ops: Sequence[tuple]) -> StateVector:
    n = state.n_qubits
    t = _tensor(state.amplitudes, n)
    for op in ops:
        if op[0] == "h":
            _hadamard(t, op[1])
        elif op[0] == "cp":
            _controlled_phase(t, op[1], op[2], op[3])
        elif op[0] == "swap":
            t = np.swapaxes(t, op[1], op[2])
        else:
            raise ValueError(f"unknown gate {op[0]!r}")
    return StateVector(n, t.reshape(-1))


# transforms -----------------------------------------------------------------

def _axes(state: StateVector, axes: Sequence[int] | None) -> tuple[int, ...]:
    axes = (state.n_qubits,) if axes is None else tuple(axes)
    if sum(axes) != state.n_qubits:
        raise ValueError(f"register split {axes} does not cover {state.n_qubits} qubits")
    return axes


def _apply_transform(state, axes, ledger, inverse, method):
    axes = _axes(state, axes)
    if method == "fft":
        shaped = state.amplitudes.reshape(tuple(2**n for n in axes))
        fn = np.fft.ifftn if inverse else np.fft.fftn
        out = StateVector(state.n_qubits, fn(shaped, norm="ortho").reshape(-1))
    elif method == "circuit":
        ops, start = [], 0
        for n in axes:
            ops += qft_circuit(range(start, start + n), inverse=inverse)
            start += n
        out = run_circuit(state, ops)
    else:
        raise ValueError(f"unknown QFT method {method!r}")
    if ledger is not None:
        ledger.charge_qft(axes)
    return out


def apply_qft(state: StateVector, axes: Sequence[int] | None = None,
              ledger: GateCostLedger | None = None, method: str = "fft") -> StateVector:
    """Forward DFT on each register in ``axes`` (qubit counts, default one register)."""
    return _apply_transform(state, axes, ledger, False, method)


def apply_iqft(state: StateVector, axes: Sequence[int] | None = None,
               ledger: GateCostLedger | None = None, method: str = "fft") -> StateVector:
    return _apply_transform(state, axes, ledger, True, method)


def apply_diagonal_phase(state: StateVector, phases: np.ndarray) -> StateVector:
    phases = np.asarray(phases, dtype=float).ravel()
    if phases.size != state.amplitudes.size:
        raise ValueError(f"expected {state.amplitudes.size} phases, got {phases.size}")
    return StateVector(state.n_qubits, state.amplitudes * np.exp(1j * phases))


# kinetic diagonal and its Pauli-Z structure -----------------------------------

def pauli_z(n: int, j: int) -> np.ndarray:
    """``I_{2^(j-1)} (x) Z (x) I_{2^(n-j)}`` as a dense matrix, j = 1..n."""
    if not 1 <= j <= n:
        raise ValueError(f"j must lie in 1..{n}")
    z = np.diag([1.0, -1.0])
    return np.kron(np.kron(np.eye(2 ** (j - 1)), z), np.eye(2 ** (n - j)))


def kinetic_index_z_terms(n: int) -> tuple[float, np.ndarray]:
    """Constant and per-qubit Z coefficients of ``sum_l kidx_l |l><l|``.

    ``kidx`` is the FFT-ordered integer index (0..N/2-1, -N/2..-1).  Coefficient
    ``c[j-1]`` multiplies ``pauli_z(n, j)``, i.e. Z on qubit j-1 counted from the
    most significant bit, which carries weight 2^(n-j).
    """
    coeffs = np.array([-0.5 * 2 ** (n - j) for j in range(1, n + 1)])
    coeffs[0] += 2 ** (n - 1)
    return -0.5, coeffs


def kinetic_square_z_terms(n: int) -> dict[tuple[int, ...], float]:
    """Expand ``kidx^2`` into identity, single-Z and Z-Z terms (qubit indices 1-based)."""
    c0, c = kinetic_index_z_terms(n)
    terms: dict[tuple[int, ...], float] = {(): c0**2 + float(np.sum(c**2))}
    for j in range(n):
        terms[(j + 1,)] = 2 * c0 * c[j]
    for i, j in itertools.combinations(range(n), 2):
        terms[(i + 1, j + 1)] = 2 * c[i] * c[j]
    return terms


def diagonal_from_z_terms(n: int, terms: dict[tuple[int, ...], float]) -> np.ndarray:
    idx = np.arange(2**n)
    # z eigenvalue of qubit j (1-based from the MSB) on basis state idx
    z = {j: 1 - 2 * ((idx >> (n - j)) & 1) for j in range(1, n + 1)}
    diag = np.zeros(2**n)
    for qs, coeff in terms.items():
        term = np.full(2**n, coeff, dtype=float)
        for q in qs:
            term = term * z[q]
        diag += term
    return diag


def kinetic_term_count(n: int) -> int:
    return sum(1 for qs, c in kinetic_square_z_terms(n).items() if qs and c != 0)


def kinetic_phases(grid: Grid, tau: float, fraction: float = 0.5) -> np.ndarray:
    """Diagonal ``-fraction * tau/2 * |k|^2``; fraction 0.5 is the half step."""
    return -(fraction * tau / 2.0) * k_squared(grid)


def apply_kinetic_diagonal(state: StateVector, grid: Grid, tau: float,
                           ledger: GateCostLedger | None = None, fraction: float = 0.5) -> StateVector:
    """U_k applied in the spectral frame (the state must already be Fourier transformed)."""
    if grid.n_qubits != state.n_qubits:
        raise ValueError(f"grid needs {grid.n_qubits} qubits, state has {state.n_qubits}")
    out = apply_diagonal_phase(state, kinetic_phases(grid, tau, fraction))
    if ledger is not None:
        ledger.charge_kinetic(grid.qubits_per_axis)
    return out


def apply_kinetic(state: StateVector, grid: Grid, tau: float,
                  ledger: GateCostLedger | None = None, method: str = "fft") -> StateVector:
    """Half kinetic step ``QFT^dagger U_k QFT`` on a position-space register."""
    axes = grid.qubits_per_axis
    if grid.n_qubits != state.n_qubits:
        raise ValueError(f"grid needs {grid.n_qubits} qubits, state has {state.n_qubits}")
    s = apply_qft(state, axes, ledger, method)
    s = apply_kinetic_diagonal(s, grid, tau, ledger)
    return apply_iqft(s, axes, ledger, method)


def potential_units(support: int, n_qubits: int, per_mode: int = 2) -> int:
    return min(per_mode * support, 2**n_qubits)


def apply_potential(state: StateVector, phases: np.ndarray, ledger: GateCostLedger | None = None,
                    support: int | None = None, per_mode: int = 2) -> StateVector:
    """U_p from caller-built phases; ``support`` is the number of measured modes M."""
    out = apply_diagonal_phase(state, phases)
    if ledger is not None:
        m = 2**state.n_qubits if support is None else support
        ledger.charge_potential(potential_units(m, state.n_qubits, per_mode))
    return out


# readout --------------------------------------------------------------------

def _part(part) -> Part:
    if isinstance(part, Part):
        return part
    return {"real": Part.REAL, "re": Part.REAL, "imag": Part.IMAG, "im": Part.IMAG}[str(part).lower()]


def hadamard_ancilla_probability(state: StateVector, index: int, part=Part.REAL) -> float:
    """P(ancilla = 0) from an explicit (n+1)-qubit Hadamard-test emulation.

    Ancilla in |+>, optional S^dagger, controlled ``U_l^dagger U_psi`` (U_psi prepares
    the register state from |0..0>, U_l^dagger is the X string of ``index``), H, measure.
    """
    part = _part(part)
    n_states = state.amplitudes.size
    if not 0 <= index < n_states:
        raise IndexError(f"basis index {index} out of range")
    branch0 = np.zeros(n_states, dtype=complex)
    branch0[0] = 1.0
    # X string maps basis |j> to |j xor index>
    branch1 = state.amplitudes[np.arange(n_states) ^ index]
    if part is Part.IMAG:
        branch1 = -1j * branch1
    plus = (branch0 + branch1) / 2.0
    return float(np.vdot(plus, plus).real)


def hadamard_test(state: StateVector, index: int, part=Part.REAL, budget: ShotBudget | None = None,
                  stream: Sequence[int] | None = None) -> float:
    """Estimate Re or Im of ``<index|state>``.

    With a finite budget the ancilla outcome is drawn ``shots`` times from a
    generator keyed by ``stream`` (defaults to ``(0, index, part)``).
    """
    part = _part(part)
    if not 0 <= index < state.amplitudes.size:
        raise IndexError(f"basis index {index} out of range")
    amp = state.amplitudes[index]
    v = amp.real if part is Part.REAL else amp.imag
    if budget is None or budget.is_exact:
        return float(v)
    p = (1.0 + v) / 2.0
    if p < -1e-12 or p > 1 + 1e-12:
        raise RuntimeError(f"ancilla probability {p} outside [0, 1]; register norm corrupted")
    key = (0, index, part.value) if stream is None else stream
    s = stream_rng(budget.rng_seed, key).binomial(budget.shots, min(max(p, 0.0), 1.0))
    return 2.0 * s / budget.shots - 1.0
