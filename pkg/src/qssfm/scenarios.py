"""Initial conditions, potentials and reference oracles for the validation cases."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .filtered import FilterSpec, HybridConfig
from .grid import ComplexField, Grid, make_grid
from .ssfm import PotentialFn, SsfmConfig, Trajectory, evolve


class SolitonForm(enum.Enum):
    SECH = "sech"
    COSH = "cosh"


class CouplingRule(enum.Enum):
    # g = g_phys * ||psi0||^2, C = 1: the coupling absorbs the encoding normalization
    ABSORBED = "absorbed"
    # g = g_phys, C = ||psi0||^2: the density scale is carried separately
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    shape: tuple[int, ...]
    lengths: tuple[float, ...]
    origins: tuple[float, ...]
    initial: Callable[[Grid], np.ndarray]
    potential: Optional[PotentialFn]
    physical_coupling: float
    coupling_rule: CouplingRule
    tau: float
    t_end: float
    filter_m: tuple[int, ...]
    sample_times: tuple[float, ...]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        steps = round(self.t_end / self.tau)
        if abs(steps * self.tau - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(f"{self.name}: t_end={self.t_end} is not a multiple of tau={self.tau}")

    def grid(self) -> Grid:
        return make_grid(self.shape, self.lengths, self.origins)

    def raw_initial(self) -> np.ndarray:
        values = np.asarray(self.initial(self.grid()), dtype=complex).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError(f"{self.name}: initial field is not finite")
        return values

    def physical_norm2(self) -> float:
        """Discrete ``sum |psi_l|^2`` of the unnormalized samples."""
        return float(np.sum(np.abs(self.raw_initial()) ** 2))

    def initial_field(self) -> ComplexField:
        values = self.raw_initial()
        return ComplexField(self.grid(), values / np.linalg.norm(values))

    def coupling(self) -> tuple[float, float]:
        """Resolved ``(g, density_scale)``."""
        n2 = self.physical_norm2()
        if self.coupling_rule is CouplingRule.ABSORBED:
            return self.physical_coupling * n2, 1.0
        return self.physical_coupling, n2

    def ssfm_config(self, tau: float | None = None, merge_halves: bool = False) -> SsfmConfig:
        g, c = self.coupling()
        return SsfmConfig(tau or self.tau, g, self.potential, c, merge_halves)

    def hybrid_config(self, m: tuple[int, ...] | None = None, full: bool = False, **kw) -> HybridConfig:
        g, c = self.coupling()
        filt = None if full else FilterSpec(m or self.filter_m)
        return HybridConfig(kw.pop("tau", self.tau), g, c, self.potential, filt, **kw)

    def with_overrides(self, **kw) -> "ScenarioSpec":
        return replace(self, **kw)

    def manifest(self) -> dict:
        g, c = self.coupling()
        out = {
            "name": self.name,
            "shape": list(self.shape),
            "lengths": list(self.lengths),
            "origins": list(self.origins),
            "g": g,
            "density_scale": c,
            "physical_coupling": self.physical_coupling,
            "coupling_rule": self.coupling_rule.value,
            "tau": self.tau,
            "t_end": self.t_end,
            "filter_m": list(self.filter_m),
            "sample_times": list(self.sample_times),
        }
        out.update(self.params)
        return out


def _frange(stop: float, step: float) -> tuple[float, ...]:
    n = int(round(stop / step))
    return tuple(round(i * step, 12) for i in range(n + 1))


def soliton_1d(form: SolitonForm | str = SolitonForm.SECH, n: int = 8, length: float = 19.0,
               tau: float = 1e-3, t_end: float = 5.0, m: int = 4) -> ScenarioSpec:
    """Bright soliton ``(1/sqrt 2) sech(x/sqrt 2) e^{ix}`` with ``g = -||psi||^2``.

    ``form="cosh"`` samples the cosh profile literally; it is unbounded and
    only meaningful on small domains.
    """
    form = SolitonForm(form)

    def initial(grid: Grid) -> np.ndarray:
        (x,) = grid.flat_coordinates()
        profile = 1 / np.cosh(x / np.sqrt(2)) if form is SolitonForm.SECH else np.cosh(x / np.sqrt(2))
        return profile / np.sqrt(2) * np.exp(1j * x)

    return ScenarioSpec(
        name="soliton",
        shape=(2**n,),
        lengths=(length,),
        origins=(-length / 2,),
        initial=initial,
        potential=None,
        physical_coupling=-1.0,
        coupling_rule=CouplingRule.ABSORBED,
        tau=tau,
        t_end=t_end,
        filter_m=(m,),
        sample_times=_frange(t_end, 1.0),
        params={"form": form.value},
    )


@dataclass(frozen=True)
class GaussianParams:
    """``A exp(-alpha |x - c|^2) exp(i p . x)``."""

    amplitude: float = 0.5
    center: tuple[float, float] = (-3.0, -3.0)
    momentum: tuple[float, float] = (2.0, 2.0)
    alpha: float = 1.0


def gaussian_packet(x, y, params: GaussianParams = GaussianParams()):
    (cx, cy), (px, py) = params.center, params.momentum
    env = np.exp(-params.alpha * ((x - cx) ** 2 + (y - cy) ** 2))
    return params.amplitude * env * np.exp(1j * (px * x + py * y))


def free_gaussian_oracle(x, y, t: float, params: GaussianParams = GaussianParams()):
    """Closed-form evolution of the packet under ``i psi_t = -1/2 lap psi``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    spread = 1 + 2j * params.alpha * t
    out = params.amplitude * np.ones(np.broadcast(x, y).shape, dtype=complex)
    for coord, c, p in [(x, params.center[0], params.momentum[0]), (y, params.center[1], params.momentum[1])]:
        shifted = coord - c - p * t
        out = out * np.exp(-params.alpha * shifted**2 / spread) / np.sqrt(spread)
        out = out * np.exp(1j * (p * coord - 0.5 * p**2 * t))
    return out


def gaussian_2d(n: tuple[int, int] = (7, 7), lengths: tuple[float, float] = (16.0, 16.0),
                tau: float = 5e-4, t_end: float = 1.0, m: tuple[int, int] = (3, 3),
                coupling: float = -1.0, params: GaussianParams = GaussianParams()) -> ScenarioSpec:
    def initial(grid: Grid) -> np.ndarray:
        x, y = grid.flat_coordinates()
        return gaussian_packet(x, y, params)

    return ScenarioSpec(
        name="gaussian",
        shape=(2 ** n[0], 2 ** n[1]),
        lengths=tuple(lengths),
        origins=tuple(-v / 2 for v in lengths),
        initial=initial,
        potential=None,
        physical_coupling=coupling,
        coupling_rule=CouplingRule.ABSORBED,
        tau=tau,
        t_end=t_end,
        filter_m=tuple(m),
        sample_times=_frange(t_end, 0.25),
        params={"amplitude": params.amplitude, "center": list(params.center),
                "momentum": list(params.momentum), "alpha": params.alpha},
    )


@dataclass(frozen=True)
class MovingBarrier:
    """Hard disc of height ``v0`` moving along +x; distances wrap periodically."""

    radius: float = 1.0
    height: float = 10.0
    speed: float = 1.0
    x0: float = -99.0
    y0: float = 0.0

    def center(self, t: float) -> tuple[float, float]:
        return self.x0 + self.speed * t, self.y0

    def __call__(self, grid: Grid, t: float) -> np.ndarray:
        x, y = grid.flat_coordinates()
        cx, cy = self.center(t)
        lx, ly = grid.lengths
        dx = (x - cx + lx / 2) % lx - lx / 2
        dy = (y - cy + ly / 2) % ly - ly / 2
        return np.where(dx**2 + dy**2 <= self.radius**2, self.height, 0.0)


def cylinder_wake_2d(n: tuple[int, int] = (9, 7), lengths: tuple[float, float] = (200.0, 50.0),
                     tau: float = 0.01, t_end: float = 100.0, m: tuple[int, int] = (7, 5),
                     g: float = 1.0, radius: float = 1.0, height: float = 10.0,
                     speed: float = 1.0) -> ScenarioSpec:
    """Uniform condensate stirred by a translating circular barrier."""
    barrier = MovingBarrier(radius, height, speed, x0=-lengths[0] / 2 + radius, y0=0.0)

    def initial(grid: Grid) -> np.ndarray:
        return np.ones(grid.size, dtype=complex)

    times = tuple(t for t in (2.0, 10.0, 20.0, 35.0, 70.0) if t <= t_end) + (t_end,)
    return ScenarioSpec(
        name="cylinder",
        shape=(2 ** n[0], 2 ** n[1]),
        lengths=tuple(lengths),
        origins=tuple(-v / 2 for v in lengths),
        initial=initial,
        potential=barrier,
        physical_coupling=g,
        coupling_rule=CouplingRule.EXPLICIT,
        tau=tau,
        t_end=t_end,
        filter_m=tuple(m),
        sample_times=(0.0,) + tuple(sorted(set(times))),
        params={"barrier_radius": radius, "barrier_height": height, "barrier_speed": speed,
                "barrier_x0": barrier.x0, "barrier_y0": barrier.y0, "initial": "uniform"},
    )


SCENARIOS: dict[str, Callable[..., ScenarioSpec]] = {
    "soliton": soliton_1d,
    "gaussian": gaussian_2d,
    "cylinder": cylinder_wake_2d,
}


def reference_oracle(spec: ScenarioSpec, refinement: int = 1) -> Trajectory:
    """Classical run at ``tau / refinement`` sampled at the scenario's sample times."""
    if refinement < 1 or int(refinement) != refinement:
        raise ValueError("refinement must be a positive integer")
    config = spec.ssfm_config(tau=spec.tau / refinement)
    return evolve(spec.initial_field(), config, spec.t_end, sample_times=spec.sample_times)
