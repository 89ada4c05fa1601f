"""Hybrid quantum-classical split-step Fourier solver for the NLSE with filtered readout."""

from .filtered import FidelityMode, FilterSpec, HybridConfig, evolve_hybrid, predicted_runtime
from .grid import ComplexField, Grid, Representation, dft_forward, dft_inverse, make_grid
from .qsim import GateCostLedger, ShotBudget, StateVector, decode, encode
from .scenarios import SCENARIOS, cylinder_wake_2d, gaussian_2d, soliton_1d
from .ssfm import SsfmConfig, Trajectory, evolve

__all__ = [
    "ComplexField", "FidelityMode", "FilterSpec", "GateCostLedger", "Grid", "HybridConfig",
    "Representation", "SCENARIOS", "ShotBudget", "SsfmConfig", "StateVector", "Trajectory",
    "cylinder_wake_2d", "decode", "dft_forward", "dft_inverse", "encode", "evolve",
    "evolve_hybrid", "gaussian_2d", "make_grid", "predicted_runtime", "soliton_1d",
]
