"""Desk-scale Coulomb/Riesz gas laboratory: energies, transport operators,
constrained-gas sampling, and inequality checks."""

from ._core import (
    BallAverageOracle,
    Configuration,
    FrozenExterior,
    GasParams,
    KernelSpec,
    MimDirection,
    MimResult,
    PotentialSpec,
    Region,
    ball_average_kernel,
    ball_average_potential,
    c_bound,
    conditional_hamiltonian,
    energy_delta_move,
    favorability,
    hamiltonian,
    iso_energy_bound_check,
    kernel_eval,
    mim_energy,
    report_dir,
    run_config,
    validate_config,
    w_gap,
)

__all__ = [
    "BallAverageOracle",
    "Configuration",
    "FrozenExterior",
    "GasParams",
    "KernelSpec",
    "MimDirection",
    "MimResult",
    "PotentialSpec",
    "Region",
    "ball_average_kernel",
    "ball_average_potential",
    "c_bound",
    "conditional_hamiltonian",
    "energy_delta_move",
    "favorability",
    "hamiltonian",
    "iso_energy_bound_check",
    "kernel_eval",
    "mim_energy",
    "report_dir",
    "run_config",
    "validate_config",
    "w_gap",
]
