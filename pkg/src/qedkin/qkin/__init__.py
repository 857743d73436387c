"""Mean-field kinetic solver for the sixteen Wigner channels."""

from .diagnostics import (
    DIAGNOSTIC_COLUMNS,
    channel_norms,
    charge_conservation_residual,
    diagnostics_row,
    polarization_current,
    total_charge,
)
from .equations import bgr_rhs, local_P, rhs_covariant, rhs_split, rhs_split_channels
from .operators import FieldGeometryError, Hbar2Correction, KineticOperators, hbar2_corrections
from .oracle import density_matrix_oracle, evolve_density_matrix, random_conforming_lattice
from .solver import CFLError, EvolutionConfig, NumericalAbort, check_cfl, evolve, step
from .states import free_mode_matrix, free_projectors, free_state, gaussian, vacuum

__all__ = [
    "CFLError",
    "DIAGNOSTIC_COLUMNS",
    "EvolutionConfig",
    "FieldGeometryError",
    "Hbar2Correction",
    "KineticOperators",
    "NumericalAbort",
    "bgr_rhs",
    "channel_norms",
    "charge_conservation_residual",
    "check_cfl",
    "density_matrix_oracle",
    "diagnostics_row",
    "evolve",
    "evolve_density_matrix",
    "free_mode_matrix",
    "free_projectors",
    "free_state",
    "gaussian",
    "hbar2_corrections",
    "local_P",
    "polarization_current",
    "random_conforming_lattice",
    "rhs_covariant",
    "rhs_split",
    "rhs_split_channels",
    "step",
    "total_charge",
    "vacuum",
]
