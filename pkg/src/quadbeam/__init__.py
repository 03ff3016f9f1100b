"""Quadrupole Rabi frequencies, optical forces and trapping potentials of a
two-level atom in Laguerre-Gaussian, Bessel and Hermite-Gaussian beams."""
__version__ = "0.1.0"

from .beams import (AtomSpec, BeamSpec, FieldArrays, FieldSample, Family, PRESETS, Preset,
                    cylindrical, evaluate_field, get_preset, rabi_scale, sample_field)
from .dynamics import (DetuningSpec, DynamicState, ForceBreakdown, Trajectory,
                       integrate_trajectory, mechanical_energy, optical_force,
                       trap_potential, trap_potential_approx)
from .estimators import OpticalForceTransformer, QuadrupoleFieldTransformer
from .exceptions import ConfigError, DomainError, SingularInputError, SingularPhaseError
from .fieldmap import FieldGrid, GridSpec, default_grid, export_csv, render_heatmap, sample_grid

__all__ = [
    "AtomSpec", "BeamSpec", "FieldArrays", "FieldSample", "Family", "PRESETS", "Preset",
    "cylindrical", "evaluate_field", "get_preset", "rabi_scale", "sample_field",
    "DetuningSpec", "DynamicState", "ForceBreakdown", "Trajectory", "integrate_trajectory",
    "mechanical_energy", "optical_force", "trap_potential", "trap_potential_approx",
    "OpticalForceTransformer", "QuadrupoleFieldTransformer",
    "ConfigError", "DomainError", "SingularInputError", "SingularPhaseError",
    "FieldGrid", "GridSpec", "default_grid", "export_csv", "render_heatmap", "sample_grid",
]
