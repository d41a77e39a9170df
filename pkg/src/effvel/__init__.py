"""Effective-velocity formulation of the viscous shallow-water / compressible
Navier-Stokes system in 1-D and radial symmetry, with energy-type and
caloric-norm diagnostics and a Picard mild-solution oracle."""

__version__ = "0.1.0"

from .caloric import (
    CaloricConfig,
    NormReport,
    bilinear_duhamel,
    bilinear_ratio,
    bmo_inv_norm,
    caloric_besov_proxy,
    heat_semigroup,
    koch_tataru_norm,
)
from .config import ExperimentConfig, load_config, parse_config, serialize_config
from .diagnostics import (
    FunctionalSeries,
    MonotonicityReport,
    bd_entropy,
    bd_entropy_monitor,
    energy,
    energy_monitor,
    growth_bound_check,
    lipschitz_diagnostic,
    monotonicity_check,
    sup_norm_series,
)
from .errors import (
    ConfigError,
    DensityFloorError,
    EffvelError,
    GridMismatchError,
    InvalidFieldError,
    PicardNonConvergence,
    SolverAbort,
)
from .evolution import SolverConfig, cfl_dt, solve, solve_augmented, solve_classical_1d
from .grid import Grid
from .operators import (
    divergence_radial,
    gradient_1d,
    laplacian_radial_scalar,
    laplacian_radial_vector,
    weighted_div_grad,
)
from .picard import picard_mild_solve
from .state import (
    AugmentedState,
    InitialDataSpec,
    PressureLaw,
    Profile,
    effective_velocity,
    enthalpy_F,
    initial_state,
    mollify_initial_data,
    momentum_from,
    pressure,
    pressure_derivative,
    pressure_potential_Pi,
    velocity_from,
)
from .trajectory import Trajectory
