"""Numerical laboratory for the multi-particle Anderson tight-binding
model with correlated, finite-range-mixing random potentials."""

from .errors import (
    ConfigError,
    CoverageError,
    FailureBudgetError,
    SingularResolventError,
    SizeLimitError,
    SolverError,
)
from .fields import (
    Box,
    ConstantBase,
    FieldSample,
    FieldSpec,
    TruncatedExponentialBase,
    UniformBase,
    conditional_continuity_probe,
    empirical_mixing,
    sample_field,
    truncate_field,
)
from .hamiltonian import (
    AssembledOperator,
    HamiltonianSpec,
    InteractionSpec,
    assemble,
    assemble_trial,
    interaction_energy,
    sample_for_cube,
)
from .lattice import (
    Cube,
    ParticleConfig,
    cube,
    cube_points,
    cube_points_array,
    inner_boundary,
    max_norm,
    min_separation,
    nearest_neighbors,
    origin_cube,
    separated_config,
    sum_norm,
)
from .msa import (
    MsaParams,
    gamma,
    initial_scale_params,
    is_nonsingular,
    scale_sequence,
    singularity_probability,
)
from .observables import (
    DecayFit,
    DynamicalMoment,
    combes_thomas_ratio,
    dynamical_moment,
    eigenfunction_decay,
    large_deviation_probability,
    lifshitz_tail,
    spectral_edge_estimate,
    weyl_tensor_residual,
)
from .spectral import (
    SpectralResult,
    dist_to_spectrum,
    green_column,
    lowest_eigenpair,
    spectrum_in_window,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledOperator",
    "Box",
    "ConfigError",
    "ConstantBase",
    "CoverageError",
    "Cube",
    "DecayFit",
    "DynamicalMoment",
    "FailureBudgetError",
    "FieldSample",
    "FieldSpec",
    "HamiltonianSpec",
    "InteractionSpec",
    "MsaParams",
    "ParticleConfig",
    "SingularResolventError",
    "SizeLimitError",
    "SolverError",
    "SpectralResult",
    "TruncatedExponentialBase",
    "UniformBase",
    "assemble",
    "assemble_trial",
    "combes_thomas_ratio",
    "conditional_continuity_probe",
    "cube",
    "cube_points",
    "cube_points_array",
    "dist_to_spectrum",
    "dynamical_moment",
    "eigenfunction_decay",
    "empirical_mixing",
    "gamma",
    "green_column",
    "initial_scale_params",
    "inner_boundary",
    "interaction_energy",
    "is_nonsingular",
    "large_deviation_probability",
    "lifshitz_tail",
    "lowest_eigenpair",
    "max_norm",
    "min_separation",
    "nearest_neighbors",
    "origin_cube",
    "sample_field",
    "sample_for_cube",
    "scale_sequence",
    "separated_config",
    "singularity_probability",
    "spectral_edge_estimate",
    "spectrum_in_window",
    "sum_norm",
    "truncate_field",
    "weyl_tensor_residual",
]
