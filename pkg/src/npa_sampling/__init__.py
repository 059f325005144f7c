"""Sampling-based discovery of NPA moment-matrix constraints.

The package builds moment matrices of the NPA hierarchy from randomly
sampled quantum realizations, reads off which entries are equal or zero,
checks the result against the purely algebraic structure, and turns the
resulting equality partition into a semidefinite program.
"""
from npa_sampling.algebra import (
    IDENTITY,
    ZERO,
    LevelSpec,
    OperatorSymbol,
    Scenario,
    adjoint,
    algebraic_partition,
    canonicalize,
    generate_basis,
    parse_level,
    product,
    reduced_alphabet,
)
from npa_sampling.randquantum import (
    sample_density_matrix,
    sample_projective_measurement,
    sample_realization,
)
from npa_sampling.sampler import (
    CountConvention,
    EqualityPartition,
    build_moment_matrix,
    check_result1,
    compare_partitions,
    count_unique,
    detect_partition,
)

__version__ = "0.1.0"

__all__ = [
    "IDENTITY",
    "ZERO",
    "CountConvention",
    "EqualityPartition",
    "LevelSpec",
    "OperatorSymbol",
    "Scenario",
    "adjoint",
    "algebraic_partition",
    "build_moment_matrix",
    "canonicalize",
    "check_result1",
    "compare_partitions",
    "count_unique",
    "detect_partition",
    "generate_basis",
    "parse_level",
    "product",
    "reduced_alphabet",
    "sample_density_matrix",
    "sample_projective_measurement",
    "sample_realization",
]
