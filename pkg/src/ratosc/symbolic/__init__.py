"""Exact computer algebra over phase space."""

from .checks import (
    FACTOR_ODE,
    HAMILTONIAN_SYSTEM,
    CheckResult,
    DeformationSpec,
    J3Expansion,
    Report,
    deformation_residual,
    general_J3,
    match_paper_case,
    printed_case,
    verify_constancy,
    verify_evolution,
    verify_moduli,
)
from .constants import DEFAULT_DEGREE_LIMIT, ConstantSet, build_constants, constant_set
from .poly import (
    ComplexPoly,
    PhasePolynomial,
    differentiate,
    generator_index,
    generator_names,
    generator_values,
    generators,
    momentum_degree,
    poisson_bracket_sym,
)
