"""Verification toolkit for the rational oscillator with centrifugal terms."""

from .core import (
    CASES,
    CaseFormula,
    ComplexObservable,
    PhaseState,
    SystemParams,
    deformed_constant,
    deformed_factor,
    energy_i,
    extract_J3,
    get_case,
    hamiltonian,
    linear_constant,
    linear_factor,
    paper_invariant_J3,
    quadratic_factor,
)

__version__ = "0.1.0"
