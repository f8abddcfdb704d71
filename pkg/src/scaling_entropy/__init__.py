"""Scaling entropy of symbolic systems and invariants of constant-length substitutions."""

from .semimetric import (
    EmpiricalTriple,
    EntropyEstimate,
    epsilon_entropy_bounds,
    epsilon_entropy_exact,
    epsilon_entropy_greedy,
    epsilon_entropy_lower,
    validate_semimetric,
)
from .substitution import (
    ConstantLengthSubstitution,
    analyze,
    classify_spectrum,
    column_number,
    height,
    validate_substitution,
)

__version__ = "0.1.0"
