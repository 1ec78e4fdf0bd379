"""Spectral problem for a singular integral equation with a cubic rational map.

The package discretizes the equation, lifts eigenfunctions to their Cauchy
transforms and the associated monodromy data, and checks the geometric
invariants (windings, zero counts, counting identities) that the
antisymmetric eigenfunctions satisfy.
"""
from .errors import (
    InvariantViolation,
    NumericalError,
    PSError,
    ValidationError,
)
from .rational_map import (
    Mobius,
    RationalMap,
    assemble_full_map,
    critical_structure,
    gauge_transform,
    ps3_instance,
    quadratic_map,
    reconstruct_from_a,
    validate_ps3_component,
)
from .spectral import EigenPair, SpectralProblem, Spectrum, eigenfunction_eval, solve

__version__ = "0.1.0"

__all__ = [
    "PSError", "ValidationError", "NumericalError", "InvariantViolation",
    "Mobius", "RationalMap", "assemble_full_map", "critical_structure", "gauge_transform",
    "ps3_instance", "quadratic_map", "reconstruct_from_a", "validate_ps3_component",
    "EigenPair", "SpectralProblem", "Spectrum", "eigenfunction_eval", "solve",
]
