"""Weighted mixed norm spaces of analytic functions on the unit disc.

Radial weights and their doubling exponents, dyadic polar lattices,
mixed norms by FFT quadrature, atomic synthesis and decomposition,
Carleson measure tests and two-weight Hardy inequalities.
"""

__version__ = "0.1.0"

from .errors import ConfigError, MnaError, NumericalError
from .weights import (RadialWeight, check_lower_doubling, check_upper_doubling, estimate_exponents,
                      omega_hat, weight_from_config)
from .lattice import DyadicLattice, build_lattice, is_separated, locate, neighbors, pseudo_distance
from .functions import (AnalyticFunction, DiscreteMeasure, derivative, evaluate, integral_mean,
                        lebesgue_norm, mixed_norm)
from .sequences import CoefficientArray, conjugate_exponent, duality_gap, lpq_norm
from .atoms import (AtomParameters, AtomicDecomposition, analyze, apply_S_eta, atomic_decompose,
                    min_atom_order, solve_eta_theta, synthesize)
from .carleson import CarlesonConfig, CarlesonEmbedding, condition_ii, condition_iii, \
    equivalence_report, estimate_operator_norm
from .hardy import StepWeight, build_proof_steps, muckenhoupt_A, muckenhoupt_B, proof_case_table

__all__ = [
    "ConfigError", "MnaError", "NumericalError",
    "RadialWeight", "check_lower_doubling", "check_upper_doubling", "estimate_exponents", "omega_hat",
    "weight_from_config",
    "DyadicLattice", "build_lattice", "is_separated", "locate", "neighbors", "pseudo_distance",
    "AnalyticFunction", "DiscreteMeasure", "derivative", "evaluate", "integral_mean", "lebesgue_norm",
    "mixed_norm",
    "CoefficientArray", "conjugate_exponent", "duality_gap", "lpq_norm",
    "AtomParameters", "AtomicDecomposition", "analyze", "apply_S_eta", "atomic_decompose",
    "min_atom_order", "solve_eta_theta", "synthesize",
    "CarlesonConfig", "CarlesonEmbedding", "condition_ii", "condition_iii", "equivalence_report",
    "estimate_operator_norm",
    "StepWeight", "build_proof_steps", "muckenhoupt_A", "muckenhoupt_B", "proof_case_table",
]
