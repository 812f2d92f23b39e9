"""Duffin-Kemmer spin-1 particle in an Abelian monopole field: algebra, separation, radial systems."""

from .algebra import DKBasis, DKMatrix, basis_change_matrix, build_beta, build_j
from .angular import QuantumNumbers, build_ansatz
from .radial import RadialProfile, RadialSystem, integrate, minimal_j_solution, radial_system
from .symmetry import consistency_rank, n_constraints, parity_operator

__version__ = "0.1.0"

__all__ = [
    "DKBasis", "DKMatrix", "basis_change_matrix", "build_beta", "build_j",
    "QuantumNumbers", "build_ansatz",
    "RadialProfile", "RadialSystem", "integrate", "minimal_j_solution", "radial_system",
    "consistency_rank", "n_constraints", "parity_operator",
]
