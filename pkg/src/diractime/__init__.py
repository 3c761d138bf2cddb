"""Dirac Hamiltonian and self-adjoint time operator: spinor algebra,
lattice dynamics and occupation-number observables."""
from .algebra import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import InvalidStateError, PreconditionError

__version__ = "0.1.0"

__all__ = ["DEFAULT_CONSTANTS", "PhysicalConstants", "InvalidStateError", "PreconditionError", "__version__"]
