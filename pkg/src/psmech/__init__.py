"""Numerical toolkit for k-polysymplectic Hamiltonian systems: structure checks,
momentum maps, reduction conditions, relative equilibria and formal stability."""

__version__ = "0.1.0"

from .system import System, SystemFileError  # noqa: E402
from . import catalog  # noqa: E402
from .claims import run_claims  # noqa: E402

__all__ = ["System", "SystemFileError", "catalog", "run_claims", "__version__"]
