"""Spectral Galerkin solver for nonlinear diffusion with memory in random media."""

from memdiff.errors import ConfigError, DomainError, NumericalError, Violation

__version__ = "0.1.0"

__all__ = ["ConfigError", "DomainError", "NumericalError", "Violation", "__version__"]
