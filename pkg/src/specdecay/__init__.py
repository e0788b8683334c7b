"""Spectral decay profiles and inequality certification workbench."""

from . import profiles, operators, invariant, verifiers, cohomology

__version__ = "0.1.0"

__all__ = ["profiles", "operators", "invariant", "verifiers", "cohomology", "__version__"]
