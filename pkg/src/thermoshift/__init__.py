"""Thermodynamic formalism for shifts of finite type and spectra of weighted shifts."""
from . import measures, potentials, ruelle, sft, spectra, treelab
from .errors import ConvergenceError, ThermoshiftError, ValidationError

__all__ = ["sft", "potentials", "ruelle", "measures", "spectra", "treelab",
           "ThermoshiftError", "ValidationError", "ConvergenceError"]
__version__ = "0.1.0"
