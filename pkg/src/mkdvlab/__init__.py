"""Inverse scattering, Riemann-Hilbert and asymptotic tools for the defocusing MKdV equation

    y_t - 6 y^2 y_x + y_xxx = 0.
"""
__version__ = "0.1.0"

from .errors import (BlowUpError, DegeneratePhaseError, InputError, MkdvLabError,
                     NumericalError, UnderResolvedError)

__all__ = ["__version__", "MkdvLabError", "InputError", "NumericalError",
           "UnderResolvedError", "BlowUpError", "DegeneratePhaseError"]
