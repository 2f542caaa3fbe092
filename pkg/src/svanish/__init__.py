"""Layered spheres with a perfectly conducting core: modal scattering, S-vanishing design, far fields, cloak tensors."""
__version__ = "0.1.0"

from .designer import DesignProblem, DesignResult, design
from .errors import (
    CapacityError,
    DomainError,
    NumericalError,
    SchemaError,
    SingularError,
    SvanishError,
    ValidityError,
)
from .farfield import Direction, scattering_amplitude, scattering_cross_section
from .lowfreq import CoefficientTable, lowfreq_coefficients, modal_series, w_series
from .lseries import LaurentSeries
from .multilayer import TE, TM, LayeredStructure, Polarization, modal_coefficient, modal_coefficients

__all__ = [
    "CapacityError",
    "CoefficientTable",
    "DesignProblem",
    "DesignResult",
    "Direction",
    "DomainError",
    "LaurentSeries",
    "LayeredStructure",
    "NumericalError",
    "Polarization",
    "SchemaError",
    "SingularError",
    "SvanishError",
    "TE",
    "TM",
    "ValidityError",
    "design",
    "lowfreq_coefficients",
    "modal_coefficient",
    "modal_coefficients",
    "modal_series",
    "scattering_amplitude",
    "scattering_cross_section",
    "w_series",
]
