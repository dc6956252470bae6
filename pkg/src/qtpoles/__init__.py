"""Bound states of solvable 1-D wells from poles of the continued transmission coefficient."""
from .catalog import (NATURAL, SI_LIKE, DiracDeltaWell, EckartWell, EigenvalueSet, HarmonicWell, Method,
                      MorseBarrier, MorseWell, ParabolicBarrier, Potential, ScarfII, SquareBarrier, SquareWell,
                      UnitSystem, analytic_eigenvalues, make_potential, transmission_coefficient)
from .errors import QTPolesError
from .polescan import Classification, eigenvalues_from_poles, find_poles

__version__ = "0.1.0"

__all__ = [
    "NATURAL", "SI_LIKE", "DiracDeltaWell", "EckartWell", "EigenvalueSet", "HarmonicWell", "Method",
    "MorseBarrier", "MorseWell", "ParabolicBarrier", "Potential", "ScarfII", "SquareBarrier", "SquareWell",
    "UnitSystem", "analytic_eigenvalues", "make_potential", "transmission_coefficient", "QTPolesError",
    "Classification", "eigenvalues_from_poles", "find_poles", "__version__",
]
