"""Numerical exterior differential systems: forms on a chart, integral
elements, polar spaces and Cartan's test, with billiard applications."""
from edslab.errors import (DomainError, EDSError, InputError, NumericalInconsistencyError,
                           PreconditionError, SolverError)
from edslab.exterior import AlternatingForm, dx, evaluate, restrict, wedge
from edslab.kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "AlternatingForm", "BACKEND", "DomainError", "EDSError", "InputError",
    "NumericalInconsistencyError", "PreconditionError", "SolverError",
    "dx", "evaluate", "restrict", "wedge", "__version__",
]
