"""Wave mechanics in polar form: Schrodinger and Klein-Gordon solvers, the
Madelung decomposition, conformal and Cartan geometry, guided trajectories
and Born-Infeld electrodynamics."""

from .errors import ConfigError, ConvergenceError, NumericalError, SupercriticalFieldError
from .fieldgrid import (NATURAL, ComplexField, GridSpec, RealField, UnitSystem, gradient, grid1d,
                        laplacian)

__version__ = "0.1.0"

__all__ = ["ConfigError", "ConvergenceError", "NumericalError", "SupercriticalFieldError", "NATURAL",
           "ComplexField", "GridSpec", "RealField", "UnitSystem", "gradient", "grid1d", "laplacian"]
