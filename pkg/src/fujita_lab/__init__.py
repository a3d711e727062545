"""Numerical laboratory for the radial supercritical semilinear heat equation u_t = Δu + u^p."""
from .params import ProblemParams, make_params, exponent_table

__version__ = "0.1.0"
__all__ = ["ProblemParams", "make_params", "exponent_table", "__version__"]
