"""Traveling waves of the Euler-Korteweg system near the speed of sound."""
from .models import FluidModel, make_polynomial_model

__all__ = ["FluidModel", "make_polynomial_model"]
__version__ = "0.1.0"
