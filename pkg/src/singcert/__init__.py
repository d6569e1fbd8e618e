"""Separation bounds and cluster certification for simple multiple roots of polynomial systems."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
