"""Sparse LMS adaptive filters with zero attractors and variable step-size control."""
from .kernel import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
