"""Honest simultaneous inference for difference-in-differences event studies."""

__version__ = "0.1.0"

from ._kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
