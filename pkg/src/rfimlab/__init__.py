"""rfim-lab: a simulation laboratory for the 2D random-field Ising model."""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
