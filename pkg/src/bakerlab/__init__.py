"""Numerical workbench for Baker domains built by quasiconformal surgery."""
import os

# must precede the first numba import: the bundled TBB is too old
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

__version__ = "0.1.0"

from .params import GOLDEN, ConstructionParams, Family, ParamsError  # noqa: E402

__all__ = ["__version__", "GOLDEN", "ConstructionParams", "Family", "ParamsError"]
