"""Sparse-representation classification: combo solvers, robust PCA,
synthetic galleries, perturbations, and the breakdown benchmark harness.

Everything lives in the compiled extension; this package just re-exports it.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as __doc__  # noqa: F401,PLC0414

__version__ = "0.1.0"
