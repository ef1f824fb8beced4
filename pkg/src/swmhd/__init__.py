"""High-order entropy-stable well-balanced finite difference schemes for
the shallow water magnetohydrodynamic equations with bottom topography."""

from .errors import InvalidLF, NonPositiveHeight, SWMHDError, UnsupportedOrder
from .state import Conserved, EntropyVars, Primitive
from .solver import EntropyTrace, Grid, RunResult, SchemeConfig, run
from .problems import ProblemSpec, VortexParams, get_problem, registry

__version__ = "0.1.0"

__all__ = [
    "Conserved",
    "EntropyTrace",
    "EntropyVars",
    "Grid",
    "InvalidLF",
    "NonPositiveHeight",
    "Primitive",
    "ProblemSpec",
    "RunResult",
    "SWMHDError",
    "SchemeConfig",
    "UnsupportedOrder",
    "VortexParams",
    "get_problem",
    "registry",
    "run",
    "__version__",
]
