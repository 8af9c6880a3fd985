"""Parallel exclusion process on a ring with one slow bond.

Simulation kernels for large rings, exact chains for small ones, and the
analytic current formulas they are checked against.
"""

__version__ = "0.1.0"

from .dynamics import BlockageSemantics, KernelParams, RandomSource
from .lattice import Configuration, RingGeometry, queue_configuration
from .montecarlo import InitialState, SimulationSpec

__all__ = [
    "__version__",
    "BlockageSemantics",
    "KernelParams",
    "RandomSource",
    "Configuration",
    "RingGeometry",
    "queue_configuration",
    "InitialState",
    "SimulationSpec",
]
