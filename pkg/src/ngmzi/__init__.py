"""Parity-detection Mach-Zehnder phase sensitivity with a coherent state and a
heralded (photon-subtracted, -added or -catalysed) squeezed vacuum."""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    ContractError,
    CutoffError,
    HeraldImpossible,
    NoOptimumError,
    ResourceError,
    UndefinedStateError,
)
from .interferometry import (
    Sensitivity,
    dparity_dphi,
    figure_of_merit,
    parity_expectation,
    parity_via_quadrature,
    phase_sensitivity,
    sensitivity_diff,
)
from .phase_space import MZIScenario, NGOpParams
from .states import herald_distribution, success_probability, wigner_ng
