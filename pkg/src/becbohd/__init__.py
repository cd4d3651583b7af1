"""Double-well BEC dynamics with optical homodyne readout.

Subpackages: :mod:`becbohd.model` (parameters and homodyne identities),
:mod:`becbohd.meanfield` (factorized Bloch dynamics),
:mod:`becbohd.perturbation` (small-epsilon closed forms),
:mod:`becbohd.quantum` (exact Dicke-sector dynamics and trajectories),
:mod:`becbohd.experiments` (figure runners and cross-validation),
:mod:`becbohd.cli` (configuration, dispatch, artifacts).
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .model import (
    BlochState,
    CavityParams,
    CondensateSignal,
    DerivedRates,
    InvalidParameterError,
    TrapParams,
    derived_rates,
)
from .series import HomodyneRecord, TimeSeries

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "BlochState",
    "CavityParams",
    "CondensateSignal",
    "DerivedRates",
    "InvalidParameterError",
    "TrapParams",
    "derived_rates",
    "HomodyneRecord",
    "TimeSeries",
    "__version__",
]
