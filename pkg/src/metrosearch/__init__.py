"""Quantum search as frequency discrimination: states, channels, bounds, simulation."""

__version__ = "0.1.0"

from .exceptions import (BoundDomainError, ChannelError, ConfigError, DimensionError,  # noqa: E402
                         MetroSearchError, SizeLimitError, StateError, UnsupportedConfigurationError)
from .states import DensityMatrix, HamiltonianSpec, PureState  # noqa: E402
from .channels import DephasingChannel, KrausChannel, OracleUnitary  # noqa: E402
from .geometry import bures_angle, fidelity, qfi_pure, qfi_sld  # noqa: E402
from .protocol import SchemeConfig, VSequence, audit_run, run_all_labels, run_scheme  # noqa: E402
from .bounds import BoundReport  # noqa: E402
from .probeopt import conjecture_check, optimize_sum_sqrt_qfi  # noqa: E402

__all__ = [
    "__version__",
    "MetroSearchError", "DimensionError", "SizeLimitError", "StateError", "ChannelError",
    "ConfigError", "BoundDomainError", "UnsupportedConfigurationError",
    "DensityMatrix", "PureState", "HamiltonianSpec",
    "DephasingChannel", "OracleUnitary", "KrausChannel",
    "fidelity", "bures_angle", "qfi_pure", "qfi_sld",
    "SchemeConfig", "VSequence", "run_scheme", "run_all_labels", "audit_run",
    "BoundReport", "optimize_sum_sqrt_qfi", "conjecture_check",
]
