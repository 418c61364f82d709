"""Measurement-heralded two-qubit gates between optically driven emitters.

Photon-scattering amplitudes from the six-level excited-state structure,
the special drive frequencies where the amplitude pattern supports a
heralded gate, the gate matrices and their fidelities, quantum-trajectory
estimates under imperfect collection, population-loss models and
waveguide collection efficiency. See the command-line entry point
``nvgate`` for the reproducible CSV/report surface.
"""

__version__ = "0.1.0"

from .config import ConfigError, default_config, load_config, merge_config
from .gates import (
    SCHEMES,
    entanglement_fidelity,
    ideal_gates,
    scheme_gate,
    scheme_target,
)
from .levels import DipoleModel, LevelScheme, dipole_from_config, scheme_from_config
from .scattering import (
    AmplitudeSet,
    RateParams,
    amplitudes,
    find_balance,
    find_magic,
    gamma0_mhz,
    sweep,
)

__all__ = [
    "__version__",
    "ConfigError",
    "default_config",
    "load_config",
    "merge_config",
    "SCHEMES",
    "entanglement_fidelity",
    "ideal_gates",
    "scheme_gate",
    "scheme_target",
    "DipoleModel",
    "LevelScheme",
    "dipole_from_config",
    "scheme_from_config",
    "AmplitudeSet",
    "RateParams",
    "amplitudes",
    "find_balance",
    "find_magic",
    "gamma0_mhz",
    "sweep",
]
