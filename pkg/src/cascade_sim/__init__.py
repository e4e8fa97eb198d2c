"""Single-photon emission from two cascaded atom-cavity systems.

Four engines for the same dynamics: closed-form amplitudes (:mod:`.analytic`),
adaptive integration of the amplitude equations (:mod:`.ode`), the full master
equation (:mod:`.lindblad`) and quantum-jump Monte Carlo (:mod:`.trajectories`).
"""

__version__ = "0.1.0"

from .model import (AmplitudeState, CascadeParams, ConfigError, SubsystemParams,  # noqa: E402
                    big_k, build_hamiltonian, build_jump_operators, effective_hamiltonian,
                    load_params, params_from_dict)
from .ode import IntegrationError, IntegratorConfig  # noqa: E402
from .observables import DetectorConfig  # noqa: E402

__all__ = [
    "AmplitudeState", "CascadeParams", "ConfigError", "DetectorConfig", "IntegrationError",
    "IntegratorConfig", "SubsystemParams", "big_k", "build_hamiltonian", "build_jump_operators",
    "effective_hamiltonian", "load_params", "params_from_dict",
]
