"""Design and sensitivity toolkit for a levitated-microsphere search for
spin-mass forces mediated by axion-like particles."""

__version__ = "0.1.0"

from .config import (ExperimentConfig, MicrosphereSpec, SpinSourceGeometry, TrapConfig,  # noqa: E402
                     EnvironmentConfig, default_config, derive_microsphere, load_config, load_config_file)
from .constants import CONSTANTS, ALPCoupling, lambda_mass_convert, lambda_to_mass, mass_to_lambda  # noqa: E402
from .errors import (ConfigError, ConvergenceError, DomainError, IntegrationError,  # noqa: E402
                     NoEquilibriumError, ValidationError)

__all__ = [
    "ExperimentConfig", "MicrosphereSpec", "SpinSourceGeometry", "TrapConfig", "EnvironmentConfig",
    "default_config", "derive_microsphere", "load_config", "load_config_file", "CONSTANTS",
    "ALPCoupling", "lambda_mass_convert", "lambda_to_mass", "mass_to_lambda", "ConfigError",
    "ConvergenceError", "DomainError", "IntegrationError", "NoEquilibriumError", "ValidationError",
]
