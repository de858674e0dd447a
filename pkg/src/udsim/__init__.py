"""Unruh–DeWitt detector simulations: response functions, oscillator-detector
dynamics and relativistic teleportation fidelities."""

__version__ = "0.1.0"

from . import errors  # noqa: E402,F401
from .worldline import (AsymptoticUniform, Inertial, StaticAt, TruncatedUniform,  # noqa: E402
                        UniformAcceleration, Worldline, advanced_time, interval_sq,
                        retarded_time)
from .field_kernel import WightmanKernel  # noqa: E402
from .switching import SwitchingFunction  # noqa: E402
from .response import (divergence_probe, response_function, transition_probability,  # noqa: E402
                       transition_rate)
from .gaussian_state import (GaussianState, coherent, log_negativity,  # noqa: E402
                             two_mode_squeezed, vacuum)
from .detector_dynamics import (DetectorParams, evolve_correlators,  # noqa: E402
                                perturbative_rho11, rho11_history)
from .teleport import TeleportScenario, run  # noqa: E402

__all__ = [
    "AsymptoticUniform", "Inertial", "StaticAt", "TruncatedUniform", "UniformAcceleration",
    "Worldline", "advanced_time", "interval_sq", "retarded_time", "WightmanKernel",
    "SwitchingFunction", "divergence_probe", "response_function", "transition_probability",
    "transition_rate", "GaussianState", "coherent", "log_negativity", "two_mode_squeezed",
    "vacuum", "DetectorParams", "evolve_correlators", "perturbative_rho11", "rho11_history",
    "TeleportScenario", "run",
]
