"""Quench dynamics of periodic (1+1)D U(1) quantum link models and a
superconducting-circuit realization of their building block."""
__version__ = "0.1.0"

from .lattice import (  # noqa: E402
    ConfigurationError,
    GaugeBasis,
    LatticeConfig,
    build_hamiltonian,
    enumerate_gauge_basis,
)
from .grid import ScanGrid  # noqa: E402
from .dynamics import (  # noqa: E402
    NumericalError,
    QuenchResult,
    evolve,
    ground_state,
    loschmidt_scan,
    loschmidt_trace,
)
from .string_order import build_string_operator, order_param_scan  # noqa: E402
from .vortex import VortexList, boundary_winding, plaquette_windings, wrap_angle  # noqa: E402

__all__ = [
    "ConfigurationError", "GaugeBasis", "LatticeConfig", "build_hamiltonian",
    "enumerate_gauge_basis", "ScanGrid", "NumericalError", "QuenchResult", "evolve",
    "ground_state", "loschmidt_scan", "loschmidt_trace", "build_string_operator",
    "order_param_scan", "VortexList", "boundary_winding", "plaquette_windings", "wrap_angle",
]
