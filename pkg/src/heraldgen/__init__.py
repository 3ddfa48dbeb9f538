"""Heralded non-Gaussian state generation in Gaussian circuits fed with single photons."""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402
from .errors import (  # noqa: E402
    ContractError,
    ConvergenceError,
    HeraldgenError,
    OracleMismatchError,
    TruncationError,
    ValidationError,
)
from .fock import FockVector, MultiModeState, basis, fidelity, quantum_angle, tensor_product  # noqa: E402
from .circuits import CircuitSpec, InputState, full_mesh_spec, run_circuit  # noqa: E402
from .heralding import HeraldPattern, herald  # noqa: E402
from .targets import cat_state, gkp_canonical, gkp_core_target  # noqa: E402
from .optimizer import OptimizationProblem, evaluate, optimize  # noqa: E402

__all__ = [
    "BACKEND",
    "CircuitSpec",
    "ContractError",
    "ConvergenceError",
    "FockVector",
    "HeraldPattern",
    "HeraldgenError",
    "InputState",
    "MultiModeState",
    "OptimizationProblem",
    "OracleMismatchError",
    "TruncationError",
    "ValidationError",
    "basis",
    "cat_state",
    "evaluate",
    "fidelity",
    "full_mesh_spec",
    "gkp_canonical",
    "gkp_core_target",
    "herald",
    "optimize",
    "quantum_angle",
    "run_circuit",
    "tensor_product",
]
