"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``HERALDGEN_PURE_PYTHON=1`` to force the numpy path.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("HERALDGEN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py

beamsplitter_tensor = _impl.beamsplitter_tensor
squeezing_matrix = _impl.squeezing_matrix
displacement_matrix = _impl.displacement_matrix
hermite_functions = _impl.hermite_functions
wigner_pure = _impl.wigner_pure
