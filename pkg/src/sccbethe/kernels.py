"""Kernel backend selection.

The compiled extension is used when it imports; setting
``SCCBETHE_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

BACKEND = "python"

if os.environ.get("SCCBETHE_PURE_PYTHON", "").strip() not in ("", "0"):
    from ._kernels_py import (ansatz_log_coefficients, log_potential, pole_inverses,
                              richardson_residual, richardson_system)
else:
    try:
        from ._kernels import (ansatz_log_coefficients, log_potential, pole_inverses,
                               richardson_residual, richardson_system)
        BACKEND = "compiled"
    except ImportError:
        from ._kernels_py import (ansatz_log_coefficients, log_potential, pole_inverses,
                                  richardson_residual, richardson_system)

__all__ = ["BACKEND", "ansatz_log_coefficients", "log_potential", "pole_inverses",
           "richardson_residual", "richardson_system"]
