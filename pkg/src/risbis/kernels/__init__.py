"""Hot kernels for the inner smoothed minimization.

The numba implementation is used by default.  Set ``RISBIS_DISABLE_NUMBA=1``
before import to fall back to the vectorized numpy path (useful when numba is
unavailable or when debugging).  Both backends expose the same functions and
agree to rounding error; ``benchmarks/bench_kernels.py`` compares them.
"""

import os

from . import numpy_impl

_disabled = os.environ.get("RISBIS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

if _disabled:
    _impl = numpy_impl
    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba missing
        _impl = numpy_impl
        BACKEND = "numpy"

project_unit_simplex = _impl.project_unit_simplex
form_amplitudes = _impl.form_amplitudes
objective_rows = _impl.objective_rows
smoothed_value_grad = _impl.smoothed_value_grad
agd_minimize = _impl.agd_minimize
multistart_minimize = _impl.multistart_minimize

__all__ = [
    "BACKEND",
    "project_unit_simplex",
    "form_amplitudes",
    "objective_rows",
    "smoothed_value_grad",
    "agd_minimize",
    "multistart_minimize",
]
