"""Hot numeric kernels with a compiled core and a NumPy fallback.

The compiled Cython extension is preferred when present; set the
environment variable ``SHARPEBOUND_PURE_PYTHON=1`` to force the fallback
(useful for benchmarking and debugging).  Both backends implement the same
batched Thomas solve and agree to rounding error.
"""

import os

from . import _tridiag_py

_FORCE_PY = os.environ.get("SHARPEBOUND_PURE_PYTHON", "") not in ("", "0")

if not _FORCE_PY:
    try:
        from . import _tridiag as _impl
        _BACKEND = "cython"
    except ImportError:
        _impl = _tridiag_py
        _BACKEND = "numpy"
else:
    _impl = _tridiag_py
    _BACKEND = "numpy"


def backend_name() -> str:
    """Which kernel backend was selected at import ('cython' or 'numpy')."""
    return _BACKEND


def solve_tridiag_batch(dl, d, du, rhs):
    """Solve a batch of tridiagonal systems by the Thomas algorithm.

    All arguments are (m, n) arrays holding m independent systems of size n:
    ``dl[i, j] x[j-1] + d[i, j] x[j] + du[i, j] x[j+1] = rhs[i, j]``, with
    ``dl[:, 0]`` and ``du[:, -1]`` ignored.  Systems must be diagonally
    dominant (no pivoting is performed); the PDE schemes in this package
    produce M-matrices, which qualify.
    """
    return _impl.solve_tridiag_batch(dl, d, du, rhs)
