"""NumPy fallback for the batched tridiagonal solve.

Single systems go through LAPACK (scipy.linalg.solve_banded); batches use a
Thomas sweep vectorised across the batch axis, so the Python-level loop runs
only along the system size.
"""

import numpy as np
from scipy.linalg import solve_banded


def _as_batch(a):
    a = np.asarray(a, dtype=float)
    return a[None, :] if a.ndim == 1 else a


def solve_tridiag_batch(dl, d, du, rhs):
    dl, d, du, rhs = map(_as_batch, (dl, d, du, rhs))
    m, n = d.shape
    if m == 1:
        ab = np.zeros((3, n))
        ab[0, 1:] = du[0, :-1]
        ab[1, :] = d[0]
        ab[2, :-1] = dl[0, 1:]
        return solve_banded((1, 1), ab, rhs[0])[None, :]

    cp = np.empty((m, n))
    dp = np.empty((m, n))
    cp[:, 0] = du[:, 0] / d[:, 0]
    dp[:, 0] = rhs[:, 0] / d[:, 0]
    for j in range(1, n):
        denom = d[:, j] - dl[:, j] * cp[:, j - 1]
        cp[:, j] = du[:, j] / denom
        dp[:, j] = (rhs[:, j] - dl[:, j] * dp[:, j - 1]) / denom

    x = np.empty((m, n))
    x[:, n - 1] = dp[:, n - 1]
    for j in range(n - 2, -1, -1):
        x[:, j] = dp[:, j] - cp[:, j] * x[:, j + 1]
    return x
