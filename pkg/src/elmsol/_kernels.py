"""Hot numeric kernels.

Each kernel has a numba ``@njit`` version and a pure-numpy version with the
same signature. The numba path is used when numba imports cleanly and the
environment variable ``ELMSOL_DISABLE_NUMBA`` is unset (or ``0``); set it to
``1`` to force numpy. The choice is made once, at import time, and is exposed
as ``BACKEND``.

Results agree between backends to rounding, not bit-for-bit: numpy routes the
affine map through BLAS while the numba loops accumulate in index order.
"""

import math
import os

import numpy as np
from scipy.special import expit

_DISABLED = os.environ.get("ELMSOL_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None


# -- numpy implementations ----------------------------------------------------

def sigmoid_hidden_numpy(X, W, b):
    z = X @ W.T
    z += b
    return expit(z, out=z)


def row_sq_norms_numpy(Q):
    return np.einsum("ij,ij->i", Q, Q)


def pearson_numpy(x, y):
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    return np.dot(dx, dy), sxx, syy


# -- numba implementations ----------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def sigmoid_hidden_numba(X, W, b):
        n_rows, n_in = X.shape
        n_hidden = W.shape[0]
        H = np.empty((n_rows, n_hidden))
        for j in range(n_rows):
            for i in range(n_hidden):
                z = b[i]
                for k in range(n_in):
                    z += W[i, k] * X[j, k]
                # exp(-z) -> inf for z < -709 gives 0.0, same as expit
                H[j, i] = 1.0 / (1.0 + math.exp(-z))
        return H

    @numba.njit(cache=True, nogil=True)
    def row_sq_norms_numba(Q):
        n, p = Q.shape
        out = np.empty(n)
        for i in range(n):
            s = 0.0
            for k in range(p):
                s += Q[i, k] * Q[i, k]
            out[i] = s
        return out

    @numba.njit(cache=True, nogil=True)
    def pearson_numba(x, y):
        n = x.shape[0]
        mx = 0.0
        my = 0.0
        for i in range(n):
            mx += x[i]
            my += y[i]
        mx /= n
        my /= n
        sxy = 0.0
        sxx = 0.0
        syy = 0.0
        for i in range(n):
            dx = x[i] - mx
            dy = y[i] - my
            sxy += dx * dy
            sxx += dx * dx
            syy += dy * dy
        return sxy, sxx, syy

else:  # pragma: no cover
    sigmoid_hidden_numba = row_sq_norms_numba = pearson_numba = None


if HAVE_NUMBA and not _DISABLED:
    BACKEND = "numba"
    _sigmoid_hidden = sigmoid_hidden_numba
    _row_sq_norms = row_sq_norms_numba
    _pearson = pearson_numba
else:
    BACKEND = "numpy"
    _sigmoid_hidden = sigmoid_hidden_numpy
    _row_sq_norms = row_sq_norms_numpy
    _pearson = pearson_numpy


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def sigmoid_hidden(X, W, b):
    """H[j, i] = 1 / (1 + exp(-(W[i] . X[j] + b[i])))."""
    return _sigmoid_hidden(_f64(X), _f64(W), _f64(b))


def row_sq_norms(Q):
    return _row_sq_norms(_f64(Q))


def centered_sums(x, y):
    """Return (sum dx*dy, sum dx^2, sum dy^2) around the sample means."""
    sxy, sxx, syy = _pearson(_f64(x), _f64(y))
    return float(sxy), float(sxx), float(syy)
