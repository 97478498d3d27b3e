"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import time. Set ``FRACLAP_DISABLE_NUMBA=1``
to force the numpy path (handy for debugging and for the benchmark). Both
paths are always importable under explicit names so they can be compared.
"""

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a soft dependency
    numba = None

_DISABLED = os.environ.get("FRACLAP_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED

_CHUNK = 1 << 20


def backend():
    """Name of the active kernel backend."""
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# zeta partial sums

def zeta_partial_sum_numpy(s, n):
    """Sum j**-s for j = 1..n, smallest terms first."""
    n = int(n)
    parts = []
    hi = n
    while hi >= 1:
        lo = max(1, hi - _CHUNK + 1)
        j = np.arange(hi, lo - 1, -1, dtype=np.float64)
        parts.append(float(np.sum(np.exp(-s * np.log(j)))))
        hi = lo - 1
    return math.fsum(parts)


def _zeta_partial_sum_py(s, n):
    # Kahan-compensated, from the tail inwards
    total = 0.0
    comp = 0.0
    for j in range(n, 0, -1):
        y = math.exp(-s * math.log(j)) - comp
        tmp = total + y
        comp = (tmp - total) - y
        total = tmp
    return total


# ---------------------------------------------------------------------------
# Galerkin matrix of a multiplication operator in the sine basis
#
# (2/pi) sin(jt) sin(kt) = (cos((j-k)t) - cos((j+k)t)) / pi, so every entry
# is a difference of cosine moments C[p] = sum_n w_n lam_n cos(p t_n).

def cosine_moments_numpy(t, w, lam, pmax):
    """Cosine moments ``C[p, i, l]`` for ``p = 0..pmax``."""
    n, m, _ = lam.shape
    p = np.arange(pmax + 1, dtype=np.float64)
    weighted = (w[:, None] * lam.reshape(n, m * m))
    return (np.cos(np.outer(p, t)) @ weighted).reshape(pmax + 1, m, m)


def galerkin_fill_numpy(moments, J):
    """Assemble the (J*m, J*m) Galerkin matrix from cosine moments."""
    m = moments.shape[1]
    j = np.arange(1, J + 1)
    diff = np.abs(j[:, None] - j[None, :])
    summ = j[:, None] + j[None, :]
    blocks = (moments[diff] - moments[summ]) * (1.0 / math.pi)  # (J, J, m, m)
    return np.ascontiguousarray(blocks.transpose(0, 2, 1, 3)).reshape(J * m, J * m)


def _cosine_moments_py(t, w, lam, pmax):
    n, m, _ = lam.shape
    out = np.zeros((pmax + 1, m, m))
    for p in range(pmax + 1):
        for q in range(n):
            c = w[q] * math.cos(p * t[q])
            for i in range(m):
                for l in range(m):
                    out[p, i, l] += c * lam[q, i, l]
    return out


def _galerkin_fill_py(moments, J):
    m = moments.shape[1]
    out = np.empty((J * m, J * m))
    inv_pi = 1.0 / math.pi
    for j in range(1, J + 1):
        for k in range(1, J + 1):
            d = abs(j - k)
            s = j + k
            for i in range(m):
                row = (j - 1) * m + i
                for l in range(m):
                    out[row, (k - 1) * m + l] = (moments[d, i, l] - moments[s, i, l]) * inv_pi
    return out


if HAVE_NUMBA:
    zeta_partial_sum_numba = numba.njit(cache=True)(_zeta_partial_sum_py)
    cosine_moments_numba = numba.njit(cache=True)(_cosine_moments_py)
    galerkin_fill_numba = numba.njit(cache=True)(_galerkin_fill_py)
else:  # pragma: no cover
    zeta_partial_sum_numba = None
    cosine_moments_numba = None
    galerkin_fill_numba = None


def zeta_partial_sum(s, n):
    if USE_NUMBA:
        return float(zeta_partial_sum_numba(float(s), int(n)))
    return zeta_partial_sum_numpy(float(s), int(n))


def cosine_moments(t, w, lam, pmax):
    t = np.ascontiguousarray(t, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    if USE_NUMBA:
        return cosine_moments_numba(t, w, lam, int(pmax))
    return cosine_moments_numpy(t, w, lam, int(pmax))


def galerkin_fill(moments, J):
    moments = np.ascontiguousarray(moments, dtype=np.float64)
    if USE_NUMBA:
        return galerkin_fill_numba(moments, int(J))
    return galerkin_fill_numpy(moments, int(J))
