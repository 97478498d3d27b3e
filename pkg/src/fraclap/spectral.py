"""Sine-coefficient representation of functions on (0, pi).

A vector function ``x = (x_1, ..., x_m)`` is stored by its coefficients in
the orthonormal Dirichlet basis ``sqrt(2/pi) sin(j t)``. The fractional
Dirichlet-Laplacian of order ``beta`` acts diagonally on these coefficients
with eigenvalues ``(j**2)**beta``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from . import _kernels
from .errors import DomainError

ZETA_TOL = 1e-12

_BERNOULLI = bernoulli(64)


@dataclass(frozen=True)
class FractionalOrder:
    """Positive fractional order ``beta``."""

    beta: float

    def __post_init__(self):
        b = float(self.beta)
        if not math.isfinite(b) or b <= 0.0:
            raise DomainError(f"fractional order must be positive, got beta={self.beta!r}")
        object.__setattr__(self, "beta", b)

    @property
    def solvability_guaranteed(self) -> bool:
        """Whether beta > 1/2, the range where unique solvability is guaranteed."""
        return self.beta > 0.5


def as_beta(order) -> float:
    if isinstance(order, FractionalOrder):
        return order.beta
    return FractionalOrder(order).beta


@dataclass(frozen=True, eq=False)
class SineCoefficients:
    """Coefficients ``a[j-1, i-1]`` of an m-component function, mode-major.

    Component ``i`` is ``x_i(t) = sum_j a[j-1, i-1] * sqrt(2/pi) * sin(j t)``.
    The array is copied and frozen on construction.
    """

    a: np.ndarray

    def __post_init__(self):
        arr = np.array(self.a, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"coefficients must be a nonempty (J, m) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "a", arr)

    @property
    def J(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.a.shape[1]

    @property
    def flat(self) -> np.ndarray:
        """Flattened vector with index ``(j-1)*m + (i-1)``."""
        return self.a.reshape(-1)

    @classmethod
    def from_flat(cls, v, m: int) -> SineCoefficients:
        return cls(np.asarray(v, dtype=np.float64).reshape(-1, m))

    @classmethod
    def zeros(cls, J: int, m: int = 1) -> SineCoefficients:
        return cls(np.zeros((J, m)))

    @classmethod
    def unit(cls, j: int, i: int = 1, J: int | None = None, m: int = 1) -> SineCoefficients:
        """Basis element e_{j,i} (1-based indices)."""
        J = j if J is None else J
        if not (1 <= j <= J and 1 <= i <= m):
            raise IndexError(f"e_({j},{i}) outside J={J}, m={m}")
        a = np.zeros((J, m))
        a[j - 1, i - 1] = 1.0
        return cls(a)

    def resized(self, J: int) -> SineCoefficients:
        """Truncate or zero-pad to ``J`` modes."""
        a = np.zeros((J, self.m))
        n = min(J, self.J)
        a[:n] = self.a[:n]
        return SineCoefficients(a)

    def __add__(self, other):
        return SineCoefficients(self.a + other.a)

    def __sub__(self, other):
        return SineCoefficients(self.a - other.a)

    def __mul__(self, c):
        return SineCoefficients(self.a * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return SineCoefficients(-self.a)


def eigenvalues(J: int, order) -> np.ndarray:
    """``(j**2)**beta`` for j = 1..J, evaluated as exp(2 beta ln j)."""
    beta = as_beta(order)
    j = np.arange(1, J + 1, dtype=np.float64)
    lam = np.exp(2.0 * beta * np.log(j))
    lam[0] = 1.0
    return lam


def apply_fractional(x: SineCoefficients, order) -> SineCoefficients:
    """Apply (-Delta)^beta on the truncated space."""
    return SineCoefficients(eigenvalues(x.J, order)[:, None] * x.a)


def apply_inverse_fractional(g: SineCoefficients, order) -> SineCoefficients:
    """Apply (-Delta)^(-beta) on the truncated space."""
    return SineCoefficients(g.a / eigenvalues(g.J, order)[:, None])


def half_power_identity_check(x: SineCoefficients, order) -> float:
    """Largest entrywise gap between two half-order applications and one full one."""
    beta = as_beta(order)
    twice = apply_fractional(apply_fractional(x, beta / 2.0), beta / 2.0)
    once = apply_fractional(x, beta)
    return float(np.max(np.abs(twice.a - once.a)))


def norm_l2(x: SineCoefficients) -> float:
    # scaled so tiny or huge coefficients neither underflow nor overflow
    scale = float(np.max(np.abs(x.a)))
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    a = x.a / scale
    return scale * math.sqrt(float(np.sum(a * a)))


def norm_tilde(x: SineCoefficients, order) -> float:
    """``||(-Delta)^beta x||_{L2}``, the norm used on the operator domain."""
    return norm_l2(apply_fractional(x, order))


def sup_bound(x: SineCoefficients, order) -> float:
    """Upper bound on ``sup |x(t)|`` from the L-infinity embedding (beta > 1/4)."""
    beta = as_beta(order)
    if beta <= 0.25:
        raise DomainError(f"sup bound needs beta > 1/4, got beta={beta}")
    return math.sqrt(2.0 / math.pi * zeta(4.0 * beta).value) * norm_tilde(x, beta)


def lipschitz_constant(order) -> float:
    """Constant L with ``|x(t1)-x(t2)| <= L |t1-t2| ||x||_~beta`` (beta > 3/4)."""
    beta = as_beta(order)
    if beta <= 0.75:
        raise DomainError(f"equicontinuity constant needs beta > 3/4, got beta={beta}")
    return math.sqrt(2.0 / math.pi * zeta(4.0 * beta - 2.0).value)


# ---------------------------------------------------------------------------
# Riemann zeta on (1, inf)

@dataclass(frozen=True)
class ZetaValue:
    s: float
    value: float
    tail_bound: float
    terms: int = 0

    def __float__(self):
        return self.value


@functools.lru_cache(maxsize=512)
def zeta(s: float) -> ZetaValue:
    """Riemann zeta for real s > 1 with a rigorous truncation bound.

    Sums the first N-1 terms, then adds the integral tail and the
    Euler-Maclaurin endpoint corrections. For x**-s every derivative has
    fixed sign, so the remainder is bounded by the first omitted correction,
    which is reported as ``tail_bound``.
    """
    s = float(s)
    if not math.isfinite(s) or s <= 1.0:
        raise DomainError(f"zeta(s) diverges for s <= 1, got s={s}")
    n = 16 + int(min(s, 64.0))
    while True:
        head = _kernels.zeta_partial_sum(s, n - 1)
        tail = n ** (1.0 - s) / (s - 1.0) + 0.5 * n ** (-s)
        corrections = []
        rising = s  # s (s+1) ... (s+2k-2)
        bound = math.inf
        prev = math.inf
        for k in range(1, 31):
            term = _BERNOULLI[2 * k] / math.factorial(2 * k) * rising * n ** (-s - 2 * k + 1)
            if abs(term) >= prev:
                break  # asymptotic series started to diverge
            if abs(term) <= ZETA_TOL * 1e-3 or term == 0.0:
                bound = abs(term)
                break
            corrections.append(term)
            prev = abs(term)
            rising *= (s + 2 * k - 1) * (s + 2 * k)
        if bound <= ZETA_TOL:
            value = head + tail + math.fsum(corrections)
            return ZetaValue(s, value, float(bound), n)
        n *= 2


def zeta_direct(s: float, n_terms: int = 10**7) -> ZetaValue:
    """Plain partial sum plus integral tail; slow, used as a cross-check.

    The integral tail over-counts the true tail by at most ``n**-s``.
    """
    s = float(s)
    if s <= 1.0:
        raise DomainError(f"zeta(s) diverges for s <= 1, got s={s}")
    head = _kernels.zeta_partial_sum(s, n_terms)
    value = head + n_terms ** (1.0 - s) / (s - 1.0)
    return ZetaValue(s, value, float(n_terms) ** (-s), n_terms)
