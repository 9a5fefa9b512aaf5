"""Complete elliptic integrals by the arithmetic-geometric mean.

Parameter convention throughout: m = k**2, so that

    K(m) = int_0^{pi/2} dt / sqrt(1 - m sin^2 t)
    E(m) = int_0^{pi/2} sqrt(1 - m sin^2 t) dt

With a_0 = 1, b_0 = sqrt(1 - m), c_0^2 = m and the usual AGM recursion,
K = pi / (2 a_N) and E = K (1 - sum_{n>=0} 2^(n-1) c_n^2). The loop-coupling
kernel (1 - m/2) K - E equals K * sum_{n>=1} 2^(n-1) c_n^2, which this module
evaluates directly so that small m does not lose digits to cancellation.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

_MAX_ITER = 64


class EllipticPair(NamedTuple):
    K: float
    E: float


def _agm(m: np.ndarray, rtol: float = 1e-15):
    """Vectorized AGM. Returns (K, S1) with S1 = sum_{n>=1} 2^(n-1) c_n^2."""
    m = np.asarray(m, dtype=float)
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    # c_1 = (1 - b_0) / 2 without cancellation
    c = m / (2.0 * (1.0 + b))
    s1 = np.zeros_like(m)
    weight = 1.0
    for _ in range(_MAX_ITER):
        s1 = s1 + weight * c * c
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if np.all(c <= rtol * a):
            break
        # c_{n+1} = c_n^2 / (4 a_{n+1}) = c_n^2 / (2 (a_n + b_n))
        c = c * c / (2.0 * (a + b))
        weight *= 2.0
    return np.pi / (2.0 * a), s1


def _check_parameter(m) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise ValueError("elliptic parameter m must satisfy 0 <= m < 1")
    return arr


def elliptic_ke(m: float) -> EllipticPair:
    """K(m) and E(m) for 0 <= m < 1 (m is the squared modulus)."""
    arr = _check_parameter(m)
    K, s1 = _agm(arr)
    E = K * (1.0 - 0.5 * arr - s1)
    return EllipticPair(float(K), float(E))


def elliptic_ke_array(m) -> tuple[np.ndarray, np.ndarray]:
    arr = _check_parameter(m)
    K, s1 = _agm(arr)
    return K, K * (1.0 - 0.5 * arr - s1)


def coupling_kernel(m) -> np.ndarray:
    """(1 - m/2) K(m) - E(m), accurate to full relative precision as m -> 0."""
    arr = _check_parameter(m)
    K, s1 = _agm(arr)
    return K * s1
