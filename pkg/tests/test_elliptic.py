import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coilcoupler.elliptic import coupling_kernel, elliptic_ke, elliptic_ke_array


def trapezoid_ke(m, n=10**6):
    # integrands are even about both ends of [0, pi/2], so the plain
    # trapezoidal rule converges spectrally here
    t = np.linspace(0.0, np.pi / 2, n + 1)
    s = 1.0 - m * np.sin(t) ** 2
    w = np.full(n + 1, np.pi / 2 / n)
    w[0] = w[-1] = np.pi / 4 / n
    return float(w @ (1.0 / np.sqrt(s))), float(w @ np.sqrt(s))


def test_zero_parameter():
    K, E = elliptic_ke(0.0)
    assert K == pytest.approx(math.pi / 2, rel=1e-15)
    assert E == pytest.approx(math.pi / 2, rel=1e-15)


def test_half_against_quadrature():
    K, E = elliptic_ke(0.5)
    K_ref, E_ref = trapezoid_ke(0.5)
    assert abs(K / K_ref - 1) < 1e-10
    assert abs(E / E_ref - 1) < 1e-10


def test_diverges_towards_one():
    assert elliptic_ke(1 - 1e-6).K > elliptic_ke(0.999).K
    assert elliptic_ke(1 - 1e-12).E == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("m", [-1e-3, 1.0, 1.5, float("nan")])
def test_rejects_out_of_range(m):
    with pytest.raises(ValueError):
        elliptic_ke(m)


@given(st.floats(0.0, 1.0, exclude_max=True))
def test_bounds(m):
    K, E = elliptic_ke(m)
    assert K >= math.pi / 2 * (1 - 1e-15)
    assert 1.0 - 1e-15 <= E <= math.pi / 2 * (1 + 1e-15)


@given(st.floats(1e-6, 1 - 1e-6))
def test_legendre_relation(m):
    K, E = elliptic_ke(m)
    Kc, Ec = elliptic_ke(1.0 - m)
    assert E * Kc + Ec * K - K * Kc == pytest.approx(math.pi / 2, rel=1e-12)


@given(st.floats(0.05, 0.99))
def test_kernel_matches_direct_combination(m):
    K, E = elliptic_ke(m)
    assert float(coupling_kernel(m)) == pytest.approx((1 - m / 2) * K - E, rel=1e-11)


def test_kernel_small_parameter_series():
    # (1 - m/2) K - E = pi m^2 / 32 (1 + 3 m / 4 + ...)
    for m in (1e-4, 1e-8, 1e-12):
        assert float(coupling_kernel(m)) == pytest.approx(math.pi * m * m / 32 * (1 + 0.75 * m), rel=1e-7)


def test_array_matches_scalar():
    ms = np.array([0.0, 0.1, 0.5, 0.9, 0.999999])
    K, E = elliptic_ke_array(ms)
    for i, m in enumerate(ms):
        assert (K[i], E[i]) == elliptic_ke(m)
