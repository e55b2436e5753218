import math

import numpy as np
import pytest

from eislab.counting import stieltjes_synthetic
from eislab.errors import DomainError, KernelPropertyError
from eislab.kernel import (
    build_test_kernel,
    gaussian_round_trip,
    selberg_g,
    selberg_k,
    selberg_q,
    spherical_forward,
)


@pytest.fixture(scope="module")
def kernels():
    return {T: build_test_kernel(T) for T in (16, 64, 256)}


@pytest.fixture(scope="module")
def gauss_chain():
    g = selberg_g(lambda r: np.exp(-r * r), r_max=7.0, xi_max=13.0)
    q = selberg_q(g)
    return g, q, selberg_k(q)


def test_gaussian_g_closed_form(gauss_chain):
    g, _, _ = gauss_chain
    xi = np.linspace(0.0, 6.0, 31)
    exact = np.exp(-xi**2 / 4.0) / (2.0 * math.sqrt(math.pi))
    assert np.max(np.abs(g(xi) - exact)) < 1e-12
    assert np.allclose(g(-xi), g(xi), atol=1e-15)


def test_g_integrates_to_h0(gauss_chain):
    g, _, _ = gauss_chain
    xi = np.linspace(-13.0, 13.0, 20001)
    assert abs(np.trapezoid(g(xi), xi) - 1.0) < 1e-8


def test_q_at_zero(gauss_chain):
    g, q, _ = gauss_chain
    assert abs(q(0.0) - 0.5 * g(0.0)) < 1e-14


def test_k_by_parts_matches_direct(gauss_chain):
    _, _, k = gauss_chain
    for u in (0.0, 0.3, 1.0, 4.0, 20.0):
        assert abs(float(np.ravel(k(u))[0]) - k.by_parts(u)) < 1e-8


def test_forward_linear_and_even(gauss_chain):
    _, _, k = gauss_chain
    r = np.linspace(0.0, 4.0, 9)
    a = spherical_forward(k, k.u_max, r, panels=10)
    b = spherical_forward(lambda u: 3.0 * np.asarray(k(u)), k.u_max, r, panels=10)
    assert np.allclose(b, 3.0 * a, rtol=1e-13, atol=1e-15)
    assert np.allclose(spherical_forward(k, k.u_max, -r, panels=10), a, rtol=1e-13, atol=1e-15)


def test_gaussian_round_trip():
    h, back = gaussian_round_trip()
    assert np.max(np.abs(back - h) / h) < 1e-4


@pytest.mark.parametrize("T", [16, 64, 256])
def test_kernel_round_trip(kernels, T):
    K = kernels[T]
    r = np.linspace(0.0, 2.0 * T, 41)
    back = spherical_forward(K.k, K.u_max, r, panels=20)
    assert np.max(np.abs(back - K.h(r))) < 1e-10


@pytest.mark.parametrize("T", [16, 64, 256])
def test_kernel_properties(kernels, T):
    K = kernels[T]
    p = K.properties
    assert p["i"] >= 0.0
    assert p["ii"] >= 0.9
    assert p["iii"] < 1.5
    assert p["iv"] < 1.2
    assert abs(float(K.h(np.array([float(T)]))[0]) - 1.0) < 1e-12
    assert float(np.ravel(K.k(1.0))[0]) == 0.0
    assert float(np.ravel(K.k(3.0))[0]) == 0.0


def test_kernel_spline_resolution(kernels):
    # halving the table must not move k_T by more than 1e-8 of its peak
    K = kernels[16]
    from scipy.interpolate import make_interp_spline

    xi = K.xi_table
    coarse = make_interp_spline(xi[::2], K.k_spline(xi[::2]), k=5)
    mid = 0.5 * (xi[1:-1:2] + xi[2::2])
    peak = np.max(np.abs(K.k_spline(xi)))
    assert np.max(np.abs(coarse(mid) - K.k_spline(mid))) < 1e-8 * peak


def test_kernel_cap_violation_raises():
    with pytest.raises(KernelPropertyError):
        build_test_kernel(10, caps={"iii": 0.5})


def test_kernel_domain():
    with pytest.raises(DomainError):
        build_test_kernel(0.5)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.75])
def test_stieltjes_synthetic_scaling(kernels, alpha):
    beta = max(0.5, 1.0 - 2.0 * alpha)
    ratios = [stieltjes_synthetic(kernels[T].k, alpha) / T**beta for T in (16, 64, 256)]
    assert max(ratios) / min(ratios) < 1.2


def test_stieltjes_synthetic_quarter_has_log(kernels):
    # at alpha = 1/4 the two exponents meet and a log T factor appears
    ratios = [stieltjes_synthetic(kernels[T].k, 0.25) / (T**0.5 * (1.0 + math.log(T))) for T in (16, 64, 256)]
    assert max(ratios) / min(ratios) < 1.2
