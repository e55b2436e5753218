import math
import random

import numpy as np
import pytest

from eislab.eisenstein import (
    EisensteinValue,
    SpectralPoint,
    eisenstein,
    eisenstein_fourier,
    eisenstein_lattice,
    eta,
    eta_complex,
    eta_table,
    f_remainder,
    scattering_phi,
)
from eislab.arith import divisor_count, divisors
from eislab.errors import DomainError, PrecisionLossError
from eislab.modgroup import IntegerMatrix2, apply_exact, reduce_sl2
from eislab.specfun import xi

from oracles import eta_brute


def coprime_lattice_sum(z, s, R):
    """Direct gcd-filtered coset sum over |c|, |d| <= R (no tail)."""
    acc = 0.0
    for c in range(0, R + 1):
        for d in range(-R, R + 1):
            if math.gcd(c, d) != 1 or (c == 0 and d < 0):
                continue
            acc += abs(c * z + d) ** (-2 * s)
    return z.imag**s * acc


def test_eta_examples():
    assert eta(3.7, 1) == 1
    for p in (2, 3, 5, 97):
        assert abs(eta(3.7, p) - 2 * math.cos(3.7 * math.log(p))) < 1e-14
    assert abs(eta(5.1, 2) * eta(5.1, 3) - eta(5.1, 6)) < 1e-13


def test_eta_brute_and_table():
    for t in (0.7, 13.3):
        tab = eta_table(0.5 + 1j * t, 300)
        for n in range(1, 301):
            ref = eta_brute(t, n)
            assert abs(eta(t, n) - ref) < 1e-12
            assert abs(tab[n] - ref) < 1e-12
            assert abs(ref) <= divisor_count(n) + 1e-12
    tab = eta_table(2.0, 50)
    for n in (1, 6, 12, 49):
        assert abs(tab[n] - eta_complex(n, 2.0).real) < 1e-12 * abs(tab[n])


@pytest.mark.parametrize("t", [0.7, 13.3, 97.1])
def test_hecke_relation(t):
    tab = eta_table(0.5 + 1j * t, 200 * 200)
    worst = 0.0
    for m in range(1, 201):
        for n in range(1, 201):
            g = math.gcd(m, n)
            rhs = sum(tab[m * n // (d * d)] for d in divisors(g))
            worst = max(worst, abs(tab[m] * tab[n] - rhs))
    assert worst <= 1e-12


def test_phi():
    for T in (1.0, 10.0, 100.0):
        assert abs(abs(scattering_phi(0.5 + 1j * T)) - 1) < 1e-10
    s = 0.3 + 2j
    assert abs(scattering_phi(s) * scattering_phi(1 - s) - 1) < 1e-10
    ref = (xi(3) / xi(4)).real
    assert abs(scattering_phi(2) - ref) < 1e-14
    assert abs(scattering_phi(SpectralPoint(2.0)) - ref) < 1e-14


def test_value_structure():
    v = eisenstein_fourier(0.1 + 1.2j, SpectralPoint.critical(20))
    assert isinstance(v, EisensteinValue)
    assert v.total == v.main_terms + v.remainder
    assert v.remainder == f_remainder(0.1 + 1.2j, 0.5 + 20j)


def test_even_in_x():
    s = 0.5 + 17j
    a = eisenstein_fourier(0.23 + 0.9j, s).total
    b = eisenstein_fourier(-0.23 + 0.9j, s).total
    assert abs(a - b) < 1e-13 * abs(a)


def test_conjugate_T():
    a = eisenstein_fourier(0.23 + 0.9j, 0.5 + 17j).total
    b = eisenstein_fourier(0.23 + 0.9j, 0.5 - 17j).total
    assert b == a.conjugate()


def test_large_y_remainder_small():
    T = 30.0
    for y in (31.0, 50.0):
        assert abs(f_remainder(0.3 + 1j * y, 0.5 + 1j * T)) < 1e-8


def test_automorphy_smoke():
    rng = random.Random(2)
    g = IntegerMatrix2(2, 1, 7, 4)
    for T in (5.0, 60.0):
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 1.5))
        a = eisenstein_fourier(z, 0.5 + 1j * T).total
        b = eisenstein_fourier(apply_exact(g, z), 0.5 + 1j * T).total
        assert abs(a - b) <= 1e-8 * abs(a)
        c = eisenstein(apply_exact(g, z), 0.5 + 1j * T).total
        assert abs(a - c) <= 1e-12 * abs(a)


def test_lattice_real_on_imaginary_axis_and_self_consistency():
    z = 1.3j
    v = eisenstein_lattice(z, 2)
    assert isinstance(v, float)
    assert abs(eisenstein_lattice(z, 2, cutoff=60) - v) < 1e-10 * v


def test_lattice_against_gcd_filter():
    z = 0.2 + 1.1j
    R = 400
    brute = coprime_lattice_sum(z, 3, R)
    # tail of the brute sum is O(R^{2-2s}) = O(R^{-4})
    assert abs(brute - eisenstein_lattice(z, 3)) < 1e-8


def test_fourier_vs_lattice():
    rng = random.Random(8)
    for s in (2, 3):
        for _ in range(5):
            z, _ = reduce_sl2(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.5)))
            a = eisenstein_fourier(z, s).total
            b = eisenstein_lattice(z, s)
            assert abs(a - b) <= 1e-8 * abs(b)


def test_errors():
    with pytest.raises(PrecisionLossError):
        eisenstein_fourier(1e-8j, 0.5 + 10j)
    with pytest.raises(DomainError):
        eisenstein_fourier(1j, 0.7 + 10j)
    with pytest.raises(DomainError):
        eisenstein_lattice(1j, 1.5)
