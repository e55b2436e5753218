import math
import random

import mpmath
import numpy as np
import pytest

from eislab.amplifier import (
    a_sum,
    b_coefficient,
    b_sum,
    build_amplifier,
    default_window,
    lemma_window,
    mellin_w,
    ramanujan_check,
    verify_amplifier_lemma,
)
from eislab.arith import divisors, primes_in
from eislab.eisenstein import eta

W = default_window()


def mellin_mp(s):
    with mpmath.workdps(25):
        w = lambda y: mpmath.e ** (1 - 1 / (1 - (2 * y - 3) ** 2)) if 1 < y < 2 else 0
        return complex(mpmath.quad(lambda y: w(y) * y ** (mpmath.mpc(s.real, s.imag) - 1), mpmath.linspace(1, 2, 120)))


def test_window():
    assert W(1.5) == 1.0
    assert W(1.0) == 0.0 and W(2.0) == 0.0
    g = W(np.linspace(0, 3, 10_000))
    assert g.min() >= 0 and g.max() <= 1


def test_mellin():
    w1 = mellin_w(1)
    assert w1.real > 0 and w1.imag == 0
    s = 1 + 3j
    assert mellin_w(s.conjugate()) == mellin_w(s).conjugate()
    for s in (1 + 3j, 1 + 100j, 0.5 - 20j):
        assert abs(mellin_w(s) - mellin_mp(s)) < 1e-12
    # sub-exponential decay of the smooth bump: far below any fixed power of |s|
    assert abs(mellin_w(1 + 100j)) < 1e-3
    assert abs(mellin_w(1 + 400j)) < 1e-5


def test_build_amplifier_support():
    amp = build_amplifier(50, 7.3)
    P = [int(p) for p in amp.primes]
    assert P == [53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
    for p in P:
        assert amp.y_coefficient(p) == 0.0
    support = {l for l, _ in amp.y_items()}
    expected = {1} | {p * q for p in P for q in P}
    assert support == expected
    # |x_p| <= 2 log p, so |2 x_p x_q| <= 8 log^2(2N)
    bound = 8 * math.log(2 * amp.N) ** 2
    for l, y in amp.y_items():
        if l > 1:
            assert abs(y) <= bound
            assert y == amp.y_coefficient(l)
    with pytest.raises(ValueError):
        build_amplifier(1, 0.0)


def test_y_weights_brute_force():
    N, t = 60, 11.0
    amp = build_amplifier(N, t)
    x = {n: amp.x_coefficient(n) for n in range(1, 2 * N + 1)}
    for ell in [1, 61 * 61, 61 * 67, 61, 2, 6, 61 * 113]:
        ref = 0.0
        for l1 in divisors(ell):
            l2 = ell // l1
            for d in range(1, 2 * N + 1):
                ref += x.get(d * l1, 0.0) * x.get(d * l2, 0.0)
        assert abs(amp.y_coefficient(ell) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_hecke_recombination():
    N, t, r = 40, 9.0, 3.7
    amp = build_amplifier(N, t)
    lhs = math.fsum(y * eta(r, l) for l, y in amp.y_items())
    assert abs(lhs - a_sum(N, t, r) ** 2) <= 1e-10 * lhs


def test_a_sum_properties():
    assert a_sum(1000, 20.0, 20.0) >= 0
    assert a_sum(1000, 20.0, 13.0) == pytest.approx(a_sum(1000, 13.0, 20.0), abs=1e-9)


def test_b_coefficients():
    rng = random.Random(4)
    for _ in range(50):
        p = int(rng.choice(primes_in(2, 500)))
        t, r = rng.uniform(0, 100), rng.uniform(0, 100)
        assert abs(b_coefficient(p, 1, t, r) - math.log(p) * eta(t, p) * eta(r, p)) < 1e-13 * 20
        for k in (2, 3, 4):
            assert abs(b_coefficient(p, k, t, r) / math.log(p)) <= 6


def test_ramanujan():
    lhs, rhs, gap, tail = ramanujan_check(0.0, 0.0, 2.0, 20_000)
    assert abs(rhs - 1.6449340668482264**4 / 1.0823232337111382) < 1e-12
    assert gap <= tail
    gaps = [ramanujan_check(0.0, 0.0, 2.0, n)[2] for n in (1000, 2000, 4000, 8000)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    _, _, gap, tail = ramanujan_check(1.3, 0.4, 3.0, 100_000)
    assert gap <= 1e-6 and gap <= tail


def test_lemma_rows():
    rows = verify_amplifier_lemma([1000, 10_000], 50.0)
    assert [r.N for r in rows] == [1000, 10_000]
    for r in rows:
        assert r.ratio == r.A / r.main
    off = verify_amplifier_lemma([1000], 50.0, 50.5)[0]
    assert math.isfinite(off.ratio)
    assert 0.5 > lemma_window(1000)
