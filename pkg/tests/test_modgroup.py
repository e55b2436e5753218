import math
import random
from fractions import Fraction

import pytest

from eislab.errors import DomainError
from eislab.modgroup import (
    IDENTITY,
    S_MATRIX,
    AtkinLehnerElement,
    IntegerMatrix2,
    UpperHalfPoint,
    apply,
    apply_exact,
    atkin_lehner,
    fricke,
    in_fundamental_domain,
    point_pair_u,
    reduce_a0q,
    reduce_sl2,
    translation,
)

from oracles import reduce_sl2_bruteforce


def random_sl2(rng, size=30):
    while True:
        c = rng.randint(-size, size)
        d = rng.randint(-size, size)
        if math.gcd(c, d) == 1:
            break
    if c == 0:
        return IntegerMatrix2(d, rng.randint(-5, 5), 0, d)
    a = pow(d, -1, abs(c)) if abs(c) > 1 else 0
    return IntegerMatrix2(a, (a * d - 1) // c, c, d)


def test_point_type():
    p = UpperHalfPoint(0.1, 2.0)
    assert complex(p) == 0.1 + 2j
    with pytest.raises(DomainError):
        UpperHalfPoint(0.0, 0.0)
    with pytest.raises(DomainError):
        apply(IDENTITY, 1 - 1j)


def test_apply_examples():
    assert apply(IDENTITY, 0.3 + 2j) == 0.3 + 2j
    assert abs(apply(S_MATRIX, 1j) - 1j) < 1e-15
    assert apply(translation(1), UpperHalfPoint(0, 1)) == 1 + 1j


def test_height_formula():
    rng = random.Random(3)
    for _ in range(200):
        g = IntegerMatrix2(*(rng.randint(-40, 40) for _ in range(4)))
        if g.det < 1:
            continue
        z = complex(rng.uniform(-2, 2), rng.uniform(0.01, 3))
        w = apply(g, z)
        assert abs(w.imag * abs(g.c * z + g.d) ** 2 - g.det * z.imag) <= 1e-12 * g.det * z.imag
        direct = (g.a * z + g.b) / (g.c * z + g.d)
        assert abs(w - direct) <= 1e-12 * abs(direct)


def test_point_pair_invariant():
    assert point_pair_u(1j, 1j) == 0
    assert point_pair_u(1j, 2j) == 0.5
    rng = random.Random(5)
    for _ in range(100):
        g = random_sl2(rng)
        z = complex(rng.uniform(-1, 1), rng.uniform(0.2, 2))
        w = complex(rng.uniform(-1, 1), rng.uniform(0.2, 2))
        u = point_pair_u(z, w)
        assert point_pair_u(w, z) == u
        assert abs(point_pair_u(apply(g, z), apply(g, w)) - u) <= 1e-12 * max(1.0, u)


def test_point_pair_rational_real_matrix():
    # real det-1 matrix with rational entries
    a, b, c = Fraction(3, 2), Fraction(1, 3), Fraction(2, 5)
    d = (1 + b * c) / a
    z, w = 0.2 + 0.9j, -0.4 + 1.7j

    def act(p):
        return (float(a) * p + float(b)) / (float(c) * p + float(d))

    assert abs(point_pair_u(act(z), act(w)) - point_pair_u(z, w)) < 1e-12


def test_reduce_sl2_examples():
    assert reduce_sl2(1j) == (1j, IDENTITY)
    z, g = reduce_sl2(0.5j)
    assert z == 2j and g == S_MATRIX
    z, g = reduce_sl2(0.7 + 0.1j)
    best = reduce_sl2_bruteforce(0.7 + 0.1j)
    assert abs(z.imag - best.imag) < 1e-9


def test_reduce_sl2_random():
    rng = random.Random(11)
    for _ in range(500):
        z0 = complex(rng.uniform(-50, 50), 10 ** rng.uniform(-6, 1))
        z, g = reduce_sl2(z0)
        assert g.det == 1
        assert in_fundamental_domain(z)
        assert z.real <= 0.5 - 1e-12 or abs(z.real) <= 0.5
        assert apply_exact(g, z0) == z


def test_reduce_sl2_boundary_ties():
    z, _ = reduce_sl2(0.5 + 2j)
    assert z.real == -0.5
    z, _ = reduce_sl2(complex(math.cos(1.2), math.sin(1.2)))
    assert z.real < 0


def test_fricke():
    assert abs(fricke(1, 1j) - 1j) < 1e-15
    assert abs(fricke(4, 0.5j) - 0.5j) < 1e-15
    z = 0.31 + 0.07j
    assert abs(fricke(7, fricke(7, z)) - z) < 1e-14


def test_atkin_lehner_element():
    for q in (2, 6, 10, 30):
        for d in (1, 2, q):
            if q % d:
                continue
            w = atkin_lehner(q, d)
            assert w.matrix.det == d
            assert w.matrix.c % q == 0
    with pytest.raises(DomainError):
        AtkinLehnerElement(6, 2, IntegerMatrix2(1, 0, 0, 2))


def test_reduce_a0q_height_floor_and_idempotence():
    assert reduce_a0q(1, 1j) == (1j, [])
    rng = random.Random(17)
    for q in (2, 3, 5, 6, 7, 10):
        for _ in range(500 // 6 + 1):
            z0 = complex(rng.uniform(-3, 3), 10 ** rng.uniform(-4, 0.5))
            z, word = reduce_a0q(q, z0)
            assert z.imag >= math.sqrt(3) / (2 * q) - 1e-12
            assert abs(z.real) <= 0.5 + 1e-12
            assert reduce_a0q(q, z)[1] == []
            w = z0
            for m in word:
                w = apply(m, w)
            assert abs(w - z) <= 1e-8 * abs(z)


def test_reduce_a0q_rejects_nonsquarefree():
    with pytest.raises(DomainError):
        reduce_a0q(4, 1j)
