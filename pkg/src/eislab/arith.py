"""Small exact integer helpers: sieves, factorization, divisors, Moebius."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def primes_up_to(n: int) -> np.ndarray:
    """Primes ``p <= n`` by the sieve of Eratosthenes."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def primes_in(lo: int, hi: int) -> np.ndarray:
    """Primes in the closed interval ``[lo, hi]`` (segmented sieve)."""
    lo = max(lo, 2)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    seg = np.ones(hi - lo + 1, dtype=bool)
    for p in primes_up_to(math.isqrt(hi)):
        p = int(p)
        start = max(p * p, ((lo + p - 1) // p) * p)
        seg[start - lo :: p] = False
    return (np.flatnonzero(seg) + lo).astype(np.int64)


def smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if spf[p] == 0:
            spf[p] = p
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    return spf


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``n >= 1`` as ``((p, e), ...)``."""
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in factorize(n)]


def is_squarefree(n: int) -> bool:
    return n >= 1 and all(e == 1 for _, e in factorize(n))


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def squarefree_divisors(n: int) -> list[int]:
    divs = [1]
    for p in prime_divisors(n):
        divs += [d * p for d in divs]
    return sorted(divs)


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n))


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def totient(n: int) -> int:
    out = n
    for p in prime_divisors(n):
        out -= out // p
    return out
