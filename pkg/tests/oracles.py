"""Independent reference implementations used only by the test suite."""

from __future__ import annotations

import math

import mpmath

EULER_GAMMA = 0.57721566490153286061


def k0_series(u: float) -> float:
    """K_0(u) from its ascending series, for moderate u."""
    x = (u / 2.0) ** 2
    term = 1.0
    harm = 0.0
    i0 = 0.0
    acc = 0.0
    for k in range(200):
        if k > 0:
            term *= x / (k * k)
            harm += 1.0 / k
        i0 += term
        acc += term * harm
        if term < 1e-18 * i0 and k > 5:
            break
    return -(math.log(u / 2.0) + EULER_GAMMA) * i0 + acc


def kis_mp(t: float, u: float, dps: int = 30) -> float:
    """exp(pi t/2) K_{it}(u) in arbitrary precision."""
    with mpmath.workdps(dps):
        v = mpmath.besselk(1j * mpmath.mpf(t), mpmath.mpf(u), zeroprec=3000, maxprec=20000)
        return float(mpmath.re(v) * mpmath.exp(mpmath.pi * t / 2))


def gamma_mp(s: complex) -> complex:
    with mpmath.workdps(30):
        return complex(mpmath.gamma(mpmath.mpc(s.real, s.imag)))


def zeta_mp(s: complex) -> complex:
    with mpmath.workdps(30):
        return complex(mpmath.zeta(mpmath.mpc(s.real, s.imag)))


def eta_brute(t: float, n: int) -> float:
    """Sum over all factorizations n = a d of (a/d)^{it}, by trial division."""
    acc = 0.0
    for a in range(1, n + 1):
        if n % a == 0:
            acc += math.cos(t * math.log(a / (n // a)))
    return acc


def reduce_sl2_bruteforce(z: complex, max_len: int = 30):
    """Highest point reachable by words of length <= max_len in T^{+-1} and S.

    Breadth-first over generator words, keeping only the best height per
    rounded position to bound the search.
    """
    frontier = {(round(z.real, 9), round(z.imag, 9)): z}
    best = z
    for _ in range(max_len):
        nxt = {}
        for w in frontier.values():
            for v in (w + 1, w - 1, -1.0 / w):
                key = (round(v.real, 9), round(v.imag, 9))
                if abs(v.real) > 4 or key in nxt:
                    continue
                nxt[key] = v
                if v.imag > best.imag + 1e-12:
                    best = v
        frontier = nxt
        if len(frontier) > 20000:
            frontier = dict(sorted(frontier.items(), key=lambda kv: -kv[1].imag)[:20000])
    return best


def count_bruteforce(z: complex, ell: int, delta: float, B: int):
    """All (a, b, c, d) with |entries| <= B, ad - bc = ell and u(gz, z) <= delta (exact)."""
    from fractions import Fraction

    x, y, dl = Fraction(z.real), Fraction(z.imag), Fraction(delta)
    out = []
    for a in range(-B, B + 1):
        for d in range(-B, B + 1):
            for c in range(-B, B + 1):
                num = a * d - ell
                if c == 0:
                    if num != 0:
                        continue
                    bs = range(-B, B + 1)
                else:
                    if num % c:
                        continue
                    bs = [num // c]
                for b in bs:
                    if abs(b) > B:
                        continue
                    dd = a - d
                    # cheap float screen, then the exact test
                    f1 = (dd - 2 * c * z.real) * z.imag
                    f2 = b + dd * z.real - c * (z.real**2 - z.imag**2)
                    if f1 * f1 + f2 * f2 > delta * ell * z.imag**2 * (1 + 1e-6) + 1e-9:
                        continue
                    t1 = (dd - 2 * c * x) * y
                    t2 = b + dd * x - c * (x * x - y * y)
                    if t1 * t1 + t2 * t2 <= dl * ell * y * y:
                        out.append((a, b, c, d))
    return sorted(out)
