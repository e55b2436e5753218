"""Counting integer matrices of determinant ``l`` that move ``z`` by at most ``delta``.

For ``g = (a b; c d)`` with ``det g = l`` and ``z = x + iy``,

    u(gz, z) * l * y^2 = (a - d - 2cx)^2 y^2 + (b + (a - d)x - c(x^2 - y^2))^2,

and ``rho = Im(gz)/y = l/|cz + d|^2`` satisfies ``rho + 1/rho <= 2 + u``.  So
``|cz + d|^2`` lies in ``[l/g, l g]`` with ``g = 1 + delta/2 + sqrt(delta + delta^2/4)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numba
import numpy as np

from .arith import divisors, is_square, primes_up_to
from .errors import DomainError, FeasibilityError
from .modgroup import IntegerMatrix2, as_complex

FEASIBILITY_CAP = 1e8
_MARGIN = 1e-12
_EXACT_BAND = 1e-9

GENERIC, UPPER, PARABOLIC = "generic", "upper", "parabolic"


@dataclass(frozen=True)
class CountQuery:
    z: complex
    ell: int
    delta: float

    def __post_init__(self):
        as_complex(self.z)
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.ell < 1:
            raise DomainError(f"ell must be positive, got {self.ell}")


@dataclass
class CountBreakdown:
    m_star: int = 0
    m_u: int = 0
    m_p: int = 0
    matrices: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.m_star + self.m_u + self.m_p


def classify(g: IntegerMatrix2, ell: int) -> str:
    """``"parabolic"`` if ``(a+d)^2 = 4l``, else ``"upper"`` if ``c = 0``, else ``"generic"``."""
    if g.det != ell:
        raise DomainError(f"determinant {g.det} does not match ell = {ell}")
    if (g.a + g.d) ** 2 == 4 * ell:
        return PARABOLIC
    if g.c == 0:
        return UPPER
    return GENERIC


def g_delta(delta: float) -> float:
    return 1.0 + 0.5 * delta + math.sqrt(delta + 0.25 * delta * delta)


def u_value(g: IntegerMatrix2, z) -> float:
    """``u(gz, z)`` from the polynomial form (no division by ``|cz+d|``)."""
    z = as_complex(z)
    x, y = z.real, z.imag
    dd = g.a - g.d
    t1 = (dd - 2 * g.c * x) * y
    t2 = g.b + dd * x - g.c * (x * x - y * y)
    return (t1 * t1 + t2 * t2) / (g.det * y * y)


def _u_le_exact(a, b, c, d, ell, x: Fraction, y: Fraction, delta: Fraction) -> bool:
    dd = a - d
    t1 = (dd - 2 * c * x) * y
    t2 = b + dd * x - c * (x * x - y * y)
    return t1 * t1 + t2 * t2 <= delta * ell * y * y


# ---------------------------------------------------------------- numba core


@numba.njit(cache=True)
def _inv_mod(a, m):
    # inverse of a modulo m (gcd(a, m) = 1, m >= 1)
    if m == 1:
        return 0
    r0, r1 = a % m, m
    s0, s1 = 1, 0
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return s0 % m


@numba.njit(cache=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@numba.njit(cache=True)
def _enumerate_core(x, y, ell, delta, gfac, cmax, band):
    """Matrices with ``c != 0``; returns rows ``(a, b, c, d, borderline)``."""
    out = []
    lim = delta * ell * y * y
    ra = math.sqrt(ell * delta) * (1.0 + 1e-12) + 1e-9
    for c in range(-cmax, cmax + 1):
        if c == 0:
            continue
        rem = ell * gfac * (1.0 + 1e-12) - c * c * y * y
        if rem < 0:
            continue
        r = math.sqrt(rem) + 1e-9
        dlo = int(math.ceil(-c * x - r))
        dhi = int(math.floor(-c * x + r))
        ac = abs(c)
        for d in range(dlo, dhi + 1):
            g0 = _gcd(c, d)
            if ell % g0 != 0:
                continue
            m = ac // g0
            a0 = ((ell // g0) * _inv_mod((d // g0) % m if m > 1 else 0, m)) % m if m > 1 else 0
            lo = d + 2.0 * c * x - ra
            hi = d + 2.0 * c * x + ra
            # first a >= lo with a = a0 mod m
            k = int(math.ceil((lo - a0) / m))
            a = a0 + k * m
            while a <= hi:
                num = a * d - ell
                if num % c == 0:
                    b = num // c
                    dd = a - d
                    t1 = (dd - 2.0 * c * x) * y
                    t2 = b + dd * x - c * (x * x - y * y)
                    v = t1 * t1 + t2 * t2
                    if v <= lim * (1.0 + band):
                        out.append((a, b, c, d, 1 if v >= lim * (1.0 - band) else 0))
                a += m
    return out


def _predicted_work(y: float, ell: int, gfac: float) -> float:
    cmax = math.sqrt(ell * gfac) / y
    return (2 * cmax + 1) * (2 * math.sqrt(ell * gfac) + 1)


def _c_zero(x: float, y: float, ell: int, delta: float, only_upper: bool = False):
    """Rows ``(a, b, 0, d, borderline)``: ``ad = l`` and ``(b + (a-d)x)^2 <= (delta l - (a-d)^2) y^2``."""
    out = []
    lim = delta * ell * y * y
    for a0 in divisors(ell):
        for sgn in (1, -1):
            a, d = sgn * a0, sgn * (ell // a0)
            if only_upper and a == d:
                continue
            dd = a - d
            rem = lim - dd * dd * y * y
            if rem < -lim * _EXACT_BAND:
                continue
            r = math.sqrt(max(rem, 0.0)) * (1 + 1e-12) + 1e-9
            for b in range(math.ceil(-dd * x - r), math.floor(-dd * x + r) + 1):
                t2 = b + dd * x
                v = dd * dd * y * y + t2 * t2
                if v <= lim * (1 + _EXACT_BAND):
                    out.append((a, b, 0, d, 1 if v >= lim * (1 - _EXACT_BAND) else 0))
    return out


def _finalize(rows, z: complex, ell: int, delta: float, keep_matrices: bool) -> CountBreakdown:
    x, y = z.real, z.imag
    fx, fy, fd = Fraction(x), Fraction(y), Fraction(delta)
    mats = []
    for a, b, c, d, border in rows:
        a, b, c, d = int(a), int(b), int(c), int(d)
        if border and not _u_le_exact(a, b, c, d, ell, fx, fy, fd):
            continue
        mats.append(IntegerMatrix2(a, b, c, d))
    mats.sort(key=lambda m: m.as_tuple())
    out = CountBreakdown(matrices=mats if keep_matrices else [])
    for m in mats:
        k = classify(m, ell)
        if k == PARABOLIC:
            out.m_p += 1
        elif k == UPPER:
            out.m_u += 1
        else:
            out.m_star += 1
    return out


def enumerate_matrices(query: CountQuery, keep_matrices: bool = True) -> CountBreakdown:
    """All ``g`` with ``det g = l`` and ``u(gz, z) <= delta``, classified.

    Raises
    ------
    FeasibilityError
        If the predicted number of ``(c, d)`` candidates exceeds ``1e8``.
    """
    z = as_complex(query.z)
    x, y = z.real, z.imag
    ell, delta = query.ell, query.delta
    gfac = g_delta(delta)
    work = _predicted_work(y, ell, gfac)
    if work > FEASIBILITY_CAP:
        raise FeasibilityError(f"enumeration at y={y:g}, ell={ell}", work)
    cmax = int(math.floor(math.sqrt(ell * gfac * (1 + _MARGIN)) / y + 1e-9))
    rows = list(_enumerate_core(x, y, ell, delta, gfac, cmax, _EXACT_BAND))
    rows += _c_zero(x, y, ell, delta)
    return _finalize(rows, z, ell, delta, keep_matrices)


# keep the spec's name available without shadowing the builtin at import sites
enumerate = enumerate_matrices


def count_upper(z, ell: int, delta: float) -> int:
    """``M_u(z, l, delta)``: only ``c = 0`` matrices can be upper triangular."""
    z = as_complex(z)
    rows = _c_zero(z.real, z.imag, ell, delta, only_upper=True)
    return _finalize(rows, z, ell, delta, False).m_u


def _square_step(n: int) -> int:
    """Smallest ``r > 0`` with ``n | r^2``."""
    r = 1
    m = n
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        r *= p ** ((e + 1) // 2)
        p += 1
    if m > 1:
        r *= m
    return r


def parabolic_fast(query: CountQuery, keep_matrices: bool = True) -> CountBreakdown:
    """Parabolic matrices only, built from trace ``+-2m`` and ``(a-d)^2 + 4bc = 0``.

    ``c = 0``: ``a = d = +-m`` and ``|b| <= m y sqrt(delta)``.
    ``c != 0``: ``D = a - d`` lies within ``m sqrt(delta)`` of ``2cx`` and
    ``4c | D^2``, so ``D`` runs over multiples of the smallest ``r`` with
    ``4|c| | r^2``; then ``b = -D^2 / (4c)``.
    """
    ell = query.ell
    if not is_square(ell):
        raise DomainError(f"parabolic matrices of determinant {ell} need a perfect square")
    z = as_complex(query.z)
    x, y = z.real, z.imag
    delta = query.delta
    m = math.isqrt(ell)
    lim = delta * ell * y * y
    rows = []
    rb = m * y * math.sqrt(delta) * (1 + 1e-12) + 1e-9
    for sgn in (1, -1):
        for b in range(-math.floor(rb), math.floor(rb) + 1):
            v = float(b * b)
            if v <= lim * (1 + _EXACT_BAND):
                rows.append((sgn * m, b, 0, sgn * m, 1 if v >= lim * (1 - _EXACT_BAND) else 0))
    cmax = int(math.floor(m * math.sqrt(g_delta(delta) * (1 + _MARGIN)) / y + 1e-9))
    rD = m * math.sqrt(delta) * (1 + 1e-12) + 1e-9
    for c in range(-cmax, cmax + 1):
        if c == 0:
            continue
        step = _square_step(4 * abs(c))
        lo = math.ceil((2 * c * x - rD) / step)
        hi = math.floor((2 * c * x + rD) / step)
        for k in range(lo, hi + 1):
            D = k * step
            b = -(D * D) // (4 * c)
            for t0 in (2 * m, -2 * m):
                a, d = (t0 + D) // 2, (t0 - D) // 2
                t1 = (D - 2 * c * x) * y
                t2 = b + D * x - c * (x * x - y * y)
                v = t1 * t1 + t2 * t2
                if v <= lim * (1 + _EXACT_BAND):
                    rows.append((a, b, c, d, 1 if v >= lim * (1 - _EXACT_BAND) else 0))
    out = _finalize(rows, z, ell, delta, keep_matrices)
    assert out.m_star == 0 and out.m_u == 0
    return out


# ---------------------------------------------------------------- lemma checks


@dataclass(frozen=True)
class LemmaRow:
    z: complex
    L: int
    delta: float
    count: int
    bound: float
    ratio: float


@dataclass
class LemmaReport:
    name: str
    rows: list[LemmaRow]

    @property
    def sup_ratio(self) -> float:
        return max(r.ratio for r in self.rows)


EPS_FACTOR = 0.1


def generic_sum(z, L: int, delta: float) -> int:
    return sum(enumerate_matrices(CountQuery(z, ell, delta), keep_matrices=False).m_star for ell in range(1, L + 1))


def check_lemma_generic(z, L: int, delta: float) -> LemmaRow:
    """``sum_{l <= L} M_*(z, l, delta)`` against ``L^{0.1}(L/y + L^{3/2} delta^{1/2} + L^2 delta)``."""
    z = as_complex(z)
    n = generic_sum(z, L, delta)
    bound = L**EPS_FACTOR * (L / z.imag + L**1.5 * delta**0.5 + L**2 * delta)
    return LemmaRow(z, L, delta, n, bound, n / bound)


def check_lemma_upper(z, L: int, delta: float) -> LemmaRow:
    """``sum_{p1, p2 <= L} M_u(z, p1 p2, delta)`` against ``L^{0.1}(L + L^3 delta^{1/2} y)``."""
    z = as_complex(z)
    P = [int(p) for p in primes_up_to(L)]
    n = sum(count_upper(z, p1 * p2, delta) for p1 in P for p2 in P)
    bound = L**EPS_FACTOR * (L + L**3 * delta**0.5 * z.imag)
    return LemmaRow(z, L, delta, n, bound, n / bound)


def check_lemma_parabolic(z, m: int, delta: float) -> LemmaRow:
    """``M_p(z, m^2, delta)`` against ``1 + l^{1/2} delta^{1/2} y + l^{3/4} delta^{3/8} y^{-1/2}``."""
    z = as_complex(z)
    ell = m * m
    n = parabolic_fast(CountQuery(z, ell, delta), keep_matrices=False).m_p
    y = z.imag
    bound = 1 + ell**0.5 * delta**0.5 * y + ell**0.75 * delta**0.375 * y**-0.5
    return LemmaRow(z, m, delta, n, bound, n / bound)


LEMMA_Z = (1j, 2j, 0.4 + 0.9j)
LEMMA_L = (10, 30, 100)
LEMMA_DELTA = (1e-4, 1e-2, 0.5)
LEMMA_M = (1, 3, 7, 12, 20)


def lemma_report(name: str, zs=LEMMA_Z, Ls=LEMMA_L, deltas=LEMMA_DELTA) -> LemmaReport:
    check = {
        "4.1": check_lemma_generic,
        "4.2": check_lemma_upper,
        "4.3": check_lemma_parabolic,
    }[name]
    if name == "4.3" and Ls is LEMMA_L:
        Ls = LEMMA_M
    rows = [check(z, L, dl) for z in zs for L in Ls for dl in deltas]
    return LemmaReport(name, rows)


# ---------------------------------------------------------------- Stieltjes sums


def u_values(z, ell: int, delta_max: float = 1.0) -> np.ndarray:
    """Sorted ``u(gz, z)`` over all ``g`` with ``det g = l`` and ``u <= delta_max``.

    ``delta_max = 1`` is allowed here (the query type requires ``delta < 1``).
    """
    z = as_complex(z)
    x, y = z.real, z.imag
    gfac = g_delta(delta_max)
    work = _predicted_work(y, ell, gfac)
    if work > FEASIBILITY_CAP:
        raise FeasibilityError(f"enumeration at y={y:g}, ell={ell}", work)
    cmax = int(math.floor(math.sqrt(ell * gfac * (1 + _MARGIN)) / y + 1e-9))
    rows = list(_enumerate_core(x, y, ell, delta_max, gfac, cmax, _EXACT_BAND))
    rows += _c_zero(x, y, ell, delta_max)
    mats = _finalize(rows, z, ell, delta_max, True).matrices
    return np.sort(np.array([u_value(m, z) for m in mats]))


def stieltjes_weighted_count(z, ell: int, k: Callable[[np.ndarray], np.ndarray]) -> float:
    """``sum_{g: u(gz,z) <= 1} |k(u(gz, z))|``, exact over the enumerated set."""
    u = u_values(z, ell, 1.0)
    return math.fsum(np.abs(k(u)))


def stieltjes_binned(z, ell: int, k: Callable[[np.ndarray], np.ndarray], bins: int = 10_000) -> float:
    """Riemann-Stieltjes approximation ``sum_i |k(delta_i)| (M(delta_{i+1}) - M(delta_i))``."""
    u = u_values(z, ell, 1.0)
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts = np.histogram(u, bins=edges)[0]
    mid = 0.5 * (edges[:-1] + edges[1:])
    return math.fsum(np.abs(k(mid)) * counts)


def stieltjes_synthetic(k: Callable[[np.ndarray], np.ndarray], alpha: float, nodes: int = 20_000) -> float:
    """``int_0^1 |k(delta)| d(delta^alpha)`` on a graded grid (integrable endpoint singularity)."""
    s = (np.arange(nodes) + 0.5) / nodes
    delta = s ** (1.0 / alpha) if alpha < 1 else s
    # d(delta^alpha) = alpha delta^{alpha-1} d delta; with delta = s^{1/alpha} it is ds
    if alpha < 1:
        return math.fsum(np.abs(k(delta))) / nodes
    return math.fsum(np.abs(k(delta)) * alpha * delta ** (alpha - 1)) / nodes
