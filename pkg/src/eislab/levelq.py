"""Eisenstein series for ``Gamma_0(q)`` with ``q`` square-free.

Cusps are ``a = 1/v`` for ``v | q`` with width ``w = q/v``; ``v = q`` is the
cusp at infinity.  Values at the critical line come from the level-lowering
identity

    E_a(z, s) = zeta_q(2s) mu(v) (qv)^{-s}
                sum_{beta | v} sum_{gamma | w} mu(beta) mu(gamma) beta^s gamma^{-s} E(beta gamma z, s),

while ``eisenstein_cusp_direct`` evaluates the coset sum itself for real
``s >= 2`` as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.special

from . import eisenstein as _e
from .arith import mobius, prime_divisors, primes_up_to, squarefree_divisors, is_squarefree
from .errors import DomainError
from .modgroup import as_complex


@dataclass(frozen=True)
class Cusp:
    q: int
    v: int
    w: int

    def __post_init__(self):
        if not is_squarefree(self.q) or self.v * self.w != self.q:
            raise DomainError(f"invalid cusp v={self.v}, w={self.w} for level q={self.q}")

    @property
    def is_infinity(self) -> bool:
        return self.v == self.q

    def dual(self) -> "Cusp":
        return Cusp(self.q, self.w, self.v)


@dataclass(frozen=True)
class CuspEisensteinValue:
    total: complex
    delta_a: int
    phi_a: complex
    remainder: complex
    y_s_coefficient: complex = 0j


def _check_level(q: int) -> None:
    if not is_squarefree(q):
        raise DomainError(f"level must be a square-free positive integer, got {q}")


def cusps(q: int) -> list[Cusp]:
    """The ``2^omega(q)`` cusps ``1/v``, ordered by ``v``."""
    _check_level(q)
    return [Cusp(q, v, q // v) for v in squarefree_divisors(q)]


def cusp(q: int, v: int) -> Cusp:
    """The cusp ``1/v`` of level ``q``."""
    if v < 1 or q % v:
        raise DomainError(f"v = {v} does not divide q = {q}")
    return Cusp(q, v, q // v)


def zeta_q(q: int, s) -> complex:
    """``prod_{p | q} (1 - p^{-s})^{-1}``."""
    s = complex(s)
    out = 1.0 + 0j
    for p in prime_divisors(q):
        out /= 1.0 - complex(p) ** (-s)
    return out


def _lowering_terms(c: Cusp, s: complex):
    """``(beta * gamma, weight)`` pairs of the level-lowering identity."""
    q, v, w = c.q, c.v, c.w
    pref = zeta_q(q, 2 * s) * mobius(v) * complex(q * v) ** (-s)
    out = []
    for beta in squarefree_divisors(v):
        for gamma in squarefree_divisors(w):
            wt = pref * mobius(beta) * mobius(gamma) * complex(beta) ** s * complex(gamma) ** (-s)
            out.append((beta * gamma, beta, gamma, wt))
    return out


def constant_term(c: Cusp, s) -> tuple[complex, complex]:
    """Coefficients ``(of y^s, of y^{1-s})`` of the constant term at the cusp.

    The first is the reconstructed ``delta_a`` (1 at infinity, else 0).
    """
    s = _e.as_spectral(s).s
    phi = _e.scattering_phi(s)
    ys = 0j
    y1s = 0j
    for m, beta, gamma, wt in _lowering_terms(c, s):
        ys += wt * complex(m) ** s
        y1s += wt * phi * complex(m) ** (1 - s)
    return ys, y1s


def eisenstein_cusp(q: int, c: Cusp, z, s, tol: float = 1e-12) -> CuspEisensteinValue:
    """``E_a(z, s)`` by level lowering to level-1 evaluations at ``beta gamma z``."""
    _check_level(q)
    if c.q != q:
        raise DomainError(f"cusp {c} does not belong to level {q}")
    z = as_complex(z)
    sp = _e.as_spectral(s)
    s = sp.s
    rem = 0j
    for m, _, _, wt in _lowering_terms(c, s):
        v = _e.eisenstein(complex(m * z.real, m * z.imag), sp, tol)
        rem += wt * v.remainder
    ys, phi_a = constant_term(c, s)
    delta = 1 if c.is_infinity else 0
    y = z.imag
    total = delta * y**s + phi_a * y ** (1 - s) + rem
    if sp.T == 0.0:
        total = complex(total.real, 0.0)
    return CuspEisensteinValue(total, delta, phi_a, rem, ys)


def eisenstein_all_cusps(q: int, z, s, tol: float = 1e-12) -> dict[int, CuspEisensteinValue]:
    """``{v: E_{1/v}(z, s)}`` for every cusp, sharing the level-1 values ``E(mz, s)``, ``m | q``."""
    _check_level(q)
    z = as_complex(z)
    sp = _e.as_spectral(s)
    s = sp.s
    rem = {m: _e.eisenstein(complex(m * z.real, m * z.imag), sp, tol).remainder for m in squarefree_divisors(q)}
    y = z.imag
    out = {}
    for c in cusps(q):
        r = 0j
        for m, _, _, wt in _lowering_terms(c, s):
            r += wt * rem[m]
        ys, phi_a = constant_term(c, s)
        delta = 1 if c.is_infinity else 0
        total = delta * y**s + phi_a * y ** (1 - s) + r
        if sp.T == 0.0:
            total = complex(total.real, 0.0)
        out[c.v] = CuspEisensteinValue(total, delta, phi_a, r, ys)
    return out


def f_remainder_cusp(q: int, c: Cusp, z, s, tol: float = 1e-12) -> complex:
    return eisenstein_cusp(q, c, z, s, tol).remainder


# ---------------------------------------------------------------- direct coset sum

_C_DENSE = 1_000_000
_C_CORR = 20_000


@lru_cache(maxsize=64)
def _density_table(v: int, w: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``c`` coprime to ``w`` and ``phi(cv)/(cv)`` for ``1 <= c <= n``."""
    c = np.arange(1, n + 1)
    ratio = np.ones(n)
    for p in primes_up_to(n):
        ratio[int(p) - 1 :: int(p)] *= 1.0 - 1.0 / int(p)
    for p in prime_divisors(v):
        ratio[c % p != 0] *= 1.0 - 1.0 / p
    keep = np.ones(n, dtype=bool)
    for p in prime_divisors(w):
        keep &= c % p != 0
    return c[keep].astype(float), ratio[keep]


@lru_cache(maxsize=8)
def _mobius_table(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes_up_to(n):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def eisenstein_cusp_direct(q: int, c: Cusp, z, s) -> tuple[float, float]:
    """``(1/2)(y/w)^s sum* |cvz + d|^{-2s}`` for real ``s >= 2``; returns ``(value, tail_bound)``.

    The starred sum runs over coprime ``(c, d)`` with ``(c, w) = 1`` and
    ``(d, v) = 1``.  For each row ``c >= 1`` the condition ``(d, cv) = 1`` is
    removed by Moebius inversion over ``e | cv``, giving rows
    ``S(mx, my) = sum_k ((mx + k)^2 + (my)^2)^{-s}`` with ``m = cv/e``.  Each row
    splits into its Poisson main term ``kappa (my)^{1-2s}`` (summed in closed
    form over ``e``, i.e. ``kappa (cvy)^{1-2s} phi(cv)/(cv)``) and a correction
    ``Delta_m`` that is below ``exp(-2 pi m y)`` and only matters for small ``m``.
    """
    _check_level(q)
    z = as_complex(z)
    sp = _e.as_spectral(s)
    if sp.T != 0.0 or sp.sigma < 2.0:
        raise DomainError(f"direct coset sum needs real s >= 2, got {sp.s}")
    s = sp.sigma
    v, w = c.v, c.w
    x, y = z.real, z.imag
    kappa = _e._poisson_constant(s)

    # Poisson main terms, all rows up to _C_DENSE
    cc, ratio = _density_table(v, w, _C_DENSE)
    parts = [float(w == 1)]
    parts.append(kappa * math.fsum((cc * v * y) ** (1 - 2 * s) * ratio))
    tail = kappa * (v * y) ** (1 - 2 * s) * float(scipy.special.zeta(2 * s - 1, _C_DENSE + 1))

    # corrections Delta_m = S(mx, my) - kappa (my)^{1-2s}
    M = math.ceil(40.0 / (2.0 * math.pi * y)) + 1
    mu = _mobius_table(_C_CORR * v)
    wp = prime_divisors(w)
    for m in range(1, M + 1):
        Y = m * y
        delta_m = _e._row_sum(m * x, Y, s, max(20, math.ceil(4 * Y))) - kappa * Y ** (1 - 2 * s)
        step = m // math.gcd(m, v)
        cm = np.arange(step, _C_CORR + 1, step)
        for p in wp:
            cm = cm[cm % p != 0]
        e = cm * v // m
        parts.append(math.fsum(mu[e] * e.astype(float) ** (-2 * s)) * delta_m)
        tail += abs(delta_m) * (_C_CORR * v / m) ** (1 - 2 * s) / (2 * s - 1)
    pref = (y / w) ** s
    return float(pref * math.fsum(parts)), float(pref * tail)
