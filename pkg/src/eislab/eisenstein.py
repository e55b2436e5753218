"""Level-1 real-analytic Eisenstein series.

Conventions
-----------
The Hecke eigenvalue is ``eta_{it}(n) = sum_{ad=n} (a/d)^{it}`` and the Fourier
expansion used here is

    E(z, s) = y^s + phi(s) y^{1-s}
              + (2 sqrt(y) / xi(2s)) sum_{n != 0} eta(|n|, s) K_{s-1/2}(2 pi |n| y) e(nx)

with ``eta(n, s) = sum_{ad=n} (a/d)^{s-1/2}``, so that ``eta(n, 1/2+it) =
eta_{it}(n)``.  On the critical line the K-Bessel factor is taken in scaled
form and its ``exp(-pi T/2)`` is absorbed into ``xi(1+2iT)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
import scipy.special

from .arith import factorize, smallest_prime_factor
from .errors import DomainError, PrecisionLossError
from .modgroup import as_complex, reduce_sl2
from .specfun import T_MAX, bessel_envelope, kis, xi, zeta

N_MAX_LIMIT = 10_000_000
# max |exp(pi t/2) K_{it}(u)| / envelope in the decay regime, fitted on t <= 512
_DECAY_CONSTANT = 1.3


@dataclass(frozen=True)
class SpectralPoint:
    sigma: float
    T: float = 0.0

    @property
    def s(self) -> complex:
        return complex(self.sigma, self.T)

    @classmethod
    def critical(cls, T: float) -> "SpectralPoint":
        return cls(0.5, float(T))


def as_spectral(s) -> SpectralPoint:
    if isinstance(s, SpectralPoint):
        return s
    s = complex(s)
    return SpectralPoint(s.real, s.imag)


@dataclass(frozen=True)
class EisensteinValue:
    total: complex
    main_terms: complex
    remainder: complex
    n_terms: int = 0
    tail_bound: float = 0.0


# ---------------------------------------------------------------- eta


def eta(t: float, n: int) -> float:
    """Hecke eigenvalue ``eta_{it}(n) = sum_{ad=n} (a/d)^{it}``, from the factorization of ``n``."""
    if n < 1:
        raise DomainError(f"eta needs n >= 1, got {n}")
    out = 1.0
    for p, e in factorize(n):
        out *= _eta_prime_power(t * math.log(p), e)
    return out


def _eta_prime_power(theta: float, e: int) -> float:
    # sum_{k=0}^{e} cos((2k - e) theta) = U_e(cos theta)
    c = math.cos(theta)
    u_prev, u = 1.0, 2.0 * c
    if e == 0:
        return 1.0
    for _ in range(e - 1):
        u_prev, u = u, 2.0 * c * u - u_prev
    return u


def eta_complex(n: int, s: complex) -> complex:
    """``eta(n, s) = sum_{ad=n} (a/d)^{s-1/2}`` for arbitrary complex ``s``."""
    alpha = complex(s) - 0.5
    out = 1.0 + 0j
    for p, e in factorize(n):
        x = complex(math.e) ** (alpha * math.log(p)) if alpha else 1.0
        out *= sum(x ** (2 * k - e) for k in range(e + 1))
    return out


@numba.njit(cache=True)
def _eta_table(log_x_re, log_x_im, spf, N):
    # eta(n, s) for n = 1..N with x = p^{s-1/2} = exp(log p * (log_x_re + i log_x_im))
    out = np.zeros(N + 1, dtype=np.complex128)
    out[1] = 1.0
    for n in range(2, N + 1):
        p = spf[n]
        m = n
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        lp = math.log(p)
        x = complex(math.exp(lp * log_x_re) * math.cos(lp * log_x_im),
                    math.exp(lp * log_x_re) * math.sin(lp * log_x_im))
        xi_ = 1.0 / x
        acc = 0.0 + 0.0j
        term = xi_ ** e
        x2 = x * x
        for _ in range(e + 1):
            acc += term
            term *= x2
        out[n] = out[m] * acc
    return out


def eta_table(s, N: int) -> np.ndarray:
    """Array ``a`` with ``a[n] = eta(n, s)`` for ``1 <= n <= N`` (``a[0] = 0``).

    Real on the critical line and for real ``s``; complex otherwise.
    """
    s = complex(s)
    spf = smallest_prime_factor(max(N, 1))
    out = _eta_table(s.real - 0.5, s.imag, spf, N)
    if s.real == 0.5 or s.imag == 0:
        return out.real.copy()
    return out


# ---------------------------------------------------------------- phi


def scattering_phi(s) -> complex:
    """``phi(s) = xi(2(1-s)) / xi(2s)``."""
    s = as_spectral(s).s
    scale = 0.5 * math.pi * abs(s.imag)
    return xi(2.0 * (1.0 - s), log_scale=scale) / xi(2.0 * s, log_scale=scale)


# ---------------------------------------------------------------- Fourier evaluator


def truncation_point(T: float, y: float) -> int:
    T = abs(T)
    return math.ceil((T + 12.0 * T ** (1.0 / 3.0) + 40.0) / (2.0 * math.pi * y))


def _bessel_tail_bound(T: float, y: float, n0: int) -> float:
    """Bound on ``sum_{n > n0} d(n) |scaled K(2 pi n y)|`` using ``d(n) <= 2 sqrt(n)``."""
    n = np.arange(n0 + 1, n0 + 400, dtype=float)
    u = 2.0 * math.pi * n * y
    if T > 0:
        env = np.array([bessel_envelope(T, ui) for ui in u])
    else:
        env = np.exp(-u) / np.sqrt(u)
    terms = _DECAY_CONSTANT * 2.0 * np.sqrt(n) * env
    # geometric remainder after the explicit window
    ratio = terms[-1] / terms[-2] if terms[-2] > 0 else 0.0
    tail = terms[-1] * ratio / (1.0 - ratio) if ratio < 1 else math.inf
    return float(terms.sum() + tail)


def _fourier_critical(x: float, y: float, T: float, tol: float):
    n_max = truncation_point(T, y)
    if n_max > N_MAX_LIMIT:
        raise PrecisionLossError(f"y = {y:g} needs {n_max} Fourier terms (limit {N_MAX_LIMIT})")
    xit = xi(1.0 + 2j * T, log_scale=0.5 * math.pi * T)
    pref = 2.0 * math.sqrt(y) / xit
    tail = 2.0 * abs(pref) * _bessel_tail_bound(T, y, n_max)
    while tail > tol and n_max < N_MAX_LIMIT:
        n_max = min(N_MAX_LIMIT, int(n_max * 1.25) + 1)
        tail = 2.0 * abs(pref) * _bessel_tail_bound(T, y, n_max)
    n = np.arange(1, n_max + 1)
    coef = eta_table(0.5 + 1j * T, n_max)[1:]
    k = kis(T, 2.0 * math.pi * y * n)
    phase = np.cos(2.0 * math.pi * np.mod(n * x, 1.0))
    acc = math.fsum(2.0 * coef * phase * k)
    s = complex(0.5, T)
    main = y**s + scattering_phi(s) * y ** (1.0 - s)
    return main, pref * acc, n_max, tail


def _fourier_real(x: float, y: float, s: float, tol: float):
    nu = s - 0.5
    n_max = truncation_point(0.0, y)
    pref = 2.0 * math.sqrt(y) / xi(2.0 * s).real
    n = np.arange(1, n_max + 1)
    coef = eta_table(s, n_max)[1:]
    u = 2.0 * math.pi * y * n
    k = scipy.special.kv(nu, u)
    phase = np.cos(2.0 * math.pi * np.mod(n * x, 1.0))
    acc = math.fsum(2.0 * coef * phase * k)
    main = y**s + scattering_phi(s).real * y ** (1.0 - s)
    # eta(n, s) <= d(n) n^{s-1/2} and K_nu(u) <= K_nu(u0) exp(-(u-u0)) past the last term
    u_last = u[-1]
    tail = 2.0 * abs(pref) * 2.0 * (n_max + 1) ** (nu + 0.5) * scipy.special.kv(nu, u_last) * math.exp(-2 * math.pi * y)
    tail /= 1.0 - math.exp(-math.pi * y)
    return complex(main), complex(pref * acc), n_max, float(tail)


def eisenstein_fourier(z, s, tol: float = 1e-12) -> EisensteinValue:
    """Evaluate ``E(z, s)`` from its Fourier expansion at the given point (no reduction).

    Parameters
    ----------
    z : UpperHalfPoint or complex
    s : SpectralPoint or complex
        Either ``Re s = 1/2`` with ``0 < |Im s| <= 512``, or real ``s > 1/2``.
    tol : float
        Target bound on the truncation error of the remainder.

    Raises
    ------
    PrecisionLossError
        If ``y`` is so small that more than ``10^7`` terms are needed.
    """
    z = as_complex(z)
    sp = as_spectral(s)
    x, y = z.real, z.imag
    if sp.sigma == 0.5 and sp.T != 0.0:
        T = abs(sp.T)
        if T > T_MAX:
            raise DomainError(f"|T| must be at most {T_MAX:g}, got {sp.T}")
        main, rem, n_terms, tail = _fourier_critical(x, y, T, tol)
        if sp.T < 0:
            # E(z, conj s) = conj E(z, s)
            main, rem = main.conjugate(), rem.conjugate()
    elif sp.T == 0.0 and sp.sigma > 0.5:
        main, rem, n_terms, tail = _fourier_real(x, y, sp.sigma, tol)
    else:
        raise DomainError(f"unsupported spectral point s = {sp.s}")
    return EisensteinValue(main + rem, main, rem, n_terms, tail)


def eisenstein(z, s, tol: float = 1e-12) -> EisensteinValue:
    """``E(z, s)`` evaluated at the ``SL_2(Z)``-reduced point.

    The main terms refer to the original ``y``; the remainder is the
    difference, so ``total`` is what automorphy predicts.
    """
    z = as_complex(z)
    zr, _ = reduce_sl2(z)
    v = eisenstein_fourier(zr, s, tol)
    sc = as_spectral(s).s
    main = z.imag**sc + scattering_phi(sc) * z.imag ** (1.0 - sc)
    return EisensteinValue(v.total, main, v.total - main, v.n_terms, v.tail_bound)


def f_remainder(z, s, tol: float = 1e-12) -> complex:
    """``F(z, s) = E(z, s) - y^s - phi(s) y^{1-s}`` from the Fourier expansion at ``z``."""
    return eisenstein_fourier(z, s, tol).remainder


# ---------------------------------------------------------------- lattice oracle


def _poisson_constant(s: float) -> float:
    # sum_k ((X+k)^2 + Y^2)^{-s} = kappa Y^{1-2s} + O(exp(-2 pi Y))
    return math.sqrt(math.pi) * math.exp(math.lgamma(s - 0.5) - math.lgamma(s))


def _row_sum(X: float, Y: float, s: float, D: int) -> float:
    """``sum_{k in Z} ((X + k)^2 + Y^2)^{-s}`` for real ``s > 1/2``.

    Direct terms for ``|k| <= D``, binomial series in ``Y^2`` against Hurwitz
    zeta values for the two tails (needs ``D + 1 > 2Y``).
    """
    X0 = X - math.floor(X)
    k = np.arange(-D, D + 1, dtype=float)
    direct = math.fsum(((X0 + k) ** 2 + Y * Y) ** (-s))
    tails = 0.0
    y2 = Y * Y
    coef = 1.0
    for m in range(200):
        h = scipy.special.zeta(2 * s + 2 * m, X0 + D + 1) + scipy.special.zeta(2 * s + 2 * m, D + 1 - X0)
        term = coef * y2**m * h
        tails += term
        if abs(term) < 1e-18 * direct:
            break
        coef *= -(s + m) / (m + 1)
    return direct + tails


def eisenstein_lattice(z, s, cutoff: int | None = None) -> float:
    """``E(z, s)`` as the coset sum ``(1/2) sum_{(c,d)=1} y^s / |cz + d|^{2s}`` for real ``s >= 2``.

    Coprimality is removed by Moebius inversion, ``sum_{(c,d)=1} = zeta(2s)^{-1}
    sum_{(c,d)}``.  Each row ``c`` is summed over ``d`` directly near the
    minimum and with Hurwitz-zeta tails beyond.  Rows with ``2 pi c y > 40``
    contribute their Poisson main term only, and are summed in closed form.

    ``cutoff`` raises the number of explicitly summed rows and the direct
    window (used to check self-consistency).
    """
    z = as_complex(z)
    sp = as_spectral(s)
    if sp.T != 0.0 or sp.sigma < 2.0:
        raise DomainError(f"lattice sum needs real s >= 2, got {sp.s}")
    s = sp.sigma
    x, y = z.real, z.imag
    c0 = max(math.ceil(40.0 / (2.0 * math.pi * y)), cutoff or 0)
    acc = []
    for c in range(1, c0 + 1):
        Y = c * y
        D = max(20, math.ceil(4 * Y), cutoff or 0)
        acc.append(_row_sum(c * x, Y, s, D))
    kappa = _poisson_constant(s)
    acc.append(kappa * y ** (1 - 2 * s) * scipy.special.zeta(2 * s - 1, c0 + 1))
    return y**s + y**s * math.fsum(acc) / zeta(s * 2).real
