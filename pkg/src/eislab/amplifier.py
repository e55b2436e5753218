"""Prime-supported amplifier and the sums ``A_N`` and ``B_N``.

``x_p = w(p/N) log p eta_{it}(p)`` on primes ``p`` in ``[N, 2N]``.  Squaring
out ``|sum_n x_n eta(n)|^2`` with the Hecke relation gives weights ``y_l``
supported on ``l = 1`` and products of two such primes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
import scipy.integrate

from .arith import factorize, primes_in
from .eisenstein import eta_table
from .specfun import zeta

# ---------------------------------------------------------------- window


@dataclass(frozen=True)
class WindowFunction:
    """A smooth weight supported in ``[1, 2]`` with values in ``[0, 1]``."""

    func: Callable[[np.ndarray], np.ndarray]
    smoothness: str = "C-infinity"
    name: str = "bump"

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=float))


def _bump(r: np.ndarray) -> np.ndarray:
    u = 2.0 * r - 3.0
    inside = np.abs(u) < 1.0
    out = np.zeros_like(r, dtype=float)
    ui = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
    return out if out.ndim else float(out)


def default_window() -> WindowFunction:
    """``w(r) = exp(1 - 1/(1 - (2r - 3)^2))`` on ``(1, 2)``, zero outside."""
    return WindowFunction(_bump)


def mellin_w(s, window: WindowFunction | None = None) -> complex:
    """Mellin transform ``int_1^2 w(y) y^{s-1} dy``.

    With ``y = e^u`` the integrand becomes ``w(e^u) e^{sigma u}`` against
    ``cos(tu)`` and ``sin(tu)``, which QUADPACK handles with its oscillatory rule.
    """
    window = window or default_window()
    s = complex(s)
    a, b = 0.0, math.log(2.0)

    def f(u):
        return float(window(np.array(math.exp(u)))) * math.exp(s.real * u)

    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=400)
    if s.imag == 0.0:
        return complex(scipy.integrate.quad(f, a, b, **opts)[0], 0.0)
    re = scipy.integrate.quad(f, a, b, weight="cos", wvar=s.imag, **opts)[0]
    im = scipy.integrate.quad(f, a, b, weight="sin", wvar=s.imag, **opts)[0]
    return complex(re, im)


# ---------------------------------------------------------------- amplifier


@dataclass
class AmplifierSpec:
    """Amplifier coefficients for length ``N`` centred at ``t``.

    ``x`` is stored densely over ``primes``; the ``y`` weights are produced on
    demand because their support has about ``pi(2N)^2 / 2`` entries.
    """

    N: int
    t: float
    window: WindowFunction
    primes: np.ndarray
    x: np.ndarray
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {int(p): i for i, p in enumerate(self.primes)}

    def x_coefficient(self, n: int) -> float:
        i = self._index.get(n)
        return 0.0 if i is None else float(self.x[i])

    @property
    def y_1(self) -> float:
        return math.fsum(self.x * self.x)

    def y_coefficient(self, ell: int) -> float:
        if ell == 1:
            return self.y_1
        f = factorize(ell)
        if len(f) == 1 and f[0][1] == 2:
            return self.x_coefficient(f[0][0]) ** 2
        if len(f) == 2 and f[0][1] == f[1][1] == 1:
            return 2.0 * self.x_coefficient(f[0][0]) * self.x_coefficient(f[1][0])
        return 0.0

    def y_items(self) -> Iterator[tuple[int, float]]:
        """Nonzero ``(l, y_l)`` pairs, ``l = 1`` first, then ``p1 <= p2`` lexicographically."""
        yield 1, self.y_1
        P = [int(p) for p in self.primes]
        for i, p in enumerate(P):
            xp = float(self.x[i])
            if xp == 0.0:
                continue
            yield p * p, xp * xp
            for j in range(i + 1, len(P)):
                xq = float(self.x[j])
                if xq != 0.0:
                    yield p * P[j], 2.0 * xp * xq


def build_amplifier(N: int, t: float, window: WindowFunction | None = None) -> AmplifierSpec:
    """Sieve primes in ``[N, 2N]`` and set ``x_p = w(p/N) log(p) 2cos(t log p)``."""
    if not 2 <= N <= 10**6:
        raise ValueError(f"N must lie in [2, 10^6], got {N}")
    window = window or default_window()
    P = primes_in(N, 2 * N)
    assert P.size, f"no primes in [{N}, {2 * N}]"
    logp = np.log(P.astype(float))
    x = window(P / N) * logp * 2.0 * np.cos(t * logp)
    return AmplifierSpec(N, float(t), window, P, x)


def a_sum(N: int, t: float, r: float, window: WindowFunction | None = None) -> float:
    """``A_N(t, r) = sum_p w(p/N) log(p) eta_{it}(p) eta_{ir}(p)``."""
    window = window or default_window()
    P = primes_in(N, 2 * N).astype(float)
    logp = np.log(P)
    return math.fsum(window(P / N) * logp * 4.0 * np.cos(t * logp) * np.cos(r * logp))


def b_coefficient(p: int, k: int, t: float, r: float) -> float:
    """``b(p^k) = log p (2cos(k(t+r)log p) + 2cos(k(t-r)log p) - 2[k even])``."""
    L = math.log(p)
    return L * (2.0 * math.cos(k * (t + r) * L) + 2.0 * math.cos(k * (t - r) * L) - (2.0 if k % 2 == 0 else 0.0))


def b_sum(N: int, t: float, r: float, window: WindowFunction | None = None) -> float:
    """``B_N(t, r) = sum_n w(n/N) b(n)`` over prime powers ``n`` in ``[N, 2N]``."""
    window = window or default_window()
    parts = []
    kmax = int(math.log(2 * N) / math.log(2))
    for k in range(1, kmax + 1):
        lo = math.ceil(N ** (1.0 / k))
        hi = math.floor((2 * N) ** (1.0 / k)) + 1
        for p in primes_in(max(lo - 1, 2), hi):
            n = int(p) ** k
            if N <= n <= 2 * N:
                parts.append(float(window(np.array(n / N))) * b_coefficient(int(p), k, t, r))
    return math.fsum(parts)


# ---------------------------------------------------------------- Ramanujan identity


def _divisor_square_tail(sigma: float, x: float) -> float:
    """Bound for ``sum_{n > x} d(n)^2 n^{-sigma}``.

    Partial summation from ``sum_{n <= u} d(n)^2 <= u (1 + log u)^3`` gives
    ``sigma int_x^inf u^{-sigma} (1 + log u)^3 du``, evaluated in closed form.
    """
    a = sigma - 1.0
    L = 1.0 + math.log(x)
    poly = L**3 / a + 3.0 * L**2 / a**2 + 6.0 * L / a**3 + 6.0 / a**4
    return sigma * x ** (-a) * poly


def ramanujan_check(t: float, r: float, sigma: float, n_max: int) -> tuple[complex, complex, float, float]:
    """Compare ``sum_{n <= n_max} eta_{it}(n) eta_{ir}(n) n^{-s}`` with the zeta quotient.

    Returns ``(lhs, rhs, gap, tail_bound)`` with ``s = sigma`` real.
    """
    if sigma < 2:
        raise ValueError(f"sigma must be at least 2, got {sigma}")
    et = eta_table(0.5 + 1j * t, n_max)[1:]
    er = eta_table(0.5 + 1j * r, n_max)[1:]
    n = np.arange(1, n_max + 1, dtype=float)
    lhs = math.fsum(et * er * n**-sigma)
    s = complex(sigma)
    rhs = (
        zeta(s + 1j * (t + r)) * zeta(s - 1j * (t - r)) * zeta(s + 1j * (t - r)) * zeta(s - 1j * (t + r))
    ) / zeta(2 * s)
    return complex(lhs), rhs, abs(lhs - rhs), _divisor_square_tail(sigma, n_max)


# ---------------------------------------------------------------- lemma report


@dataclass(frozen=True)
class AmplifierRow:
    N: int
    A: float
    B: float
    main: float
    ratio: float


def verify_amplifier_lemma(
    N_list, t: float, r: float | None = None, window: WindowFunction | None = None
) -> list[AmplifierRow]:
    """Rows ``(N, A_N, B_N, 2N w~(1), A_N / (2N w~(1)))`` for each ``N``."""
    window = window or default_window()
    r = t if r is None else r
    w1 = mellin_w(1.0, window).real
    rows = []
    for N in N_list:
        A = a_sum(N, t, r, window)
        B = b_sum(N, t, r, window)
        main = 2.0 * N * w1
        rows.append(AmplifierRow(int(N), A, B, main, A / main))
    return rows


def lemma_window(N: int, delta: float = 0.1) -> float:
    """Largest ``|t - r|`` allowed by the lemma's hypothesis, ``(log N)^{-1-delta}``."""
    return math.log(N) ** (-1.0 - delta)
