"""Complex Gamma, Riemann zeta, completed zeta, and scaled K-Bessel of imaginary order.

All routines work in double precision.  ``bessel_k_scaled`` returns
``exp(pi*t/2) * K_{it}(u)``; the unscaled value underflows for ``t`` of a few
hundred, so callers should combine it with other exponentially small factors
in log space (see :func:`xi` with ``log_scale``).
"""

from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numba
import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "complex_gamma",
    "log_gamma",
    "zeta",
    "xi",
    "bessel_k_scaled",
    "kis",
    "ScaledBesselValue",
    "bessel_regime",
    "bessel_envelope",
    "bessel_envelope_ratios",
]

# Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficient set).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)


def _is_nonpositive_integer(s: complex) -> bool:
    return s.imag == 0.0 and s.real <= 0.0 and s.real == math.floor(s.real)


def _log_sin_pi(z: complex) -> complex:
    # log(sin(pi z)) without overflow for large |Im z|; any branch is fine
    # because callers only exponentiate.
    if z.imag < 0:
        return _log_sin_pi(z.conjugate()).conjugate()
    e = cmath.exp(2j * math.pi * z)  # |e| <= 1
    return -1j * math.pi * z + cmath.log((1.0 - e) / -2j)


def log_gamma(s: complex) -> complex:
    """A logarithm of Gamma(s) (branch unspecified; exp of it is exact Gamma)."""
    s = complex(s)
    if _is_nonpositive_integer(s):
        raise PoleError(f"Gamma has a pole at s = {s.real:g}")
    if s.real < 0.5:
        return _LOG_PI - _log_sin_pi(s) - log_gamma(1.0 - s)
    z = s - 1.0
    acc = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        acc += _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def complex_gamma(s: complex) -> complex:
    """Gamma function for complex ``s``.

    Raises
    ------
    PoleError
        If ``s`` is a non-positive integer.
    DomainError
        If the value overflows double precision.
    """
    s = complex(s)
    if s.imag == 0.0 and s.real > 0 and s.real <= 170 and s.real == math.floor(s.real):
        return complex(math.factorial(int(s.real) - 1))
    lg = log_gamma(s)
    if lg.real > 709.0:
        raise DomainError(f"Gamma({s}) overflows double precision; use log_gamma")
    return cmath.exp(lg)


# B_2, B_4, ..., B_24
_BERNOULLI = (
    1 / 6,
    -1 / 30,
    1 / 42,
    -1 / 30,
    5 / 66,
    -691 / 2730,
    7 / 6,
    -3617 / 510,
    43867 / 798,
    -174611 / 330,
    854513 / 138,
    -236364091 / 2730,
)
_EM_COEF = tuple(b / math.factorial(2 * k + 2) for k, b in enumerate(_BERNOULLI))


def zeta(s: complex, n_terms: int | None = None, corrections: int = 12) -> complex:
    """Riemann zeta by Euler-Maclaurin summation.

    Parameters
    ----------
    s : complex
        Argument, ``Re s > -1`` and ``s != 1``.
    n_terms : int, optional
        Head length ``N``; defaults to ``ceil(|Im s|) + 20``.
    corrections : int
        Number of Bernoulli correction terms (at most 12).
    """
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if s.real <= -1:
        raise DomainError(f"zeta is supported for Re s > -1, got {s}")
    if corrections > len(_EM_COEF):
        raise ValueError(f"at most {len(_EM_COEF)} correction terms")
    N = n_terms if n_terms is not None else math.ceil(abs(s.imag)) + 20
    n = np.arange(1, N, dtype=float)
    terms = np.exp(-s * np.log(n))
    head = complex(math.fsum(terms.real), math.fsum(terms.imag))
    Ns = cmath.exp(-s * math.log(N))
    parts = [head, N * Ns / (s - 1.0), 0.5 * Ns]
    poch = s
    power = Ns / N
    for k in range(corrections):
        parts.append(_EM_COEF[k] * poch * power)
        poch *= (s + 2 * k + 1) * (s + 2 * k + 2)
        power /= N * N
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))


def xi(s: complex, log_scale: float = 0.0, reflect: bool = True) -> complex:
    """Completed zeta ``pi^{-s/2} Gamma(s/2) zeta(s)``, times ``exp(log_scale)``.

    With ``reflect`` (the default) the functional equation ``xi(s) = xi(1 - s)``
    is used for ``Re s < 1/2``, so ``xi(-2)`` is returned as ``xi(3)`` without
    touching the Gamma pole.  ``reflect=False`` evaluates the defining product
    directly, which needs ``Re s > -1``.
    """
    s = complex(s)
    if s == 0 or s == 1:
        raise PoleError(f"xi has a pole at s = {s.real:g}")
    if reflect and s.real < 0.5:
        s = 1.0 - s
    lg = log_scale - 0.5 * s * _LOG_PI + log_gamma(0.5 * s)
    return cmath.exp(lg) * zeta(s)


# --------------------------------------------------------------------------
# exp(pi t / 2) K_{it}(u)
#
# K_{it}(u) = 1/2 int_R exp(-u cosh v + i t v) dv.  The contour is moved onto
# steepest-descent paths through the saddle points of -u cosh v + i t v:
#   u >= t : one saddle at v = i*arcsin(t/u); the integrand is real and
#            positive along the path.
#   u <  t : saddles at +-w0 + i*pi/2, cosh w0 = t/u; the contour runs along
#            Im v = pi/2 between them (a bounded oscillatory integral) and
#            leaves along the two conjugate descent paths.
# Along Im v = pi/2 the integrand carries exactly exp(-pi t / 2), which is
# what makes the scaled function computable without cancellation.

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@numba.njit(cache=True, nogil=True)
def _sinh_minus_id(d):
    if abs(d) < 0.1:
        d2 = d * d
        return d * d2 * (1.0 / 6 + d2 * (1.0 / 120 + d2 * (1.0 / 5040 + d2 / 362880.0)))
    return math.sinh(d) - d


@numba.njit(cache=True, nogil=True)
def _wcosh_minus_sinh(w):
    # w cosh w - sinh w
    if w < 0.1:
        w2 = w * w
        return w * w2 * (1.0 / 3 + w2 * (1.0 / 30 + w2 * (1.0 / 840 + w2 / 45360.0)))
    return w * math.cosh(w) - math.sinh(w)


@numba.njit(cache=True, nogil=True)
def _path(t, u, w0, sh0, ch0, d):
    """Exponent and dtheta/dw at w = w0 + d on the descent path."""
    w = w0 + d
    sw = math.sinh(w)
    cw = math.cosh(w)
    if w0 == 0.0:
        if d == 0.0:
            one_minus_s = (u - t) / u
        else:
            one_minus_s = ((u - t) * d + u * _sinh_minus_id(d)) / (u * sw)
    else:
        cdm1 = 2.0 * math.sinh(0.5 * d) ** 2
        one_minus_s = (sh0 * cdm1 + ch0 * _sinh_minus_id(d)) / sw
    s = 1.0 - one_minus_s
    cos_theta = math.sqrt(max(one_minus_s * (1.0 + s), 0.0))
    psi = math.atan2(cos_theta, s)  # pi/2 - theta
    expo = t * psi - u * cw * cos_theta
    if w0 == 0.0:
        num = (t - u * cw) + one_minus_s * u * cw
    else:
        cdm1 = 2.0 * math.sinh(0.5 * d) ** 2
        num = -u * (ch0 * cdm1 + sh0 * math.sinh(d)) + one_minus_s * u * cw
    if cos_theta > 0.0 and sw > 0.0:
        dtheta = num / (u * sw * cos_theta)
    else:
        dtheta = 0.0
    return expo, dtheta


@numba.njit(cache=True, nogil=True)
def _kis_scalar(t, u, glx, glw):
    if t < u or t == 0.0:
        w0 = 0.0
        sh0 = 0.0
        ch0 = 1.0
        chi = 0.0
    else:
        sh0 = math.sqrt((t - u) * (t + u)) / u
        w0 = math.asinh(sh0)
        ch0 = t / u
        chi = u * _wcosh_minus_sinh(w0)

    # oscillatory middle segment: int_0^w0 cos(t w - u sinh w) dw
    seg = 0.0
    if w0 > 0.0:
        npan = int(math.ceil((t - u) * w0 / (2.0 * math.pi))) + 2
        h = w0 / npan
        for j in range(npan):
            a = j * h
            for k in range(glx.shape[0]):
                w = a + 0.5 * h * (glx[k] + 1.0)
                seg += 0.5 * h * glw[k] * math.cos(t * w - u * math.sinh(w))

    # tail length: step out until the exponent has dropped by 50
    e0, _ = _path(t, u, w0, sh0, ch0, 0.0)
    span = 1e-3
    while True:
        e1, _ = _path(t, u, w0, sh0, ch0, span)
        if e1 < e0 - 50.0 or span > 60.0:
            break
        span *= 1.5
    npan = 40
    re_part = 0.0
    im_part = 0.0
    for j in range(npan):
        a = span * (j / npan) ** 2
        b = span * ((j + 1) / npan) ** 2
        hw = 0.5 * (b - a)
        for k in range(glx.shape[0]):
            d = a + hw * (glx[k] + 1.0)
            ex, dth = _path(t, u, w0, sh0, ch0, d)
            f = math.exp(ex) * hw * glw[k]
            re_part += f
            im_part += f * dth
    return seg + math.cos(chi) * re_part - math.sin(chi) * im_part


@numba.njit(cache=True, nogil=True)
def _kis_array(t, u, glx, glw):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        out[i] = _kis_scalar(t, u[i], glx, glw)
    return out


class ScaledBesselValue(NamedTuple):
    value: float
    t: float
    u: float


T_MAX = 512.0


def _check_order(t: float) -> None:
    if not (0.0 <= t <= T_MAX):
        raise DomainError(f"order t must lie in [0, {T_MAX:g}], got {t}")


def kis(t: float, u) -> np.ndarray:
    """Vectorised ``exp(pi t/2) K_{it}(u)`` for an array of arguments ``u > 0``."""
    t = abs(float(t))
    _check_order(t)
    u = np.ascontiguousarray(np.atleast_1d(np.asarray(u, dtype=float)))
    if np.any(~(u > 0)):
        raise DomainError("argument u must be positive")
    return _kis_array(t, u, _GL_X, _GL_W)


def bessel_k_scaled(t: float, u: float) -> ScaledBesselValue:
    """``exp(pi t / 2) K_{it}(u)`` for ``0 <= t <= 512`` and ``u > 0``."""
    t = float(t)
    u = float(u)
    _check_order(t)
    if not u > 0 or not math.isfinite(u):
        raise DomainError(f"argument u must be positive and finite, got {u}")
    return ScaledBesselValue(float(_kis_scalar(t, u, _GL_X, _GL_W)), t, u)


# --------------------------------------------------------------------------
# Three-regime size envelope of exp(pi t/2) K_{it}(u).


def bessel_regime(t: float, u: float, width: float = 1.0) -> str:
    """``"oscillatory"``, ``"transition"`` or ``"decay"`` for ``u`` relative to ``t``.

    The transition zone is ``|u - t| <= width * t^{1/3}``.
    """
    c = width * t ** (1.0 / 3.0)
    if u < t - c:
        return "oscillatory"
    if u <= t + c:
        return "transition"
    return "decay"


def bessel_envelope(t: float, u: float, width: float = 1.0) -> float:
    """Envelope shape (without constant) for ``|exp(pi t/2) K_{it}(u)|``.

    * oscillatory: ``t^{-1/4} (t - u)^{-1/4}``
    * transition: ``t^{-1/3}``
    * decay: ``(u^2 - t^2)^{-1/4} exp(-(sqrt(u^2 - t^2) - t arccos(t/u)))``
    """
    regime = bessel_regime(t, u, width)
    if regime == "oscillatory":
        return t ** -0.25 * (t - u) ** -0.25
    if regime == "transition":
        return t ** (-1.0 / 3.0)
    r = math.sqrt((u - t) * (u + t))
    return r**-0.5 * math.exp(-(r - t * math.acos(t / u)))


def bessel_envelope_ratios(t: float, n_u: int = 3000, width: float = 1.0) -> dict:
    """Largest ``|exp(pi t/2) K_{it}(u)| / envelope`` in each regime for ``u`` in ``(0, 3t]``."""
    u = np.linspace(3.0 * t / n_u, 3.0 * t, n_u)
    vals = np.abs(kis(t, u)).astype(float).tolist()
    out = {"oscillatory": 0.0, "transition": 0.0, "decay": 0.0}
    for ui, vi in zip(u, vals):
        reg = bessel_regime(t, ui, width)
        out[reg] = max(out[reg], float(vi) / bessel_envelope(t, float(ui), width))
    return out
