"""Selberg transform chain ``h -> g -> q -> k`` and the localized test kernel ``k_T``.

Conventions (``u`` is the point-pair invariant ``|z-w|^2/(Im z Im w)``)::

    g(xi) = (1/2pi) int h(r) e^{-i r xi} dr
    2 q(v) = g(2 asinh(sqrt v))
    k(u)  = -(1/pi) int_{u/4}^inf (v - u/4)^{-1/2} dq(v)

and the inverse used for round trips::

    q(v) = 2 int_0^inf k(4v + 4w^2) dw,   g(xi) = 2 q(sinh^2(xi/2)),   h(r) = 2 int_0^inf g(xi) cos(r xi) dxi
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import DomainError, KernelPropertyError

_GLX, _GLW = np.polynomial.legendre.leggauss(20)


def _gl_nodes(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite 20-point Gauss-Legendre nodes and weights on ``[a, b]``."""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _GLX[None, :]).ravel()
    w = (half[:, None] * _GLW[None, :]).ravel()
    return x, w


# ---------------------------------------------------------------- generic chain


@dataclass(frozen=True)
class RadialProfile:
    """``g`` tabulated on ``[0, xi_max]`` (zero beyond) with a quintic spline."""

    xi_max: float
    spline: object = field(repr=False)
    dspline: object = field(repr=False)

    def __call__(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        out = self.spline(np.minimum(xi, self.xi_max))
        return np.where(xi <= self.xi_max, out, 0.0)

    def derivative(self, xi):
        xi = np.asarray(xi, dtype=float)
        s = np.sign(xi)
        a = np.abs(xi)
        out = self.dspline(np.minimum(a, self.xi_max))
        return np.where(a <= self.xi_max, s * out, 0.0)


def _profile_from_samples(xi: np.ndarray, g: np.ndarray) -> RadialProfile:
    sp = make_interp_spline(xi, g, k=5)
    return RadialProfile(float(xi[-1]), sp, sp.derivative())


def selberg_g(h: Callable, r_max: float, xi_max: float, n_grid: int = 4001, panels: int | None = None) -> RadialProfile:
    """``g(xi) = (1/pi) int_0^{r_max} h(r) cos(r xi) dr`` for even ``h``, tabulated on ``[0, xi_max]``.

    ``r_max`` must be where ``h`` is negligible and ``xi_max`` where ``g`` is.
    """
    panels = panels or max(40, int(r_max * xi_max / 2) + 40)
    r, w = _gl_nodes(0.0, r_max, panels)
    hw = np.asarray(h(r), dtype=float) * w / math.pi
    xi = np.linspace(0.0, xi_max, n_grid)
    g = np.concatenate([np.cos(np.outer(chunk, r)) @ hw for chunk in np.array_split(xi, max(1, n_grid // 500))])
    return _profile_from_samples(xi, g)


@dataclass(frozen=True)
class QProfile:
    """``q(v) = g(2 asinh sqrt v)/2``, zero for ``v > v_max``."""

    g: RadialProfile

    @property
    def v_max(self) -> float:
        return math.sinh(0.5 * self.g.xi_max) ** 2

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        return 0.5 * self.g(2.0 * np.arcsinh(np.sqrt(v)))

    def derivative(self, v):
        # d/dv 2 asinh(sqrt v) = 1/(sqrt v sqrt(1 + v)); g' is odd so the ratio stays finite at 0
        v = np.asarray(v, dtype=float)
        sv = np.sqrt(v)
        return 0.5 * self.g.derivative(2.0 * np.arcsinh(sv)) / (sv * np.sqrt(1.0 + v))


def selberg_q(g: RadialProfile) -> QProfile:
    return QProfile(g)


@dataclass(frozen=True)
class KProfile:
    """``k(u) = -(2/pi) int_0^W q'(u/4 + w^2) dw`` with ``W^2 = v_max - u/4``; zero for ``u >= 4 v_max``."""

    q: QProfile
    panels: int = 40

    @property
    def u_max(self) -> float:
        return 4.0 * self.q.v_max

    def __call__(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros_like(u)
        idx = np.flatnonzero(u < self.u_max)
        t, wt = _gl_nodes(0.0, 1.0, self.panels)
        for chunk in np.array_split(idx, max(1, idx.size // 256)):
            if chunk.size == 0:
                continue
            W = np.sqrt(self.q.v_max - 0.25 * u[chunk])
            w = W[:, None] * t[None, :]
            vals = self.q.derivative(0.25 * u[chunk][:, None] + w * w)
            out[chunk] = -(2.0 / math.pi) * (vals @ wt) * W
        return out

    def by_parts(self, u: float) -> float:
        """Same value via ``k(u) = -(2/pi) int_0^W d/dw[q(u/4+w^2)] / (2w) dw`` integrated by parts.

        ``q(u/4+w^2) - q(u/4)`` over ``w^2``, differentiated analytically, gives
        an independent route for self-consistency checks.
        """
        W = math.sqrt(self.q.v_max - 0.25 * u)
        w, wt = _gl_nodes(0.0, W, self.panels)
        q0 = float(self.q(0.25 * u))
        # int_0^W q'(a + w^2) dw = [(q(a+w^2) - q(a))/(2w)]_0^W + int_0^W (q(a+w^2) - q(a))/(2 w^2) dw
        boundary = (0.0 - q0) / (2.0 * W)
        inner = float(((self.q(0.25 * u + w * w) - q0) / (2.0 * w * w)) @ wt)
        return -(2.0 / math.pi) * (boundary + inner)


def selberg_k(q: QProfile, panels: int = 40) -> KProfile:
    return KProfile(q, panels)


def spherical_forward(k: Callable, u_max: float, r, panels: int = 40) -> np.ndarray:
    """Recover ``h(r)`` from a point-pair kernel supported on ``[0, u_max]``.

    Abel transform ``q(v) = 2 int_0^inf k(4v + 4w^2) dw``, then ``g = 2 q(sinh^2(xi/2))``
    and ``h(r) = 2 int_0^{xi_max} g(xi) cos(r xi) dxi``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    xi_max = 2.0 * math.asinh(math.sqrt(u_max / 4.0))
    xi, wxi = _gl_nodes(0.0, xi_max, panels)
    v = np.sinh(0.5 * xi) ** 2
    t, wt = _gl_nodes(0.0, 1.0, panels)
    W = np.sqrt(np.clip(u_max / 4.0 - v, 0.0, None))
    uu = 4.0 * v[:, None] + 4.0 * (W[:, None] * t[None, :]) ** 2
    vals = np.asarray(k(uu.ravel()), dtype=float).reshape(uu.shape)
    g = 4.0 * W * (vals @ wt)
    h = 2.0 * (np.cos(np.outer(r, xi)) @ (g * wxi))
    return h


def gaussian_round_trip(scale: float = 5.0, r=None) -> tuple[np.ndarray, np.ndarray]:
    """``(h, forward(k(h)))`` for ``h(r) = exp(-(r/scale)^2)`` on ``r``."""
    r = np.linspace(0.0, 20.0, 81) if r is None else np.asarray(r, dtype=float)
    h = lambda x: np.exp(-((x / scale) ** 2))
    xi_max = 2.0 * math.sqrt(42.0) / scale  # g ~ exp(-scale^2 xi^2 / 4) < 1e-18 beyond
    g = selberg_g(h, r_max=scale * math.sqrt(42.0), xi_max=xi_max)
    k = selberg_k(selberg_q(g), panels=8)
    back = spherical_forward(k, k.u_max, r, panels=10)
    resid = np.max(np.abs(back - h(r)) / h(r))
    if resid > 1e-3:
        warnings.warn(f"spherical round trip residual {resid:.2e} exceeds 1e-3", RuntimeWarning)
    return h(r), back


# ---------------------------------------------------------------- localized kernel

A_SUPPORT = math.asinh(0.5)  # psi supported on [-a, a]; then k_T vanishes for u > 4 sinh^2(a) = 1


def _psi(x: np.ndarray) -> np.ndarray:
    t = x / A_SUPPORT
    out = np.zeros_like(x, dtype=float)
    m = np.abs(t) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - t[m] ** 2))
    return out


def _psi_hat(rho: np.ndarray, nodes: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """``int psi(x) cos(rho x) dx`` over the support."""
    x, w = nodes
    pw = _psi(x) * w
    rho = np.atleast_1d(rho)
    return 2.0 * np.concatenate([np.cos(np.outer(c, x)) @ pw for c in np.array_split(rho, max(1, rho.size // 2000))])


def _psi_hat_imag(r: float, nodes) -> float:
    """``int psi(x) cosh(r x) dx``."""
    x, w = nodes
    return 2.0 * float((_psi(x) * np.cosh(r * x)) @ w)


@dataclass(frozen=True)
class KernelPair:
    """Test function ``h_T`` and its point-pair kernel ``k_T`` (support ``[0, u_max]``)."""

    T: float
    u_max: float
    decay_tail_bound: float
    norm: float = field(repr=False)
    xi_table: np.ndarray = field(repr=False)
    k_spline: object = field(repr=False)
    properties: dict = field(default_factory=dict)

    def h(self, r) -> np.ndarray:
        """``h_T(r) = c (psi_T^(r))^2`` with ``psi_T^(r) = (psi^(r - T) + psi^(r + T))/2``."""
        r = np.asarray(r, dtype=float)
        nodes = _psi_nodes(self.T)
        ph = 0.5 * (_psi_hat(r.ravel() - self.T, nodes) + _psi_hat(r.ravel() + self.T, nodes))
        return (self.norm * ph * ph).reshape(r.shape)

    def h_imag(self, r: float) -> float:
        """``h_T(i r)``; nonnegative as the square of a real number."""
        nodes = _psi_nodes(self.T)
        # psi_T^(i r) = int psi(x) cos(T x) cosh(r x) dx
        x, w = nodes
        val = 2.0 * float((_psi(x) * np.cos(self.T * x) * np.cosh(r * x)) @ w)
        return self.norm * val * val

    def k(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        xi0 = 2.0 * np.arcsinh(0.5 * np.sqrt(np.clip(u, 0.0, None)))
        out = self.k_spline(np.minimum(xi0, self.xi_table[-1]))
        return np.where(u < self.u_max, out, 0.0)


def _psi_nodes(T: float):
    return _gl_nodes(0.0, A_SUPPORT, 60 + int(T / 4))


def _g_profile(T: float, norm: float, n_grid: int) -> RadialProfile:
    """``g_T = norm * (psi_T * psi_T)`` on ``[0, 2a]`` by direct convolution quadrature."""
    a = A_SUPPORT
    xi = np.linspace(0.0, 2.0 * a, n_grid)
    panels = 24 + int(T / 3)
    t, wt = _gl_nodes(0.0, 1.0, panels)
    g = np.empty_like(xi)
    for lo in range(0, n_grid, 256):
        chunk = xi[lo : lo + 256]
        # overlap of [-a, a] and [xi - a, xi + a] is [xi - a, a]
        length = 2.0 * a - chunk
        eta = (chunk - a)[:, None] + length[:, None] * t[None, :]
        f = _psi(eta) * np.cos(T * eta) * _psi(chunk[:, None] - eta) * np.cos(T * (chunk[:, None] - eta))
        g[lo : lo + 256] = (f @ wt) * length
    return _profile_from_samples(xi, norm * g)


def build_test_kernel(T: float, check: bool = True, caps: dict | None = None) -> KernelPair:
    """Localized kernel with ``h_T >= 0`` on ``R`` and ``iR``, ``h_T(T) = 1``, ``supp k_T = [0, 1]``.

    ``psi`` is the bump ``exp(-1/(1 - (x/a)^2))`` on ``[-a, a]`` with
    ``a = asinh(1/2)``, ``psi_T(x) = psi(x) cos(T x)``, ``g_T`` is a multiple of
    ``psi_T * psi_T`` (so ``h_T`` is a multiple of ``psi_T^2``), and ``k_T`` is
    tabulated in ``xi_0 = 2 asinh(sqrt(u)/2)``.

    Parameters
    ----------
    check : bool
        Evaluate the four property clauses and raise ``KernelPropertyError``
        if one fails against ``caps`` (``{"iii": C3, "iv": C4}``).
    """
    if not 1.0 <= T <= 512.0:
        raise DomainError(f"T must lie in [1, 512], got {T}")
    nodes = _psi_nodes(T)
    peak = 0.5 * float(_psi_hat(np.array([0.0]), nodes)[0] + _psi_hat(np.array([2.0 * T]), nodes)[0])
    norm = 1.0 / peak**2
    n_grid = 1200 + int(40 * T)
    g = _g_profile(T, norm, n_grid)
    kq = selberg_k(selberg_q(g), panels=30 + int(T / 3))
    xi0 = np.linspace(0.0, 2.0 * A_SUPPORT, n_grid)
    u = 4.0 * np.sinh(0.5 * xi0) ** 2
    kvals = kq(u)
    kvals[-1] = 0.0
    spline = make_interp_spline(xi0, kvals, k=5)
    pair = KernelPair(float(T), 1.0, 0.0, norm, xi0, spline)
    if check:
        props = kernel_properties(pair)
        pair.properties.update(props)
        _enforce(pair, caps or {})
    return pair


def kernel_properties(pair: KernelPair) -> dict:
    """Observed quantities for the four clauses.

    * ``i``: ``min h_T`` over a grid on ``[0, 3T + 60]`` and at ``i r``, ``r in [0, 1/2]``
    * ``ii``: ``min h_T`` over ``[T, T + 1]``
    * ``iii``: ``max |k_T| / T``
    * ``iv``: ``max |k_T(u)| u^{1/4} / T^{1/2}`` over ``u in [T^{-2}, 1]``
    """
    T = pair.T
    r = np.linspace(0.0, 3.0 * T + 60.0, 4000)
    h = pair.h(r)
    hi = min(pair.h_imag(x) for x in np.linspace(0.0, 0.5, 11))
    near = pair.h(np.linspace(T, T + 1.0, 101))
    u_all = np.linspace(0.0, 1.0, 20001)
    k_all = np.abs(pair.k(u_all))
    u4 = np.geomspace(T**-2, 1.0, 4000)
    k4 = np.abs(pair.k(u4)) * u4**0.25 / math.sqrt(T)
    return {
        "i": float(min(h.min(), hi)),
        "ii": float(near.min()),
        "iii": float(k_all.max() / T),
        "iv": float(k4.max()),
    }


def _enforce(pair: KernelPair, caps: dict) -> None:
    p = pair.properties
    failed = []
    if p["i"] < -1e-14:
        failed.append(f"(i) h_T >= 0 violated: min {p['i']:.3g}")
    if p["ii"] < 0.3:
        failed.append(f"(ii) min over [T, T+1] is {p['ii']:.3g} < 0.3")
    if "iii" in caps and p["iii"] > caps["iii"]:
        failed.append(f"(iii) max|k_T|/T = {p['iii']:.4g} exceeds {caps['iii']:.4g}")
    if "iv" in caps and p["iv"] > caps["iv"]:
        failed.append(f"(iv) max|k_T| u^(1/4)/T^(1/2) = {p['iv']:.4g} exceeds {caps['iv']:.4g}")
    if failed:
        raise KernelPropertyError("; ".join(failed))
