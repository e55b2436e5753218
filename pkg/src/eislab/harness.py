"""End-to-end assemblies: the amplified pre-trace inequality, two pointwise bounds and sup-norm scans.

Normalisations (checked against the unamplified pre-trace formula with a
Gaussian ``h`` at level 1)::

    sum_{g in PSL_2(Z)} k(u(z, gz)) = (3/pi) h(i/2) + (1/4pi) int_R h(r) |E(z, 1/2+ir)|^2 dr + cusp forms

so the geometric side counts integer matrices modulo ``+-1``.  With the Hecke
operator ``T_l f(z) = l^{-1/2} sum_{det g = l, g mod +-1} f(gz)`` the amplified form reads

    sum_l y_l l^{-1/2} sum_{det g = l}/2 k(u(z, gz)) = spectral terms weighted by A(r) = (sum_p x_p eta_{ir}(p))^2.
"""

from __future__ import annotations

import importlib.metadata
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .amplifier import AmplifierSpec, WindowFunction, build_amplifier
from .counting import u_values
from .eisenstein import SpectralPoint, eisenstein
from .errors import DomainError
from .kernel import KernelPair, _gl_nodes, build_test_kernel
from .levelq import eisenstein_all_cusps
from .modgroup import as_complex, reduce_sl2

EPS = 0.05

# ---------------------------------------------------------------- parallelism


def thread_count() -> int:
    """``EISLAB_THREADS`` if set (positive integer), else the number of logical cores."""
    raw = os.environ.get("EISLAB_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"EISLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"EISLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def pmap(fn, items) -> list:
    """Map ``fn`` over ``items`` on the thread pool; results keep input order."""
    items = list(items)
    n = min(thread_count(), max(1, len(items)))
    if n == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- baselines


def load_baselines(path=None) -> dict:
    """Pinned fitted constants; the packaged file unless ``path`` is given."""
    if path is None:
        with resources.files("eislab").joinpath("baselines.json").open("r", encoding="utf-8") as fh:
            return json.load(fh)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def baseline_drift(observed: float, pinned: float) -> float:
    """Relative change ``|observed - pinned| / pinned``."""
    return abs(observed - pinned) / abs(pinned)


def within_baseline(observed: float, pinned: float, tol: float = 0.05) -> bool:
    return baseline_drift(observed, pinned) <= tol


# ---------------------------------------------------------------- amplified pre-trace


@dataclass(frozen=True)
class GeometricTerm:
    ell: int
    y_ell: float
    kernel_sum: float  # sum over det-l matrices mod +-1 of |k_T(u)|
    n_matrices: int


@dataclass(frozen=True)
class PretraceReport:
    z: complex
    T: float
    N: int
    spectral_lhs: float
    geometric_rhs: float
    margin: float
    truncation_budget: float
    spectral_tail: float = 0.0


def _amplifier(N: int, T: float, amplifier: AmplifierSpec | None, window: WindowFunction | None) -> AmplifierSpec:
    return amplifier if amplifier is not None else build_amplifier(N, T, window)


def geometric_terms(z, kernel: KernelPair, amplifier: AmplifierSpec) -> list[GeometricTerm]:
    """Per-``l`` kernel sums over ``{g : det g = l, u(gz, z) <= u_max}`` modulo ``+-1``."""
    z0, _ = reduce_sl2(as_complex(z))
    out = []
    for ell, y in amplifier.y_items():
        if y == 0.0:
            continue
        u = u_values(z0, ell, kernel.u_max)
        ks = 0.5 * math.fsum(np.abs(kernel.k(u)).tolist()) if u.size else 0.0
        out.append(GeometricTerm(ell, y, ks, int(u.size) // 2))
    return out


def geometric_side(
    z,
    T: float,
    N: int,
    kernel: KernelPair | None = None,
    amplifier: AmplifierSpec | None = None,
    window: WindowFunction | None = None,
) -> float:
    """``sum_l |y_l| l^{-1/2} sum_{g in M(l)/+-1} |k_T(u(gz, z))|``.

    ``z`` is moved into the fundamental domain first; the sum is invariant
    because conjugation by ``SL_2(Z)`` permutes each ``M(l)``.
    """
    kernel = kernel or build_test_kernel(T)
    amp = _amplifier(N, T, amplifier, window)
    terms = geometric_terms(z, kernel, amp)
    return math.fsum(abs(t.y_ell) / math.sqrt(t.ell) * t.kernel_sum for t in terms)


def _geometric_budget(terms: list[GeometricTerm], kernel: KernelPair) -> float:
    # quintic table interpolation of k_T is accurate to 1e-8 of its peak
    kmax = float(np.max(np.abs(kernel.k(np.linspace(0.0, kernel.u_max, 2001)))))
    return math.fsum(abs(t.y_ell) / math.sqrt(t.ell) * t.n_matrices * 1e-8 * kmax for t in terms)


def amplifier_weight(amplifier: AmplifierSpec, r) -> np.ndarray:
    """``A(r) = (sum_p x_p 2cos(r log p))^2`` by direct prime sum."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    logp = np.log(amplifier.primes.astype(float))
    s = np.cos(np.outer(r, logp)) @ (2.0 * amplifier.x)
    return s * s


def _abs_e_squared(z: complex, r: np.ndarray) -> np.ndarray:
    # E(z, 1/2) vanishes identically since phi(1/2) = -1
    return np.array([abs(eisenstein(z, SpectralPoint(0.5, float(t))).total) ** 2 if t != 0.0 else 0.0 for t in r])


@dataclass(frozen=True)
class SpectralLower:
    value: float
    quad_error: float
    tail_budget: float


def spectral_lower_detail(
    z,
    T: float,
    N: int,
    window_r: float = 6.0,
    kernel: KernelPair | None = None,
    amplifier: AmplifierSpec | None = None,
    window: WindowFunction | None = None,
) -> SpectralLower:
    """Continuous-spectrum part over ``|r - T| <= window_r`` (and its mirror ``r -> -r``).

    The integrand ``h_T(r) A(r) |E(z, 1/2+ir)|^2 / 4pi`` is even in ``r``, so
    the integral over ``[T - W, T + W]`` (clipped at 0) is doubled.  The
    quadrature error is the change under panel doubling; the tail budget
    estimates the discarded mass from the ``h_T`` tail times the largest
    sampled ``A |E|^2`` there, with a factor 4 of headroom.
    """
    kernel = kernel or build_test_kernel(T)
    amp = _amplifier(N, T, amplifier, window)
    z = as_complex(z)
    lo, hi = max(0.0, T - window_r), T + window_r

    def integral(panels):
        r, w = _gl_nodes(lo, hi, panels)
        f = kernel.h(r) * amplifier_weight(amp, r) * _abs_e_squared(z, r) / (4.0 * math.pi)
        return 2.0 * math.fsum((f * w).tolist())

    panels = max(2, math.ceil(hi - lo))
    coarse = integral(panels)
    fine = integral(2 * panels)

    # tail: [0, lo] and [hi, hi + 60]
    segs = [(hi, hi + 60.0)] + ([(0.0, lo)] if lo > 0.0 else [])
    h_mass = 0.0
    peak = 0.0
    for a, b in segs:
        r, w = _gl_nodes(a, b, max(2, math.ceil(b - a)))
        h_mass += float(kernel.h(r) @ w)
        rs = np.linspace(a, b, 9)
        peak = max(peak, float(np.max(amplifier_weight(amp, rs) * _abs_e_squared(z, rs))))
    tail = 2.0 * h_mass * 4.0 * peak / (4.0 * math.pi)
    return SpectralLower(fine, abs(fine - coarse), tail)


def spectral_lower(z, T: float, N: int, window_r: float = 6.0, **kw) -> float:
    return spectral_lower_detail(z, T, N, window_r, **kw).value


def pretrace_check(
    z,
    T: float,
    N: int,
    kernel: KernelPair | None = None,
    amplifier: AmplifierSpec | None = None,
    window: WindowFunction | None = None,
    window_r: float = 6.0,
) -> PretraceReport:
    """Check ``spectral_lower <= geometric_side + budget``; raises ``AssertionError`` with diagnostics."""
    if not 1.0 <= T <= 64.0:
        raise DomainError(f"T must lie in [1, 64], got {T}")
    if not 2 <= N <= 101:
        raise DomainError(f"N must lie in [2, 101], got {N}")
    kernel = kernel or build_test_kernel(T)
    amp = _amplifier(N, T, amplifier, window)
    terms = geometric_terms(z, kernel, amp)
    rhs = math.fsum(abs(t.y_ell) / math.sqrt(t.ell) * t.kernel_sum for t in terms)
    spec = spectral_lower_detail(z, T, N, window_r, kernel=kernel, amplifier=amp)
    budget = spec.quad_error + _geometric_budget(terms, kernel)
    margin = rhs + budget - spec.value
    rep = PretraceReport(complex(z), float(T), int(N), spec.value, rhs, margin, budget, spec.tail_budget)
    if margin < 0.0:
        raise AssertionError(f"pre-trace inequality violated: {rep}")
    return rep


# ---------------------------------------------------------------- pointwise bounds


def _check_upper(z: complex) -> None:
    if z.imag < 1.0:
        raise DomainError(f"need Im z >= 1, got {z.imag}")


@dataclass(frozen=True)
class YoungRow:
    lhs: float
    rhs: float
    ratio: float
    quad_error: float


def young_integral_check(z, T: float) -> YoungRow:
    """``|E(z, 1/2+iT)|^2`` against ``y log^6 T + log^5 T int_{|r| <= 4 log T} |E(z, 1/2+iT+ir)|^2 dr``."""
    z = as_complex(z)
    _check_upper(z)
    if T < 2.0:
        raise DomainError(f"need T >= 2, got {T}")
    L = 4.0 * math.log(T)

    def integral(panels):
        r, w = _gl_nodes(T - L, T + L, panels)
        return math.fsum((_abs_e_squared(z, r) * w).tolist())

    panels = max(2, math.ceil(L / 2.0))
    coarse, fine = integral(panels), integral(2 * panels)
    lhs = abs(eisenstein(z, SpectralPoint(0.5, T)).total) ** 2
    lt = math.log(T)
    rhs = z.imag * lt**6 + lt**5 * fine
    return YoungRow(lhs, rhs, lhs / rhs, abs(fine - coarse))


def fe_envelope(y: float, t: float, eps: float = EPS) -> float:
    return math.sqrt(t / y) * math.log(t) ** 2 + t ** (1.0 / 6.0 + eps)


def bound_via_fe_check(z, t: float, eps: float = EPS) -> float:
    """``|F(z, 1/2+it)| / ((t/y)^{1/2} log^2 t + t^{1/6+eps})``."""
    z = as_complex(z)
    _check_upper(z)
    if t < 8.0:
        raise DomainError(f"need t >= 8, got {t}")
    F = eisenstein(z, SpectralPoint(0.5, t)).remainder
    return abs(F) / fe_envelope(z.imag, t, eps)


def upper_grid(n_y: int = 8, n_x: int = 5, y_max: float = 40.0) -> list[complex]:
    """Points with ``y`` log-uniform in ``[1, y_max]`` and ``x`` uniform in ``[-1/2, 1/2]``."""
    return [complex(x, y) for y in np.geomspace(1.0, y_max, n_y) for x in np.linspace(-0.5, 0.5, n_x)]


def young_scan(T_list=(8, 32, 128), zs=None) -> float:
    zs = upper_grid(3, 2, 8.0) if zs is None else zs
    rows = pmap(lambda c: young_integral_check(c[1], c[0]), [(T, z) for T in T_list for z in zs])
    return max(r.ratio for r in rows)


def fe_scan(t_list=(8, 32, 128, 512), zs=None) -> float:
    zs = upper_grid() if zs is None else zs
    return max(pmap(lambda c: bound_via_fe_check(c[1], c[0]), [(t, z) for t in t_list for z in zs]))


# ---------------------------------------------------------------- sup-norm scans


@dataclass(frozen=True)
class ScanRow:
    T: float
    q: int
    v: int
    x: float
    y: float
    abs_F: float
    envelope: float
    ratio: float


CSV_HEADER = "T,q,v,x,y,abs_F,envelope,ratio"


@dataclass
class ScanReport:
    rows: list[ScanRow]
    metadata: dict = field(default_factory=dict)

    def max_ratio(self, **match) -> float:
        sel = [r.ratio for r in self.rows if all(getattr(r, k) == v for k, v in match.items())]
        return max(sel) if sel else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(
                ",".join(
                    [_g(r.T), str(r.q), str(r.v), _g(r.x), _g(r.y), _g(r.abs_F), _g(r.envelope), _g(r.ratio)]
                )
                + "\n"
            )
        return buf.getvalue()


def _g(v: float) -> str:
    return f"{v:.12g}"


def scan_grid(T: float, n_y: int = 24, n_x: int = 13) -> list[tuple[float, float]]:
    """``(x, y)`` with ``y`` log-uniform on ``[T^{-3/4}, T^{3/4}]`` and ``x`` uniform on ``[-1/2, 1/2]``."""
    ys = np.geomspace(T**-0.75, T**0.75, n_y)
    xs = np.linspace(-0.5, 0.5, n_x)
    return [(float(x), float(y)) for y in ys for x in xs]


def envelope_level1(T: float, y: float) -> float:
    return y**-0.5 + T**0.375


def envelope_levelq(q: int, T: float, y: float, eps: float = EPS) -> float:
    return q ** (-0.5 + eps) * (y**-0.5 + T ** (0.375 + eps))


def envelope_sharp(q: int, T: float, eps: float = EPS) -> float:
    return q ** (-0.5 + eps) * T ** (0.375 + eps)


def _sorted(rows: list[ScanRow]) -> list[ScanRow]:
    return sorted(rows, key=lambda r: (r.q, r.T, r.v, r.x, r.y))


def supnorm_scan_level1(T_list=(16, 32, 64, 128), n_y: int = 24, n_x: int = 13) -> ScanReport:
    """``|F(z, 1/2+iT)| / (y^{-1/2} + T^{3/8})`` over the grid; points with ``y < 1`` are reduced before evaluation."""
    for T in T_list:
        if not 8 <= T <= 512:
            raise DomainError(f"T must lie in [8, 512], got {T}")
    cells = [(float(T), x, y) for T in T_list for x, y in scan_grid(T, n_y, n_x)]

    def cell(c):
        T, x, y = c
        F = abs(eisenstein(complex(x, y), SpectralPoint(0.5, T)).remainder)
        env = envelope_level1(T, y)
        return ScanRow(T, 1, 1, x, y, F, env, F / env)

    rows = _sorted(pmap(cell, cells))
    meta = {"T_list": [float(T) for T in T_list], "n_y": n_y, "n_x": n_x, "envelope": "y^-1/2 + T^3/8"}
    return ScanReport(rows, meta)


def supnorm_scan_levelq(q_list=(2, 3, 5, 6, 7, 10), T_list=(16, 32, 64, 128), n_y: int = 24, n_x: int = 13,
                        eps: float = EPS) -> ScanReport:
    """``|F_a(z, 1/2+iT)|`` against ``q^{-1/2+eps}(y^{-1/2} + T^{3/8+eps})`` for every cusp ``a = 1/v``."""
    for T in T_list:
        if not 8 <= T <= 128:
            raise DomainError(f"T must lie in [8, 128], got {T}")
    cells = [(int(q), float(T), x, y) for q in q_list for T in T_list for x, y in scan_grid(T, n_y, n_x)]

    def cell(c):
        q, T, x, y = c
        vals = eisenstein_all_cusps(q, complex(x, y), SpectralPoint(0.5, T))
        env = envelope_levelq(q, T, y, eps)
        return [ScanRow(T, q, v, x, y, abs(val.remainder), env, abs(val.remainder) / env) for v, val in vals.items()]

    rows = _sorted([r for part in pmap(cell, cells) for r in part])
    meta = {
        "q_list": [int(q) for q in q_list],
        "T_list": [float(T) for T in T_list],
        "n_y": n_y,
        "n_x": n_x,
        "eps": eps,
        "envelope": "q^(-1/2+eps) (y^-1/2 + T^(3/8+eps))",
    }
    return ScanReport(rows, meta)


def sharp_ratio(report: ScanReport, q: int, eps: float = EPS) -> float:
    """Largest ``|F_infinity| / (q^{-1/2+eps} T^{3/8+eps})`` over rows at the cusp ``infinity`` with ``y >= 1/q``."""
    sel = [r.abs_F / envelope_sharp(q, r.T, eps) for r in report.rows if r.q == q and r.v == q and r.y >= 1.0 / q]
    return max(sel) if sel else float("nan")


def growth_exponents(report: ScanReport, q: int = 1) -> list[float]:
    """``log2(max ratio at 2T / max ratio at T)`` for consecutive doublings in the report."""
    Ts = sorted({r.T for r in report.rows if r.q == q})
    m = {T: report.max_ratio(q=q, T=T) for T in Ts}
    return [math.log2(m[b] / m[a]) for a, b in zip(Ts, Ts[1:]) if b == 2 * a]


# ---------------------------------------------------------------- amplifier length sweep


@dataclass(frozen=True)
class SweepRow:
    N: int
    geometric: float
    amplifier_min: float
    implied_bound: float


def n_sweep(z, T: float, N_list, kernel: KernelPair | None = None) -> list[SweepRow]:
    """Bound on ``int_T^{T+1} |E|^2`` implied by the inequality, for each amplifier length.

    ``implied_bound = 4 pi geometric / min_{[T, T+1]} h_T A``.  The minimiser is
    reported against ``T^{1/4}``; nothing is asserted.
    """
    kernel = kernel or build_test_kernel(T)
    r = np.linspace(T, T + 1.0, 201)
    rows = []
    for N in N_list:
        amp = build_amplifier(int(N), T)
        geo = geometric_side(z, T, int(N), kernel=kernel, amplifier=amp)
        amin = float(np.min(kernel.h(r) * amplifier_weight(amp, r)))
        rows.append(SweepRow(int(N), geo, amin, 4.0 * math.pi * geo / amin if amin > 0 else math.inf))
    return rows


# ---------------------------------------------------------------- report helpers


def versions() -> dict:
    out = {"python": f"{sys.version_info.major}.{sys.version_info.minor}"}
    for name in ("eislab", "numpy", "scipy", "numba"):
        try:
            out[name] = importlib.metadata.version(name)
        except importlib.metadata.PackageNotFoundError:
            out[name] = "unknown"
    return out


def json_report(inputs: dict, outputs: dict, error_budget: dict) -> str:
    """Single JSON object with the four standard keys; deterministic key order."""
    obj = {"inputs": inputs, "outputs": outputs, "error_budget": error_budget, "versions": versions()}
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if hasattr(o, "__dataclass_fields__"):
        return _jsonable(asdict(o))
    return o
