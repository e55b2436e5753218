import math

import numpy as np
import pytest

from eislab import harness
from eislab.amplifier import AmplifierSpec, WindowFunction, build_amplifier, default_window
from eislab.counting import u_values
from eislab.eisenstein import SpectralPoint, eisenstein
from eislab.errors import DomainError
from eislab.kernel import _gl_nodes, build_test_kernel, selberg_g, selberg_k, selberg_q
from eislab.levelq import cusps, eisenstein_all_cusps
from eislab.modgroup import fricke


@pytest.fixture(scope="module")
def k10():
    return build_test_kernel(10.0)


def _matrices_at_i(ell: int, u_max: float):
    """All integer matrices of determinant ``l`` with ``u(gi, i) <= u_max``.

    At ``z = i``, ``u = (a^2 + b^2 + c^2 + d^2)/l - 2``.
    """
    B = int(math.isqrt(int(ell * (u_max + 2)))) + 1
    r = np.arange(-B, B + 1)
    b, c = np.meshgrid(r, r, indexing="ij")
    out = []
    for a in range(-B, B + 1):
        if a == 0:
            sel = -b * c == ell
            for bb, cc in zip(b[sel], c[sel]):
                for d in range(-B, B + 1):
                    out.append((0, int(bb), int(cc), d))
            continue
        num = ell + b * c
        sel = num % a == 0
        for bb, cc, nn in zip(b[sel], c[sel], num[sel]):
            out.append((a, int(bb), int(cc), int(nn) // a))
    us = [(a * a + b * b + c * c + d * d) / ell - 2.0 for a, b, c, d in out]
    return [u for u in us if u <= u_max]


def test_geometric_side_independent_path(k10):
    T, N = 10.0, 11
    w = default_window()
    primes = [p for p in range(N, 2 * N + 1) if all(p % d for d in range(2, p))]
    x = {p: float(w(np.array(p / N))) * math.log(p) * 2.0 * math.cos(T * math.log(p)) for p in primes}
    total = 0.0
    for i, p in enumerate(primes):
        for j, q in enumerate(primes):
            if j < i:
                continue
            terms = [(1, x[p] ** 2), (p * p, x[p] ** 2)] if p == q else [(p * q, 2.0 * x[p] * x[q])]
            for ell, y in terms:
                if y == 0.0:
                    continue
                us = np.array(_matrices_at_i(ell, 1.0))
                total += abs(y) / math.sqrt(ell) * 0.5 * float(np.sum(np.abs(k10.k(us))))
    # the l = 1 weight collects sum_p x_p^2, one piece per diagonal (p, p)
    got = harness.geometric_side(1j, T, N, kernel=k10)
    assert abs(got - total) <= 1e-10 * total


def test_geometric_side_identity_lower_bound(k10):
    amp = build_amplifier(11, 10.0)
    got = harness.geometric_side(1j, 10.0, 11, kernel=k10, amplifier=amp)
    assert got >= amp.y_1 * 2.0 * abs(float(np.ravel(k10.k(0.0))[0]))


def test_geometric_side_bilinear_in_window(k10):
    w = default_window()
    w2 = WindowFunction(lambda r: 2.0 * w(r), name="double")
    a = harness.geometric_side(1j, 10.0, 11, kernel=k10)
    b = harness.geometric_side(1j, 10.0, 11, kernel=k10, window=w2)
    assert abs(b - 4.0 * a) <= 1e-12 * b


def test_geometric_side_invariant_under_sl2(k10):
    a = harness.geometric_side(0.3 + 0.8j, 10.0, 11, kernel=k10)
    b = harness.geometric_side(complex(0.3 + 1.0, 0.8), 10.0, 11, kernel=k10)
    assert abs(a - b) <= 1e-12 * a


def test_degenerate_amplifier_gives_zero(k10):
    amp = build_amplifier(11, 10.0)
    zero = AmplifierSpec(amp.N, amp.t, amp.window, amp.primes, np.zeros_like(amp.x))
    rep = harness.pretrace_check(1j, 10.0, 11, kernel=k10, amplifier=zero)
    assert rep.geometric_rhs == 0.0 and rep.spectral_lhs == 0.0


def test_spectral_integrand_nonnegative(k10):
    amp = build_amplifier(11, 10.0)
    r = np.linspace(0.0, 30.0, 61)
    f = k10.h(r) * harness.amplifier_weight(amp, r) * harness._abs_e_squared(1j, r)
    assert np.all(f >= 0.0)


def test_spectral_window_within_tail_budget(k10):
    a = harness.spectral_lower_detail(1j, 10.0, 11, 6.0, kernel=k10)
    b = harness.spectral_lower_detail(1j, 10.0, 11, 8.0, kernel=k10)
    assert 0.0 <= b.value - a.value <= a.tail_budget


def test_pretrace_domain():
    with pytest.raises(DomainError):
        harness.pretrace_check(1j, 100.0, 11)
    with pytest.raises(DomainError):
        harness.pretrace_check(1j, 10.0, 500)


def test_unamplified_pretrace_identity():
    # h(r) = exp(-r^2/4): cusp forms contribute below 1e-10 at these points
    h = lambda r: np.exp(-np.asarray(r) ** 2 / 4.0)
    k = selberg_k(selberg_q(selberg_g(h, r_max=25.0, xi_max=7.0)))
    for z in (1j, -0.1 + 2.0j):
        geo = 0.5 * math.fsum(np.ravel(k(u_values(z, 1, k.u_max))))
        r, w = _gl_nodes(1e-9, 13.0, 26)
        e2 = harness._abs_e_squared(z, r)
        spec = 3.0 / math.pi * math.exp(1.0 / 16.0) + 2.0 * float((h(r) * e2) @ w) / (4.0 * math.pi)
        assert abs(geo - spec) < 1e-9 * spec


def test_young_rhs_dominates_first_term():
    r = harness.young_integral_check(1.5j, 32.0)
    assert r.rhs >= 1.5 * math.log(32.0) ** 6
    assert r.quad_error <= 1e-4 * r.rhs
    with pytest.raises(DomainError):
        harness.young_integral_check(0.5j, 32.0)


def test_fe_check_decay_regime_and_monotone_envelope():
    # y > t: the Fourier tail is negligible
    F = eisenstein(complex(0.2, 60.0), SpectralPoint(0.5, 20.0)).remainder
    assert abs(F) < 1e-6
    env = [harness.fe_envelope(3.0, t) for t in (8, 16, 32, 64, 128)]
    assert all(a < b for a, b in zip(env, env[1:]))
    assert harness.bound_via_fe_check(1.3j, 40.0) > 0.0


def test_scan_grid_and_sorting():
    rep = harness.supnorm_scan_level1((16,), 4, 3)
    assert len(rep.rows) == 12
    keys = [(r.q, r.T, r.v, r.x, r.y) for r in rep.rows]
    assert keys == sorted(keys)
    ys = sorted({r.y for r in rep.rows})
    assert abs(ys[0] - 16**-0.75) < 1e-15 and abs(ys[-1] - 16**0.75) < 1e-12
    for r in rep.rows:
        assert r.ratio == r.abs_F / r.envelope


def test_scan_csv_format():
    text = harness.supnorm_scan_level1((16,), 2, 2).to_csv()
    lines = text.split("\n")
    assert lines[0] == "T,q,v,x,y,abs_F,envelope,ratio"
    assert text.endswith("\n") and "\r" not in text
    assert len(lines[1].split(",")) == 8


def test_levelq_q1_matches_level1():
    a = harness.supnorm_scan_level1((16,), 3, 3)
    b = harness.supnorm_scan_levelq((1,), (16,), 3, 3)
    assert [r.abs_F for r in a.rows] == [r.abs_F for r in b.rows]


@pytest.mark.parametrize("q", [2, 6, 10])
def test_fricke_symmetry_of_scan_values(q):
    s = SpectralPoint(0.5, 16.0)
    z = 0.17 + 0.45j
    here = eisenstein_all_cusps(q, fricke(q, z), s)
    there = eisenstein_all_cusps(q, z, s)
    for c in cusps(q):
        assert abs(abs(here[c.v].total) - abs(there[c.dual().v].total)) < 1e-6


def test_scan_thread_determinism(monkeypatch):
    monkeypatch.setenv("EISLAB_THREADS", "1")
    a = harness.supnorm_scan_levelq((6,), (16,), 3, 3).to_csv()
    monkeypatch.setenv("EISLAB_THREADS", "4")
    b = harness.supnorm_scan_levelq((6,), (16,), 3, 3).to_csv()
    assert a == b


def test_thread_count_validation(monkeypatch):
    monkeypatch.setenv("EISLAB_THREADS", "0")
    with pytest.raises(ValueError):
        harness.thread_count()
    monkeypatch.setenv("EISLAB_THREADS", "3")
    assert harness.thread_count() == 3


def test_n_sweep_reports_rows(k10):
    rows = harness.n_sweep(1j, 10.0, [5, 11], kernel=k10)
    assert [r.N for r in rows] == [5, 11]
    assert all(r.geometric > 0 and r.implied_bound > 0 for r in rows)


def test_baselines_file_loads():
    b = harness.load_baselines()
    assert set(b) >= {"bessel_envelope", "amplifier_C", "counting_lemmas", "kernel", "scans"}
    assert harness.within_baseline(1.04, 1.0) and not harness.within_baseline(1.06, 1.0)


def test_young_and_fe_sups_match_baselines():
    b = harness.load_baselines()
    assert harness.within_baseline(harness.fe_scan(), b["fe"])
    assert harness.within_baseline(harness.young_scan(), b["young"])
