"""Measurement routines behind the acceptance criteria and ``eislab selftest``.

Each ``criterion_*`` function returns a plain dict of measured values plus a
``pass`` flag; thresholds are module constants so the CLI and the test suite
agree on them.  Random inputs come from fixed seeds.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.special

from . import counting, harness
from .amplifier import verify_amplifier_lemma
from .arith import is_square
from .counting import CountQuery, enumerate_matrices, lemma_report, parabolic_fast
from .eisenstein import SpectralPoint, eisenstein_fourier, eisenstein_lattice, eta, scattering_phi
from .kernel import build_test_kernel, gaussian_round_trip
from .levelq import constant_term, cusps, eisenstein_cusp, eisenstein_cusp_direct
from .modgroup import IntegerMatrix2, apply_exact, fricke
from .specfun import bessel_envelope_ratios, kis

TOL_ORACLE = 1e-8
TOL_AUTOMORPHY = 1e-6
TOL_UNITARITY = 1e-10
TOL_HECKE = 1e-12
TOL_K0 = 1e-9
TOL_LEVELQ = 1e-8
TOL_FRICKE = 1e-6
TOL_DELTA = 1e-12
TOL_ROUND_TRIP = 1e-4
TOL_BASELINE = 0.05
GROWTH_PER_DOUBLING = 0.1

LEVELS = (2, 3, 5, 6, 7, 10)
PRETRACE_CASES = [(z, T, N) for z in (1j, 2j, 0.3 + 0.8j) for T in (10.0, 20.0) for N in (11, 29)]


def random_points_in_d(n: int, seed: int, y_max: float = 3.0) -> list[complex]:
    """``n`` points of the fundamental domain with ``Im z <= y_max``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(math.sqrt(3) / 2, y_max))
        if abs(z) >= 1.0:
            out.append(z)
    return out


def random_sl2(rng: np.random.Generator, bound: int = 12) -> IntegerMatrix2:
    """A random ``SL_2(Z)`` matrix with ``1 <= c <= bound``."""
    while True:
        c = int(rng.integers(1, bound + 1))
        d = int(rng.integers(-bound, bound + 1))
        if math.gcd(c, d) != 1:
            continue
        a = (pow(d, -1, c) if c > 1 else 0) + c * int(rng.integers(-2, 3))  # a d = 1 mod c
        b = (a * d - 1) // c
        return IntegerMatrix2(a, b, c, d)


# ---------------------------------------------------------------- 1-4


def criterion_oracle(n: int = 20) -> dict:
    worst = 0.0
    for s in (2, 3):
        for z in random_points_in_d(n, seed=1):
            a = eisenstein_fourier(z, s).total.real
            b = eisenstein_lattice(z, s)
            worst = max(worst, abs(a - b) / abs(b))
    return {"max_rel_error": worst, "threshold": TOL_ORACLE, "pass": worst <= TOL_ORACLE}


def criterion_automorphy(n: int = 50, T_list=(5.0, 30.0, 100.0)) -> dict:
    rng = np.random.default_rng(2)
    pairs = []
    zs = random_points_in_d(4 * n, seed=3, y_max=1.6)
    i = 0
    while len(pairs) < n:
        z = zs[i % len(zs)]
        i += 1
        g = random_sl2(rng)
        w = apply_exact(g, z)
        if w.imag >= 0.25:
            pairs.append((z, w))
    worst = 0.0
    for T in T_list:
        s = SpectralPoint(0.5, T)
        for z, w in pairs:
            a = eisenstein_fourier(z, s).total
            b = eisenstein_fourier(w, s).total
            worst = max(worst, abs(a - b) / abs(a))
    return {"max_rel_deviation": worst, "threshold": TOL_AUTOMORPHY, "pass": worst <= TOL_AUTOMORPHY}


def criterion_unitarity() -> dict:
    dev = max(abs(abs(scattering_phi(complex(0.5, T))) - 1.0) for T in np.geomspace(1.0, 512.0, 50))
    return {"max_deviation": dev, "threshold": TOL_UNITARITY, "pass": dev <= TOL_UNITARITY}


def criterion_hecke(n_max: int = 200, t_list=(0.0, 13.7, 101.3)) -> dict:
    worst = 0.0
    for t in t_list:
        e = [0.0] + [eta(t, n) for n in range(1, n_max * n_max + 1)]
        for m in range(1, n_max + 1):
            for n in range(m, n_max + 1):
                g = math.gcd(m, n)
                rhs = math.fsum(e[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
                worst = max(worst, abs(e[m] * e[n] - rhs))
    return {"max_abs_error": worst, "threshold": TOL_HECKE, "pass": worst <= TOL_HECKE}


# ---------------------------------------------------------------- 5


def criterion_bessel(baselines: dict) -> dict:
    # scipy's K0 is an independent reference; the test suite uses a series oracle
    k0 = max(abs(float(kis(0.0, np.array([u]))[0]) - float(scipy.special.k0(u))) / float(scipy.special.k0(u))
             for u in (0.1, 1.0, 10.0))
    fitted = {"oscillatory": 0.0, "transition": 0.0, "decay": 0.0}
    for t in (50.0, 100.0, 200.0):
        for k, v in bessel_envelope_ratios(t).items():
            fitted[k] = max(fitted[k], v)
    pinned = baselines["bessel_envelope"]
    ok = k0 <= TOL_K0 and all(harness.within_baseline(fitted[k], pinned[k], TOL_BASELINE) for k in fitted)
    return {"k0_rel_error": k0, "fitted": fitted, "pinned": pinned, "pass": ok}


# ---------------------------------------------------------------- 6


def criterion_levelq(q_list=LEVELS) -> dict:
    z_list = [0.2 + 1.1j, -0.35 + 0.6j]
    lowering = 0.0
    fr = 0.0
    dl = 0.0
    s = SpectralPoint(0.5, 20.0)
    for q in q_list:
        for c in cusps(q):
            for z in z_list:
                d, _ = eisenstein_cusp_direct(q, c, z, 2)
                v = eisenstein_cusp(q, c, z, 2).total.real
                lowering = max(lowering, abs(v - d) / abs(d))
            z = 0.1 + 0.7j
            a = eisenstein_cusp(q, c, fricke(q, z), s).total
            b = eisenstein_cusp(q, c.dual(), z, s).total
            fr = max(fr, abs(a - b) / abs(b))
            for sp in (s, SpectralPoint(0.5, 3.0), 2.0):
                ys, _ = constant_term(c, sp)
                dl = max(dl, abs(ys - (1.0 if c.is_infinity else 0.0)))
    ok = lowering <= TOL_LEVELQ and fr <= TOL_FRICKE and dl <= TOL_DELTA
    return {"lowering_vs_direct": lowering, "fricke": fr, "delta_identity": dl, "pass": ok}


# ---------------------------------------------------------------- 7


def criterion_amplifier(baselines: dict, t: float = 50.0) -> dict:
    rows = verify_amplifier_lemma([1000, 10000, 100000], t)
    dev = [abs(r.ratio - 1.0) for r in rows]
    C = max(abs(r.A - r.B) / (math.sqrt(r.N) * math.log(r.N)) for r in rows)
    pinned = baselines["amplifier_C"]
    ok = dev[-1] <= 0.1 and dev[0] > dev[1] > dev[2] and harness.within_baseline(C, pinned, TOL_BASELINE)
    return {"ratio_deviation": dev, "C": C, "pinned_C": pinned, "pass": ok}


# ---------------------------------------------------------------- 8


def parabolic_queries(n: int, seed: int = 4) -> list[CountQuery]:
    """Random queries with square ``l = m^2``, ``m <= 8``."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        m = int(rng.integers(1, 9))
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.3, 2.5))
        out.append(CountQuery(z, m * m, float(rng.uniform(0.01, 0.95))))
    return out


def criterion_counting(baselines: dict, n_queries: int = 100) -> dict:
    mismatch = 0
    for qy in parabolic_queries(n_queries):
        full = {m for m in enumerate_matrices(qy).matrices if counting.classify(m, qy.ell) == "parabolic"}
        fast = set(parabolic_fast(qy).matrices)
        mismatch += full != fast
    mu_one = 0
    mp_nonsquare = 0
    for z in random_points_in_d(10, seed=5) + [0.3 + 0.4j, 0.05 + 0.2j]:
        for d in (0.01, 0.3, 0.9):
            mu_one += enumerate_matrices(CountQuery(z, 1, d), keep_matrices=False).m_u
            for ell in (2, 3, 6, 12):
                if not is_square(ell):
                    mp_nonsquare += enumerate_matrices(CountQuery(z, ell, d), keep_matrices=False).m_p
    sups = {name: lemma_report(name).sup_ratio for name in ("4.1", "4.2", "4.3")}
    pinned = baselines["counting_lemmas"]
    ok = (
        mismatch == 0
        and mu_one == 0
        and mp_nonsquare == 0
        and all(math.isfinite(v) and harness.within_baseline(v, pinned[k], TOL_BASELINE) for k, v in sups.items())
    )
    return {
        "parabolic_mismatches": mismatch,
        "m_u_at_l1": mu_one,
        "m_p_nonsquare": mp_nonsquare,
        "lemma_sups": sups,
        "pinned": pinned,
        "pass": ok,
    }


# ---------------------------------------------------------------- 9


def criterion_kernel(baselines: dict | None, T_list=(16.0, 64.0, 256.0)) -> dict:
    """Round trip plus the four clauses; ``baselines=None`` skips the regression comparison."""
    h, back = gaussian_round_trip()
    rt = float(np.max(np.abs(back - h) / h))
    pinned = baselines["kernel"] if baselines else None
    caps = {k: v * (1.0 + TOL_BASELINE) for k, v in pinned.items()} if pinned else None
    props = {str(T): build_test_kernel(T, caps=caps).properties for T in T_list}
    fitted = {k: max(p[k] for p in props.values()) for k in ("iii", "iv")}
    ok = (
        rt <= TOL_ROUND_TRIP
        and all(p["i"] >= 0.0 and p["ii"] >= 0.3 for p in props.values())
        and (pinned is None or within_all(fitted, pinned))
    )
    return {"gaussian_round_trip": rt, "properties": props, "fitted": fitted, "pinned": pinned, "pass": ok}


# ---------------------------------------------------------------- 10


def criterion_pretrace(cases=PRETRACE_CASES) -> dict:
    kernels = {T: build_test_kernel(T) for T in sorted({c[1] for c in cases})}
    reports = harness.pmap(lambda c: harness.pretrace_check(c[0], c[1], c[2], kernel=kernels[c[1]]), cases)
    return {
        "cases": [
            {"z": r.z, "T": r.T, "N": r.N, "spectral": r.spectral_lhs, "geometric": r.geometric_rhs,
             "margin": r.margin, "budget": r.truncation_budget}
            for r in reports
        ],
        "pass": all(r.margin >= 0.0 for r in reports),
    }


# ---------------------------------------------------------------- 11


def criterion_scans(baselines: dict | None, T_list=(16, 32, 64, 128), q_list=LEVELS, n_y: int = 24, n_x: int = 13) -> dict:
    lvl1 = harness.supnorm_scan_level1(T_list, n_y, n_x)
    per_T = {str(float(T)): lvl1.max_ratio(T=float(T)) for T in T_list}
    growth = harness.growth_exponents(lvl1)
    lq = harness.supnorm_scan_levelq(q_list, T_list, n_y, n_x)
    theorem = {str(q): lq.max_ratio(q=q) for q in q_list}
    sharp = {str(q): harness.sharp_ratio(lq, q) for q in q_list}
    pin = baselines["scans"] if baselines else None
    finite = all(math.isfinite(v) for d in (per_T, theorem, sharp) for v in d.values())
    ok1 = finite and (pin is None or within_all(per_T, pin["level1"]))
    okg = all(g < GROWTH_PER_DOUBLING for g in growth)
    okq = finite and (pin is None or (within_all(theorem, pin["levelq_theorem"]) and within_all(sharp, pin["levelq_sharp"])))
    return {
        "level1_max_ratio": per_T,
        "level1_growth_per_doubling": growth,
        "levelq_theorem": theorem,
        "levelq_sharp": sharp,
        "pass_level1": ok1,
        "pass_growth": okg,
        "pass_levelq": okq,
        "pass": ok1 and okg and okq,
        "_reports": (lvl1, lq),
    }


def within_all(observed: dict, pinned: dict) -> bool:
    return all(k in pinned and harness.within_baseline(v, pinned[k], TOL_BASELINE) for k, v in observed.items())


# ---------------------------------------------------------------- selftest


def run_selftest(full: bool = True, baselines: dict | None = None) -> tuple[str, bool]:
    """Run the battery and return ``(json_report, all_passed)``.

    ``full=False`` shrinks the expensive grids (and then skips the regression
    comparison for the kernel and scan constants, whose pins refer to the full
    grids).  The report carries no timings, so it is byte-identical across
    runs and thread counts.
    """
    baselines = baselines or harness.load_baselines()
    if full:
        plan = {
            "c01_oracle": lambda: criterion_oracle(),
            "c02_automorphy": lambda: criterion_automorphy(),
            "c03_unitarity": criterion_unitarity,
            "c04_hecke": lambda: criterion_hecke(),
            "c05_bessel": lambda: criterion_bessel(baselines),
            "c06_levelq": lambda: criterion_levelq(),
            "c07_amplifier": lambda: criterion_amplifier(baselines),
            "c08_counting": lambda: criterion_counting(baselines),
            "c09_kernel": lambda: criterion_kernel(baselines),
            "c10_pretrace": lambda: criterion_pretrace(),
            "c11_scans": lambda: criterion_scans(baselines),
        }
    else:
        plan = {
            "c01_oracle": lambda: criterion_oracle(5),
            "c02_automorphy": lambda: criterion_automorphy(8),
            "c03_unitarity": criterion_unitarity,
            "c04_hecke": lambda: criterion_hecke(60),
            "c05_bessel": lambda: criterion_bessel(baselines),
            "c06_levelq": lambda: criterion_levelq((2, 6)),
            "c07_amplifier": lambda: criterion_amplifier(baselines),
            "c08_counting": lambda: criterion_counting(baselines, 20),
            "c09_kernel": lambda: criterion_kernel(None, (16.0,)),
            "c10_pretrace": lambda: criterion_pretrace(PRETRACE_CASES[:1]),
            "c11_scans": lambda: criterion_scans(None, (16, 32), (2, 6), 8, 5),
        }
    outputs = {}
    for name, fn in plan.items():
        res = fn()
        res.pop("_reports", None)
        outputs[name] = res
    cases = outputs["c10_pretrace"]["cases"]
    budget = {
        "pretrace_truncation_max": max(c["budget"] for c in cases),
        "kernel_tail": 0.0,
        "kernel_interpolation_rel": 1e-8,
        "fourier_tail_tol": 1e-12,
        "baseline_tolerance_rel": TOL_BASELINE,
    }
    inputs = {"mode": "full" if full else "quick", "levels": list(LEVELS), "seeds": [1, 2, 3, 4, 5]}
    ok = all(v["pass"] for v in outputs.values())
    outputs["all_pass"] = ok
    return harness.json_report(inputs, outputs, budget), ok
