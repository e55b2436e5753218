"""Command line interface ``eislab``."""

from __future__ import annotations

import argparse
import sys

from .errors import EislabError


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _grid(text: str) -> tuple[int, int]:
    """``"24x13"`` -> ``(n_y, n_x)``."""
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid spec must look like 24x13, got {text!r}") from None


def load_config(path: str | None) -> dict:
    """Optional TOML file with ``[grid]`` (``n_y``, ``n_x``, ``T``) and ``[baselines]`` (``path``)."""
    if not path:
        return {}
    try:
        import tomllib
    except ModuleNotFoundError:  # Python 3.10
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _emit(inputs: dict, outputs: dict, budget: dict | None = None) -> None:
    from .harness import json_report

    sys.stdout.write(json_report(inputs, outputs, budget or {}))


# ---------------------------------------------------------------- subcommands


def cmd_eval(a) -> int:
    from .eisenstein import SpectralPoint, eisenstein
    from .levelq import cusp, eisenstein_cusp

    z = complex(a.x, a.y)
    s = SpectralPoint(a.sigma, a.T)
    if a.q == 1:
        v = eisenstein(z, s)
        out = {"E": v.total, "F": v.remainder, "n_terms": v.n_terms}
        budget = {"fourier_tail": v.tail_bound}
    else:
        c = cusp(a.q, a.cusp_v if a.cusp_v is not None else a.q)
        v = eisenstein_cusp(a.q, c, z, s)
        out = {"E": v.total, "F": v.remainder, "delta": v.delta_a, "phi": v.phi_a}
        budget = {}
    inputs = {"q": a.q, "cusp_v": a.cusp_v if a.q > 1 else 1, "x": a.x, "y": a.y, "T": a.T, "sigma": a.sigma}
    if a.json:
        _emit(inputs, out, budget)
    else:
        E = out["E"]
        print(f"E = {E.real:.15g} {'+' if E.imag >= 0 else '-'} {abs(E.imag):.15g}i")
    return 0


def cmd_scan(a, cfg) -> int:
    from . import harness

    grid = cfg.get("grid", {})
    n_y, n_x = a.grid or (grid.get("n_y", 24), grid.get("n_x", 13))
    T_list = a.T or grid.get("T", [16, 32, 64, 128])
    if a.q:
        rep = harness.supnorm_scan_levelq(a.q, T_list, n_y, n_x)
    else:
        rep = harness.supnorm_scan_level1(T_list, n_y, n_x)
    text = rep.to_csv()
    if a.out:
        with open(a.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        qs = sorted({r.q for r in rep.rows})
        _emit({**rep.metadata, "out": a.out}, {"rows": len(rep.rows), "max_ratio": {str(q): rep.max_ratio(q=q) for q in qs}})
    else:
        sys.stdout.write(text)
    return 0


def cmd_count(a) -> int:
    from .counting import CountQuery, enumerate_matrices, parabolic_fast, u_value

    q = CountQuery(complex(a.x, a.y), a.ell, a.delta)
    res = parabolic_fast(q) if a.fast_parabolic else enumerate_matrices(q)
    out = {"m_star": res.m_star, "m_u": res.m_u, "m_p": res.m_p, "total": res.total}
    if a.list:
        out["matrices"] = [{"matrix": list(m.as_tuple()), "u": u_value(m, q.z)} for m in res.matrices]
    _emit({"x": a.x, "y": a.y, "ell": a.ell, "delta": a.delta, "fast_parabolic": a.fast_parabolic}, out)
    return 0


def cmd_amplifier(a) -> int:
    from .amplifier import verify_amplifier_lemma

    rows = verify_amplifier_lemma(a.N, a.T, a.T + a.offset)
    out = {"rows": [{"N": r.N, "A": r.A, "B": r.B, "main": r.main, "ratio": r.ratio} for r in rows]}
    _emit({"N": a.N, "T": a.T, "offset": a.offset}, out)
    return 0


def cmd_pretrace(a) -> int:
    from .harness import pretrace_check

    r = pretrace_check(complex(a.x, a.y), a.T, a.N)
    out = {"spectral_lhs": r.spectral_lhs, "geometric_rhs": r.geometric_rhs, "margin": r.margin, "pass": True}
    _emit({"x": a.x, "y": a.y, "T": a.T, "N": a.N}, out,
          {"truncation": r.truncation_budget, "spectral_tail": r.spectral_tail})
    return 0


def cmd_kernel(a, cfg) -> int:
    from .harness import load_baselines
    from .kernel import build_test_kernel

    caps = None
    if a.selftest:
        pinned = load_baselines(cfg.get("baselines", {}).get("path"))["kernel"]
        caps = {k: 1.05 * v for k, v in pinned.items()}
    K = build_test_kernel(a.T, caps=caps)
    _emit({"T": a.T, "selftest": a.selftest}, {"properties": K.properties, "h_at_T": float(K.h([a.T])[0])},
          {"kernel_tail": K.decay_tail_bound})
    return 0


def cmd_selftest(a, cfg) -> int:
    from .battery import run_selftest
    from .harness import load_baselines

    report, ok = run_selftest(full=not a.quick, baselines=load_baselines(cfg.get("baselines", {}).get("path")))
    if a.out:
        with open(a.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eislab", description="Eisenstein series sup-norm laboratory.")
    p.add_argument("--config", help="TOML file with [grid] and [baselines] sections")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="single E(z, s) or E_a(z, s) value")
    e.add_argument("--q", type=int, default=1)
    e.add_argument("--cusp-v", type=int, default=None, help="cusp 1/v (default: infinity, v = q)")
    e.add_argument("--x", type=float, required=True)
    e.add_argument("--y", type=float, required=True)
    e.add_argument("--T", type=float, default=0.0)
    e.add_argument("--sigma", type=float, default=0.5)
    e.add_argument("--json", action="store_true")

    s = sub.add_parser("scan", help="sup-norm scan, CSV output")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--level1", action="store_true")
    g.add_argument("--q", type=_ints, help="comma-separated levels")
    s.add_argument("--T", type=_floats, help="comma-separated spectral parameters")
    s.add_argument("--grid", type=_grid, help="n_y x n_x, e.g. 24x13")
    s.add_argument("--out")

    c = sub.add_parser("count", help="matrices of determinant l with u(gz, z) <= delta")
    c.add_argument("--x", type=float, required=True)
    c.add_argument("--y", type=float, required=True)
    c.add_argument("--ell", type=int, required=True)
    c.add_argument("--delta", type=float, required=True)
    c.add_argument("--fast-parabolic", action="store_true")
    c.add_argument("--list", action="store_true")

    m = sub.add_parser("amplifier", help="A_N, B_N and the main-term ratio")
    m.add_argument("--N", type=_ints, required=True)
    m.add_argument("--T", type=float, required=True)
    m.add_argument("--offset", type=float, default=0.0)

    r = sub.add_parser("pretrace", help="amplified pre-trace inequality check")
    r.add_argument("--x", type=float, required=True)
    r.add_argument("--y", type=float, required=True)
    r.add_argument("--T", type=float, required=True)
    r.add_argument("--N", type=int, required=True)

    k = sub.add_parser("kernel", help="test kernel properties")
    k.add_argument("--T", type=float, required=True)
    k.add_argument("--selftest", action="store_true", help="enforce the pinned constants")

    t = sub.add_parser("selftest", help="run the acceptance battery")
    t.add_argument("--quick", action="store_true", help="reduced grids")
    t.add_argument("--out")
    return p


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        cfg = load_config(a.config)
        if a.command == "eval":
            return cmd_eval(a)
        if a.command == "scan":
            return cmd_scan(a, cfg)
        if a.command == "count":
            return cmd_count(a)
        if a.command == "amplifier":
            return cmd_amplifier(a)
        if a.command == "pretrace":
            return cmd_pretrace(a)
        if a.command == "kernel":
            return cmd_kernel(a, cfg)
        return cmd_selftest(a, cfg)
    except (EislabError, ValueError) as exc:
        print(f"eislab: error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"eislab: check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
