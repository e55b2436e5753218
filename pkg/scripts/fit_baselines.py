"""Recompute the fitted constants and write src/eislab/baselines.json.

Run only when a numerical change is intended; the test suite asserts that
observed constants stay within 5% of the committed file.
"""

import json
import math
import pathlib

from eislab import harness
from eislab.amplifier import verify_amplifier_lemma
from eislab.battery import LEVELS
from eislab.counting import lemma_report
from eislab.kernel import build_test_kernel
from eislab.specfun import bessel_envelope_ratios

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "eislab" / "baselines.json"


def main():
    bessel = {"oscillatory": 0.0, "transition": 0.0, "decay": 0.0}
    for t in (50.0, 100.0, 200.0):
        for k, v in bessel_envelope_ratios(t).items():
            bessel[k] = max(bessel[k], v)
    rows = verify_amplifier_lemma([1000, 10000, 100000], 50.0)
    amp_c = max(abs(r.A - r.B) / (math.sqrt(r.N) * math.log(r.N)) for r in rows)
    lemmas = {n: lemma_report(n).sup_ratio for n in ("4.1", "4.2", "4.3")}
    props = [build_test_kernel(T).properties for T in (16.0, 64.0, 256.0)]
    kernel = {k: max(p[k] for p in props) for k in ("iii", "iv")}
    Ts = (16, 32, 64, 128)
    l1 = harness.supnorm_scan_level1(Ts)
    lq = harness.supnorm_scan_levelq(LEVELS, Ts)
    scans = {
        "level1": {str(float(T)): l1.max_ratio(T=float(T)) for T in Ts},
        "levelq_theorem": {str(q): lq.max_ratio(q=q) for q in LEVELS},
        "levelq_sharp": {str(q): harness.sharp_ratio(lq, q) for q in LEVELS},
    }
    data = {
        "bessel_envelope": bessel,
        "amplifier_C": amp_c,
        "counting_lemmas": lemmas,
        "kernel": kernel,
        "scans": scans,
        "young": harness.young_scan(),
        "fe": harness.fe_scan(),
    }
    OUT.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(OUT.read_text())


if __name__ == "__main__":
    main()
