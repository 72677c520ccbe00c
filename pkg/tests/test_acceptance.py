"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -s`` to see the lines, or
``python tests/test_acceptance.py`` for the standalone summary.
"""

import json
import math
import subprocess
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from sectorlab.functions import get_mean, hpow, kantorovich, operator_mean
from sectorlab.harness import collapse_table, default_config, run_campaign, shrink_counterexample
from sectorlab.inequalities import CHECKERS, REMARK_A, REMARK_B, check_m1, check_remark, check_thmK
from sectorlab.linalg import TolerancePolicy, canonical_isometry, cartesian, hadamard, kronecker, matrix_from_json, norm
from sectorlab.maps import parse_map
from sectorlab.sector import draw_sector, random_pd

FIXTURES = Path(__file__).parent / "fixtures"
# criteria state tolerances as 1e-8 * scale; keep the absolute floor negligible
STRICT = TolerancePolicy(abs_tol=1e-15, rel_tol=1e-8)


def report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def _crandn(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def criterion_1():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for n in range(1, 7):
        v = canonical_isometry(n)
        for _ in range(100):
            a, b = _crandn(rng, n), _crandn(rng, n)
            err = norm(v.conj().T @ kronecker(a, b) @ v - hadamard(a, b), "frobenius")
            worst = max(worst, err / (1 + norm(a, "frobenius") * norm(b, "frobenius")))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5
    return report(1, ok, f"max scaled residual {worst:.2e}, {elapsed:.2f}s")


def criterion_2():
    rng = np.random.default_rng(2)
    worst_de = worst_mp = 0.0
    for _ in range(500):
        a, b = _crandn(rng, 3), _crandn(rng, 3)
        ra, sa = cartesian(a)
        rb, sb = cartesian(b)
        lhs = cartesian(hadamard(a, b))[0]
        rhs = hadamard(ra, rb) - hadamard(sa, sb)
        worst_de = max(worst_de, norm(lhs - rhs, "frobenius") / max(norm(lhs, "frobenius"), norm(rhs, "frobenius")))
    for _ in range(500):
        a, b, c, d = (_crandn(rng, 3) for _ in range(4))
        lhs = kronecker(a, b) @ kronecker(c, d)
        rhs = kronecker(a @ c, b @ d)
        worst_mp = max(worst_mp, norm(lhs - rhs, "frobenius") / norm(rhs, "frobenius"))
    ok = worst_de <= 1e-12 and worst_mp <= 1e-12
    return report(2, ok, f"Cartesian identity {worst_de:.2e}, mixed product {worst_mp:.2e} (relative)")


def criterion_3():
    ok = True
    fails = []
    for theta in (0.2, 0.5, 1.0):
        for t in (-1, -0.5, 0.25, 0.5, 0.75, 1):
            tid = "e302" if t >= 0 else "e29"
            rep = run_campaign(default_config(tid, 1300, seed=3, theta=theta, exponent=t, tolerance=STRICT))
            good = rep.hypothesis_hits >= 500 and rep.passes == rep.hypothesis_hits
            if not good:
                fails.append((theta, t, rep.hypothesis_hits, rep.passes))
            ok &= good
    rng = np.random.default_rng(30)
    worst_zero = 0.0
    for t in (-1, -0.5, 0.25, 0.5, 0.75, 1):
        tid = "e302" if t >= 0 else "e29"
        for _ in range(500):
            out = CHECKERS[tid](draw_sector(rng, 3, 0.0), t, 0.0)
            worst_zero = max(worst_zero, max(abs(v) for v in out.links.values()))
    ok &= worst_zero <= 1e-9
    return report(3, ok, f"18 (theta, t) campaigns clean={not fails}, theta=0 max |residual| {worst_zero:.1e}")


PD_CAMPAIGNS = ("chan301", "p1_321", "t1_308", "e41_0", "e41", "e25", "jc_L1", "jc_p1")


def criterion_4():
    start = time.perf_counter()
    bad = []
    for tid in PD_CAMPAIGNS:
        rep = run_campaign(default_config(tid, 500, seed=4, tolerance=STRICT))
        if rep.hypothesis_hits != 500 or rep.passes != 500:
            bad.append(tid)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    return report(4, ok, f"{len(PD_CAMPAIGNS)} campaigns x 500, failures in {bad or 'none'}, {elapsed:.1f}s")


# trials per campaign, sized so every (theorem, theta) clears 200 hits
SECTOR_CAMPAIGNS = {
    "t0_303": 3500, "e305": 3500, "e62": 1000, "e24": 500, "e39": 500, "t4": 1400,
    "m1": 600, "thmK": 1000, "t2": 1000, "t3v1": 1000, "t3v2": 1000,
}  # fmt: skip


def criterion_5():
    ok = True
    rows = []
    for theta in (0.3, 0.6):
        for tid, trials in SECTOR_CAMPAIGNS.items():
            rep = run_campaign(default_config(tid, trials, seed=5, theta=theta, tolerance=STRICT))
            good = rep.hypothesis_hits >= 200 and rep.passes == rep.hypothesis_hits and rep.filter_rate > 0
            ok &= good
            rows.append(f"{tid}@{theta}:{rep.hypothesis_hits}/{rep.trials_run} filter={rep.filter_rate:.2f}")
            if not good:
                rows[-1] += " FAIL"
    print("  " + "; ".join(rows))
    return report(5, ok, f"{len(rows)} sector campaigns")


def _fraction_matrix(obj):
    re = [[Fraction(x) for x in row] for row in obj["re"]]
    im = [[Fraction(x) for x in row] for row in obj["im"]]
    return re, im


def _matches(m, exact):
    re, im = exact
    m = np.asarray(m)
    return all(
        abs(m[i, j].real - float(re[i][j])) <= 1e-14 and abs(m[i, j].imag - float(im[i][j])) <= 1e-14
        for i in range(len(re))
        for j in range(len(re))
    )


def criterion_6():
    gold = json.loads((FIXTURES / "remark_golden.json").read_text())
    out = check_remark()
    v = out.values
    ok = _matches(REMARK_A, _fraction_matrix(gold["A"])) and _matches(REMARK_B, _fraction_matrix(gold["B"]))
    ok &= _matches(matrix_from_json(v["re_phi_a_hadamard_re_phi_b"]), _fraction_matrix(gold["re_phi_a_hadamard_re_phi_b"]))
    ok &= _matches(matrix_from_json(v["re_phi_hadamard"]), _fraction_matrix(gold["re_phi_hadamard"]))
    ok &= np.allclose(v["re_hadamard_spectrum"], [float(Fraction(x)) for x in gold["re_hadamard_spectrum"]], atol=1e-14)
    ok &= np.allclose(v["difference_spectrum"], [float(Fraction(x)) for x in gold["difference_spectrum"]], atol=1e-14)
    ok &= abs(v["difference_norm"] - float(Fraction(gold["difference_norm"]))) <= 1e-14
    ok &= out.passed
    eigs = np.round(v["difference_spectrum"], 12) + 0.0
    return report(6, ok, f"difference spectrum {eigs.tolist()}, equality fails by {v['difference_norm']:g}")


def _pd_kantorovich_oracles(rng, n=3):
    """m1 and Theorem K on Hermitian inputs, recomputed from scratch."""
    m, M = 1.0, 2.0
    a, b = random_pd(rng, n, bounds=(m, M)), random_pd(rng, n, bounds=(m, M))
    ar, gm = get_mean("arithmetic"), get_mean("geometric")
    phi = parse_map("identity", n)
    g = operator_mean(a, b, gm)
    lhs = g + m * M * np.linalg.inv(g)
    m1_oracle = np.linalg.eigvalsh((M + m) * np.eye(n) - (lhs + lhs.conj().T) / 2)[0]
    k_oracle = math.sqrt(kantorovich(m, M)) - norm(hadamard(hpow(g, 0.5), hpow(g, -0.5)))
    got_m1 = check_m1(phi, a, b, m, M, ar, gm, gm, 0.0).residual
    got_k = check_thmK(phi, a, b, m, M, ar, gm, gm, 0.0).residual
    return abs(got_m1 - m1_oracle), abs(got_k - k_oracle)


def criterion_7():
    worst = 0.0
    agree = True
    for seed in range(20):
        for row in collapse_table(seed=seed):
            worst = max(worst, row["gap"])
            agree &= row["pass"] == row["ancestor_pass"]
    rng = np.random.default_rng(7)
    for _ in range(20):
        worst = max(worst, *_pd_kantorovich_oracles(rng))
    ok = worst <= 1e-9 and agree
    return report(7, ok, f"max sector/ancestor gap at theta=0: {worst:.1e}")


def _verify_all_json(out_dir, workers):
    cmd = [sys.executable, "-m", "sectorlab", "verify-all", "--trials", "100", "--seed", "8",
           "--workers", str(workers), "--out", str(out_dir)]  # fmt: skip
    code = subprocess.run(cmd, capture_output=True, text=True).returncode
    blobs = {}
    for path in sorted(Path(out_dir).glob("*.json")):
        d = json.loads(path.read_text())
        d.pop("wall_time")
        blobs[path.name] = json.dumps(d, sort_keys=True, indent=2).encode()
    return code, blobs


def criterion_8():
    with tempfile.TemporaryDirectory() as tmp:
        c1, first = _verify_all_json(Path(tmp) / "a", 1)
        c2, second = _verify_all_json(Path(tmp) / "b", 1)
        c3, parallel = _verify_all_json(Path(tmp) / "c", 4)
    ok = c1 == c2 == c3 == 0 and first and first == second == parallel
    return report(8, ok, f"{len(first)} reports byte-identical across two serial runs and a 4-worker run")


def criterion_9():
    rep = run_campaign(default_config("neg_le17", 1000, seed=9))
    if not rep.counterexamples:
        return report(9, False, "negative control not falsified")
    first = rep.counterexamples[0]
    small = shrink_counterexample("neg_le17", first["witness"])
    dim = matrix_from_json(small["A"]).shape[0]
    still = CHECKERS["neg_le17"](matrix_from_json(small["A"]), matrix_from_json(small["B"]))
    ok = dim <= 2 and still.hypotheses_ok and not still.passed
    return report(9, ok, f"falsified at trial {first['trial_index']}, shrunk to {dim}x{dim}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]  # fmt: skip


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_acceptance(criterion):
    assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
