"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected and printed in the pytest terminal summary; running
this file directly with ``python3 tests/test_acceptance.py`` prints them too.
"""
import time

import numpy as np
import pytest

from qp1qc.oracle import affine_oracle, check_solution, gen_instance, ray_diverges
from qp1qc.pencil import pencil_interval, sdc_certificate
from qp1qc.slater import slater_holds
from qp1qc.solver import classify_and_solve, dual_value

from conftest import EX31_A, EX31_B, example_51, example_52, example_53

RESULTS = []
ORACLE_CLASSES = ("any", "no_slater", "unbounded", "unattained", "attained_interval", "attained_singleton")


def report(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def fixture_solutions():
    p51, p52, p53 = example_51(), example_52(), example_53()
    classify_and_solve(p51)  # warm up imports and caches before timing
    s51, t51 = _timed(classify_and_solve, p51)
    return {"51": (p51, s51, t51), "52": (p52, classify_and_solve(p52)), "53": (p53, classify_and_solve(p53))}


@pytest.fixture(scope="module")
def oracle_run():
    rows = []
    t0 = time.perf_counter()
    for k in range(300):
        n = 2 + k % 2
        cls = ORACLE_CLASSES[(k // 2) % len(ORACLE_CLASSES)]
        p = gen_instance(1000 + k, n, cls)
        sol = classify_and_solve(p)
        rows.append((p, sol, check_solution(p, sol)))
    return rows, time.perf_counter() - t0


def test_criterion_1_fixtures(fixture_solutions):
    p51, s51, t51 = fixture_solutions["51"]
    _, s52 = fixture_solutions["52"]
    _, s53 = fixture_solutions["53"]
    iv31 = pencil_interval(EX31_A, EX31_B)
    sdc31 = sdc_certificate(EX31_A, EX31_B)
    checks = {
        "5.1 unbounded": s51.status == "unbounded" and ray_diverges(p51, s51.ray),
        "5.1 < 10 ms": t51 < 0.010,
        "5.2 unattained": s52.status == "unattained" and abs(s52.value) <= 1e-9 and abs(s52.sigma) <= 1e-9,
        "5.3 attained": s53.status == "attained" and abs(s53.value) <= 1e-9 and abs(s53.x[1]) <= 1e-8,
        "3.1 singleton": iv31.is_singleton and abs(iv31.sigma) <= 1e-9,
        "3.1 not SDC": sdc31.status == "not_sdc",
    }
    failed = [k for k, v in checks.items() if not v]
    report(1, not failed, f"paper fixtures ({t51 * 1e3:.2f} ms for 5.1)" + (f"; failed {failed}" if failed else ""))


def _sdc_pair(rng, n=4):
    while True:
        C = rng.standard_normal((n, n))
        if np.linalg.cond(C) <= 1e3:
            break
    Ci = np.linalg.inv(C)
    return Ci.T @ np.diag(rng.standard_normal(n)) @ Ci, Ci.T @ np.diag(rng.standard_normal(n)) @ Ci


def test_criterion_2_sdc_round_trip():
    rng = np.random.default_rng(2)
    good = 0
    t0 = time.perf_counter()
    for _ in range(100):
        A, B = _sdc_pair(rng)
        res = sdc_certificate(A, B)
        if res.status != "sdc":
            continue
        s = max(1.0, np.linalg.norm(A), np.linalg.norm(B))
        CA, CB = res.C.T @ A @ res.C, res.C.T @ B @ res.C
        off = max(np.linalg.norm(CA - np.diag(np.diag(CA))), np.linalg.norm(CB - np.diag(np.diag(CB))))
        good += off <= 1e-7 * s
    dt = time.perf_counter() - t0
    report(2, good >= 99 and dt < 5.0, f"SDC round trip {good}/100 in {dt:.2f} s")


def test_criterion_3_pencil_membership():
    rng = np.random.default_rng(3)
    violations = 0
    margin = 1e-6
    for k in range(100):
        n = 1 + k % 6
        M, N = rng.standard_normal((n, n)), rng.standard_normal((n, n))
        A, B = M + M.T, N + N.T
        if k % 2:  # make half of the pairs definite somewhere
            L = rng.standard_normal((n, n))
            A = L @ L.T + 0.1 * np.eye(n) - rng.uniform(0, 2) * B
        iv = pencil_interval(A, B)
        samples = list(rng.uniform(-20, 20, 30))
        for e in (iv.lo, iv.hi):
            if np.isfinite(e):
                samples += list(e + rng.uniform(-1e-3, 1e-3, 10))
        samples += list(rng.uniform(-100, 100, 50 - len(samples)))
        for s in samples:
            lmin = np.linalg.eigvalsh(A + s * B)[0]
            scale = max(1.0, np.linalg.norm(A + s * B, 2))
            m = margin * (1 + abs(s))
            if iv.contains(s, margin=m) and lmin < -1e-9 * scale:
                violations += 1
            if (iv.is_empty or s < iv.lo - m or s > iv.hi + m) and lmin >= 0:
                violations += 1
    report(3, violations == 0, f"pencil membership, {violations} violations over 100 pairs x 50 samples")


def test_criterion_4_oracle_equivalence(oracle_run):
    rows, dt = oracle_run
    bad = [(p.n, sol.status, sol.case, chk.message) for p, sol, chk in rows if not chk.ok]
    statuses = sorted({sol.status for _, sol, _ in rows})
    report(4, not bad and dt < 60.0, f"oracle equivalence {300 - len(bad)}/300 in {dt:.1f} s, statuses {statuses}" + (f"; first failure {bad[0]}" if bad else ""))


def test_criterion_5_certificates(fixture_solutions, oracle_run):
    sols = [fixture_solutions[k][1] for k in ("51", "52", "53")] + [sol for _, sol, _ in oracle_run[0]]
    attained = [s for s in sols if s.status == "attained"]
    failing = [s.case for s in attained if s.certificate is None or not s.certificate.passes]
    report(5, not failing, f"{len(attained) - len(failing)}/{len(attained)} attained results carry passing certificates")


def test_criterion_6_strong_duality(oracle_run):
    checked, gaps = 0, []
    for p, sol, _ in oracle_run[0]:
        if sol.status not in ("attained", "unattained") or sol.case == "no_slater":
            continue
        checked += 1
        gap = abs(sol.value - dual_value(p, sol.sigma).value)
        if gap > 1e-6 * max(1.0, abs(sol.value)):
            gaps.append(gap)
    report(6, checked > 0 and not gaps, f"strong duality on {checked} bounded Slater instances, {len(gaps)} gaps")


def test_criterion_7_no_slater():
    counts, bad = {}, 0
    for k in range(100):
        p = gen_instance(5000 + k, 1 + k % 4, "no_slater")
        if slater_holds(p):
            bad += 1
            continue
        sol = classify_and_solve(p)
        status, value = affine_oracle(p)
        counts[sol.status] = counts.get(sol.status, 0) + 1
        agree = sol.status == status
        if agree and status == "attained":
            agree = abs(sol.value - value) <= 1e-6 * max(1.0, abs(value))
        if agree and status == "unbounded":
            agree = ray_diverges(p, sol.ray)
        bad += not agree
    split = set(counts) == {"infeasible", "unbounded", "attained"}
    report(7, bad == 0 and split, f"no-Slater branch, {bad} disagreements, split {dict(sorted(counts.items()))}")


def test_criterion_8_scale():
    worst, fails, n_att = 0.0, 0, 0
    classify_and_solve(gen_instance(0, 50, "attained_interval"))
    for k in range(10):
        cls = ("attained_interval", "attained_singleton")[k % 2]
        p = gen_instance(k, 50, cls)
        sol, dt = _timed(classify_and_solve, p)
        worst = max(worst, dt)
        if sol.status == "attained":
            n_att += 1
            fails += not sol.certificate.passes
    report(8, worst < 1.0 and fails == 0 and n_att == 10, f"n=50: {n_att}/10 attained, worst {worst * 1e3:.0f} ms, {fails} failing certificates")


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
