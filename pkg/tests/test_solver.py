import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qp1qc.exceptions import PreconditionViolated
from qp1qc.linalg import DEFAULT_TOL
from qp1qc.model import Qp1qcInstance
from qp1qc.oracle import CLASSES, check_solution, gen_instance, grid_infimum, GridSpec, ray_diverges
from qp1qc.pencil import pencil_interval, reduce_pencil
from qp1qc.solver import (
    analyze_affine_set,
    classify_and_solve,
    dual_value,
    feasibility_system,
    solve_dual_slater,
    solve_singleton_case,
)

STATUSES = {"infeasible", "unbounded", "unattained", "attained"}
CASES = {"no_slater", "a", "b", "c1", "c2", "d", "e", "f", "g1", "g2", "h1", "h2", "h3", "h4"}


def inst(A, B, f=None, g=None, mu=0.0):
    A = np.asarray(A, float)
    n = A.shape[0]
    f = np.zeros(n) if f is None else f
    g = np.zeros(n) if g is None else g
    return Qp1qcInstance(A, np.asarray(B, float), np.asarray(f, float), np.asarray(g, float), mu)


# ---------------------------------------------------------------- feasibility


def test_feasibility_example_51(ex51):
    iv = pencil_interval(ex51.A, ex51.B)
    assert feasibility_system(ex51, iv)[0] is None


def test_feasibility_identity():
    p = inst(np.eye(2), np.eye(2), mu=1.0)
    sigma, case = feasibility_system(p, pencil_interval(p.A, p.B))
    assert sigma == 0.0


def test_feasibility_example_53(ex53):
    sigma, case = feasibility_system(ex53, pencil_interval(ex53.A, ex53.B))
    assert sigma == pytest.approx(0.0, abs=1e-9)
    assert case == "b"


def test_feasibility_negative_interval():
    # A + sigma B PSD only for sigma <= -1
    p = inst(np.diag([-1.0, 1.0]), np.diag([-1.0, 0.0]), mu=1.0)
    iv = pencil_interval(p.A, p.B)
    assert iv.hi == pytest.approx(-1.0)
    assert feasibility_system(p, iv) == (None, "a")


# ---------------------------------------------------------------- dual value


def test_dual_value_zero_linear_terms():
    p = inst(np.eye(2), np.eye(2), mu=3.0)
    assert dual_value(p, 2.0).value == pytest.approx(-6.0)


def test_dual_value_example_52(ex52):
    assert dual_value(ex52, 0.0).value == pytest.approx(0.0, abs=1e-12)


def test_dual_value_unconstrained():
    p = inst(np.eye(2), np.eye(2), f=[1.0, 0.0], mu=4.0)
    assert dual_value(p, 0.0).value == pytest.approx(-1.0)


def test_dual_value_preconditions():
    p = inst(np.diag([-1.0, 1.0]), np.eye(2), mu=1.0)
    with pytest.raises(PreconditionViolated):
        dual_value(p, 0.5)
    q = inst(np.diag([0.0, 1.0]), np.diag([0.0, 1.0]), f=[1.0, 0.0], mu=1.0)
    with pytest.raises(PreconditionViolated):
        dual_value(q, 1.0)


# ---------------------------------------------------------------- top level examples


def test_example_51_unbounded(ex51):
    sol = classify_and_solve(ex51)
    assert sol.status == "unbounded"
    assert ray_diverges(ex51, sol.ray)


def test_example_52_unattained(ex52):
    sol = classify_and_solve(ex52)
    assert sol.status == "unattained"
    assert sol.value == pytest.approx(0.0, abs=1e-9)
    assert sol.sigma == pytest.approx(0.0, abs=1e-9)


def test_example_53_attained(ex53):
    sol = classify_and_solve(ex53)
    assert sol.status == "attained" and sol.case == "g1"
    assert sol.value == pytest.approx(0.0, abs=1e-9)
    assert abs(sol.x[1]) <= 1e-8
    assert sol.certificate.passes


def test_identity_ball():
    sol = classify_and_solve(inst(np.eye(2), np.eye(2), mu=1.0))
    assert sol.status == "attained"
    assert_allclose(sol.x, 0.0, atol=1e-12)


def test_classic_trust_region_hard_case():
    p = inst(np.diag([-1.0, 1.0]), np.eye(2), mu=1.0)
    sol = classify_and_solve(p)
    assert sol.status == "attained"
    assert sol.sigma == pytest.approx(1.0)
    assert sol.value == pytest.approx(-1.0)
    assert abs(abs(sol.x[0]) - 1.0) <= 1e-9 and abs(sol.x[1]) <= 1e-9
    # oracle: the grid minimum over the disk is -1
    rep = grid_infimum(p, GridSpec(radius=2.0, steps=201, refine_rounds=3), use_polish=True)
    assert rep.best_value == pytest.approx(-1.0, abs=1e-6)


def test_trust_region_inactive_constraint():
    sol = classify_and_solve(inst(np.eye(2), np.eye(2), f=[1.0, 0.0], mu=4.0))
    assert sol.sigma == pytest.approx(0.0)
    assert_allclose(sol.x, [1.0, 0.0], atol=1e-10)
    assert sol.value == pytest.approx(-1.0)


def test_trust_region_secular_root():
    # x(sigma) = (2/(1+sigma), 0) and |x|^2 = 1 gives sigma = 1
    p = inst(np.diag([1.0, 2.0]), np.eye(2), f=[2.0, 0.0], mu=1.0)
    x, sigma = solve_dual_slater(p, pencil_interval(p.A, p.B))
    assert sigma == pytest.approx(1.0, abs=1e-9)
    assert_allclose(x, [1.0, 0.0], atol=1e-9)


def test_case_d_with_joint_null():
    p = inst(np.diag([1.0, 1.0, 0.0]), np.diag([1.0, 1.0, 0.0]), mu=1.0)
    sol = classify_and_solve(p)
    assert sol.case == "d"
    assert_allclose(sol.x, 0.0, atol=1e-12)
    assert sol.value == pytest.approx(0.0, abs=1e-12)


def test_case_d_ball():
    # min x1^2 - 2 x1 on the unit disk; hand KKT gives x = (1, 0)
    p = inst(np.diag([1.0, 0.0]), np.eye(2), f=[1.0, 0.0], mu=1.0)
    sol = classify_and_solve(p)
    assert sol.case == "d"
    assert sol.value == pytest.approx(-1.0, abs=1e-9)
    assert p.G(sol.x) <= 1.0 + 1e-9


def test_case_d_unbounded_variant():
    # V'f != 0 = V'g: F decreases along e3 and G ignores it
    p = inst(np.diag([1.0, 1.0, 0.0]), np.diag([1.0, 1.0, 0.0]), f=[0.0, 0.0, 1.0], mu=1.0)
    sol = classify_and_solve(p)
    assert sol.status == "unbounded"
    assert ray_diverges(p, sol.ray)


def test_case_e():
    # min x1^2 subject to x1^2 - 2 x2 <= -1
    p = inst(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]), g=[0.0, 1.0], mu=-1.0)
    sol = classify_and_solve(p)
    assert sol.case == "e" and sol.sigma == 0.0
    assert sol.value == pytest.approx(0.0, abs=1e-12)
    assert p.G(sol.x) <= p.mu + 1e-12


def test_case_f():
    # min x1^2 - 2 x2 subject to x1^2 + 2 x2 <= 2: optimum -2 at (0, 1), sigma = 1
    p = inst(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]), f=[0.0, 1.0], g=[0.0, -1.0], mu=2.0)
    sol = classify_and_solve(p)
    assert sol.case == "f"
    assert sol.sigma == pytest.approx(1.0)
    assert sol.value == pytest.approx(-2.0)
    assert_allclose(sol.x, [0.0, 1.0], atol=1e-12)
    assert sol.certificate.passes


def test_singleton_analysis_example_52(ex52):
    an = analyze_affine_set(ex52, 0.0)
    assert an.Lstar == pytest.approx(0.0)
    assert an.mu_tilde < an.Lstar


def test_singleton_case_rejects_negative_sigma(ex53):
    with pytest.raises(PreconditionViolated):
        solve_singleton_case(ex53, -1.0)


def test_one_dimensional_instances():
    # min -x^2 on x^2 <= 4: value -4
    sol = classify_and_solve(inst([[-1.0]], [[1.0]], mu=4.0))
    assert sol.value == pytest.approx(-4.0) and sol.certificate.passes
    # min -x on x^2 <= 1
    sol = classify_and_solve(inst([[0.0]], [[1.0]], f=[0.5], mu=1.0))
    assert_allclose(sol.x, [1.0]) and sol.value == pytest.approx(-1.0)
    # min -x^2 on -x^2 <= -1 is unbounded
    sol = classify_and_solve(inst([[-1.0]], [[-1.0]], mu=-1.0))
    assert sol.status == "unbounded"


def test_singleton_h_subcase_tight():
    for seed in range(40):
        p = gen_instance(seed, 3, "attained_singleton")
        sol = classify_and_solve(p)
        if sol.case in ("h2", "h3", "h4") and sol.sigma > 0:
            assert abs(p.G(sol.x) - p.mu) <= 1e-7 * p.scale()
            assert sol.certificate.passes
            assert check_solution(p, sol).ok
            return
    pytest.fail("generator produced no positive-multiplier singleton instance")


# ---------------------------------------------------------------- properties


def _random_instance(rng, n):
    M = rng.standard_normal((n, n))
    N = rng.standard_normal((n, n))
    return Qp1qcInstance(M + M.T, N + N.T, rng.standard_normal(n), rng.standard_normal(n), float(rng.standard_normal()))


def test_totality():
    rng = np.random.default_rng(2024)
    seen = set()
    for k in range(500):
        n = (2, 3, 4)[k % 3]
        p = _random_instance(rng, n) if k % 2 else gen_instance(k, n, CLASSES[(k // 2) % len(CLASSES)])
        sol = classify_and_solve(p)
        assert sol.status in STATUSES and sol.case in CASES
        if sol.status == "attained":
            assert sol.value == pytest.approx(p.F(sol.x), rel=1e-9, abs=1e-9)
        seen.add(sol.status)
    assert seen == STATUSES


def _orthogonal(rng, n):
    return np.linalg.qr(rng.standard_normal((n, n)))[0]


@given(st.integers(0, 10_000), st.integers(2, 4), st.sampled_from(CLASSES))
def test_conjugation_invariance(seed, n, cls):
    p = gen_instance(seed, n, cls)
    Q = _orthogonal(np.random.default_rng(seed), n)
    a, b = classify_and_solve(p), classify_and_solve(p.conjugate(Q))
    assert a.status == b.status
    if a.status in ("attained", "unattained"):
        assert a.value == pytest.approx(b.value, rel=1e-6, abs=1e-6)


@given(st.integers(0, 10_000), st.integers(1, 5), st.sampled_from(CLASSES))
def test_certificates_and_rays(seed, n, cls):
    p = gen_instance(seed, n, cls)
    sol = classify_and_solve(p)
    if sol.status == "attained":
        assert sol.certificate.passes
    if sol.status == "unbounded":
        assert sol.ray is not None and ray_diverges(p, sol.ray)


@given(st.integers(0, 10_000), st.integers(1, 5), st.sampled_from(CLASSES))
def test_strong_duality(seed, n, cls):
    p = gen_instance(seed, n, cls)
    sol = classify_and_solve(p)
    if sol.status in ("attained", "unattained") and sol.case != "no_slater":
        d = dual_value(p, sol.sigma).value
        assert abs(sol.value - d) <= 1e-6 * max(1.0, abs(sol.value))


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_kkt_pass_implies_optimal_value(seed, n):
    p = gen_instance(seed, n, "attained_interval")
    sol = classify_and_solve(p)
    assert sol.status == "attained"
    # the certificate alone pins the value: any passing pair has the same F
    assert sol.certificate.passes
    assert p.F(sol.certificate.x) == pytest.approx(sol.value, rel=1e-6, abs=1e-6)


def test_case_f_tightness():
    hits = 0
    for seed in range(200):
        p = gen_instance(seed, 3, "attained_interval")
        sol = classify_and_solve(p)
        if sol.case == "f":
            hits += 1
            assert abs(p.G(sol.x) - p.mu) <= 1e-7 * p.scale()
    assert hits > 0


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.integers(2, 5))
def test_psi_nonincreasing(seed, n):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    p = Qp1qcInstance(M + M.T, np.eye(n), rng.standard_normal(n), rng.standard_normal(n), 1.0 + rng.random())
    lo = max(0.0, -np.linalg.eigvalsh(p.A)[0])
    sig = np.linspace(lo, lo + 20.0, 52)[1:-1]
    psi = [p.G(np.linalg.solve(p.A + s * p.B, p.f + s * p.g)) - p.mu for s in sig]
    assert np.all(np.diff(psi) <= 1e-8 * max(1.0, np.max(np.abs(psi))))
