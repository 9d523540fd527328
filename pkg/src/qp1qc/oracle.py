"""Independent checks for small instances and a seeded instance generator.

Nothing here calls the solver.  The grid oracle evaluates ``F`` on a box
grid with local refinement (and an optional SLSQP polish), the ray check
samples a witness path at geometrically spaced times, and the affine
oracle solves the degenerate no-interior-point problem with plain
``scipy.linalg`` calls.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize
from scipy.stats import ortho_group

from .exceptions import DimensionTooLarge
from .model import Qp1qcInstance, Ray

CLASSES = ("any", "no_slater", "unbounded", "unattained", "attained_interval", "attained_singleton")
MAX_GRID_DIM = 3
CHUNK = 200_000


@dataclass(frozen=True)
class GridSpec:
    radius: float = 10.0
    steps: int = 201
    refine_rounds: int = 2

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.steps < 3 or self.steps % 2 == 0:
            raise ValueError("steps must be odd and at least 3")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be nonnegative")


@dataclass(frozen=True)
class OracleReport:
    best_value: float
    best_point: np.ndarray | None
    feasible_count: int
    diverged: bool = False


def _feas_tol(inst):
    return 1e-9 * max(1.0, np.linalg.norm(inst.B, 2), np.linalg.norm(inst.g), abs(inst.mu))


def _evaluate(inst, X):
    """``F`` and a feasibility mask for the rows of ``X``."""
    F = np.einsum("ij,jk,ik->i", X, inst.A, X) - 2.0 * X @ inst.f
    G = np.einsum("ij,jk,ik->i", X, inst.B, X) - 2.0 * X @ inst.g
    return F, G <= inst.mu + _feas_tol(inst) * (1.0 + np.abs(G))


def _grid_points(center, half, steps, n):
    axis = np.linspace(-half, half, steps)
    for chunk in _chunks(axis, n):
        yield center + chunk


def _chunks(axis, n):
    if n == 1:
        yield axis[:, None]
        return
    rest = np.array(list(itertools.product(axis, repeat=n - 1)))
    per = max(1, CHUNK // len(rest))
    for i in range(0, len(axis), per):
        head = axis[i : i + per]
        yield np.column_stack([np.repeat(head, len(rest)), np.tile(rest, (len(head), 1))])


def _scan(inst, center, half, steps, keep):
    """Best ``keep`` feasible grid points as ``(values, points, count)``."""
    vals, pts, count = [], [], 0
    for X in _grid_points(center, half, steps, inst.n):
        F, ok = _evaluate(inst, X)
        count += int(ok.sum())
        if ok.any():
            Fo, Xo = F[ok], X[ok]
            idx = np.argsort(Fo)[:keep]
            vals.append(Fo[idx])
            pts.append(Xo[idx])
    if not vals:
        return np.zeros(0), np.zeros((0, inst.n)), 0
    vals = np.concatenate(vals)
    pts = np.concatenate(pts)
    idx = np.argsort(vals)[:keep]
    return vals[idx], pts[idx], count


def polish(inst: Qp1qcInstance, x0, radius: float):
    """Local SLSQP descent from ``x0`` inside the box; returns a feasible point or None."""
    res = minimize(
        inst.F,
        x0,
        jac=lambda x: 2.0 * (inst.A @ x - inst.f),
        constraints=[{
            "type": "ineq",
            "fun": lambda x: inst.mu - inst.G(x),
            "jac": lambda x: -2.0 * (inst.B @ x - inst.g),
        }],
        bounds=[(-radius, radius)] * inst.n,
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-14},
    )
    x = res.x
    if inst.G(x) <= inst.mu + _feas_tol(inst) * (1.0 + abs(inst.G(x))):
        return x
    return None


def grid_infimum(inst: Qp1qcInstance, spec: GridSpec = GridSpec(), keep: int = 8, use_polish: bool = False) -> OracleReport:
    """Smallest ``F`` over feasible points of a box grid.

    After the coarse pass the ``keep`` best points are each re-gridded with
    ten times finer spacing, ``spec.refine_rounds`` times.  With
    ``use_polish`` the best refined points are also handed to SLSQP.
    """
    n = inst.n
    if n > MAX_GRID_DIM:
        raise DimensionTooLarge(f"grid oracle supports n <= {MAX_GRID_DIM}, got {n}")
    if n == 0:
        return OracleReport(0.0, np.zeros(0), 1 if inst.mu >= 0 else 0)
    vals, pts, count = _scan(inst, np.zeros(n), spec.radius, spec.steps, keep)
    if count == 0:
        return OracleReport(np.inf, None, 0)
    h = 2.0 * spec.radius / (spec.steps - 1)
    for _ in range(spec.refine_rounds):
        new_v, new_p = [vals], [pts]
        for p in pts:
            v2, p2, _ = _scan(inst, p, h, 21, keep)
            new_v.append(v2)
            new_p.append(p2)
        vals = np.concatenate(new_v)
        pts = np.concatenate(new_p)
        inside = np.all(np.abs(pts) <= spec.radius * (1 + 1e-12), axis=1)
        vals, pts = vals[inside], pts[inside]
        order = np.unique(np.round(pts / (h / 10.0)), axis=0, return_index=True)[1]
        vals, pts = vals[order], pts[order]
        idx = np.argsort(vals)[:keep]
        vals, pts = vals[idx], pts[idx]
        h /= 10.0
    best_v, best_p = float(vals[0]), pts[0]
    if use_polish:
        for p in pts[: min(4, len(pts))]:
            x = polish(inst, p, spec.radius)
            if x is not None and inst.F(x) < best_v:
                best_v, best_p = inst.F(x), x
    return OracleReport(best_v, best_p, count)


def infimum_search(inst: Qp1qcInstance, radii=(10.0, 100.0, 1e3, 1e4), steps: int = 41) -> OracleReport:
    """Best feasible value over growing boxes, each polished by SLSQP.

    Used for unattained infima, which are only approached far from the
    origin.
    """
    best = None
    for r in radii:
        rep = grid_infimum(inst, GridSpec(radius=r, steps=steps, refine_rounds=2), use_polish=True)
        if best is None or rep.best_value < best.best_value:
            best = rep
    return best


def _path_coefficients(M, v, b, d, c):
    """``x'Mx - 2v'x`` along ``b + t d + t^2 c`` as coefficients of ``t^0..t^4``."""
    r = M @ b - v
    return np.array([
        b @ M @ b - 2.0 * v @ b,
        2.0 * r @ d,
        d @ M @ d + 2.0 * r @ c,
        2.0 * d @ M @ c,
        c @ M @ c,
    ])


def _leading_sign(coef, rel=1e-9):
    tol = rel * max(1.0, np.abs(coef).max())
    nz = np.flatnonzero(np.abs(coef) > tol)
    if not nz.size:
        return 0, 0
    return int(nz[-1]), int(np.sign(coef[nz[-1]]))


def ray_diverges(inst: Qp1qcInstance, base, direction=None, samples: int = 8, curvature=None) -> bool:
    """True iff ``F`` strictly decreases below ``-1e6`` along a feasible path.

    A straight ray ``base + t*direction`` is sampled at
    ``t = 1, 10, ..., 10**samples``.  ``base`` may also be a :class:`Ray`.

    A curved path (nonzero ``curvature``) cannot be sampled that far in
    double precision: ``F`` falls like ``t`` while ``x`` grows like
    ``t^2``, so rounding in ``F`` exceeds ``1e6`` before ``F`` gets there.
    It is instead sampled at ``t <= 10**3`` (decrease and feasibility) and
    its ``F`` and ``G - mu`` polynomials are checked for a negative leading
    term and a nonpositive leading term respectively.
    """
    if isinstance(base, Ray):
        base, direction, curvature = base.base, base.direction, base.curvature
    base = np.asarray(base, dtype=float)
    d = np.asarray(direction, dtype=float)
    c = np.zeros_like(d) if curvature is None else np.asarray(curvature, dtype=float)
    if np.linalg.norm(d) == 0 and np.linalg.norm(c) == 0:
        return False
    curved = bool(np.any(c))
    if curved:
        fdeg, fsign = _leading_sign(_path_coefficients(inst.A, inst.f, base, d, c))
        gc = _path_coefficients(inst.B, inst.g, base, d, c)
        gc[0] -= inst.mu
        gdeg, gsign = _leading_sign(gc)
        if fdeg == 0 or fsign >= 0 or (gdeg > 0 and gsign > 0):
            return False
        samples = min(samples, 3)
    prev = np.inf
    for k in range(samples + 1):
        t = 10.0**k
        x = base + t * d + t * t * c
        nx = np.linalg.norm(x)
        gtol = 1e-9 * max(1.0, np.linalg.norm(inst.B, 2) * nx * nx + 2.0 * np.linalg.norm(inst.g) * nx + abs(inst.mu))
        if inst.G(x) > inst.mu + gtol:
            return False
        Fx = inst.F(x)
        if not Fx < prev:
            return False
        prev = Fx
    return curved or prev < -1e6


# ---------------------------------------------------------------------------
# closed-form oracles for degenerate structure


def affine_oracle(inst: Qp1qcInstance, rtol: float = 1e-9):
    """Solve ``min F`` over ``{x : G(x) <= mu}`` when ``G`` is convex with minimum ``mu``.

    Returns ``(status, value)``.  Only valid when ``B`` is PSD; the feasible
    set is then empty, or the affine set where ``G`` is minimal.
    """
    B, g = inst.B, inst.g
    x0, *_ = sla.lstsq(B, g)
    scale = max(1.0, np.linalg.norm(B, 2), np.linalg.norm(g), abs(inst.mu))
    if np.linalg.norm(B @ x0 - g) > rtol * scale or inst.G(x0) > inst.mu + rtol * scale:
        return "infeasible", None
    N = sla.null_space(B, rcond=rtol)
    if N.shape[1] == 0:
        return "attained", inst.F(x0)
    H = N.T @ inst.A @ N
    c = N.T @ (inst.A @ x0 - inst.f)
    Ascale = max(1.0, np.linalg.norm(inst.A, 2))
    if sla.eigvalsh(H)[0] < -rtol * Ascale:
        return "unbounded", -np.inf
    z, *_ = sla.lstsq(H, -c)
    if np.linalg.norm(H @ z + c) > 1e-7 * max(1.0, np.linalg.norm(c), Ascale * np.linalg.norm(z)):
        return "unbounded", -np.inf
    return "attained", inst.F(x0 + N @ z)


def level_reachable_on_solution_set(inst: Qp1qcInstance, sigma: float, rtol: float = 1e-9) -> bool:
    """Whether some stationary point of the Lagrangian at ``sigma`` meets complementarity.

    For ``sigma = 0`` this asks for ``G <= mu`` on the solution set of
    ``(A + sigma B) x = f + sigma g``; for ``sigma > 0`` for ``G = mu``.
    """
    M = inst.A + sigma * inst.B
    r = inst.f + sigma * inst.g
    x0, *_ = sla.lstsq(M, r)
    N = sla.null_space(M, rcond=rtol)
    level = inst.mu - inst.G(x0)
    eps = 1e-9 * inst.G_scale(x0)
    if N.shape[1] == 0:
        return level >= -eps if sigma == 0 else abs(level) <= eps
    H = N.T @ inst.B @ N
    b = N.T @ (inst.B @ x0 - inst.g)
    w = sla.eigvalsh(H)
    hs = rtol * max(1.0, np.linalg.norm(inst.B, 2))
    y, *_ = sla.lstsq(H, -b)
    b_in_range = np.linalg.norm(H @ y + b) <= 1e-7 * max(1.0, np.linalg.norm(b))
    stat = float(y @ H @ y + 2.0 * b @ y)
    lo = stat if (b_in_range and w[0] >= -hs) else -np.inf
    hi = stat if (b_in_range and w[-1] <= hs) else np.inf
    if sigma == 0:
        return level >= lo - eps
    return lo - eps <= level <= hi + eps


# ---------------------------------------------------------------------------
# instance generation


def _rand_sym(rng, n, scale=1.0):
    M = rng.standard_normal((n, n)) * scale
    return 0.5 * (M + M.T)


def _rand_pd(rng, n, lo=0.5):
    L = rng.standard_normal((n, n))
    return L @ L.T / n + lo * np.eye(n)


def _orth(rng, n):
    if n == 1:
        return np.array([[1.0 if rng.random() < 0.5 else -1.0]])
    return ortho_group.rvs(n, random_state=rng)


def _embed(Q, blocks):
    return Q @ sla.block_diag(*blocks) @ Q.T


def _gen_no_slater(rng, n):
    kind = rng.integers(3)
    k = int(rng.integers(1, n + 1)) if kind != 1 else int(rng.integers(1, max(2, n)))
    L = rng.standard_normal((n, k))
    B = L @ L.T
    w = rng.standard_normal(n)
    g = B @ w
    mu = -float(g @ np.linalg.pinv(B) @ g)
    if kind == 0:  # infeasible
        return Qp1qcInstance(_rand_sym(rng, n), B, rng.standard_normal(n), g, mu - 0.1 - rng.random())
    Q = _orth(rng, n)
    if kind == 1:  # indefinite on the null space of B
        A = _rand_sym(rng, n) - 3.0 * np.eye(n)
    else:
        A = _rand_pd(rng, n)
    return Qp1qcInstance(A, B, Q @ rng.standard_normal(n) if kind == 1 else rng.standard_normal(n), g, mu)


def _gen_unbounded(rng, n):
    kind = rng.integers(3)
    if kind == 0 or n == 1:
        # no PSD combination at any sigma >= 0
        A = _rand_sym(rng, n) - 2.0 * np.eye(n)
        B = _rand_sym(rng, n)
        return Qp1qcInstance(A, B, rng.standard_normal(n), rng.standard_normal(n), abs(rng.standard_normal()) + 0.5)
    Q = _orth(rng, n)
    m = n - 1
    if kind == 1:
        # objective linear along a joint null direction
        A = _embed(Q, [_rand_pd(rng, m), np.zeros((1, 1))])
        B = _embed(Q, [_rand_sym(rng, m), np.zeros((1, 1))])
        f = Q @ np.concatenate([rng.standard_normal(m), [1.0 + rng.random()]])
        return Qp1qcInstance(A, B, f, np.zeros(n), 1.0 + rng.random())
    # x1^2 - x2 <= mu with F = -2 x1 (plus a convex block): bounded along
    # every ray, unbounded along a parabola
    m = n - 2
    if m < 0:
        return _gen_unbounded(np.random.default_rng(rng.integers(1 << 30)), n)
    A = _embed(Q, [_rand_pd(rng, m), np.zeros((2, 2))])
    B = _embed(Q, [np.zeros((m, m)), np.diag([1.0 + rng.random(), 0.0])])
    f = Q @ np.concatenate([rng.standard_normal(m), [1.0, 0.0]])
    g = Q @ np.concatenate([np.zeros(m), [0.0, 0.5 + rng.random()]])
    return Qp1qcInstance(A, B, f, g, rng.standard_normal())


def _gen_unattained(rng, n):
    if n < 2:
        return _gen_attained_interval(rng, n)
    a = 0.5 + rng.random()
    c = 0.5 + rng.random()
    k = 0.5 + rng.random()
    blocks_A = [np.diag([0.0, a])]
    blocks_B = [c * np.array([[0.0, -1.0], [-1.0, 0.0]])]
    if n > 2:
        blocks_A.append(_rand_pd(rng, n - 2))
        blocks_B.append(_rand_sym(rng, n - 2) * 0.5)
    Q = _orth(rng, n)
    inst = Qp1qcInstance(_embed(Q, blocks_A), _embed(Q, blocks_B), np.zeros(n), np.zeros(n), -2.0 * c * k)
    return inst.shift(rng.uniform(-1.0, 1.0, n))


def _gen_attained_interval(rng, n):
    kind = rng.integers(4) if n > 1 else 0
    Q = _orth(rng, n)
    if kind == 0:  # dual Slater, no joint null space
        C = _rand_pd(rng, n)
        B = _rand_sym(rng, n)
        s0 = rng.uniform(0.0, 2.0)
        return Qp1qcInstance(C - s0 * B, B, rng.standard_normal(n), rng.standard_normal(n), 1.0 + 2.0 * rng.random())
    m = n - 1
    C = _rand_pd(rng, m)
    Br = _rand_sym(rng, m)
    if kind == 1:  # joint null direction carrying no data
        s0 = rng.uniform(0.0, 2.0)
        f = np.concatenate([rng.standard_normal(m), [0.0]])
        g = np.concatenate([rng.standard_normal(m), [0.0]])
    elif kind == 2:  # only g sees the joint null direction, sigma = 0
        s0 = 0.0
        f = np.concatenate([rng.standard_normal(m), [0.0]])
        g = np.concatenate([rng.standard_normal(m), [1.0 + rng.random()]])
    else:  # f + s0 g orthogonal to the joint null direction
        s0 = rng.uniform(0.2, 2.0)
        gz = 1.0 + rng.random()
        f = np.concatenate([rng.standard_normal(m), [-s0 * gz]])
        g = np.concatenate([rng.standard_normal(m), [gz]])
    A = _embed(Q, [C - s0 * Br, np.zeros((1, 1))])
    B = _embed(Q, [Br, np.zeros((1, 1))])
    return Qp1qcInstance(A, B, Q @ f, Q @ g, 1.0 + 2.0 * rng.random())


def _gen_attained_singleton(rng, n):
    if n < 2:
        return _gen_attained_interval(rng, n)
    s_star = 0.0 if rng.random() < 0.5 else rng.uniform(0.2, 2.0)
    Q = _orth(rng, n)
    # B indefinite on the 2-dim null block pins the pencil to one point
    u, v = rng.uniform(0.5, 2.0, 2)
    Hb = np.diag([u, -v])
    blocks_P = [np.zeros((2, 2))]
    blocks_B = [Hb]
    if n > 2:
        blocks_P.append(_rand_pd(rng, n - 2))
        blocks_B.append(_rand_sym(rng, n - 2))
    P = _embed(Q, blocks_P)
    B = _embed(Q, blocks_B)
    A = P - s_star * B
    w = rng.standard_normal(n)
    g = rng.standard_normal(n)
    f = P @ w - s_star * g
    return Qp1qcInstance(A, B, f, g, rng.standard_normal())


def _gen_any(rng, n):
    return Qp1qcInstance(_rand_sym(rng, n), _rand_sym(rng, n), rng.standard_normal(n), rng.standard_normal(n), rng.standard_normal())


_GENERATORS = {
    "any": _gen_any,
    "no_slater": _gen_no_slater,
    "unbounded": _gen_unbounded,
    "unattained": _gen_unattained,
    "attained_interval": _gen_attained_interval,
    "attained_singleton": _gen_attained_singleton,
}


def gen_instance(seed: int, n: int, target_class: str = "any") -> Qp1qcInstance:
    """Seeded random instance biased toward ``target_class``.

    The class is a hint for the construction; the solver's classification
    of the result is the ground truth.
    """
    if target_class not in _GENERATORS:
        raise ValueError(f"unknown class {target_class!r}; expected one of {CLASSES}")
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng([seed, n, CLASSES.index(target_class)])
    return _GENERATORS[target_class](rng, n)


# ---------------------------------------------------------------------------
# cross-checking a solver result


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    message: str
    oracle_value: float | None = None


def default_grid(n: int, radius: float = 10.0) -> GridSpec:
    """Coarse grid plus enough refinement to resolve values to about 1e-6."""
    if n <= 2:
        return GridSpec(radius=radius, steps=201, refine_rounds=4)
    return GridSpec(radius=radius, steps=41, refine_rounds=5)


def check_solution(inst: Qp1qcInstance, sol, atol: float = 1e-5) -> CheckResult:
    """Compare a solver result against the independent oracles (``n <= 3``).

    ``sol`` is a solver ``Solution``; only its reported fields are used.
    """
    status = sol.status
    if status == "unbounded":
        if sol.ray is None:
            return CheckResult(False, "unbounded without a witness path")
        if not ray_diverges(inst, sol.ray):
            return CheckResult(False, "witness path does not diverge")
        return CheckResult(True, "witness diverges")

    if sol.case == "no_slater":
        o_status, o_value = affine_oracle(inst)
        if o_status != status:
            return CheckResult(False, f"affine oracle says {o_status}", o_value)
        if status == "attained" and abs(o_value - sol.value) > atol * max(1.0, abs(o_value)):
            return CheckResult(False, f"value {sol.value} vs affine oracle {o_value}", o_value)
        return CheckResult(True, "matches affine oracle", o_value)

    if status == "infeasible":
        rep = grid_infimum(inst, default_grid(inst.n))
        if rep.feasible_count:
            return CheckResult(False, "grid found feasible points", rep.best_value)
        return CheckResult(True, "grid found no feasible point")

    v = float(sol.value)
    band = atol * max(1.0, abs(v))
    if status == "attained":
        x = sol.x
        if inst.G(x) > inst.mu + 1e-7 * inst.G_scale(x):
            return CheckResult(False, "x* is infeasible")
        fscale = max(1.0, abs(x @ inst.A @ x) + 2.0 * abs(inst.f @ x))
        if abs(inst.F(x) - v) > 1e-9 * fscale:
            return CheckResult(False, f"reported value {v} differs from F(x*) = {inst.F(x)}")
        radius = max(10.0, 1.5 * float(np.max(np.abs(x))))
        rep = grid_infimum(inst, default_grid(inst.n, radius), use_polish=True)
        if rep.feasible_count == 0:
            return CheckResult(False, "grid found no feasible point")
        if rep.best_value < v - band:
            return CheckResult(False, f"oracle found {rep.best_value} below {v}", rep.best_value)
        if rep.best_value > v + band:
            return CheckResult(False, f"oracle best {rep.best_value} above {v}", rep.best_value)
        return CheckResult(True, "value matches grid oracle", rep.best_value)

    # unattained
    rep = infimum_search(inst)
    if rep.feasible_count == 0:
        return CheckResult(False, "no feasible point found")
    if rep.best_value < v - band:
        return CheckResult(False, f"oracle found {rep.best_value} below infimum {v}", rep.best_value)
    if rep.best_value > v + 1e-3 * max(1.0, abs(v)):
        return CheckResult(False, f"oracle did not approach {v} (best {rep.best_value})", rep.best_value)
    if level_reachable_on_solution_set(inst, sol.sigma):
        return CheckResult(False, "a stationary point meets the constraint at sigma*", rep.best_value)
    return CheckResult(True, "infimum approached, not attained", rep.best_value)
