"""Global solution of the one-constraint quadratic program.

Under a strictly feasible point the problem is bounded below iff some
``sigma >= 0`` makes ``A + sigma B`` PSD with ``f + sigma g`` in its range.
When the PSD pencil set is a proper interval the infimum is always
attained; when it is a single point ``sigma*`` the optimizers, if any, lie
in the affine set ``(A + sigma* B)^+ (f + sigma* g) + N(A + sigma* B)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificate import kkt_verify
from .exceptions import InternalInconsistency, NonConvergence, PreconditionViolated
from .linalg import DEFAULT_TOL, Tolerance, as_sym, lambda_min, null_basis, pinv, range_contains
from .model import DualValue, Qp1qcInstance, Solution
from .pencil import PencilInterval, ReducedPencil, interior_point, pencil_interval, reduce_pencil
from .slater import slater_holds, solve_no_slater

MAX_ITER = 200


@dataclass(frozen=True)
class AffineSolutionSet:
    """All solutions of ``(A + sigma B) x = f + sigma g``: ``base + V y``."""

    base: np.ndarray
    V: np.ndarray
    sigma: float


@dataclass(frozen=True)
class SingletonAnalysis:
    """``G`` restricted to the solution set, as ``G(base) + y'Hy + 2 b'y``.

    ``mu_tilde = mu - G(base)`` is the level the quadratic has to reach;
    ``Lstar``/``Ustar`` are its infimum and supremum over ``y``.
    """

    sset: AffineSolutionSet
    H: np.ndarray
    b: np.ndarray
    mu_tilde: float
    Lstar: float
    Ustar: float
    y_hat: np.ndarray | None
    level_tol: float


def dual_value(inst: Qp1qcInstance, sigma: float, tol: Tolerance = DEFAULT_TOL) -> DualValue:
    """Lagrangian dual function ``inf_x F(x) + sigma (G(x) - mu)``."""
    M = inst.A + sigma * inst.B
    r = inst.f + sigma * inst.g
    if sigma < 0 or lambda_min(M) < -tol.rel * max(1.0, np.linalg.norm(M, 2)):
        raise PreconditionViolated(f"A + sigma B is not PSD at sigma={sigma}")
    if not range_contains(M, r, tol):
        raise PreconditionViolated(f"dual function is -inf at sigma={sigma}")
    return DualValue(float(sigma), float(-r @ pinv(M, tol) @ r - inst.mu * sigma))


# ---------------------------------------------------------------------------
# boundedness


def _is_zero_vec(v, scale, tol):
    return bool(np.linalg.norm(v) <= tol.rel * max(1.0, scale))


def feasibility_system(
    inst: Qp1qcInstance,
    iv: PencilInterval,
    tol: Tolerance = DEFAULT_TOL,
    reduced: ReducedPencil | None = None,
):
    """Find ``sigma >= 0`` with ``A + sigma B`` PSD and ``f + sigma g`` in its range.

    Returns ``(sigma, case)``; ``sigma`` is ``None`` when no such value exists,
    i.e. the problem is unbounded below.  ``case`` names the branch taken:
    ``"a"`` (no PSD point at ``sigma >= 0``), ``"b"`` (a single candidate),
    ``"c1"``/``"c2"`` (interval reaching above zero, with the lower end below
    or at/above zero).
    """
    if iv.is_empty or iv.hi < 0:
        return None, "a"

    def in_range(s):
        return range_contains(inst.A + s * inst.B, inst.f + s * inst.g, tol)

    if iv.is_singleton or iv.hi == 0:
        s = iv.hi if iv.is_singleton else 0.0
        return (s if in_range(s) else None), "b"

    red = reduced if reduced is not None else reduce_pencil(inst.A, inst.B, tol)
    lo, hi = iv.lo, iv.hi
    case = "c1" if lo < 0 else "c2"
    a = red.V.T @ inst.f
    b = red.V.T @ inst.g
    vscale = max(np.linalg.norm(inst.f), np.linalg.norm(inst.g))
    left = max(0.0, lo)

    # interior: range condition reduces to V'f + sigma V'g = 0
    if _is_zero_vec(a, vscale, tol) and _is_zero_vec(b, vscale, tol):
        if case == "c1":
            return 0.0, case
        return interior_point(PencilInterval.interval(left, hi)), case
    if not _is_zero_vec(b, vscale, tol):
        s = 0.0 if _is_zero_vec(a, vscale, tol) else -float(a @ b) / float(b @ b)
        if _is_zero_vec(a + s * b, vscale, tol):
            inside = (0.0 <= s < hi) if case == "c1" else (lo < s < hi)
            if inside:
                return s, case
    if np.isfinite(hi) and in_range(hi):
        return hi, case
    if case == "c2" and in_range(lo):
        return lo, case
    return None, case


# ---------------------------------------------------------------------------
# solutions on an affine set (single-point pencil, interval endpoints)


def analyze_affine_set(inst: Qp1qcInstance, sigma: float, tol: Tolerance = DEFAULT_TOL) -> SingletonAnalysis:
    M = as_sym(inst.A + sigma * inst.B)
    r = inst.f + sigma * inst.g
    if not range_contains(M, r, tol):
        raise PreconditionViolated(f"f + sigma g is not in the range of A + sigma B at sigma={sigma}")
    base = pinv(M, tol) @ r
    V = null_basis(M, tol)
    H = as_sym(V.T @ inst.B @ V) if V.shape[1] else np.zeros((0, 0))
    b = V.T @ (inst.B @ base - inst.g)
    mu_tilde = inst.mu - inst.G(base)
    level_tol = tol.rel * inst.G_scale(base)

    Lstar, Ustar, y_hat = _quad_range(H, b, inst, tol)
    return SingletonAnalysis(AffineSolutionSet(base, V, float(sigma)), H, b, float(mu_tilde), Lstar, Ustar, y_hat, level_tol)


def _spectrum(H, inst, tol):
    w, Q = np.linalg.eigh(H) if H.size else (np.zeros(0), np.zeros((0, 0)))
    cut = tol.rel * max(1.0, np.linalg.norm(inst.B, 2))
    return w, Q, w > cut, w < -cut


def _quad_range(H, b, inst, tol):
    """Infimum and supremum of ``y'Hy + 2b'y`` plus its stationary point."""
    k = H.shape[0]
    if k == 0:
        return 0.0, 0.0, np.zeros(0)
    w, Q, pos, neg = _spectrum(H, inst, tol)
    zero = ~(pos | neg)
    bn = Q[:, zero].T @ b
    b_in_range = bool(np.linalg.norm(bn) <= tol.rel * max(1.0, np.linalg.norm(b)))
    if not b_in_range:
        return -math.inf, math.inf, None
    nz = pos | neg
    y_hat = -Q[:, nz] @ ((Q[:, nz].T @ b) / w[nz])
    val = float(b @ y_hat)  # = y'Hy + 2b'y at the stationary point
    Lstar = val if not neg.any() else -math.inf
    Ustar = val if not pos.any() else math.inf
    return Lstar, Ustar, y_hat


def _positive_root(a2, a1, a0):
    """Smallest positive root of ``a2 t^2 + a1 t + a0``, or None."""
    if abs(a2) <= 1e-300:
        if a1 == 0:
            return None
        t = -a0 / a1
        return t if t > 0 else None
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0:
        if disc > -1e-12 * (a1 * a1 + abs(4 * a2 * a0)):
            disc = 0.0
        else:
            return None
    sq = math.sqrt(disc)
    q = -0.5 * (a1 + math.copysign(sq, a1))
    roots = [q / a2] + ([a0 / q] if q != 0 else [])
    pos = [t for t in roots if t > 0]
    return min(pos) if pos else None


def _descent_direction(an: SingletonAnalysis, inst, tol, sign):
    """Unit ``y`` along which ``y'Hy + 2b'y`` tends to ``sign * inf``.

    Returns ``(y, curvature, slope)`` with the quadratic along ``t*y`` equal
    to ``curvature t^2 + 2 slope t``.
    """
    w, Q, pos, neg = _spectrum(an.H, inst, tol)
    side = pos if sign > 0 else neg
    if side.any():
        i = int(np.argmax(np.abs(w) * side))
        y = Q[:, i]
        if sign * (an.b @ y) < 0:
            y = -y
        return y, float(w[i]), float(an.b @ y)
    zero = ~(pos | neg)
    Z = Q[:, zero]
    y = sign * (Z @ (Z.T @ an.b))
    y = y / np.linalg.norm(y)
    return y, 0.0, float(an.b @ y)


def solve_on_affine_set(an: SingletonAnalysis, inst: Qp1qcInstance, tol: Tolerance, equality: bool):
    """Find ``y`` with the constraint met on the solution set.

    ``equality=False`` (``sigma = 0``) needs ``G <= mu``; ``equality=True``
    (``sigma > 0``) needs ``G == mu`` for complementarity.  Returns
    ``(y, subcase)`` with ``y`` None when no such point exists.
    """
    mt, L, U, eps = an.mu_tilde, an.Lstar, an.Ustar, an.level_tol
    k = an.H.shape[0]
    if not equality:
        if np.isfinite(L):
            return (an.y_hat if mt >= L - eps else None), "g1"
        y, c2, c1 = _descent_direction(an, inst, tol, -1)
        t = 1.0
        for _ in range(61):
            if c2 * t * t + 2 * c1 * t <= mt:
                return t * y, "g2"
            t *= 2.0
        t = _positive_root(c2, 2 * c1, -mt)
        if t is None:  # pragma: no cover - descent direction always reaches
            raise NonConvergence("descent along the solution set did not reach the level")
        return t * y, "g2"

    if np.isfinite(L) and np.isfinite(U):
        return (np.zeros(k) if abs(mt) <= eps else None), "h1"
    if np.isfinite(L):
        if mt < L - eps:
            return None, "h2"
        y, c2, _ = _descent_direction(an, inst, tol, +1)
        alpha = math.sqrt(max(mt - L, 0.0) / c2)
        return an.y_hat + alpha * y, "h2"
    if np.isfinite(U):
        if mt > U + eps:
            return None, "h3"
        y, c2, _ = _descent_direction(an, inst, tol, -1)
        alpha = math.sqrt(max(U - mt, 0.0) / -c2)
        return an.y_hat + alpha * y, "h3"
    if abs(mt) <= eps:
        return np.zeros(k), "h4"
    y, c2, c1 = _descent_direction(an, inst, tol, 1 if mt > 0 else -1)
    t = _positive_root(c2, 2 * c1, -mt)
    if t is None:
        raise InternalInconsistency("level along the solution set not reached")
    return t * y, "h4"


def solve_singleton_case(inst: Qp1qcInstance, sigma_star: float, tol: Tolerance = DEFAULT_TOL) -> Solution:
    if sigma_star < 0:
        raise PreconditionViolated("sigma* must be nonnegative")
    an = analyze_affine_set(inst, sigma_star, tol)
    y, sub = solve_on_affine_set(an, inst, tol, equality=sigma_star > 0)
    if y is None:
        dv = dual_value(inst, sigma_star, tol)
        return Solution("unattained", sub, value=dv.value, sigma=float(sigma_star), details={"analysis": an})
    x = an.sset.base + an.sset.V @ y
    cert = kkt_verify(inst, x, sigma_star)
    return Solution("attained", sub, value=inst.F(x), x=x, sigma=float(sigma_star), certificate=cert, details={"analysis": an})


# ---------------------------------------------------------------------------
# proper interval: always attained


def _x_of_sigma(inst, s):
    M = inst.A + s * inst.B
    x = np.linalg.solve(M, inst.f + s * inst.g)
    w = inst.B @ x - inst.g
    psi = inst.G(x) - inst.mu
    dpsi = -2.0 * float(w @ np.linalg.solve(M, w))
    return x, psi, dpsi


def _endpoint(inst, s, tol):
    """Solution at an endpoint of the pencil interval, or None."""
    s = max(s, 0.0)
    if not range_contains(inst.A + s * inst.B, inst.f + s * inst.g, tol):
        return None
    an = analyze_affine_set(inst, s, tol)
    y, _ = solve_on_affine_set(an, inst, tol, equality=s > 0)
    if y is None:
        return None
    return an.sset.base + an.sset.V @ y


def solve_dual_slater(inst: Qp1qcInstance, iv: PencilInterval, tol: Tolerance = DEFAULT_TOL):
    """Maximize the concave dual over ``[max(0, lo), hi]`` and recover ``x``.

    ``inst`` must have ``A + sigma B`` positive definite for ``sigma``
    strictly inside ``iv``.  The dual derivative is
    ``psi(sigma) = G(x(sigma)) - mu`` with ``x(sigma)`` the stationary point
    of the Lagrangian; ``psi`` is nonincreasing, so the maximizer is an
    endpoint or the root of ``psi``.  Endpoints go through the affine
    solution set, which also covers the hard case.

    Returns ``(x, sigma)``.
    """
    lo, hi = iv.lo, iv.hi
    a = max(0.0, lo)
    if inst.n == 0:
        return np.zeros(0), a
    if a >= hi:
        x = _endpoint(inst, a, tol)
        if x is None:
            raise InternalInconsistency("no solution at the only admissible multiplier")
        return x, a

    gtol = lambda x: 1e-13 * inst.G_scale(x)

    # left end
    if a > lo:
        x, psi, _ = _x_of_sigma(inst, a)
        if psi <= gtol(x):
            return x, a
        left = a
    else:
        x = _endpoint(inst, a, tol)
        if x is not None:
            return x, a
        left = None

    # right end
    if np.isfinite(hi):
        x = _endpoint(inst, hi, tol)
        if x is not None:
            return x, hi
        right = None
    else:
        s = max(1.0, 2.0 * a)
        for _ in range(MAX_ITER):
            x, psi, _ = _x_of_sigma(inst, s)
            if psi < 0:
                break
            s *= 2.0
        else:
            raise NonConvergence("could not bracket the multiplier from above")
        right = s

    mid = interior_point(PencilInterval.interval(a, hi)) if right is None else None
    if left is None:
        m = mid if mid is not None else 0.5 * (a + right)
        left = _shrink_toward(inst, a, m, sign=+1)
    if right is None:
        m = mid if mid is not None else left + 1.0
        right = _shrink_toward(inst, hi, max(m, left), sign=-1)
        if right <= left:
            right = _shrink_toward(inst, hi, 0.5 * (left + hi), sign=-1)
    return _secular_root(inst, left, right)


def _shrink_toward(inst, end, start, sign):
    """Point between ``end`` and ``start`` where ``psi`` has the given sign."""
    s = start
    for k in range(80):
        _, psi, _ = _x_of_sigma(inst, s)
        if sign * psi > 0:
            return s
        s = end + (start - end) * 0.5 ** (k + 1)
    raise NonConvergence("could not bracket the multiplier near an endpoint")


def _secular_root(inst, left, right):
    """Safeguarded Newton on ``psi(sigma) = 0`` over ``[left, right]``."""
    s = 0.5 * (left + right)
    for _ in range(MAX_ITER):
        x, psi, dpsi = _x_of_sigma(inst, s)
        if abs(psi) <= 1e-13 * inst.G_scale(x):
            break
        if psi > 0:
            left = s
        else:
            right = s
        if right - left <= 4e-16 * (1.0 + abs(s)):
            break
        step = s - psi / dpsi if dpsi < 0 else math.nan
        s = step if left < step < right else 0.5 * (left + right)
    else:
        raise NonConvergence("multiplier iteration did not converge")
    return x, s


def solve_interval_case(
    inst: Qp1qcInstance,
    iv: PencilInterval,
    sigma: float,
    tol: Tolerance = DEFAULT_TOL,
    reduced: ReducedPencil | None = None,
) -> Solution:
    red = reduced if reduced is not None else reduce_pencil(inst.A, inst.B, tol)
    U, V = red.U, red.V
    a = V.T @ inst.f
    b = V.T @ inst.g
    vscale = max(np.linalg.norm(inst.f), np.linalg.norm(inst.g))
    a_zero = _is_zero_vec(a, vscale, tol)
    b_zero = _is_zero_vec(b, vscale, tol)

    if a_zero and b_zero:
        case = "d"
        sub = Qp1qcInstance(red.Ar, red.Br, U.T @ inst.f, U.T @ inst.g, inst.mu)
        u, s_star = solve_dual_slater(sub, iv, tol)
        x = U @ u
    elif a_zero:
        case = "e"
        s_star = 0.0
        u = pinv(red.Ar, tol) @ (U.T @ inst.f)
        xu = U @ u
        shift = max(0.0, (inst.G(xu) - inst.mu) / (2.0 * float(b @ b)))
        x = xu + V @ (shift * b)
    else:
        case = "f"
        if b_zero:
            raise InternalInconsistency("V'f != 0 with V'g = 0 cannot be bounded")
        s_star = -float(a @ b) / float(b @ b)
        if s_star <= 0:
            raise InternalInconsistency(f"case (f) needs a positive multiplier, got {s_star}")
        y = pinv(red.Ar + s_star * red.Br, tol) @ (U.T @ (inst.f + s_star * inst.g))
        xu = U @ y
        z = (inst.G(xu) - inst.mu) / (2.0 * float(b @ b)) * b
        x = xu + V @ z

    cert = kkt_verify(inst, x, s_star)
    return Solution("attained", case, value=inst.F(x), x=x, sigma=float(s_star), certificate=cert)


# ---------------------------------------------------------------------------
# top level


def classify_and_solve(inst: Qp1qcInstance, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> Solution:
    """Classify ``inst`` and solve it.

    Every instance gets exactly one status: ``infeasible``, ``unbounded``
    (with a witness path), ``unattained`` (with the infimum and the
    multiplier) or ``attained`` (with a verified optimality certificate).
    """
    from .witness import unbounded_witness

    if not slater_holds(inst, tol):
        return solve_no_slater(inst, tol)
    red = reduce_pencil(inst.A, inst.B, tol)
    iv = pencil_interval(inst.A, inst.B, tol, reduced=red)
    sigma, fcase = feasibility_system(inst, iv, tol, reduced=red)
    details = {"pencil": iv, "feasibility_case": fcase}
    if sigma is None:
        ray = unbounded_witness(inst, iv, tol, seed=seed)
        return Solution("unbounded", fcase, value=-math.inf, ray=ray, details=details)
    if iv.is_interval:
        sol = solve_interval_case(inst, iv, sigma, tol, reduced=red)
    else:
        sol = solve_singleton_case(inst, iv.sigma, tol)
    sol.details.update(details)
    return sol
