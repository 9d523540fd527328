"""Positive semidefinite pencil analysis for a pair of symmetric matrices.

The set ``{s : A + s B is PSD}`` is always an interval (possibly empty or a
single point).  Its finite endpoints are roots of ``det(U'AU + s U'BU)``
where ``U`` spans the complement of the joint null space of ``A`` and ``B``.
This module computes that interval and, where possible, a congruence that
diagonalizes both matrices at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import minimize_scalar

from .exceptions import InternalInconsistency
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_sym,
    inv_sqrt_pd,
    is_psd,
    joint_null_split,
    lambda_min,
)

INF = math.inf


class _AllSigma:
    """Marker returned when ``det(M + sN)`` vanishes identically."""

    def __repr__(self):
        return "ALL_SIGMA"


ALL_SIGMA = _AllSigma()


@dataclass(frozen=True)
class PencilInterval:
    kind: str  # "empty" | "singleton" | "interval"
    lo: float = math.nan
    hi: float = math.nan

    @classmethod
    def empty(cls):
        return cls("empty")

    @classmethod
    def singleton(cls, s):
        return cls("singleton", float(s), float(s))

    @classmethod
    def interval(cls, lo, hi):
        if not lo < hi:
            raise ValueError(f"interval needs lo < hi, got ({lo}, {hi})")
        return cls("interval", float(lo), float(hi))

    @property
    def is_empty(self):
        return self.kind == "empty"

    @property
    def is_singleton(self):
        return self.kind == "singleton"

    @property
    def is_interval(self):
        return self.kind == "interval"

    @property
    def sigma(self):
        return self.lo if self.is_singleton else None

    def contains(self, s, margin=0.0):
        """Membership in the closed set, shrunk (margin > 0) or grown (< 0)."""
        if self.is_empty:
            return False
        return self.lo + margin <= s <= self.hi - margin

    def to_dict(self):
        def enc(v):
            if v == INF:
                return "+inf"
            if v == -INF:
                return "-inf"
            return float(v)

        if self.is_empty:
            return {"kind": "empty"}
        if self.is_singleton:
            return {"kind": "singleton", "sigma": enc(self.lo)}
        return {"kind": "interval", "lo": enc(self.lo), "hi": enc(self.hi)}


@dataclass(frozen=True)
class ReducedPencil:
    V: np.ndarray  # joint null space basis
    U: np.ndarray  # orthogonal complement
    Ar: np.ndarray
    Br: np.ndarray

    @property
    def m(self):
        return self.Ar.shape[0]


@dataclass(frozen=True)
class SdcResult:
    status: str  # "sdc" | "not_sdc" | "unknown"
    C: np.ndarray | None = None
    dA: np.ndarray | None = None
    dB: np.ndarray | None = None
    method: str = ""
    cond_C: float | None = None
    residual: float | None = None

    def to_dict(self):
        out = {"status": self.status, "method": self.method, "cond_C": self.cond_C}
        if self.status == "sdc":
            out["residual"] = self.residual
            out["dA"] = self.dA.tolist()
            out["dB"] = self.dB.tolist()
            out["C"] = self.C.tolist()
        return out


def reduce_pencil(A, B, tol: Tolerance = DEFAULT_TOL) -> ReducedPencil:
    A = as_sym(A)
    B = as_sym(B)
    V, U = joint_null_split(A, B, tol)
    Ar = as_sym(U.T @ A @ U) if U.shape[1] else np.zeros((0, 0))
    Br = as_sym(U.T @ B @ U) if U.shape[1] else np.zeros((0, 0))
    return ReducedPencil(V, U, Ar, Br)


# ---------------------------------------------------------------------------
# determinant polynomial


def _cluster(roots, gap=1e-7):
    out = []
    for r in sorted(roots):
        if out and abs(r - out[-1][-1]) <= gap * (1.0 + abs(r)):
            out[-1].append(r)
        else:
            out.append([r])
    return [float(np.mean(c)) for c in out]


def _is_singular_pencil(M, N, tol):
    scale = max(1.0, np.linalg.norm(M, 2), np.linalg.norm(N, 2))
    ratio = np.linalg.norm(M, 2) / max(np.linalg.norm(N, 2), 1e-300)
    ratio = min(max(ratio, 1e-3), 1e3)
    for s in (0.3719, -1.4142, 2.7183):
        smin = np.linalg.svd(M + s * ratio * N, compute_uv=False)[-1]
        if smin > 1e3 * tol.rel * scale:
            return False
    return True


def _roots_by_interpolation(M, N, tol):
    m = M.shape[0]
    nm = np.linalg.norm(N, 2)
    s = max(np.linalg.norm(M, 2) / nm, 1e-3) if nm > 0 else 1.0
    # Chebyshev nodes on [-s, s]; fit the degree-m determinant exactly
    k = np.arange(m + 1)
    t = np.cos(np.pi * (k + 0.5) / (m + 1))
    vals = np.array([np.linalg.det(M + (s * ti) * N) for ti in t])
    coef = cheb.chebfit(t, vals, m)
    big = np.max(np.abs(coef))
    if big == 0:
        return None
    coef = cheb.chebtrim(coef, tol=1e-12 * big)
    if coef.size <= 1:
        return []
    return s * cheb.chebroots(coef)


def _roots_by_qz(M, N):
    alpha, beta = scipy.linalg.eigvals(M, -N, homogeneous_eigvals=True)
    scale = max(np.max(np.abs(alpha)), np.max(np.abs(beta)), 1e-300)
    finite = np.abs(beta) > 1e-13 * scale
    return alpha[finite] / beta[finite]


def det_poly_roots(M, N, tol: Tolerance = DEFAULT_TOL, method: str = "auto"):
    """Distinct real roots of ``s -> det(M + s N)``, sorted ascending.

    ``method="interp"`` samples the determinant at ``m + 1`` Chebyshev nodes,
    recovers the polynomial and takes the eigenvalues of its companion
    (colleague) matrix.  ``method="qz"`` reads the roots off the generalized
    eigenvalues of ``(M, -N)``, which stays accurate for large ``m``.  The
    default uses interpolation up to ``m = 8``.

    Returns ``ALL_SIGMA`` when the determinant vanishes identically.
    """
    M = as_sym(M)
    N = as_sym(N)
    m = M.shape[0]
    if m == 0:
        return []
    if _is_singular_pencil(M, N, tol):
        return ALL_SIGMA
    if method == "auto":
        method = "interp" if m <= 8 else "qz"
    if method == "interp":
        raw = _roots_by_interpolation(M, N, tol)
        if raw is None:
            return ALL_SIGMA
    elif method == "qz":
        raw = _roots_by_qz(M, N)
    else:
        raise ValueError(f"unknown method {method!r}")
    raw = np.asarray(raw, dtype=complex)
    # a double root splits into a complex pair of size ~sqrt(eps)
    imag_tol = max(math.sqrt(tol.rel), 1e-6)
    real = [z.real for z in raw if abs(z.imag) <= imag_tol * (1.0 + abs(z.real))]
    return _cluster(real)


# ---------------------------------------------------------------------------
# PSD interval


def _phi(Ar, Br, s):
    return lambda_min(Ar + s * Br)


def _psd_threshold(Ar, Br, s, tol):
    return tol.rel * max(1.0, np.linalg.norm(Ar + s * Br, 2))


def _maximize_phi(Ar, Br, lo, hi):
    """Maximize the concave function s -> lambda_min(Ar + s Br) on [lo, hi]."""
    res = minimize_scalar(
        lambda s: -_phi(Ar, Br, s),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-15 * (1.0 + abs(lo) + abs(hi)), "maxiter": 500},
    )
    return float(res.x), -float(res.fun)


def _kink_search(Ar, Br, lo, hi):
    """Maximize concave ``lambda_min(Ar + s Br)`` on ``[lo, hi]`` by bisection.

    The slope at ``s`` is ``v'Br v`` for the minimizing eigenvector ``v``;
    unlike a parabolic search this converges at a sharp kink.
    """
    best = max(((s, _phi(Ar, Br, s)) for s in (lo, hi)), key=lambda t: t[1])
    for _ in range(200):
        if hi - lo <= 4 * np.finfo(float).eps * (1.0 + abs(lo) + abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        w, Q = np.linalg.eigh(Ar + mid * Br)
        if w[0] > best[1]:
            best = (mid, float(w[0]))
        slope = Q[:, 0] @ Br @ Q[:, 0]
        if slope > 0:
            lo = mid
        else:
            hi = mid
    return float(best[0]), float(best[1])


def _interval_from_interior(Ar, Br, s0):
    """Exact endpoints of the PSD interval from a point where Ar + s0 Br > 0.

    With ``W = Ar + s0 Br`` and ``K = W^{-1/2} Br W^{-1/2}`` the pencil is PSD
    iff ``1 + (s - s0) k >= 0`` for every eigenvalue ``k`` of ``K``.
    """
    P = inv_sqrt_pd(Ar + s0 * Br)
    k = np.linalg.eigvalsh(as_sym(P @ Br @ P))
    kscale = max(1.0, float(np.max(np.abs(k))))
    neg = k[k < -1e-14 * kscale]
    pos = k[k > 1e-14 * kscale]
    hi = s0 + float(np.min(-1.0 / neg)) if neg.size else INF
    lo = s0 - float(np.min(1.0 / pos)) if pos.size else -INF
    return lo, hi


def _snap_zero(s, scale, tol):
    return 0.0 if abs(s) <= tol.rel * max(1.0, scale) else s


def _snap_singleton(Ar, Br, s, sscale, tol):
    # a kink maximum is only located to about sqrt(eps); prefer exactly zero
    # when zero itself passes the PSD test
    if abs(s) <= 1e-6 * sscale and _phi(Ar, Br, 0.0) >= -_psd_threshold(Ar, Br, 0.0, tol):
        return 0.0
    return _snap_zero(s, sscale, tol)


def pencil_interval(A, B, tol: Tolerance = DEFAULT_TOL, reduced: ReducedPencil | None = None):
    """The set of ``s`` with ``A + s B`` positive semidefinite."""
    red = reduced if reduced is not None else reduce_pencil(A, B, tol)
    Ar, Br = red.Ar, red.Br
    if red.m == 0:
        return PencilInterval.interval(-INF, INF)
    scale = max(1.0, np.linalg.norm(Ar, 2), np.linalg.norm(Br, 2))
    if np.linalg.norm(Br, 2) <= tol.rel * scale:
        return PencilInterval.interval(-INF, INF) if is_psd(Ar, tol) else PencilInterval.empty()

    sscale = max(1.0, np.linalg.norm(Ar, 2) / np.linalg.norm(Br, 2))
    roots = det_poly_roots(Ar, Br, tol)
    if roots is ALL_SIGMA:
        return _singular_pencil_interval(Ar, Br, tol, sscale)

    # candidate probes strictly between / outside the roots
    if roots:
        probes = [roots[0] - sscale, roots[-1] + sscale]
        probes += [0.5 * (a + b) for a, b in zip(roots[:-1], roots[1:])]
    else:
        probes = []
    probes.append(0.0)
    probes = sorted(set(probes))
    best = None
    for s in probes:
        v = _phi(Ar, Br, s)
        if v > _psd_threshold(Ar, Br, s, tol):
            w = v / max(1.0, np.linalg.norm(Ar + s * Br, 2))
            if best is None or w > best[1]:
                best = (s, w)
    _check_contiguous(Ar, Br, roots, probes, tol)
    if best is not None:
        lo, hi = _interval_from_interior(Ar, Br, best[0])
        if np.isfinite(lo):
            lo = _snap_zero(lo, sscale, tol)
        if np.isfinite(hi):
            hi = _snap_zero(hi, sscale, tol)
        if lo < hi:
            return PencilInterval.interval(lo, hi)
        return PencilInterval.singleton(lo)

    # no interior point: at most a single PSD point, located at a root.
    # phi is concave, so one bounded search over the root span finds its
    # maximum; kinks sit at roots, so the roots themselves are candidates too.
    if not roots:
        return PencilInterval.empty()
    s, v = _maximize_phi(Ar, Br, roots[0] - 1e-3 * sscale, roots[-1] + 1e-3 * sscale)
    # a double root may split into two close real roots; search again between
    # the roots bracketing the first estimate, where the tolerance is finer
    left = max([r for r in roots if r <= s], default=s - 1e-3 * sscale)
    right = min([r for r in roots if r >= s], default=s + 1e-3 * sscale)
    if right > left:
        s2, v2 = _kink_search(Ar, Br, left, right)
        if v2 > v:
            s, v = s2, v2
    for r in roots:
        vr = _phi(Ar, Br, r)
        if vr > v:
            s, v = r, vr
    if v < -_psd_threshold(Ar, Br, s, tol):
        return PencilInterval.empty()
    return PencilInterval.singleton(_snap_singleton(Ar, Br, s, sscale, tol))


def _check_contiguous(Ar, Br, roots, probes, tol):
    pts = sorted(set(list(roots) + list(probes)))
    flags = [_phi(Ar, Br, s) >= -_psd_threshold(Ar, Br, s, tol) for s in pts]
    idx = [i for i, f in enumerate(flags) if f]
    if idx and idx[-1] - idx[0] + 1 != len(idx):
        raise InternalInconsistency(
            "PSD probes do not form a contiguous block; tolerance likely mismatched"
        )


def _singular_pencil_interval(Ar, Br, tol, sscale):
    # det vanishes identically, so no point is positive definite: the PSD set is
    # empty or a single point.  lambda_min is concave; scan then refine.
    grid = np.concatenate([-np.logspace(6, -3, 40), [0.0], np.logspace(-3, 6, 40)]) * sscale
    vals = np.array([_phi(Ar, Br, s) for s in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    s, v = _maximize_phi(Ar, Br, lo, hi)
    if v >= -_psd_threshold(Ar, Br, s, tol):
        return PencilInterval.singleton(_snap_singleton(Ar, Br, s, sscale, tol))
    return PencilInterval.empty()


def interior_point(iv: PencilInterval):
    if not iv.is_interval:
        return None
    lo, hi = iv.lo, iv.hi
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    if np.isfinite(lo):
        return lo + 1.0
    if np.isfinite(hi):
        return hi - 1.0
    return 0.0


# ---------------------------------------------------------------------------
# simultaneous diagonalization by congruence


def _diag_residual(A, B, C):
    CA = C.T @ A @ C
    CB = C.T @ B @ C
    offA = CA - np.diag(np.diag(CA))
    offB = CB - np.diag(np.diag(CB))
    return max(np.linalg.norm(offA), np.linalg.norm(offB)), np.diag(CA), np.diag(CB)


def _finish(A, B, CU, red, method):
    C = np.hstack([CU, red.V]) if red.V.shape[1] else CU
    C = C / np.linalg.norm(C, axis=0)
    resid, dA, dB = _diag_residual(A, B, C)
    return SdcResult("sdc", C, dA, dB, method, float(np.linalg.cond(C)), float(resid))


def _from_definite_combination(red, c, s):
    """Congruence for the reduced pair given ``c Ar + s Br`` positive definite."""
    P = inv_sqrt_pd(c * red.Ar + s * red.Br)
    K = as_sym(P @ (red.Ar if abs(s) >= abs(c) else red.Br) @ P)
    _, Q = np.linalg.eigh(K)
    return red.U @ P @ Q


def _best_angle(Ar, Br, grid=720):
    """Maximize lambda_min(cos t Ar + sin t Br) over the circle."""
    th = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    vals = np.array([lambda_min(np.cos(t) * Ar + np.sin(t) * Br) for t in th])
    i = int(np.argmax(vals))
    step = th[1] - th[0]
    res = minimize_scalar(
        lambda t: -lambda_min(np.cos(t) * Ar + np.sin(t) * Br),
        bounds=(th[i] - step, th[i] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x), -float(res.fun)


def _regular_pencil_split(red, tol):
    """For a regular reduced pencil pick M nonsingular and T = M^{-1} N.

    Returns (M, T) or None if no well-conditioned combination is found.
    """
    Ar, Br = red.Ar, red.Br
    best = None
    for t in np.linspace(0.0, np.pi, 181, endpoint=False):
        c, s = np.cos(t), np.sin(t)
        M = c * Ar + s * Br
        sv = np.linalg.svd(M, compute_uv=False)
        q = sv[-1] / max(sv[0], 1e-300)
        if best is None or q > best[0]:
            best = (q, c, s)
    q, c, s = best
    if q <= 1e3 * tol.rel:
        return None
    M = c * Ar + s * Br
    N = -s * Ar + c * Br
    return M, np.linalg.solve(M, N)


def _two_by_two_refutes(red, tol):
    """Closed-form SDC decision for a reduced pair of size 2.

    With ``M`` nonsingular, the pair is SDC iff ``T = M^{-1} N`` is
    diagonalizable over the reals: real distinct eigenvalues, or ``T`` a
    multiple of the identity.  Returns True when SDC is refuted.
    """
    split = _regular_pencil_split(red, tol)
    if split is None:
        return False
    _, T = split
    tr = np.trace(T)
    disc = tr * tr - 4.0 * np.linalg.det(T)
    tscale = max(1.0, np.linalg.norm(T)) ** 2
    if disc < -1e-9 * tscale:
        return True  # complex pair
    if disc > 1e-9 * tscale:
        return False
    lam = 0.5 * tr
    return np.linalg.norm(T - lam * np.eye(2)) > 1e-6 * max(1.0, np.linalg.norm(T))


def _from_eigenvectors(red, tol):
    """SDC congruence from the real eigenvectors of ``M^{-1} N``."""
    split = _regular_pencil_split(red, tol)
    if split is None:
        return None
    M, T = split
    w, X = np.linalg.eig(T)
    if np.max(np.abs(w.imag)) > 1e-9 * max(1.0, np.max(np.abs(w))):
        return None
    w = w.real
    X = X.real
    if np.linalg.cond(X) > 1e8:
        return None
    cols = []
    for grp in _cluster_indices(w):
        Xg = X[:, grp]
        if len(grp) > 1:
            Xg, _ = np.linalg.qr(Xg)
            _, R = np.linalg.eigh(as_sym(Xg.T @ M @ Xg))
            Xg = Xg @ R
        cols.append(Xg)
    return red.U @ np.hstack(cols)


def _cluster_indices(w, gap=1e-8):
    order = np.argsort(w)
    groups = []
    for i in order:
        if groups and abs(w[i] - w[groups[-1][-1]]) <= gap * (1 + abs(w[i])):
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


def _is_diagonal(M):
    return not np.any(M - np.diag(np.diag(M)))


def sdc_certificate(A, B, tol: Tolerance = DEFAULT_TOL) -> SdcResult:
    """Try to find a nonsingular ``C`` with ``C'AC`` and ``C'BC`` both diagonal."""
    A = as_sym(A)
    B = as_sym(B)
    n = A.shape[0]
    red = reduce_pencil(A, B, tol)
    scale = max(1.0, np.linalg.norm(A), np.linalg.norm(B))
    accept = 1e-7 * scale

    def ok(res):
        return res is not None and res.residual <= accept

    m = red.m
    if m == 0 or (_is_diagonal(A) and _is_diagonal(B)):
        return SdcResult("sdc", np.eye(n), np.diag(A).copy(), np.diag(B).copy(), "diagonal", 1.0, 0.0)
    if m == 1:
        res = _finish(A, B, red.U, red, "rank_one")
        if ok(res):
            return res

    iv = pencil_interval(A, B, tol, reduced=red)
    if iv.is_interval:
        s0 = interior_point(iv)
        res = _finish(A, B, _from_definite_combination(red, 1.0, s0), red, "S1")
        if ok(res):
            return res
    iv2 = pencil_interval(B, A, tol)
    if iv2.is_interval:
        s0 = interior_point(iv2)
        res = _finish(A, B, _from_definite_combination(red, s0, 1.0), red, "S2")
        if ok(res):
            return res

    rscale = max(1.0, np.linalg.norm(red.Ar, 2), np.linalg.norm(red.Br, 2))
    t, v = _best_angle(red.Ar, red.Br)
    if v > tol.rel * rscale:
        res = _finish(A, B, _from_definite_combination(red, np.cos(t), np.sin(t)), red, "S3")
        if ok(res):
            return res

    if m == 2 and _two_by_two_refutes(red, tol):
        return SdcResult("not_sdc", method="2x2")

    CU = _from_eigenvectors(red, tol)
    if CU is not None:
        res = _finish(A, B, CU, red, "eigenvectors")
        if ok(res):
            return res
    return SdcResult("unknown", method="exhausted")
