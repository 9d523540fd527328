"""Witness paths for unbounded instances.

A witness is a path ``x(t) = base + t*d + t^2*c`` that stays feasible for
all ``t >= 0`` while ``F(x(t)) -> -inf``.  Along such a path both ``F`` and
``G`` are polynomials in ``t`` of degree at most four, so a candidate is
checked exactly from its coefficients instead of by sampling.

Straight rays (``c = 0``) are tried first.  When ``B`` has a null vector
``w`` with ``g'w != 0`` a candidate ``d`` can also be bent along ``w`` so
that ``G`` stays at ``mu``; this covers unbounded instances whose feasible
set contains no divergent ray, such as ``x1^2 <= x2`` with ``F = -2 x1``.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize_scalar

from .linalg import DEFAULT_TOL, Tolerance, null_basis, sym_eig
from .model import Qp1qcInstance, Ray
from .pencil import PencilInterval

SIGMA_PROBES = (0.0, 0.1, 1.0, 10.0)


def _quad_poly(M, v, base, d, c):
    """Coefficients (low to high) of ``x'Mx - 2v'x`` along ``base + t d + t^2 c``."""
    xs = (base, d, c)
    coef = np.zeros(5)
    for i, xi in enumerate(xs):
        Mxi = M @ xi
        for j, xj in enumerate(xs):
            coef[i + j] += xj @ Mxi
        coef[i] -= 2.0 * (v @ xi)
    return coef


def _trim(coef, scale):
    out = coef.copy()
    out[np.abs(out) <= scale] = 0.0
    nz = np.flatnonzero(out)
    return out[: nz[-1] + 1] if nz.size else np.zeros(1)


def _path_scale(inst, base, d, c):
    s = 1.0 + np.linalg.norm(base) + np.linalg.norm(d) + np.linalg.norm(c)
    return inst.scale() * s * s


def _feasible_from(inst, Gc, tol_abs):
    """Smallest ``T >= 0`` with ``G(x(t)) <= mu`` for every ``t >= T``, or None."""
    q = Gc.copy()
    q[0] -= inst.mu
    q = _trim(q, tol_abs)
    if len(q) > 1 and q[-1] > 0:
        return None
    if len(q) == 1:
        return 0.0 if q[0] <= tol_abs else None
    roots = P.polyroots(q)
    real = roots[np.abs(roots.imag) <= 1e-9 * (1 + np.abs(roots.real))].real
    real = real[real >= 0]
    if P.polyval(0.0, q) <= tol_abs and not np.any(P.polyval(real, q) > tol_abs):
        crit = P.polyroots(P.polyder(q)) if len(q) > 2 else np.zeros(0)
        crit = crit[np.abs(crit.imag) <= 1e-9 * (1 + np.abs(crit.real))].real
        crit = crit[crit >= 0]
        if not np.any(P.polyval(crit, q) > tol_abs):
            return 0.0
    T = float(real.max()) if real.size else 0.0
    return T * (1.0 + 1e-6) + 1e-6


def _diverges(Fc, tol_abs):
    f = _trim(Fc, tol_abs)
    return len(f) > 1 and f[-1] < 0


def _reparametrize(base, d, c, T):
    """Same path started at ``t = T``."""
    return base + T * d + T * T * c, d + 2.0 * T * c, c


def _try_path(inst, base, d, c):
    eps = 1e-9 * _path_scale(inst, base, d, c)
    Gc = _quad_poly(inst.B, inst.g, base, d, c)
    Fc = _quad_poly(inst.A, inst.f, base, d, c)
    if not _diverges(Fc, eps):
        return None
    T = _feasible_from(inst, Gc, eps)
    if T is None:
        return None
    # start past the last critical point of F so that it decreases throughout
    dF = _trim(P.polyder(Fc), eps)
    if len(dF) > 1:
        crit = P.polyroots(dF)
        crit = crit[np.abs(crit.imag) <= 1e-9 * (1 + np.abs(crit.real))].real
        if crit.size and crit.max() > 0:
            T = max(T, float(crit.max()) * (1.0 + 1e-6) + 1e-6)
    if T > 0:
        base, d, c = _reparametrize(base, d, c, T)
    # speed up so that F drops by at least one unit at t = 1
    for _ in range(60):
        if inst.F(base + d + c) <= inst.F(base) - 1.0:
            break
        d, c = 4.0 * d, 16.0 * c
    return Ray(base, d, c if np.any(c) else None)


def _bent(inst, base, d, w, gw):
    """Parabola through ``base`` along ``d`` keeping ``G = mu`` via ``w``."""
    # G(base + t d + s w) = G(base + t d) - 2 s g'w  since Bw = 0
    Gc = _quad_poly(inst.B, inst.g, base, d, np.zeros_like(d))
    s0 = (Gc[0] - inst.mu) / (2.0 * gw)
    s1 = Gc[1] / (2.0 * gw)
    s2 = Gc[2] / (2.0 * gw)
    return base + s0 * w, d + s1 * w, s2 * w


def _slater_points(inst, tol):
    pts = []
    ed = sym_eig(inst.B)
    w, Q = ed.values, ed.vectors
    cut = tol.rel * max(1.0, np.abs(w).max(initial=0.0))
    if inst.mu >= 0:  # the origin is feasible; rays need no interior start
        pts.append(np.zeros(inst.n))
    if w.size and w[0] < -cut:
        v = Q[:, 0] * (1.0 if inst.g @ Q[:, 0] >= 0 else -1.0)
        lam, gv = w[0], float(inst.g @ v)
        # lam t^2 - 2 gv t <= mu - 1
        t = (2 * gv - np.sqrt(4 * gv * gv - 4 * lam * (1.0 - inst.mu) + 0j).real) / (2 * lam)
        pts.append(max(float(t), 0.0) * v + v)
    Z = Q[:, np.abs(w) <= cut]
    gz = Z @ (Z.T @ inst.g)
    if np.linalg.norm(gz) > tol.rel * max(1.0, np.linalg.norm(inst.g)):
        u = gz / np.linalg.norm(gz)
        pts.append(u * max(1.0, (1.0 - inst.mu) / (2.0 * float(inst.g @ u))))
    if not pts:
        xb = np.linalg.pinv(inst.B) @ inst.g
        if inst.G(xb) < inst.mu:
            pts.append(xb)
    return pts


def _min_eig_vecs(M, tol):
    ed = sym_eig(M)
    w, Q = ed.values, ed.vectors
    if not w.size:
        return []
    band = max(1e-8, 1e-6 * np.abs(w).max())
    return [Q[:, i] for i in np.flatnonzero(w <= w[0] + band)]


def _dines_vecs(inst, tol):
    """Minimum eigenvectors of ``(1-l)A + lB`` at the best ``l`` in ``[0, 1]``."""
    phi = lambda lam: -sym_eig((1 - lam) * inst.A + lam * inst.B).values[0]
    res = minimize_scalar(phi, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10})
    lam = float(res.x)
    E = np.column_stack(_min_eig_vecs((1 - lam) * inst.A + lam * inst.B, tol))
    out = [E[:, i] for i in range(E.shape[1])]
    if E.shape[1] > 1:
        Ae, Be = E.T @ inst.A @ E, E.T @ inst.B @ E
        for M in (Ae, Be, Ae + Be, Ae - Be):
            _, q = np.linalg.eigh(0.5 * (M + M.T))
            out.extend(E @ q[:, i] for i in range(q.shape[1]))
    return out


def _candidates(inst, iv, tol, rng):
    cands = []
    cands.extend(_dines_vecs(inst, tol))
    sigmas = set(SIGMA_PROBES)
    for s in (iv.lo, iv.hi):
        if np.isfinite(s) and s >= 0:
            sigmas.add(float(s))
    for s in sorted(sigmas):
        M = inst.A + s * inst.B
        cands.extend(sym_eig(M).vectors.T)
        N = null_basis(M, tol)
        r = inst.f + s * inst.g
        if N.shape[1]:
            cands.append(N @ (N.T @ r))
    QB = sym_eig(inst.B).vectors
    cands.extend(QB.T)
    NB = null_basis(inst.B, tol)
    cands.extend(NB.T)
    if NB.shape[1]:
        cands.append(NB @ (NB.T @ inst.f))
        cands.append(NB @ (NB.T @ inst.g))
        _, q = np.linalg.eigh(NB.T @ inst.A @ NB)
        cands.extend((NB @ q).T)
    base_neg = QB[:, 0]
    extra = [v + base_neg for v in cands[: 4 * inst.n]]
    cands.extend(extra)
    cands.extend(rng.standard_normal((4 * inst.n, inst.n)))
    out = []
    for v in cands:
        nv = np.linalg.norm(v)
        if nv > 0:
            out.append(v / nv)
    return out


def unbounded_witness(inst: Qp1qcInstance, iv: PencilInterval, tol: Tolerance = DEFAULT_TOL, seed: int = 0):
    """Search for a feasible path along which ``F`` diverges.

    Returns a :class:`Ray` or None when no candidate passes the exact
    polynomial test.
    """
    rng = np.random.default_rng(seed)
    bases = _slater_points(inst, tol)
    if not bases:
        return None
    dirs = _candidates(inst, iv, tol, rng)
    zero = np.zeros(inst.n)
    D = np.array(dirs)
    D = np.concatenate([D, -D])
    # a straight ray needs d'Bd <= 0 and d'Ad <= 0; screen all candidates at once
    qA = np.einsum("ij,jk,ik->i", D, inst.A, D)
    qB = np.einsum("ij,jk,ik->i", D, inst.B, D)
    eps = 1e-9 * inst.scale()
    keep = D[(qA <= eps) & (qB <= eps)]
    for base in bases:
        for sd in keep:
            ray = _try_path(inst, base, sd, zero)
            if ray is not None:
                return ray
    NB = null_basis(inst.B, tol)
    if NB.shape[1]:
        gz = NB @ (NB.T @ inst.g)
        if np.linalg.norm(gz) > tol.rel * max(1.0, np.linalg.norm(inst.g)):
            w = gz / np.linalg.norm(gz)
            gw = float(inst.g @ w)
            for base in bases:
                for d in dirs:
                    for sd in (d, -d):
                        b0, d0, c0 = _bent(inst, base, sd, w, gw)
                        ray = _try_path(inst, b0, d0, c0)
                        if ray is not None:
                            return ray
    return None
