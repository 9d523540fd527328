"""Optimality certificates for candidate solutions."""
from __future__ import annotations

import numpy as np

from .linalg import Tolerance, lambda_min, null_basis
from .model import KktCertificate, Qp1qcInstance

CERT_TOL = Tolerance(rel=1e-7)


def kkt_verify(inst: Qp1qcInstance, x, sigma: float, tol: Tolerance = CERT_TOL) -> KktCertificate:
    """Check the four global optimality conditions at ``(x, sigma)``.

    All residuals are compared against ``tol.rel`` times the magnitude of the
    terms they are computed from.  A failing certificate is returned, not
    raised.
    """
    x = np.asarray(x, dtype=float)
    sigma = float(sigma)
    M = inst.A + sigma * inst.B
    r = inst.f + sigma * inst.g
    Gx = inst.G(x)
    gscale = inst.G_scale(x)
    feas = Gx - inst.mu
    stat = float(np.linalg.norm(M @ x - r))
    stat_scale = max(
        1.0,
        (np.linalg.norm(inst.A, 2) + abs(sigma) * np.linalg.norm(inst.B, 2)) * np.linalg.norm(x)
        + np.linalg.norm(inst.f)
        + abs(sigma) * np.linalg.norm(inst.g),
    )
    comp = abs(sigma * feas)
    lmin = lambda_min(M)
    passes = (
        sigma >= 0.0
        and feas <= tol.rel * gscale
        and stat <= tol.rel * stat_scale
        and comp <= tol.rel * max(1.0, sigma) * gscale
        and lmin >= -tol.rel * max(1.0, np.linalg.norm(M, 2))
    )
    return KktCertificate(x, sigma, float(feas), stat, float(comp), float(lmin), bool(passes))


def affine_certificate(inst: Qp1qcInstance, x, tol: Tolerance = CERT_TOL) -> KktCertificate:
    """Optimality on the affine feasible set ``{x : Bx = g}``.

    Used when no strictly feasible point exists; the problem is then a
    quadratic minimized over an affine set, which is solved exactly when the
    reduced gradient vanishes and the reduced Hessian is PSD.
    """
    x = np.asarray(x, dtype=float)
    Vb = null_basis(inst.B)
    feas = float(np.linalg.norm(inst.B @ x - inst.g))
    feas_scale = max(1.0, np.linalg.norm(inst.B, 2) * np.linalg.norm(x) + np.linalg.norm(inst.g))
    grad = inst.A @ x - inst.f
    stat = float(np.linalg.norm(Vb.T @ grad)) if Vb.shape[1] else 0.0
    stat_scale = max(1.0, np.linalg.norm(inst.A, 2) * np.linalg.norm(x) + np.linalg.norm(inst.f))
    lmin = lambda_min(Vb.T @ inst.A @ Vb) if Vb.shape[1] else np.inf
    passes = (
        feas <= tol.rel * feas_scale
        and inst.G(x) - inst.mu <= tol.rel * inst.G_scale(x)
        and stat <= tol.rel * stat_scale
        and lmin >= -tol.rel * max(1.0, np.linalg.norm(inst.A, 2))
    )
    return KktCertificate(x, None, feas, stat, 0.0, float(lmin), bool(passes), kind="affine")
