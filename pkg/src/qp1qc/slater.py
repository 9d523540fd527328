"""Instances without a strictly feasible point.

If no ``x`` has ``G(x) < mu`` then ``G`` is convex and bounded below by
``mu``: ``B`` is PSD, ``g`` lies in the range of ``B`` and
``-g'B^+g >= mu``.  The feasible set is then empty or the affine set
``{x : Bx = g}``, and the problem reduces to a quadratic over that set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificate import affine_certificate
from .exceptions import PreconditionViolated
from .linalg import DEFAULT_TOL, Tolerance, is_psd, null_basis, pinv, range_contains
from .model import Qp1qcInstance, Ray, Solution

CASE = "no_slater"


@dataclass(frozen=True)
class SlaterReduction:
    """Objective on ``x = B^+g + Vb Qh z`` written as ``z'diag(Dh)z + 2 Lam'z + alpha``."""

    x_base: np.ndarray
    Vb: np.ndarray
    Qh: np.ndarray
    Dh: np.ndarray
    Lam: np.ndarray
    alpha: float
    J: np.ndarray  # indices with Dh > 0


def _min_G(inst: Qp1qcInstance, tol: Tolerance):
    """``-g'B^+g`` and the equality band used to compare it against ``mu``."""
    Bp = pinv(inst.B, tol)
    m = -float(inst.g @ Bp @ inst.g)
    band = tol.rel * max(1.0, abs(inst.mu), abs(m))
    return m, band, Bp


def slater_holds(inst: Qp1qcInstance, tol: Tolerance = DEFAULT_TOL) -> bool:
    if inst.mu > 0:
        return True  # x = 0 is strictly feasible
    if not is_psd(inst.B, tol):
        return True
    if not range_contains(inst.B, inst.g, tol):
        return True
    m, band, _ = _min_G(inst, tol)
    return not (m >= inst.mu - band)


def reduce_no_slater(inst: Qp1qcInstance, tol: Tolerance = DEFAULT_TOL) -> SlaterReduction:
    Bp = pinv(inst.B, tol)
    xb = Bp @ inst.g
    Vb = null_basis(inst.B, tol)
    k = Vb.shape[1]
    if k == 0:
        empty = np.zeros(0)
        return SlaterReduction(xb, Vb, np.zeros((0, 0)), empty, empty, inst.F(xb), np.zeros(0, dtype=int))
    Dh, Qh = np.linalg.eigh(Vb.T @ inst.A @ Vb)
    Lam = Qh.T @ (Vb.T @ inst.A @ xb - Vb.T @ inst.f)
    alpha = float(xb @ inst.A @ xb - 2.0 * inst.f @ xb)
    dcut = tol.rel * max(1.0, np.linalg.norm(inst.A, 2))
    J = np.flatnonzero(Dh > dcut)
    return SlaterReduction(xb, Vb, Qh, Dh, Lam, alpha, J)


def solve_no_slater(inst: Qp1qcInstance, tol: Tolerance = DEFAULT_TOL) -> Solution:
    if slater_holds(inst, tol):
        raise PreconditionViolated("instance has a strictly feasible point")
    m, band, _ = _min_G(inst, tol)
    if m > inst.mu + band:
        return Solution("infeasible", CASE, details={"min_G": m})

    red = reduce_no_slater(inst, tol)
    if red.Vb.shape[1]:
        dcut = tol.rel * max(1.0, np.linalg.norm(inst.A, 2))
        lcut = tol.rel * max(1.0, np.linalg.norm(inst.A, 2) * np.linalg.norm(red.x_base) + np.linalg.norm(inst.f))
        W = red.Vb @ red.Qh
        neg = np.flatnonzero(red.Dh < -dcut)
        if neg.size:
            i = int(neg[np.argmin(red.Dh[neg])])
            d = W[:, i] * (-1.0 if red.Lam[i] > 0 else 1.0)
            d = d * max(1.0, 1.0 / np.sqrt(-red.Dh[i]))
            return Solution("unbounded", CASE, value=-np.inf, ray=Ray(red.x_base.copy(), d))
        flat = np.flatnonzero((np.abs(red.Dh) <= dcut) & (np.abs(red.Lam) > lcut))
        if flat.size:
            i = int(flat[np.argmax(np.abs(red.Lam[flat]))])
            d = -np.sign(red.Lam[i]) * W[:, i]
            d = d * max(1.0, 1.0 / (2.0 * abs(red.Lam[i])))
            return Solution("unbounded", CASE, value=-np.inf, ray=Ray(red.x_base.copy(), d))
        z = np.zeros_like(red.Dh)
        z[red.J] = -red.Lam[red.J] / red.Dh[red.J]
        x = red.x_base + W @ z
    else:
        x = red.x_base.copy()
    cert = affine_certificate(inst, x)
    return Solution("attained", CASE, value=inst.F(x), x=x, certificate=cert, details={"reduction": red})
