"""Problem instance and result types.

The problem is::

    inf  F(x) = x'Ax - 2 f'x
    s.t. G(x) = x'Bx - 2 g'x <= mu
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_sym

STATUSES = ("infeasible", "unbounded", "unattained", "attained")


@dataclass(frozen=True)
class Qp1qcInstance:
    A: np.ndarray
    B: np.ndarray
    f: np.ndarray
    g: np.ndarray
    mu: float

    def __post_init__(self):
        A = as_sym(self.A)
        B = as_sym(self.B)
        f = np.asarray(self.f, dtype=float).reshape(-1)
        g = np.asarray(self.g, dtype=float).reshape(-1)
        n = A.shape[0]
        if B.shape != (n, n) or f.shape != (n,) or g.shape != (n,):
            raise ValueError(
                f"inconsistent dimensions: A{A.shape} B{B.shape} f{f.shape} g{g.shape}"
            )
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g)) and np.isfinite(self.mu)):
            raise ValueError("instance has non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def F(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ self.A @ x - 2.0 * self.f @ x)

    def G(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ self.B @ x - 2.0 * self.g @ x)

    def scale(self) -> float:
        return max(
            1.0,
            np.linalg.norm(self.A, 2),
            np.linalg.norm(self.B, 2),
            np.linalg.norm(self.f),
            np.linalg.norm(self.g),
            abs(self.mu),
        )

    def G_scale(self, x) -> float:
        """Magnitude of the terms making up ``G(x) - mu``, for relative tests."""
        x = np.asarray(x, dtype=float)
        return max(1.0, abs(x @ self.B @ x) + 2.0 * abs(self.g @ x) + abs(self.mu))

    def conjugate(self, Q):
        """The instance in coordinates ``x = Q y`` (``Q`` orthogonal)."""
        Q = np.asarray(Q, dtype=float)
        return Qp1qcInstance(Q.T @ self.A @ Q, Q.T @ self.B @ Q, Q.T @ self.f, Q.T @ self.g, self.mu)

    def shift(self, c):
        """The instance in coordinates ``x = y + c``.

        ``F`` changes by the constant ``F(c)``, which the problem form has no
        slot for: optimal values of the result are ``v - F(c)``.
        """
        c = np.asarray(c, dtype=float)
        return Qp1qcInstance(self.A, self.B, self.f - self.A @ c, self.g - self.B @ c, self.mu - self.G(c))

    def to_dict(self):
        return {
            "n": self.n,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "f": self.f.tolist(),
            "g": self.g.tolist(),
            "mu": self.mu,
        }


@dataclass(frozen=True)
class Ray:
    """Witness path ``x(t) = base + t*direction + t^2*curvature`` for ``t >= 0``.

    ``curvature`` is zero for a straight ray; a parabolic arc is used when
    the feasible set contains no ray along which ``F`` diverges.
    """

    base: np.ndarray
    direction: np.ndarray
    curvature: np.ndarray | None = None

    def point(self, t):
        x = self.base + t * self.direction
        if self.curvature is not None:
            x = x + (t * t) * self.curvature
        return x

    def to_dict(self):
        return {
            "base": self.base.tolist(),
            "direction": self.direction.tolist(),
            "curvature": None if self.curvature is None else self.curvature.tolist(),
        }


@dataclass(frozen=True)
class KktCertificate:
    """Residuals of the global optimality conditions at ``(x, sigma)``.

    ``kind == "multiplier"``: primal feasibility, ``sigma >= 0``,
    stationarity ``(A + sigma B) x = f + sigma g``, complementarity and
    ``A + sigma B`` PSD.  These are necessary and sufficient for global
    optimality when a strictly feasible point exists.

    ``kind == "affine"``: the feasible set is the affine set ``Bx = g``;
    residuals are the constraint violation, the reduced gradient and the
    smallest eigenvalue of the reduced Hessian.
    """

    x: np.ndarray
    sigma: float | None
    feas_resid: float
    stat_resid: float
    comp_resid: float
    pencil_min_eig: float
    passes: bool
    kind: str = "multiplier"

    def to_dict(self):
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "feas_resid": self.feas_resid,
            "stat_resid": self.stat_resid,
            "comp_resid": self.comp_resid,
            "pencil_min_eig": self.pencil_min_eig,
            "passes": self.passes,
        }


@dataclass(frozen=True)
class DualValue:
    sigma: float
    value: float


@dataclass(frozen=True)
class Solution:
    """Outcome of solving one instance.

    ``value`` is the optimal value when attained, the infimum when
    unattained, ``-inf`` when unbounded and ``None`` when infeasible.
    """

    status: str
    case: str
    value: float | None = None
    x: np.ndarray | None = None
    sigma: float | None = None
    certificate: KktCertificate | None = None
    ray: Ray | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
