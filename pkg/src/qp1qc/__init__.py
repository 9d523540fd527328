"""Global solver and classifier for quadratic programs with one quadratic constraint.

Minimize ``x'Ax - 2f'x`` subject to ``x'Bx - 2g'x <= mu`` with symmetric,
possibly indefinite ``A`` and ``B``.  Every instance is classified as
infeasible, unbounded below, bounded with an unattained infimum, or solved
to global optimality, by analysing the PSD set of the pencil ``A + sigma B``.
"""
from .exceptions import (
    DimensionTooLarge,
    InternalInconsistency,
    NonConvergence,
    PreconditionViolated,
    Qp1qcError,
)
from .linalg import DEFAULT_TOL, Tolerance
from .model import DualValue, KktCertificate, Qp1qcInstance, Ray, Solution
from .pencil import PencilInterval, SdcResult, pencil_interval, sdc_certificate
from .certificate import kkt_verify
from .slater import slater_holds, solve_no_slater
from .solver import classify_and_solve, dual_value, feasibility_system

__all__ = [
    "DEFAULT_TOL",
    "DimensionTooLarge",
    "DualValue",
    "InternalInconsistency",
    "KktCertificate",
    "NonConvergence",
    "PencilInterval",
    "PreconditionViolated",
    "Qp1qcError",
    "Qp1qcInstance",
    "Ray",
    "SdcResult",
    "Solution",
    "Tolerance",
    "classify_and_solve",
    "dual_value",
    "feasibility_system",
    "kkt_verify",
    "pencil_interval",
    "sdc_certificate",
    "slater_holds",
    "solve_no_slater",
]
