"""Command-line front end.

Subcommands::

    qp1qc solve  INSTANCE.json [--json] [--oracle] [--tol T] [--seed S]
    qp1qc pencil INSTANCE.json [--json] [--tol T]
    qp1qc sdc    INSTANCE.json [--json] [--tol T]
    qp1qc check  [--seed S] [--count K] [--n N] [--class C]

Instance files are JSON objects with keys ``n``, ``A``, ``B``, ``f``, ``g``
and ``mu``.  ``solve`` exits with 0 (attained), 1 (unattained),
2 (unbounded) or 3 (infeasible); malformed input exits with 64.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .exceptions import Qp1qcError
from .linalg import Tolerance
from .model import Qp1qcInstance
from .oracle import CLASSES, MAX_GRID_DIM, check_solution, gen_instance
from .pencil import pencil_interval, sdc_certificate
from .solver import classify_and_solve

EXIT_CODES = {"attained": 0, "unattained": 1, "unbounded": 2, "infeasible": 3}
EXIT_PARSE = 64
EXIT_CHECK_FAILED = 1
CHECK_CLASSES = ("no_slater", "unbounded", "unattained", "attained_interval", "attained_singleton", "any")


class InstanceError(ValueError):
    def __init__(self, key, msg):
        super().__init__(f"{key}: {msg}")
        self.key = key


def _matrix(doc, key, n):
    try:
        M = np.asarray(doc[key], dtype=float)
    except KeyError:
        raise InstanceError(key, "missing") from None
    except (TypeError, ValueError):
        raise InstanceError(key, "not a numeric array") from None
    if M.shape != (n, n):
        raise InstanceError(key, f"expected shape ({n}, {n}), got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InstanceError(key, "non-finite entry")
    asym = float(np.max(np.abs(M - M.T))) if n else 0.0
    if asym > 1e-8 * max(1.0, float(np.max(np.abs(M))) if n else 0.0):
        raise InstanceError(key, f"not symmetric (max asymmetry {asym:.3g})")
    return M


def _vector(doc, key, n):
    try:
        v = np.asarray(doc[key], dtype=float)
    except KeyError:
        raise InstanceError(key, "missing") from None
    except (TypeError, ValueError):
        raise InstanceError(key, "not a numeric array") from None
    if v.shape != (n,):
        raise InstanceError(key, f"expected length {n}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InstanceError(key, "non-finite entry")
    return v


def parse_instance(doc) -> Qp1qcInstance:
    if not isinstance(doc, dict):
        raise InstanceError("<root>", "expected a JSON object")
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InstanceError("n", "expected a positive integer")
    mu = doc.get("mu")
    if isinstance(mu, bool) or not isinstance(mu, (int, float)) or not math.isfinite(mu):
        raise InstanceError("mu", "expected a finite number")
    return Qp1qcInstance(_matrix(doc, "A", n), _matrix(doc, "B", n), _vector(doc, "f", n), _vector(doc, "g", n), float(mu))


def load_instance(path) -> Qp1qcInstance:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InstanceError("<file>", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise InstanceError("<file>", f"invalid JSON ({exc})") from None
    return parse_instance(doc)


def encode(obj):
    """Make ``obj`` JSON-safe: arrays to lists, infinities to sentinels."""
    if isinstance(obj, dict):
        return {k: encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "+inf" if v > 0 else "-inf"
        if math.isnan(v):
            return None
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def solve_report(inst, tol, seed=0, oracle=False):
    t0 = time.perf_counter()
    sol = classify_and_solve(inst, tol, seed=seed)
    t1 = time.perf_counter()
    iv = sol.details.get("pencil") or pencil_interval(inst.A, inst.B, tol)
    sdc = sdc_certificate(inst.A, inst.B, tol)
    t2 = time.perf_counter()
    report = {
        "status": sol.status,
        "case": sol.case,
        "value": sol.value,
        "x_star": sol.x,
        "sigma_star": sol.sigma,
        "certificate": sol.certificate.to_dict() if sol.certificate else None,
        "ray": sol.ray.to_dict() if sol.ray else None,
        "pencil": iv.to_dict(),
        "sdc": {"status": sdc.status, "cond_C": sdc.cond_C},
        "timings_ms": {"solve": 1e3 * (t1 - t0), "pencil_sdc": 1e3 * (t2 - t1)},
    }
    if oracle:
        if inst.n <= MAX_GRID_DIM:
            chk = check_solution(inst, sol)
            report["oracle"] = {"ok": chk.ok, "message": chk.message, "value": chk.oracle_value}
        else:
            report["oracle"] = {"ok": None, "message": f"skipped: n > {MAX_GRID_DIM}", "value": None}
    return sol, report


def pencil_report(inst, tol, with_interval=True):
    out = {}
    if with_interval:
        out["pencil"] = pencil_interval(inst.A, inst.B, tol).to_dict()
    out["sdc"] = sdc_certificate(inst.A, inst.B, tol).to_dict()
    return out


def _print(report, as_json, out):
    report = encode(report)
    if as_json:
        out.write(json.dumps(report) + "\n")
        return
    for key, val in report.items():
        if isinstance(val, dict):
            out.write(f"{key}:\n")
            for k, v in val.items():
                out.write(f"  {k}: {json.dumps(v)}\n")
        else:
            out.write(f"{key}: {json.dumps(val)}\n")


def run_check(seed, count, n, classes, tol, out):
    failures = 0
    for i in range(count):
        cls = classes[i % len(classes)]
        inst = gen_instance(seed + i, n, cls)
        try:
            sol = classify_and_solve(inst, tol, seed=seed)
            res = check_solution(inst, sol)
            ok, msg, label = res.ok, res.message, f"{sol.status}/{sol.case}"
        except Qp1qcError as exc:
            ok, msg, label = False, f"{type(exc).__name__}: {exc}", "error"
        if not ok:
            failures += 1
            out.write(f"FAIL seed={seed + i} class={cls} {label}: {msg}\n")
    out.write(f"{count - failures}/{count} passed\n")
    return failures


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="relative rank tolerance (default 1e-9)")
    common.add_argument("--json", action="store_true", help="emit one JSON document")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized searches")

    p = argparse.ArgumentParser(prog="qp1qc", description="Global solver for one-constraint quadratic programs.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="classify and solve an instance")
    s.add_argument("instance")
    s.add_argument("--oracle", action="store_true", help="cross-check with the grid oracle (n <= 3)")
    for name, text in (("pencil", "PSD interval and SDC test"), ("sdc", "SDC test only")):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("instance")
    c = sub.add_parser("check", parents=[common], help="solver-vs-oracle run on generated instances")
    c.add_argument("--count", type=int, default=100)
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--class", dest="cls", choices=CLASSES, default=None, help="single instance class (default: mixed)")
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else 0
    if not args.tol > 0:
        sys.stderr.write("error: --tol must be positive\n")
        return EXIT_PARSE
    tol = Tolerance(rel=args.tol)

    if args.command == "check":
        if args.count < 1 or not 1 <= args.n <= MAX_GRID_DIM:
            sys.stderr.write(f"error: need --count >= 1 and 1 <= --n <= {MAX_GRID_DIM}\n")
            return EXIT_PARSE
        classes = (args.cls,) if args.cls else CHECK_CLASSES
        failures = run_check(args.seed, args.count, args.n, classes, tol, out)
        return EXIT_CHECK_FAILED if failures else 0

    try:
        inst = load_instance(args.instance)
    except InstanceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE

    try:
        if args.command == "solve":
            sol, report = solve_report(inst, tol, seed=args.seed, oracle=args.oracle)
            _print(report, args.json, out)
            return EXIT_CODES[sol.status]
        _print(pencil_report(inst, tol, with_interval=args.command == "pencil"), args.json, out)
        return 0
    except Qp1qcError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
