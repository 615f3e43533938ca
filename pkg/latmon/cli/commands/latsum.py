import argparse
import itertools
from typing import Dict

from latmon.core.exceptions import DomainError
from latmon.core.logging import logger
from latmon.schemas.latsum import LatticeSumQuery, MethodResult, Tolerance
from latmon.schemas.report import RunReport
from latmon.services import latsum
from latmon.utils.response import success_report

METHODS = ("direct", "theta", "bessel", "all")
# Relative window two methods must agree within, scaled by max(1, value)
AGREEMENT_TOL = {2: 1e-9, 3: 1e-8}


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "latsum",
        parents=parents,
        help="Evaluate I_p(m) on Z^2 or Z^3 and cross-check the methods",
    )
    parser.add_argument("--dim", type=int, required=True, choices=(2, 3))
    parser.add_argument("--p", type=float, required=True)
    parser.add_argument("--m", type=float, required=True)
    parser.add_argument("--method", choices=METHODS, default="all")
    parser.add_argument("--tol", type=float, default=None, help="Uniform tolerance (default LATMON_DEFAULT_TOL)")
    parser.add_argument("--derivative", action="store_true", help="Also evaluate dI/dm and check its sign")
    parser.set_defaults(handler=run, command="latsum")


def _methods_for(dimension: int, method: str):
    if method == "all":
        return ("direct", "theta") if dimension == 3 else ("direct", "theta", "bessel")
    if method == "bessel" and dimension == 3:
        raise DomainError("the Bessel series exists for d = 2 only", {"dim": dimension, "method": method})
    return (method,)


def _evaluate(name: str, q: LatticeSumQuery, cache_dir) -> MethodResult:
    if name == "direct":
        return latsum.direct_sum(q, cache_dir=cache_dir)
    if name == "theta":
        return latsum.theta_integral(q)
    return latsum.bessel_series(q)


def run(args: argparse.Namespace) -> RunReport:
    """
    Evaluate I_p(m) with the selected methods.

    Method rows carry the continuum limit as reference and pass when the value
    stays below it; agreement rows compare every pair of methods against the
    larger of AGREEMENT_TOL and tol, scaled by max(1, value). The summed error
    bounds go in the error_bound column and never widen the window.
    """
    tol = Tolerance.uniform(args.tol) if args.tol is not None else Tolerance()
    q = LatticeSumQuery(dimension=args.dim, p=args.p, m=args.m, tol=tol)
    limit = latsum.continuum_limit(q.dimension, q.p)
    report = success_report("latsum", f"I_p(m) for d={q.dimension}, p={q.p}, m={q.m}")

    names = ("direct",) if q.m == 0 else _methods_for(q.dimension, args.method)
    if q.m == 0:
        logger.info("m = 0: I_p(0) = 0, only the direct record is emitted")

    results: Dict[str, MethodResult] = {}
    for name in names:
        result = _evaluate(name, q, args.cache_dir)
        results[name] = result
        report.add(
            name,
            "method",
            value=result.value,
            reference=limit,
            error_bound=result.error_bound,
            passed=result.value < limit,
            detail=f"{result.method}; terms={result.terms_used}; rigorous={result.rigorous}",
        )

    for (a, ra), (b, rb) in itertools.combinations(results.items(), 2):
        scale = max(1.0, abs(ra.value))
        allowed = max(tol.target(scale), AGREEMENT_TOL[q.dimension] * scale)
        delta = abs(ra.value - rb.value)
        report.add(
            f"{a}-{b}",
            "agreement",
            value=delta,
            reference=allowed,
            error_bound=ra.error_bound + rb.error_bound,
            passed=delta <= allowed,
        )

    if args.derivative and q.m > 0:
        slope = latsum.derivative_dm(q)
        report.add("dI/dm", "check", value=slope, reference=0.0, passed=slope > 0, detail="I_p increasing in m")

    return report
