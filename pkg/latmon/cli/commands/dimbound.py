import argparse

from latmon.core.exceptions import PreconditionError
from latmon.core.logging import logger
from latmon.schemas.bounds import PhysicalParams, QCurve
from latmon.schemas.report import RunReport
from latmon.services import bounds
from latmon.utils.response import success_report

BOUNDARY_CONDITIONS = {"no-boundary": "no_boundary", "proper": "proper_domain"}
# CLI spelling of the c_LT candidates
CLT_ALIASES = {"lt": "lt_original"}


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "dimbound",
        parents=parents,
        help="Attractor-dimension bounds for 2D Navier-Stokes and the alpha models",
    )
    parser.add_argument("--model", choices=("ns2d", "alpha2d", "alpha3d"), required=True)
    parser.add_argument("--nu", type=float)
    parser.add_argument("--area", type=float)
    parser.add_argument("--f-norm", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--g-norm", type=float)
    parser.add_argument("--curl-g-norm", type=float)
    parser.add_argument("--bc", choices=tuple(BOUNDARY_CONDITIONS), default="no-boundary")
    parser.add_argument("--clt", default=None, help="fhjn | dll | hlw | lt | <real>")
    parser.add_argument("--clad", default=None, help="upper | sharp | <real>")
    parser.add_argument("--q-table", action="store_true", help="Tabulate q(n) around the roots")
    parser.set_defaults(handler=run, command="dimbound")


def _params(args: argparse.Namespace) -> PhysicalParams:
    return PhysicalParams(
        nu=args.nu,
        area=args.area,
        f_l2=args.f_norm,
        gamma=args.gamma,
        alpha=args.alpha,
        g_l2=args.g_norm,
        curl_g_l2=args.curl_g_norm,
    )


def _add_lifschitz(report: RunReport, name: str, curve: QCurve) -> None:
    try:
        estimate = bounds.n_lifschitz(curve)
    except PreconditionError as e:
        logger.info("%s: %s", name, e.message)
        report.add(name, "bound", reference=curve.positive_root(), detail=e.message)
        return
    report.add(
        name,
        "bound",
        value=estimate.n_lifschitz,
        reference=estimate.n_star,
        passed=estimate.within_root,
        detail=f"n={estimate.n}",
    )


def _run_ns2d(args: argparse.Namespace, report: RunReport) -> None:
    params = _params(args)
    clt_selector = CLT_ALIASES.get(args.clt, args.clt)
    result = bounds.ns2d_bounds(params, clt_selector, args.clad)

    report.add("grashof", "parameter", value=result.grashof)
    report.add("clt", "constant", value=result.clt, detail=clt_selector or bounds.REGISTRY.clt_default)
    report.add("clad", "constant", value=result.clad, detail=args.clad or "upper")
    report.add("li_yau", "bound", value=result.li_yau)
    report.add("no_li_yau", "bound", value=result.no_li_yau)
    report.add("pre_lt", "bound", value=result.pre_lt)
    report.add("crossover_grashof", "constant", value=result.crossover_grashof)
    report.add(
        "li_yau<no_li_yau",
        "check",
        value=result.li_yau,
        reference=result.no_li_yau,
        passed=result.li_yau < result.no_li_yau or result.grashof == 0,
    )

    curves = {
        "lieb_thirring": bounds.lt_curve(params, result.clt),
        "ladyzhenskaya": bounds.lad_curve(params, result.clad),
    }
    for kind, curve in curves.items():
        _add_lifschitz(report, f"n_lifschitz_{kind}", curve)
        if args.q_table:
            for n, value in bounds.q_table(curve):
                report.add(f"q_{kind}({n})", "q_table", value=value)


def run(args: argparse.Namespace) -> RunReport:
    report = success_report("dimbound", f"dimension bounds for {args.model}")
    if args.model == "ns2d":
        _run_ns2d(args, report)
        return report

    params = _params(args)
    dimension = 2 if args.model == "alpha2d" else 3
    bc = BOUNDARY_CONDITIONS[args.bc]
    value = bounds.dim_bound_alpha(dimension, bc, params)
    report.add(args.model, "bound", value=value, detail=bc if dimension == 2 else None)
    return report
