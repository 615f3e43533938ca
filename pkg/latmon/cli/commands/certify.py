import argparse
import math

from latmon.schemas.report import RunReport
from latmon.services import monotone
from latmon.utils.response import success_report

CONDITIONS = {"condmon": "condmon_2d", "suff3": "suff3_3d", "exact3": "exact3_3d"}


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "certify",
        parents=parents,
        help="Scan a monotonicity bracket for positivity on a log-spaced grid",
    )
    parser.add_argument("--condition", choices=tuple(CONDITIONS), required=True)
    parser.add_argument("--y-min", type=float, default=1e-3)
    parser.add_argument("--y-max", type=float, default=100.0)
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--refine", action="store_true", help="Polish the minimum with a bounded scalar search")
    parser.set_defaults(handler=run, command="certify")


def run(args: argparse.Namespace) -> RunReport:
    cert = monotone.certify(CONDITIONS[args.condition], args.y_min, args.y_max, args.samples, args.refine)
    report = success_report("certify", f"{cert.condition} on [{args.y_min}, {args.y_max}]")

    certified = cert.certified
    report.add(
        "min_value",
        "certificate",
        value=cert.min_value,
        passed=certified,
        detail=f"at y={cert.min_location!r}",
    )
    report.add(
        "min_log10_value",
        "certificate",
        value=cert.min_log10_value if math.isfinite(cert.min_log10_value) else None,
        passed=certified,
    )
    report.add(
        "violations",
        "certificate",
        value=float(len(cert.violations)),
        passed=certified,
        detail=" ".join(repr(y) for y in cert.violations[:20]) or None,
    )

    constants = cert.named_constants
    report.add(
        "y_star",
        "constant",
        value=constants.y_star,
        reference=constants.y_star_closed_form,
        error_bound=abs(constants.y_star - constants.y_star_closed_form),
        detail="root of coth(pi/(2y)) = 4/3 against pi/ln 7",
    )
    report.add("g_at_pi", "constant", value=constants.g_at_pi)
    report.add("h_at_y_star", "constant", value=constants.h_at_y_star, detail="prefactor pi")
    report.add("h_at_y_star_derived", "constant", value=constants.h_at_y_star_derived, detail="prefactor pi/2")
    return report
