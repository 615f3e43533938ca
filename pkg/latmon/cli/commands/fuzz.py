import argparse

from latmon.schemas.orthofam import FuzzSummary
from latmon.schemas.report import RunReport
from latmon.services import orthofam
from latmon.utils.response import success_report


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "fuzz",
        parents=parents,
        help="Randomized checks of the orthonormal-family and interpolation inequalities",
    )
    parser.add_argument("--check", choices=("liebd2", "gagnir", "alpha"), required=True)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n", type=int, default=4, help="Family size")
    parser.add_argument("--m", type=float, default=1.0, help="Shift of the inner product")
    parser.add_argument("--p", type=float, default=2.0)
    parser.add_argument("--q", type=float, default=4.0)
    parser.add_argument("--modes", type=int, default=None, help="Active modes per field (gagnir)")
    parser.add_argument("--k-max", type=int, default=8)
    parser.add_argument("--alpha", type=float, default=0.25)
    parser.add_argument("--complex", action="store_true", help="Complex-valued fields")
    parser.set_defaults(handler=run, command="fuzz")


def _summary(args: argparse.Namespace) -> FuzzSummary:
    if args.check == "liebd2":
        return orthofam.fuzz_liebd2(args.trials, args.seed, args.n, args.m, args.p, args.k_max, args.complex)
    if args.check == "gagnir":
        return orthofam.fuzz_gagnir(args.trials, args.seed, args.q, args.k_max, args.modes, args.complex)
    return orthofam.fuzz_alpha(args.trials, args.seed, args.n, args.alpha, args.k_max, args.complex)


def run(args: argparse.Namespace) -> RunReport:
    summary = _summary(args)
    report = success_report("fuzz", f"{summary.check}: {summary.passed}/{summary.trials} trials passed")
    report.seeds = [args.seed]

    report.add(
        "passed",
        "fuzz",
        value=float(summary.passed),
        reference=float(summary.trials),
        passed=summary.all_passed,
    )
    report.add(
        "max_ratio",
        "fuzz",
        value=summary.max_ratio,
        reference=summary.bound,
        passed=summary.all_passed,
    )
    if summary.first_failing_seed is not None:
        report.add(
            "first_failing_seed",
            "fuzz",
            value=float(summary.first_failing_seed),
            passed=False,
            detail="rerun with --trials 1 --seed <value> to reproduce",
        )
    return report
