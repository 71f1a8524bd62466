"""Command-line front end.

Exit codes: 0 on success (including runs with recorded partial failures), 1 on I/O errors, 2 on invalid
input or configuration, 3 on numerical failure.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pdcspy import recipes
from pdcspy.config import RunConfig, load_config, with_overrides
from pdcspy.defaults import FIGURE_POINTS
from pdcspy.exceptions import NumericalError, ValidationError
from pdcspy.providers import provider_for
from pdcspy.results import ResultBundle
from pdcspy.version import VERSION

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

FIGURE_HELP = "\n".join(
    [
        "2b  squeezing spectrum of the stable soliton, (delta_eff, nu) = %s" % (FIGURE_POINTS["stable_soliton"],),
        "2c  squeezing spectrum below threshold, (delta_eff, nu) = %s" % (FIGURE_POINTS["below_threshold"],),
        "3   quantum dispersive waves of the stable soliton, quartic dispersion",
        "4   photon-number envelopes, quartic against quadratic dispersion",
        "S1  degenerate pairing of the below-threshold levels",
        "S2  detuning scans of the mode pairs 0, 20 and 40 at nu = 0.95",
        "S3  regime labels at %s and %s" % (FIGURE_POINTS["broad_soliton"], FIGURE_POINTS["oscillatory_soliton"]),
        "S4  the stable soliton with quadratic dispersion",
    ]
)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory, overrides [output] directory")
    common.add_argument("--threads", type=int, help="worker count (default: $PDCSPY_THREADS, then the CPU count)")
    common.add_argument("--processes", action="store_true", help="use worker processes instead of threads")
    common.add_argument("--omega-min", type=float, help="lower end of the analysis frequency grid")
    common.add_argument("--omega-max", type=float, help="upper end of the analysis frequency grid")
    common.add_argument("--omega-points", type=int, help="number of analysis frequencies")
    common.add_argument("--supermodes", type=int, help="number of most squeezed supermodes to extract")
    common.add_argument("--overcoupling", type=float, help="coupling ratio gamma_c / gamma_total")
    common.add_argument("--d4-zero", action="store_true", help="switch off fourth-order dispersion")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more log output, repeatable")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdcspy",
        description="Parametrically driven cavity solitons: steady states, squeezing spectra and supermodes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    common = _common_options()
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("steady", parents=[common], help="integrate to a steady state at the configured point")
    commands.add_parser("sweep", parents=[common], help="label the regimes over the configured grid")
    for name, text in (
        ("squeeze", "squeezing spectrum at the configured point"),
        ("supermodes", "most squeezed supermodes at the configured frequencies"),
        ("envelope", "photon-number envelope of the fluctuations"),
    ):
        sub = commands.add_parser(name, parents=[common], help=text)
        sub.add_argument("--state", help="steady state CSV (mu,re,im) written by the steady command")
    commands.add_parser("oracle", parents=[common], help="closed-form below-threshold spectrum of one mode pair")

    figure = commands.add_parser(
        "reproduce-figure",
        parents=[common],
        help="run the recipe of one figure",
        description=FIGURE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    figure.add_argument("figure", choices=sorted(recipes.FIGURES))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    return with_overrides(
        config,
        {
            "output.directory": args.out,
            "run.threads": args.threads,
            "run.processes": True if args.processes else None,
            "omega.min": args.omega_min,
            "omega.max": args.omega_max,
            "omega.points": args.omega_points,
            "squeeze.supermodes": args.supermodes,
            "loss.overcoupling_ratio": args.overcoupling,
            "dispersion.d4_zero": True if args.d4_zero else None,
            "squeeze.state": getattr(args, "state", None),
        },
    )


def run(subcommand: str, config: RunConfig, *, figure: Optional[str] = None, provider=None) -> ResultBundle:
    """Run one subcommand into ``config.output.directory``.

    The configuration is checked against the subcommand first; a rejected configuration writes nothing.
    """
    recipes.check(subcommand, config, figure)
    handler = recipes.FIGURES[figure] if subcommand == "reproduce-figure" else recipes.COMMANDS[subcommand]
    name = subcommand if figure is None else f"{subcommand} {figure}"

    owned = provider is None
    if owned:
        provider = provider_for(config.run.threads, config.run.processes)
    try:
        with ResultBundle(config.output.directory, name, config) as bundle:
            handler(bundle, config, provider)
    finally:
        if owned:
            provider.close()
    if bundle.failures:
        logger.warning("%s finished with %d recorded failures", name, len(bundle.failures))
    return bundle


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=max(logging.WARNING - 10 * args.verbose, logging.DEBUG),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
        bundle = run(args.command, config, figure=getattr(args, "figure", None))
    except ValidationError as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except NumericalError as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO
    print(f"{bundle.status}: results in {bundle.directory}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
