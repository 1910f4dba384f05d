"""This module contains the logic used for launching enercoop from the command line."""

import argparse
import json
import sys
import typing
from pathlib import Path

from rich_argparse import RichHelpFormatter

from enercoop.errors import EnercoopError, OutputError
from enercoop.input import RunConfig, read_config
from enercoop.model import Case, Objective, Scenario, ScenarioSpec, SolveStatus
from enercoop.network import build_problem, derive_channels, throughputs_from_allocation
from enercoop.oracle import GridSpec
from enercoop.output import emit_csv, emit_plotdata, emit_rho_table, export_strategy, print_allocation, print_strategy, print_sweep_summary
from enercoop.solvers import SolverKind
from enercoop.strategy import screen_rho, select_strategy
from enercoop.sweep import SweepParameter, SweepSpec, failed_points, run_sweep
from enercoop.utils.logger import LOGGER, Level, level_for_verbosity, setup_logger
from enercoop.utils.timer import DEFAULT_TIMER as TIMER
from enercoop.validation import run_validation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

NETWORK_FLAGS = {
    "d1": "distance from U1 to D",
    "d2": "distance from U2 to D",
    "du": "distance between U1 and U2",
    "alpha": "path-loss exponent",
    "lambda_": "path-loss attenuation at the reference distance",
    "sigma2_D": "noise power at D (W)",
    "sigma2_U1": "noise power at U1 (W)",
    "sigma2_U2": "noise power at U2 (W)",
    "eta": "energy harvesting efficiency",
    "X1": "natural energy arrival rate at U1 (mW)",
    "X2": "natural energy arrival rate at U2 (mW)",
    "w1": "throughput weight of U1",
    "w2": "throughput weight of U2",
}


class _ArgumentParser(argparse.ArgumentParser):
    """An argument parser exiting with `EXIT_USAGE` on errors"""

    def error(self: typing.Self, message: str) -> typing.NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def __common_arguments() -> argparse.ArgumentParser:
    parser = _ArgumentParser(add_help=False)

    parser.add_argument("-c", "--config", metavar="CONFIG_FILE", type=str,
                        help="read settings from a key=value file; command-line flags take precedence")
    parser.add_argument("-s", "--solver", type=SolverKind, choices=list(SolverKind), metavar="{nb,quad,both}",
                        help="the solver: Newton barrier (nb), iterative quadratic (quad), or both to cross-check (default: nb)")
    parser.add_argument("-o", "--out", metavar="OUTPUT", type=str,
                        help="the destination for the result file (JSON, or CSV for sweeps)")
    parser.add_argument("--log", metavar="LOG_FILE", type=str,
                        help="also write the log to this file")
    parser.add_argument("-w", "--workers", metavar="WORKERS", type=int,
                        help="number of worker processes solving candidates concurrently")
    parser.add_argument("--rho-step", metavar="STEP", type=float,
                        help="spacing of the power-splitting ratio grid (default: 0.1)")
    parser.add_argument("--tie-tolerance", metavar="TOLERANCE", type=float,
                        help="relative objective difference under which candidates are tied (default: 1e-6)")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="enable verbose output. WARNING: high verbosity levels can drastically decrease performance!")
    parser.add_argument("-q", "--quiet", action="store_true", default=False,
                        help="disable all output")

    network = parser.add_argument_group("network", "override the network parameters (defaults: d1=du=1, d2=2, alpha=2, "
                                                   "lambda=1, noise 1e-4 W, eta=0.75, X1=X2=100 mW, w1=w2=1)")
    for name, description in NETWORK_FLAGS.items():
        flag = "--" + name.rstrip("_").replace("_", "-")
        network.add_argument(flag, dest=name, metavar="VALUE", type=float, help=description)

    return parser


def __scenario_list(value: str) -> tuple[Scenario, ...]:
    try:
        return tuple(Scenario(item.strip().upper()) for item in value.split(",") if item.strip() != "")
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"invalid scenario list '{value}'") from error


def __objective_argument(parser: argparse.ArgumentParser, *, default: str | None = "sum") -> None:
    parser.add_argument("--objective", choices=[objective.value for objective in Objective], default=default,
                        help="maximize the weighted sum throughput (sum) or the common throughput (common)")


def __parse_arg(argv: typing.Sequence[str] | None) -> argparse.Namespace:
    parser = _ArgumentParser(
        prog="enercoop",
        description="""enercoop finds the best energy and data cooperation strategy of a wireless powered network with two
                       users: which user transmits first, whether the near user relays the far user's data, whether it
                       harvests the far user's RF energy, and how the block and the energy are shared.""",
        formatter_class=RichHelpFormatter,
    )
    common = __common_arguments()
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    solve = commands.add_parser("solve", parents=[common], formatter_class=RichHelpFormatter,
                                help="solve one (scenario, case) combination")
    solve.add_argument("--scenario", type=str.upper, choices=[scenario.value for scenario in Scenario], required=True)
    solve.add_argument("--case", type=str.upper, choices=[case.value for case in Case], required=True)
    solve.add_argument("--rho", metavar="RHO", type=float, default=0.0, help="the power-splitting ratio (S1 only)")
    __objective_argument(solve)

    screen = commands.add_parser("screen-rho", parents=[common], formatter_class=RichHelpFormatter,
                                 help="screen the power-splitting ratio of S1")
    screen.add_argument("--case", type=str.upper, choices=[case.value for case in Case], required=True)
    __objective_argument(screen)

    select = commands.add_parser("select", parents=[common], formatter_class=RichHelpFormatter,
                                 help="select the best (scenario, case, rho) combination")
    select.add_argument("--refine-rho", action="store_true", default=False,
                        help="refine a winning ratio between its grid neighbours (reported separately)")
    __objective_argument(select)

    for command, parameter, description in (
        ("sweep-energy", SweepParameter.ENERGY, "sweep the energy arrival rate X1 of the near user (default: 25 to 300 mW, step 25)"),
        ("sweep-distance", SweepParameter.DISTANCE, "sweep the distance d1 of the near user along the U2-D segment (default: 0.2 to 1.8, step 0.2)"),
    ):
        sweep = commands.add_parser(command, parents=[common], formatter_class=RichHelpFormatter, help=description)
        sweep.set_defaults(parameter=parameter)
        sweep.add_argument("--start", metavar="VALUE", type=float)
        sweep.add_argument("--stop", metavar="VALUE", type=float)
        sweep.add_argument("--step", metavar="VALUE", type=float)
        sweep.add_argument("--scenarios", metavar="S1,S2,...", type=__scenario_list,
                           help="comma-separated scenarios to include (default: all)")
        sweep.add_argument("--plotdata", metavar="PLOTDATA_FILE", type=str,
                           help="also write the series of every combination in a wide layout for plotting")
        sweep.add_argument("--rho-table", metavar="RHO_TABLE_FILE", type=str,
                           help="also write the screened ratios of S1 per case and swept value")
        __objective_argument(sweep, default=None)

    validate = commands.add_parser("validate", parents=[common], formatter_class=RichHelpFormatter,
                                   help="check the solvers against the grid oracle, finite differences and each other")
    validate.add_argument("--grid-step", metavar="STEP", type=float, default=1e-3,
                          help="spacing of the brute-force grid on the time fractions")
    validate.add_argument("--points", metavar="POINTS", type=int, default=100,
                          help="number of random points of the perspective derivative check")
    validate.add_argument("--seed", metavar="SEED", type=int, default=0)
    __objective_argument(validate, default=None)

    return parser.parse_args(argv)


def __write_json(path: str, content: dict) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as file:
            json.dump(content, file, indent=4)
    except OSError as error:
        raise OutputError(f"cannot write {path}: {error}") from error
    LOGGER.info("results saved to %s", path)


def __solve(args: argparse.Namespace, config: RunConfig) -> int:
    cfg = config.network_config(**{name: getattr(args, name) for name in NETWORK_FLAGS})
    spec = ScenarioSpec(scenario=Scenario(args.scenario), case=Case(args.case), objective=Objective(args.objective), rho=args.rho)
    channels = derive_channels(cfg)
    result = config.solver_settings(args.solver).run(build_problem(spec, cfg, channels))

    LOGGER.notice("%s: %s after %d outer and %d inner iterations, %.10g bits", spec, result.status.value, result.outer_iters, result.inner_iters, result.objective_bits)
    if not result.converged:
        return EXIT_FAILED

    print_allocation(spec, result)
    B1, B2 = throughputs_from_allocation(spec, cfg, channels, result.x_star)
    LOGGER.notice("B1 = %.10g bits, B2 = %.10g bits", B1, B2)
    if result.reference_gap is not None:
        LOGGER.notice("relative gap between the solvers: %.3g", result.reference_gap)
    if args.out is not None:
        __write_json(args.out, {"spec": spec.asdict(), "network": cfg.asdict(), "B1": B1, "B2": B2, "result": result.asdict()})
    return EXIT_OK


def __screen(args: argparse.Namespace, config: RunConfig) -> int:
    cfg = config.network_config(**{name: getattr(args, name) for name in NETWORK_FLAGS})
    rho_star, table = screen_rho(
        Scenario.S1,
        Case(args.case),
        Objective(args.objective),
        cfg,
        settings=config.solver_settings(args.solver),
        step=config.option("rho_step", args.rho_step, 0.1),
        tie_tolerance=config.option("tie_tolerance", args.tie_tolerance, 1e-6),
        workers=config.option("workers", args.workers, 1),
    )
    for row in table:
        LOGGER.notice("    rho=%-4g %14.10g bits  %s", row.rho, row.objective_bits, row.status.value)
    if args.out is not None:
        __write_json(args.out, {"rho_star": rho_star, "network": cfg.asdict(), "candidates": [row.asdict() for row in table]})
    return EXIT_OK if all(row.status == SolveStatus.CONVERGED for row in table) else EXIT_FAILED


def __select(args: argparse.Namespace, config: RunConfig) -> int:
    cfg = config.network_config(**{name: getattr(args, name) for name in NETWORK_FLAGS})
    result = select_strategy(
        cfg,
        Objective(args.objective),
        settings=config.solver_settings(args.solver),
        rho_step=config.option("rho_step", args.rho_step, 0.1),
        tie_tolerance=config.option("tie_tolerance", args.tie_tolerance, 1e-6),
        workers=config.option("workers", args.workers, 1),
        refine=args.refine_rho,
    )
    print_strategy(result)
    if args.out is not None:
        __write_json(args.out, {"network": cfg.asdict(), **export_strategy(result)})
    return EXIT_OK if all(row.status == SolveStatus.CONVERGED for row in result.per_candidate_table) else EXIT_FAILED


def __sweep(args: argparse.Namespace, config: RunConfig) -> int:
    base = config.network_config(**{name: getattr(args, name) for name in NETWORK_FLAGS})
    objectives = (Objective(args.objective),) if args.objective is not None else config.sweep.get("objectives", tuple(Objective))
    scenarios = args.scenarios if args.scenarios is not None else config.sweep.get("scenarios", tuple(Scenario))
    bounds = {key: getattr(args, key) if getattr(args, key) is not None else config.sweep.get(key) for key in ("start", "stop", "step")}
    factory = SweepSpec.energy if args.parameter == SweepParameter.ENERGY else SweepSpec.distance
    spec = factory(base, **{key: value for key, value in bounds.items() if value is not None}, objectives=objectives, scenarios=scenarios)

    table = run_sweep(
        spec,
        settings=config.solver_settings(args.solver),
        rho_step=config.option("rho_step", args.rho_step, 0.1),
        tie_tolerance=config.option("tie_tolerance", args.tie_tolerance, 1e-6),
        workers=config.option("workers", args.workers, 1),
    )
    print_sweep_summary(table)

    if args.out is not None:
        emit_csv(table, args.out)
    if args.plotdata is not None:
        emit_plotdata(table, args.plotdata)
    if args.rho_table is not None:
        emit_rho_table(table, args.rho_table)

    failed = failed_points(table)
    if len(failed) > 0:
        LOGGER.error("%d combinations failed", len(failed))
        return EXIT_FAILED
    return EXIT_OK


def __validate(args: argparse.Namespace, config: RunConfig) -> int:
    cfg = config.network_config(**{name: getattr(args, name) for name in NETWORK_FLAGS})
    objectives = (Objective(args.objective),) if args.objective is not None else tuple(Objective)
    table = run_validation(
        cfg,
        objectives,
        settings=config.solver_settings(args.solver),
        grid=GridSpec(step=args.grid_step),
        points=args.points,
        seed=args.seed,
    )
    if args.out is not None:
        __write_json(args.out, {"network": cfg.asdict(), "checks": table.to_dict(orient="records")})
    return EXIT_OK if bool(table["passed"].all()) else EXIT_FAILED


COMMANDS: dict[str, typing.Callable[[argparse.Namespace, RunConfig], int]] = {
    "solve": __solve,
    "screen-rho": __screen,
    "select": __select,
    "sweep-energy": __sweep,
    "sweep-distance": __sweep,
    "validate": __validate,
}


def run(argv: typing.Sequence[str] | None = None) -> int:
    args = __parse_arg(argv)

    if args.quiet:
        setup_logger(
            Level.DISABLED,
            disable_third_party_warnings=True,
        )
    else:
        setup_logger(
            level_for_verbosity(args.verbose),
            destination=args.log,
            disable_third_party_warnings=True,
        )

    LOGGER.notice("running enercoop %s", args.command)

    try:
        config = read_config(args.config) if args.config is not None else RunConfig()
        with TIMER.profile(__name__):
            code = COMMANDS[args.command](args, config)
    except EnercoopError as error:
        LOGGER.error("%s", error)
        return EXIT_FAILED if not isinstance(error, ValueError) else EXIT_USAGE
    except OSError as error:
        LOGGER.error("%s", error)
        return EXIT_USAGE

    LOGGER.success("execution took %s", TIMER.elapsed(__name__))
    return code
