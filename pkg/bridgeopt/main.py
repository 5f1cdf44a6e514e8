"""Command line entry point: run, compare, stats, export-geometry, validate-config."""

import argparse
import dataclasses
import logging
import os
import sys

import numpy as np

from bridgeopt.cmaes import validate_cmaes_config
from bridgeopt.design_space import load_domains
from bridgeopt.evaluator import Evaluator, load_materials
from bridgeopt.exceptions import EXIT_OK, BridgeOptError, ConfigError, IncompleteData, IoError
from bridgeopt.export import export_geometry
from bridgeopt.fitness import fitness_params
from bridgeopt.ga import validate_ga_config
from bridgeopt.harness import (
    ALGORITHMS,
    LOG_FORMAT,
    ExperimentLayout,
    compare,
    experiment_stats,
    format_comparison,
    load_run_logs,
    run_experiment,
)
from bridgeopt.models import CMAESConfig, GAConfig, ReferenceDesign
from bridgeopt.utils import dump_json, load_json, raise_if_errors, validate_int

logger = logging.getLogger("bridgeopt")

# keys of a --config file and the defaults used when neither file nor flag sets them
RUN_DEFAULTS = {
    "algo": None,
    "seed": 0,
    "runs": 30,
    "generations": None,
    "pop_size": GAConfig.population_size,
    "mu": CMAESConfig.mu,
    "lam": CMAESConfig.lam,
    "sigma0": CMAESConfig.sigma0,
    "snapshot_every": 0,
    "threads": None,
    "cr": 150.0,
    "resume": False,
}
CONFIG_ALIASES = {"lambda": "lam"}
CMAES_ONLY = ("mu", "lam", "sigma0", "snapshot_every", "resume")
GA_ONLY = ("pop_size",)


@dataclasses.dataclass
class RunSettings:
    algorithm: str
    config: object
    runs: int
    threads: object
    fitness: object
    domains: object
    evaluator: object
    resume: bool


def check_out_dir(out_dir):
    """
    Check that ``out_dir`` exists as a writable directory or can be created.

    Raises:
        IoError: if the directory cannot be written.
    """
    path = os.path.abspath(out_dir)
    if os.path.exists(path) and not os.path.isdir(path):
        raise IoError(f"Cannot write to output directory {out_dir}: not a directory")
    existing = path
    while not os.path.exists(existing):
        existing = os.path.dirname(existing)
    if not os.path.isdir(existing) or not os.access(existing, os.W_OK | os.X_OK):
        raise IoError(f"Cannot write to output directory {out_dir}: permission denied")


def configure_logging(verbose=False, out_dir=None):
    """
    Send log records to the console and, when ``out_dir`` is given, to
    ``bridgeopt.log`` inside it.
    """
    handlers = [logging.StreamHandler()]
    if out_dir:
        try:
            os.makedirs(out_dir, exist_ok=True)
            handlers.insert(0, logging.FileHandler(ExperimentLayout(out_dir).log_file))
        except OSError as e:
            raise IoError(f"Cannot write to output directory {out_dir}: {e}")
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def _common_arguments():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domains", help="domain table JSON (default: embedded table)")
    common.add_argument("--materials", help="materials/capacities JSON (default: embedded table)")
    common.add_argument("--out", help="output directory or file")
    common.add_argument("--verbose", action="store_true", help="debug logging")
    return common


def _add_run_arguments(parser):
    parser.add_argument("--config", help="run config JSON; explicit flags win over it")
    parser.add_argument("--algo", choices=ALGORITHMS)
    parser.add_argument("--cr", type=float, help="fitness cost threshold in k€")
    parser.add_argument("--seed", type=int, help="base seed; run i uses seed * 1000 + i")
    parser.add_argument("--runs", type=int)
    parser.add_argument("--generations", type=int)
    parser.add_argument("--pop-size", dest="pop_size", type=int)
    parser.add_argument("--mu", type=int)
    parser.add_argument("--lambda", dest="lam", type=int)
    parser.add_argument("--sigma0", type=float)
    parser.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    parser.add_argument("--threads", type=int, help="worker processes (default: CPU count)")
    parser.add_argument("--resume", action="store_true", default=None,
                        help="continue CMA-ES runs from their snapshots")


def build_parser():
    common = _common_arguments()
    parser = argparse.ArgumentParser(prog="bridgeopt", description="GA and CMA-ES footbridge design experiments")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", parents=[common], help="run seeded experiments")
    _add_run_arguments(run)
    validate = commands.add_parser("validate-config", parents=[common], help="check a run configuration")
    _add_run_arguments(validate)

    stats = commands.add_parser("stats", parents=[common], help="summary and plot data of one experiment")
    stats.add_argument("directory")
    stats.add_argument("--skip-first", dest="skip_first", type=int, default=0,
                       help="leave out the first N generations of the convergence data")

    comparison = commands.add_parser("compare", parents=[common], help="compare two experiments")
    comparison.add_argument("dir_a")
    comparison.add_argument("dir_b")

    export = commands.add_parser("export-geometry", parents=[common], help="draw one or more designs")
    export.add_argument("genomes", nargs="+")
    export.add_argument("--format", dest="fmt", choices=("svg", "csv"), default="svg")
    return parser


def resolve_run_options(args):
    """
    Merge defaults, the optional config file and explicit flags, in that order.

    Raises:
        ConfigError: on unknown config keys.
    """
    options = dict(RUN_DEFAULTS)
    if args.config:
        document = load_json(args.config)
        if not isinstance(document, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        unknown = []
        for key, value in document.items():
            key = CONFIG_ALIASES.get(key, key)
            if key == "format_version":
                continue
            if key not in options:
                unknown.append(key)
                continue
            options[key] = value
        if unknown:
            raise ConfigError(f"{args.config}: unknown keys {sorted(unknown)}")
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    return options


def prepare_run(args):
    """
    Validate everything ``run`` needs before any run starts.

    Shared by ``run`` and ``validate-config`` so both accept the same inputs.

    Returns:
        RunSettings: Ready-to-run configuration.
    """
    options = resolve_run_options(args)
    algorithm = options["algo"]
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"algo must be one of {', '.join(ALGORITHMS)}, got {algorithm!r}")
    errors = [validate_int("runs", options["runs"], minimum=1)]
    if options["threads"] is not None:
        errors.append(validate_int("threads", options["threads"], minimum=1))
    raise_if_errors(errors, "run options")

    ignored = GA_ONLY if algorithm == "cmaes" else CMAES_ONLY
    for key in ignored:
        if getattr(args, key, None) is not None:
            logger.warning(f"--{key.replace('_', '-')} has no effect with --algo {algorithm}")

    if algorithm == "ga":
        config = GAConfig(
            population_size=options["pop_size"],
            generations=options["generations"] if options["generations"] is not None else GAConfig.generations,
            seed=options["seed"],
        )
        validate_ga_config(config)
    else:
        config = CMAESConfig(
            mu=options["mu"],
            lam=options["lam"],
            sigma0=options["sigma0"],
            generations=options["generations"] if options["generations"] is not None else CMAESConfig.generations,
            seed=options["seed"],
            snapshot_every=options["snapshot_every"],
        )
        validate_cmaes_config(config)

    params = fitness_params(options["cr"])
    domains = load_domains(args.domains)
    materials = load_materials(args.materials)
    return RunSettings(
        algorithm=algorithm,
        config=config,
        runs=options["runs"],
        threads=options["threads"],
        fitness=params,
        domains=domains,
        evaluator=Evaluator(materials=materials),
        resume=bool(options["resume"]),
    )


def load_reference(directory):
    """Reference design recorded in an experiment's summary.json."""
    try:
        document = load_json(ExperimentLayout(directory).summary)
    except IoError:
        raise IncompleteData(f"{directory}: missing summary.json")
    try:
        ref = document["reference"]
        return ReferenceDesign(genes=np.array(ref["genes"]), cost=ref["cost"], s=ref["s"])
    except (KeyError, TypeError):
        raise IncompleteData(f"{directory}: summary.json has no reference design")


def cmd_run(args):
    out_dir = args.out or "results"
    configure_logging(args.verbose, out_dir)
    settings = prepare_run(args)
    logger.info(f"Experiment directory {out_dir}")
    summary, logs = run_experiment(
        settings.algorithm, settings.config, settings.evaluator,
        n_runs=settings.runs, fitness_params=settings.fitness, domains=settings.domains,
        threads=settings.threads, layout=ExperimentLayout(out_dir), resume=settings.resume,
    )
    print(
        f"{summary.algorithm}: {summary.runs} runs x {logs[0].evaluations} evaluations | "
        f"fitness {summary.fitness.mean:.4f} ± {summary.fitness.std:.4f} | "
        f"cost {summary.cost.mean:.3f} ± {summary.cost.std:.3f} k€ | "
        f"s {summary.s.mean:.4f} ± {summary.s.std:.4f} | "
        f"improved {summary.improved_runs}/{summary.runs}"
    )
    return EXIT_OK


def cmd_validate_config(args):
    configure_logging(args.verbose)
    settings = prepare_run(args)
    out_dir = args.out or "results"
    check_out_dir(out_dir)
    ExperimentLayout(out_dir).check_owner(settings.algorithm)
    print(f"OK: {settings.algorithm} x {settings.runs} runs, {settings.config.evaluations} evaluations per run")
    return EXIT_OK


def cmd_stats(args):
    out_dir = args.out or args.directory
    configure_logging(args.verbose, out_dir)
    error = validate_int("skip_first", args.skip_first, minimum=0)
    if error:
        raise ConfigError(error)
    logs = load_run_logs(args.directory)
    document = experiment_stats(logs, load_reference(args.directory), out_dir, args.skip_first)
    summary = document["summary"]
    print(
        f"{summary['algorithm']}: fitness {summary['fitness']['mean']:.4f} ± {summary['fitness']['std']:.4f}, "
        f"cost {summary['cost']['mean']:.3f} ± {summary['cost']['std']:.3f} k€, "
        f"improved {summary['improved_runs']}/{summary['runs']}"
    )
    return EXIT_OK


def cmd_compare(args):
    out_dir = args.out or args.dir_a
    configure_logging(args.verbose, out_dir)
    logs_a = load_run_logs(args.dir_a)
    logs_b = load_run_logs(args.dir_b)
    report = compare(logs_a, logs_b, load_reference(args.dir_a))
    dump_json(os.path.join(out_dir, "comparison.json"), report)
    print(format_comparison(report))
    return EXIT_OK


def cmd_export_geometry(args):
    configure_logging(args.verbose)
    out_path = args.out or f"geometry.{args.fmt}"
    export_geometry(args.genomes, out_path, args.fmt, domains=load_domains(args.domains))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "validate-config": cmd_validate_config,
    "stats": cmd_stats,
    "compare": cmd_compare,
    "export-geometry": cmd_export_geometry,
}


def main(argv=None):
    """
    Parse ``argv`` and dispatch to the subcommand.

    Returns:
        int: 0 on success, otherwise the exit code of the error raised.
    """
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BridgeOptError as e:
        logger.error(e.detail)
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
