"""
Reduced-scale rerun of the GA vs CMA-ES protocol.

Runs both algorithms at the same evaluation budget, compares them and
writes ``acceptance.json``: the share of runs reaching s <= 1.05 and the
median final costs. A directional miss is reported, not fatal.

    python reproduce.py --out reproduction --runs 10 --evaluations 40000
"""

import argparse
import logging
import os
import sys

from bridgeopt.evaluator import Evaluator
from bridgeopt.exceptions import BridgeOptError
from bridgeopt.harness import (
    ExperimentLayout,
    compare,
    format_comparison,
    reference_design,
    run_experiment,
    soft_acceptance,
)
from bridgeopt.main import configure_logging
from bridgeopt.models import CMAESConfig, GAConfig
from bridgeopt.utils import dump_json

logger = logging.getLogger("bridgeopt")


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Reduced-scale GA vs CMA-ES reproduction")
    parser.add_argument("--out", default="reproduction")
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--evaluations", type=int, default=40000, help="budget per run")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--verbose", action="store_true")
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    try:
        configure_logging(args.verbose, args.out)
        ga = GAConfig(generations=args.evaluations // GAConfig.population_size, seed=args.seed,
                      log_every=500)
        cmaes = CMAESConfig(generations=args.evaluations // CMAESConfig.lam, seed=args.seed, log_every=100)
        evaluator = Evaluator()

        _, logs_ga = run_experiment("ga", ga, evaluator, n_runs=args.runs, threads=args.threads,
                                    layout=ExperimentLayout(os.path.join(args.out, "ga")))
        _, logs_cmaes = run_experiment("cmaes", cmaes, evaluator, n_runs=args.runs, threads=args.threads,
                                       layout=ExperimentLayout(os.path.join(args.out, "cmaes")))

        report = compare(logs_cmaes, logs_ga, reference_design(evaluator))
        dump_json(os.path.join(args.out, "comparison.json"), report)
        print(format_comparison(report))

        acceptance = soft_acceptance(logs_ga, logs_cmaes)
        dump_json(os.path.join(args.out, "acceptance.json"), acceptance)
    except BridgeOptError as e:
        logger.error(e.detail)
        return e.exit_code

    for name in ("ga", "cmaes"):
        row = acceptance[name]
        logger.info(f"{name}: {row['share_s_within_limit']:.0%} of runs at s <= {acceptance['s_limit']}, "
                    f"median cost {row['median_cost']:.3f} k€")
    if not acceptance["feasibility_met"]:
        logger.warning(f"Fewer than {acceptance['required_share']:.0%} of runs reached s <= {acceptance['s_limit']}")
    if not acceptance["cost_order_met"]:
        logger.warning("CMA-ES median final cost is above the GA median")
    return 0


if __name__ == "__main__":
    sys.exit(main())
