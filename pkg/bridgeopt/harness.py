"""
Seeded multi-run experiments and their on-disk artifacts.

One experiment directory holds the runs of one algorithm:

    runs/<algorithm>/<seed>.csv   best-so-far record per generation
    best/<seed>.json              final best genome of each run
    snapshots/<seed>.json         CMA-ES state, when snapshots are enabled
    summary.json                  cross-run summary against the reference
"""

import dataclasses
import logging
import multiprocessing as mp
import os

import numpy as np

from bridgeopt.cmaes import run_cmaes, snapshot_path, strategy_constants
from bridgeopt.design_space import load_domains
from bridgeopt.exceptions import ConfigError, EmptySample, IncompleteData, IoError
from bridgeopt.ga import run_ga
from bridgeopt.models import (
    CMAESConfig,
    ExperimentSummary,
    FitnessParams,
    GAConfig,
    GenerationRecord,
    ReferenceDesign,
    RunLog,
)
from bridgeopt.stats import mann_whitney_u, shapiro_diagnostic, summarize_metric
from bridgeopt.utils import dump_json, load_json, read_csv, write_csv

logger = logging.getLogger("bridgeopt")

ALGORITHMS = ("ga", "cmaes")
RUN_HEADER = ["generation", "evals_used", "best_fitness", "best_cost", "best_s"]
CONVERGENCE_HEADER = [
    "generation", "evals_used",
    "fitness_mean", "fitness_std", "cost_mean", "cost_std", "s_mean", "s_std",
]
FINALS_HEADER = ["algorithm", "seed", "fitness", "cost", "s"]
METRICS = ("fitness", "cost", "s")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Cheap, feasible design every run is measured against.
REFERENCE_GENES = (
    6.0, 0.94, 0.81, 1.2, 0.7, 1.63, 1.21, 0.27, 0.85,
    330.0, 70.0, 800.0, 790.0,
    0.1, 31.8, 1.22, 0.41, 12.2, 0.7, 6.2, 2.22, 4.05,
)


def reference_design(evaluator):
    """
    Evaluate the reference genome under ``evaluator``.

    Returns:
        ReferenceDesign: genes with the repo's own cost and s.
    """
    genes = np.array(REFERENCE_GENES)
    result = evaluator(genes)
    if result.s_max > 1.0:
        logger.warning(f"Reference design is infeasible under these materials (s = {result.s_max:.4f})")
    return ReferenceDesign(genes=genes, cost=result.cost, s=result.s_max)


def derive_seed(base_seed, run_index):
    return base_seed * 1000 + run_index


class ExperimentLayout:
    """Paths of every artifact inside one experiment directory."""

    def __init__(self, root):
        self.root = root

    @property
    def summary(self):
        return os.path.join(self.root, "summary.json")

    @property
    def snapshots(self):
        return os.path.join(self.root, "snapshots")

    @property
    def log_file(self):
        return os.path.join(self.root, "bridgeopt.log")

    def runs_dir(self, algorithm):
        return os.path.join(self.root, "runs", algorithm)

    def run_csv(self, algorithm, seed):
        return os.path.join(self.runs_dir(algorithm), f"{seed}.csv")

    def best_json(self, seed):
        return os.path.join(self.root, "best", f"{seed}.json")

    def check_owner(self, algorithm):
        """
        Refuse to write ``algorithm`` runs over another algorithm's runs.

        Raises:
            ConfigError: if ``runs/`` already holds a different algorithm.
        """
        runs = os.path.join(self.root, "runs")
        if not os.path.isdir(runs):
            return
        others = sorted(d for d in os.listdir(runs) if d != algorithm and os.path.isdir(os.path.join(runs, d)))
        if others:
            raise ConfigError(
                f"{self.root} already holds {', '.join(others)} runs; choose another --out for {algorithm}"
            )

    def algorithm(self):
        """The single algorithm whose runs live in this directory."""
        runs = os.path.join(self.root, "runs")
        found = sorted(d for d in os.listdir(runs) if os.path.isdir(os.path.join(runs, d))) if os.path.isdir(runs) else []
        if len(found) != 1:
            raise IncompleteData(f"{self.root}: expected one algorithm under runs/, found {found or 'none'}")
        return found[0]


def _configure_worker_logging(level):
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=[logging.StreamHandler()])


def _run_worker(task):
    algorithm, cfg, evaluator, fitness_params, domains, snapshot_dir, resume = task
    if algorithm == "ga":
        return run_ga(cfg, evaluator, fitness_params, domains)
    return run_cmaes(cfg, evaluator, fitness_params, domains, snapshot_dir=snapshot_dir, resume=resume)


def validate_algorithm(algorithm, cfg):
    expected = {"ga": GAConfig, "cmaes": CMAESConfig}.get(algorithm)
    if expected is None:
        raise ConfigError(f"unknown algorithm {algorithm!r}, expected one of {', '.join(ALGORITHMS)}")
    if not isinstance(cfg, expected):
        raise ConfigError(f"{algorithm} needs a {expected.__name__}, got {type(cfg).__name__}")


def run_experiment(algorithm, base_config, evaluator, n_runs=30, fitness_params=FitnessParams(),
                   domains=None, threads=None, layout=None, resume=False):
    """
    Run ``n_runs`` independent seeded runs of one algorithm.

    Run i uses seed ``base_config.seed * 1000 + i``. Runs are spread over
    a spawn process pool of at most ``threads`` workers; the results come
    back in run order whatever the pool width.

    Args:
        algorithm (str): ``"ga"`` or ``"cmaes"``.
        base_config (GAConfig | CMAESConfig): Shared hyperparameters.
        evaluator (callable): Picklable design evaluator.
        n_runs (int): Number of runs.
        fitness_params (FitnessParams): Fitness constant.
        domains (DomainTable, optional): Defaults to the embedded table.
        threads (int, optional): Pool width; defaults to the CPU count.
        layout (ExperimentLayout, optional): Where to persist run logs,
            best genomes and the summary.
        resume (bool): Continue CMA-ES runs from their snapshots.

    Returns:
        tuple[ExperimentSummary, list[RunLog]]
    """
    validate_algorithm(algorithm, base_config)
    if n_runs < 1:
        raise ConfigError(f"runs must be >= 1, got {n_runs}")
    if layout is not None:
        layout.check_owner(algorithm)
    snapshot_dir = layout.snapshots if layout is not None and algorithm == "cmaes" else None
    tasks = []
    for i in range(n_runs):
        cfg = dataclasses.replace(base_config, seed=derive_seed(base_config.seed, i))
        resume_path = None
        if resume and snapshot_dir and os.path.exists(snapshot_path(snapshot_dir, cfg.seed)):
            resume_path = snapshot_path(snapshot_dir, cfg.seed)
        tasks.append((algorithm, cfg, evaluator, fitness_params, domains, snapshot_dir, resume_path))

    width = min(threads or os.cpu_count() or 1, n_runs)
    logger.info(f"Starting {n_runs} {algorithm} runs, base seed {base_config.seed}, {width} worker(s)")
    if width == 1:
        logs = [_run_worker(task) for task in tasks]
    else:
        context = mp.get_context("spawn")
        with context.Pool(processes=width, initializer=_configure_worker_logging,
                          initargs=(logger.getEffectiveLevel(),)) as pool:
            logs = pool.map(_run_worker, tasks)

    reference = reference_design(evaluator)
    summary = summarize(algorithm, logs, reference)
    if layout is not None:
        for log in logs:
            write_run_log(layout, log)
        strategy = None
        if algorithm == "cmaes":
            strategy = strategy_constants(base_config, len(domains if domains is not None else load_domains()))
        dump_json(layout.summary, summary_document(summary, reference, logs, strategy))
        logger.info(f"Wrote {n_runs} run logs and {layout.summary}")
    return summary, logs


def _final_values(logs):
    return {
        "fitness": np.array([log.final.best_fitness for log in logs]),
        "cost": np.array([log.final.best_cost for log in logs]),
        "s": np.array([log.final.best_s for log in logs]),
    }


def improved_runs(logs, reference):
    """Number of runs whose final best is cheaper than the reference with s <= 1."""
    return sum(1 for log in logs if log.final.best_cost < reference.cost and log.final.best_s <= 1.0)


def improvement_rate(logs, reference):
    """
    Share of runs that beat the reference design.

    Raises:
        EmptySample: if ``logs`` is empty.
    """
    if not logs:
        raise EmptySample("improvement rate needs at least one run")
    return improved_runs(logs, reference) / len(logs)


def summarize(algorithm, logs, reference, tests=()):
    finals = _final_values(logs)
    return ExperimentSummary(
        algorithm=algorithm,
        runs=len(logs),
        fitness=summarize_metric(finals["fitness"]),
        cost=summarize_metric(finals["cost"]),
        s=summarize_metric(finals["s"]),
        improvement_rate=improvement_rate(logs, reference),
        improved_runs=improved_runs(logs, reference),
        tests=list(tests),
    )


def summary_document(summary, reference, logs, strategy=None):
    document = {
        "summary": dataclasses.asdict(summary),
        "reference": {
            "genes": reference.genes,
            "cost": reference.cost,
            "s": reference.s,
            "published_cost": reference.published_cost,
            "published_s": reference.published_s,
        },
        "seeds": [log.seed for log in logs],
        "generations": len(logs[0].records),
        "evaluations_per_run": logs[0].evaluations,
    }
    if strategy is not None:
        document["strategy"] = strategy
    return document


def write_run_log(layout, log):
    rows = [(r.generation, r.evals_used, r.best_fitness, r.best_cost, r.best_s) for r in log.records]
    write_csv(layout.run_csv(log.algorithm, log.seed), RUN_HEADER, rows)
    final = log.final
    dump_json(layout.best_json(log.seed), {
        "algorithm": log.algorithm,
        "seed": log.seed,
        "genes": log.best_genes,
        "fitness": final.best_fitness,
        "cost": final.best_cost,
        "s": final.best_s,
    })


def _read_run_csv(path, algorithm, seed):
    header, rows = read_csv(path)
    if header != RUN_HEADER:
        raise IncompleteData(f"{path}: unexpected header {header}")
    if not rows:
        raise IncompleteData(f"{path}: no generation records")
    log = RunLog(algorithm=algorithm, seed=seed)
    for number, row in enumerate(rows, start=1):
        try:
            generation, evals, fitness, cost, s = row
            log.append(GenerationRecord(int(generation), int(evals), float(fitness), float(cost), float(s)))
        except ValueError:
            raise IncompleteData(f"{path}: malformed record on data row {number}: {row}")
    return log


def load_run_logs(root):
    """
    Read every run of an experiment directory.

    Raises:
        IncompleteData: when the summary, a run log or a best genome is
            missing, or a run log is truncated.
    """
    layout = ExperimentLayout(root)
    if not os.path.isdir(root):
        raise IncompleteData(f"{root}: not a directory")
    algorithm = layout.algorithm()
    try:
        expected = load_json(layout.summary)
    except IoError:
        raise IncompleteData(f"{root}: missing summary.json")
    if not isinstance(expected, dict) or "seeds" not in expected or "generations" not in expected:
        raise IncompleteData(f"{layout.summary}: no seed list")

    logs = []
    for seed in expected["seeds"]:
        csv_path = layout.run_csv(algorithm, seed)
        if not os.path.exists(csv_path):
            raise IncompleteData(f"{root}: missing run log {csv_path}")
        log = _read_run_csv(csv_path, algorithm, seed)
        if len(log.records) != expected["generations"]:
            raise IncompleteData(
                f"{csv_path}: {len(log.records)} generation records, expected {expected['generations']}"
            )
        try:
            best = load_json(layout.best_json(seed))
        except IoError:
            raise IncompleteData(f"{root}: missing best genome for seed {seed}")
        log.best_genes = np.array(best["genes"], dtype=float)
        logs.append(log)
    logger.info(f"Loaded {len(logs)} {algorithm} runs from {root}")
    return logs


def convergence_rows(logs, skip_first=0):
    """
    Per-generation mean and std of the best-so-far metrics across runs.

    Generations below ``skip_first`` are left out.

    Raises:
        IncompleteData: if the runs have different lengths.
    """
    lengths = {len(log.records) for log in logs}
    if len(lengths) != 1:
        raise IncompleteData(f"runs have different lengths: {sorted(lengths)}")
    columns = {
        "fitness": np.array([[r.best_fitness for r in log.records] for log in logs]),
        "cost": np.array([[r.best_cost for r in log.records] for log in logs]),
        "s": np.array([[r.best_s for r in log.records] for log in logs]),
    }
    ddof = 1 if len(logs) > 1 else 0
    means = {k: v.mean(axis=0) for k, v in columns.items()}
    stds = {k: v.std(axis=0, ddof=ddof) for k, v in columns.items()}

    rows = []
    for index, record in enumerate(logs[0].records):
        if record.generation < skip_first:
            continue
        row = [record.generation, record.evals_used]
        for metric in METRICS:
            row += [float(means[metric][index]), float(stds[metric][index])]
        rows.append(row)
    return rows


def finals_rows(logs):
    return [(log.algorithm, log.seed, log.final.best_fitness, log.final.best_cost, log.final.best_s)
            for log in logs]


def diagnostics(logs):
    finals = _final_values(logs)
    return {metric: shapiro_diagnostic(finals[metric]) for metric in METRICS}


def experiment_stats(logs, reference, out_dir, skip_first=0):
    """
    Write ``stats.json``, ``convergence.csv`` and ``finals.csv`` for one experiment.

    Returns:
        dict: The stats document.
    """
    algorithm = logs[0].algorithm
    summary = summarize(algorithm, logs, reference)
    document = {
        "summary": dataclasses.asdict(summary),
        "reference": {"cost": reference.cost, "s": reference.s},
        "normality": diagnostics(logs),
    }
    dump_json(os.path.join(out_dir, "stats.json"), document)
    write_csv(os.path.join(out_dir, "convergence.csv"), CONVERGENCE_HEADER, convergence_rows(logs, skip_first))
    write_csv(os.path.join(out_dir, "finals.csv"), FINALS_HEADER, finals_rows(logs))
    return document


def _best_run(logs):
    fitnesses = [log.final.best_fitness for log in logs]
    return logs[int(np.argmax(fitnesses))]


def compare(logs_a, logs_b, reference):
    """
    Side-by-side comparison of two run sets.

    Sample a is ``logs_a`` in every rank test, so a negative effect size
    means a's values tend to be smaller.

    Returns:
        dict: ``best`` (best run of each set against the reference),
            ``tests`` (Mann-Whitney per metric), ``summaries`` and
            ``normality`` diagnostics.
    """
    finals_a = _final_values(logs_a)
    finals_b = _final_values(logs_b)
    tests = [mann_whitney_u(finals_a[m], finals_b[m], metric=m) for m in METRICS]

    best = {}
    for label, logs in (("a", logs_a), ("b", logs_b)):
        run = _best_run(logs)
        best[label] = {
            "algorithm": run.algorithm,
            "seed": run.seed,
            "cost": run.final.best_cost,
            "s": run.final.best_s,
            "cost_diff": run.final.best_cost - reference.cost,
            "s_diff": run.final.best_s - reference.s,
        }
    return {
        "reference": {"cost": reference.cost, "s": reference.s,
                      "published_cost": reference.published_cost, "published_s": reference.published_s},
        "best": best,
        "tests": [dataclasses.asdict(t) for t in tests],
        "summaries": {
            "a": dataclasses.asdict(summarize(logs_a[0].algorithm, logs_a, reference)),
            "b": dataclasses.asdict(summarize(logs_b[0].algorithm, logs_b, reference)),
        },
        "normality": {"a": diagnostics(logs_a), "b": diagnostics(logs_b)},
    }


def format_comparison(report):
    """Plain-text tables of a ``compare`` report."""
    ref = report["reference"]
    lines = [
        f"Reference: cost {ref['cost']:.3f} k€, s {ref['s']:.4f} "
        f"(published {ref['published_cost']:.3f} k€, {ref['published_s']:.4f})",
        "",
        f"{'set':<4}{'algorithm':<10}{'seed':>8}{'cost':>12}{'s':>10}{'Δcost':>12}{'Δs':>10}",
    ]
    for label in ("a", "b"):
        b = report["best"][label]
        lines.append(
            f"{label:<4}{b['algorithm']:<10}{b['seed']:>8}{b['cost']:>12.3f}{b['s']:>10.4f}"
            f"{b['cost_diff']:>12.3f}{b['s_diff']:>10.4f}"
        )
    lines += ["", f"{'metric':<10}{'U':>10}{'p':>12}{'effect':>10}"]
    for t in report["tests"]:
        lines.append(f"{t['metric']:<10}{t['u']:>10.1f}{t['p']:>12.4g}{t['effect_size']:>10.3f}")
    lines += ["", f"{'set':<4}{'algorithm':<10}{'fitness':>22}{'cost':>22}{'s':>20}{'improved':>12}"]
    for label in ("a", "b"):
        s = report["summaries"][label]
        lines.append(
            f"{label:<4}{s['algorithm']:<10}"
            f"{s['fitness']['mean']:>12.4f} ± {s['fitness']['std']:<7.4f}"
            f"{s['cost']['mean']:>12.3f} ± {s['cost']['std']:<7.3f}"
            f"{s['s']['mean']:>10.4f} ± {s['s']['std']:<7.4f}"
            f"{s['improved_runs']:>6}/{s['runs']:<5}"
        )
    return "\n".join(lines)


def soft_acceptance(logs_ga, logs_cmaes, s_limit=1.05, share=0.8):
    """
    Directional check of a reduced-scale experiment.

    Both algorithms should bring ``share`` of their runs to s <= ``s_limit``
    and CMA-ES should reach a median final cost no higher than the GA's.
    The outcome is reported, never raised.
    """
    report = {}
    for name, logs in (("ga", logs_ga), ("cmaes", logs_cmaes)):
        finals = _final_values(logs)
        report[name] = {
            "runs": len(logs),
            "share_s_within_limit": float(np.mean(finals["s"] <= s_limit)),
            "median_cost": float(np.median(finals["cost"])),
        }
    report["feasibility_met"] = all(report[n]["share_s_within_limit"] >= share for n in ("ga", "cmaes"))
    report["cost_order_met"] = report["cmaes"]["median_cost"] <= report["ga"]["median_cost"]
    report["s_limit"] = s_limit
    report["required_share"] = share
    return report
