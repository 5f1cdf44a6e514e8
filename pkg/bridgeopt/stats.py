"""Rank statistics used to compare two sets of runs."""

import itertools
import logging
import math

import numpy as np
from scipy import stats

from bridgeopt.exceptions import EmptySample
from bridgeopt.models import MetricSummary, RankTestResult

logger = logging.getLogger("bridgeopt")

EXACT_LIMIT = 12


def u_statistic(a, b):
    """Mann-Whitney U of ``a`` against ``b`` from midranks of the pooled sample."""
    n = len(a)
    ranks = stats.rankdata(np.concatenate([a, b]))
    return float(ranks[:n].sum() - n * (n + 1) / 2.0)


def exact_p_value(a, b):
    """
    Two-sided p-value by enumerating every split of the pooled sample.

    A split counts when its U is at least as far from ``n*m/2`` as the
    observed one. Ties keep their midranks.
    """
    n, m = len(a), len(b)
    ranks = stats.rankdata(np.concatenate([a, b]))
    centre = n * m / 2.0
    offset = n * (n + 1) / 2.0
    observed = abs(ranks[:n].sum() - offset - centre)
    extreme = 0
    total = 0
    for chosen in itertools.combinations(range(n + m), n):
        total += 1
        if abs(ranks[list(chosen)].sum() - offset - centre) >= observed - 1e-9:
            extreme += 1
    return extreme / total


def mann_whitney_u(a, b, metric=""):
    """
    Two-sided Mann-Whitney U test with rank-biserial effect size.

    Small samples (``len(a) + len(b) <= 12``) get the exact permutation
    p-value; larger ones the normal approximation with tie correction.

    Args:
        a (array-like): First sample.
        b (array-like): Second sample.
        metric (str): Label stored in the result.

    Returns:
        RankTestResult: ``u`` for ``a`` against ``b``, the p-value and
            ``2U/(n*m) - 1``, negative when ``a`` tends to be smaller.

    Raises:
        EmptySample: if either sample is empty.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptySample(f"both samples need at least one value, got {a.size} and {b.size}")
    n, m = a.size, b.size
    u = u_statistic(a, b)

    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        p = 1.0
    elif n + m <= EXACT_LIMIT:
        p = exact_p_value(a, b)
    else:
        p = float(stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic").pvalue)

    effect = 2.0 * u / (n * m) - 1.0
    logger.debug(f"Mann-Whitney {metric or ''}: U {u}, p {p:.4g}, effect {effect:.3f}")
    return RankTestResult(metric=metric, u=u, p=p, effect_size=effect)


def shapiro_diagnostic(values):
    """
    Shapiro-Wilk statistic and p-value, or None below three distinct values.

    Reported alongside the rank tests; nothing branches on it.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 3 or np.ptp(values) == 0.0:
        return None
    result = stats.shapiro(values)
    return {"w": float(result.statistic), "p": float(result.pvalue)}


def summarize_metric(values):
    """
    Mean and sample standard deviation (0 for a single value).

    Non-finite values are kept: a run stuck at the singular sentinel
    (s = inf) makes the mean inf and the std nan, and a warning is logged.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return MetricSummary(mean=math.nan, std=math.nan)
    non_finite = int(np.count_nonzero(~np.isfinite(values)))
    if non_finite:
        logger.warning(f"{non_finite} non-finite values in a summary")
    with np.errstate(invalid="ignore"):
        std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        return MetricSummary(mean=float(np.mean(values)), std=std)
