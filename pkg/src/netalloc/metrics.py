"""Ground-truth scoring of allocation methods against the data oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dgp
from .allocation import Allocation, greedy, random_allocation, tte_objective
from .dgp import DgpInstance
from .errors import InvalidComparisonError, UndefinedMetricError


@dataclass(frozen=True)
class RandomBaseline:
    """Monte Carlo value of random allocation at one budget."""

    k: int
    samples: int
    mean_tte: float
    mean_outcome_sum: float
    tte_samples: np.ndarray
    outcome_samples: np.ndarray


@dataclass(frozen=True)
class MethodResult:
    method: str
    k: int
    allocation: Allocation
    true_tte: float
    liftup: float | None
    riseo: float | None
    wall_time: float


def random_baseline(instance: DgpInstance, k: int, samples: int = 100,
                    rng: np.random.Generator | None = None) -> RandomBaseline:
    """Average oracle TTE and outcome sum over uniform k-subsets."""
    if samples < 1:
        raise UndefinedMetricError("need at least one random sample")
    if rng is None:
        rng = np.random.default_rng(0)
    zeros = np.zeros(instance.n)
    ref_total = float(dgp.expected_outcomes(instance, zeros, zeros).sum())
    ttes = np.zeros(samples)
    sums = np.zeros(samples)
    for s in range(samples):
        t = random_allocation(instance.n, k, rng).t
        ttes[s] = dgp.tte(instance, t)
        sums[s] = ttes[s] + ref_total
    return RandomBaseline(
        k=k, samples=samples,
        mean_tte=float(ttes.mean()), mean_outcome_sum=float(sums.mean()),
        tte_samples=ttes, outcome_samples=sums,
    )


def liftup(method_tte: float, random_mean: float) -> float:
    """Method TTE relative to the random-allocation mean at equal budget."""
    if random_mean == 0.0:
        raise UndefinedMetricError("random-allocation mean TTE is zero")
    return method_tte / random_mean


def riseo(instance: DgpInstance, allocation: Allocation,
          random_outcome_mean: float) -> float:
    """Sum of expected outcomes under the allocation, relative to random."""
    if random_outcome_mean == 0.0:
        raise UndefinedMetricError("random-allocation outcome sum is zero")
    t = allocation.t
    z = dgp.exposure(instance.graph, t)
    total = float(dgp.expected_outcomes(instance, t, z).sum())
    return total / random_outcome_mean


def allocation_similarity(a: Allocation, b: Allocation) -> float:
    """Shared selections divided by the budget; 1 for two empty allocations."""
    if a.k != b.k:
        raise InvalidComparisonError(f"budgets differ: {a.k} vs {b.k}")
    if a.k == 0:
        return 1.0
    shared = np.intersect1d(a.selected, b.selected).size
    return shared / a.k


def score_allocation(instance: DgpInstance, allocation: Allocation, method: str,
                     baseline: RandomBaseline | None = None,
                     wall_time: float = float("nan")) -> MethodResult:
    """Fill a MethodResult with oracle TTE and, if a baseline is given, ratios."""
    true_tte = dgp.tte(instance, allocation.t)
    lift = rel = None
    if baseline is not None:
        lift = liftup(true_tte, baseline.mean_tte)
        rel = riseo(instance, allocation, baseline.mean_outcome_sum)
    return MethodResult(method=method, k=allocation.k, allocation=allocation,
                        true_tte=true_tte, liftup=lift, riseo=rel,
                        wall_time=wall_time)


def upper_bound(instance: DgpInstance, k: int,
                baseline: RandomBaseline | None = None) -> MethodResult:
    """Greedy allocation driven by the true generating process.

    A perfect-model reference point; still heuristic, so the true optimum may
    be higher.
    """
    start = time.perf_counter()
    objective = tte_objective(instance.graph, dgp.oracle_outcome_fn(instance))
    schedule = greedy(objective, instance.n, k)
    elapsed = time.perf_counter() - start
    return score_allocation(instance, schedule.at(k), "upper_bound",
                            baseline=baseline, wall_time=elapsed)


def write_similarity_matrix(path, names: list[str], matrix: np.ndarray) -> None:
    """Square CSV with method-name headers, matching the matrix layout."""
    matrix = np.asarray(matrix, dtype=float)
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("method," + ",".join(names) + "\n")
        for name, row in zip(names, matrix):
            fh.write(name + "," + ",".join(repr(float(v)) for v in row) + "\n")
