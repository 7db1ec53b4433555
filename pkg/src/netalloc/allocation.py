"""Budgeted allocation algorithms over a pluggable total-effect objective.

Objective-driven searchers (greedy, genetic, exhaustive) work against a
TteObjective and never see the graph; structural heuristics (degree, single
discount, lazy-greedy diffusion) work on the graph directly. All tie-breaks
are by ascending node index so every algorithm is reproducible bit for bit.
"""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import (
    EnumerationCapError,
    InfeasibleSearchError,
    InvalidInputError,
    InvalidParameterError,
)
from .graphs import Graph


@dataclass(frozen=True, eq=False)
class Allocation:
    """Binary treatment vector with a budget k; at most k entries are 1."""

    t: np.ndarray
    k: int

    def __post_init__(self):
        t = np.asarray(self.t)
        if not np.all((t == 0) | (t == 1)):
            raise InvalidInputError("allocation entries must be 0/1")
        t = t.astype(np.int8)
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        if self.k < 0:
            raise InvalidParameterError("budget k must be >= 0")
        if int(t.sum()) > self.k:
            raise InvalidInputError(
                f"allocation treats {int(t.sum())} nodes, budget is {self.k}"
            )

    @classmethod
    def from_selected(cls, n: int, nodes, k: int) -> "Allocation":
        t = np.zeros(n, dtype=np.int8)
        t[np.asarray(nodes, dtype=int)] = 1
        return cls(t=t, k=k)

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def selected(self) -> np.ndarray:
        return np.flatnonzero(self.t)

    @property
    def size(self) -> int:
        return int(self.t.sum())


@dataclass(frozen=True)
class TteObjective:
    """Allocation -> value, optionally with an incremental add evaluator.

    evaluate_add(t, value_of_t, j) must equal evaluate(t with j set) within
    1e-9; searchers use it to avoid full re-evaluation when only node j and
    its neighborhood can change.
    """

    evaluate: Callable[[np.ndarray], float]
    evaluate_add: Callable[[np.ndarray, float, int], float] | None = None


def tte_objective(graph: Graph, outcome_fn) -> TteObjective:
    """Total-effect objective from a per-node outcome function.

    outcome_fn(nodes, t, z) returns each listed node's (predicted or true)
    outcome at its own treatment and exposure. The objective is the summed
    difference against the all-control reference, which is computed once.
    Incremental evaluation touches only the added node and its neighbors,
    because a one-hop exposure mapping localizes the change.
    """
    n = graph.n
    all_nodes = np.arange(n)
    zeros = np.zeros(n)
    ref_total = float(np.asarray(outcome_fn(all_nodes, zeros, zeros)).sum())
    deg = np.maximum(graph.degrees, 1).astype(float)

    def evaluate(t: np.ndarray) -> float:
        tf = np.asarray(t, dtype=float)
        z = graph.neighbor_mean(tf)
        return float(np.asarray(outcome_fn(all_nodes, tf, z)).sum() - ref_total)

    def evaluate_add(t: np.ndarray, value: float, j: int) -> float:
        if t[j]:
            raise InvalidInputError(f"node {j} is already treated")
        nbrs = graph.neighbors(j)
        affected = np.concatenate(([j], nbrs))
        t_old = np.asarray(t, dtype=float)[affected]
        z_old = np.array(
            [t[graph.neighbors(a)].sum() for a in affected], dtype=float
        ) / deg[affected]
        z_new = z_old.copy()
        if nbrs.size:
            z_new[1:] += 1.0 / deg[nbrs]
        t_new = t_old.copy()
        t_new[0] = 1.0
        delta = (np.asarray(outcome_fn(affected, t_new, z_new)).sum()
                 - np.asarray(outcome_fn(affected, t_old, z_old)).sum())
        return value + float(delta)

    return TteObjective(evaluate=evaluate, evaluate_add=evaluate_add)


@dataclass(frozen=True)
class GreedySchedule:
    """Output of a greedy-style run: the selection order plus running values.

    One run at budget k serves every smaller budget via `at(k')`. step_times
    holds cumulative wall seconds after each selection.
    """

    n: int
    order: tuple[int, ...]
    values: tuple[float, ...]
    baseline: float = 0.0
    step_times: tuple[float, ...] = ()

    def at(self, k: int) -> Allocation:
        if k > len(self.order):
            raise InvalidParameterError(
                f"schedule holds {len(self.order)} selections, asked for {k}"
            )
        return Allocation.from_selected(self.n, self.order[:k], k)

    @property
    def allocation(self) -> Allocation:
        return self.at(len(self.order))

    def value_at(self, k: int) -> float:
        return self.baseline if k == 0 else self.values[k - 1]

    def seconds_at(self, k: int) -> float:
        if not self.step_times or k == 0:
            return 0.0
        return self.step_times[k - 1]


def greedy(objective: TteObjective, n: int, k: int,
           use_incremental: bool = True) -> GreedySchedule:
    """Forward greedy: k rounds, each adding the best marginal-gain node.

    Ties go to the lowest index. With use_incremental=False every candidate
    is scored by a full objective evaluation (the cross-check mode).
    """
    if k > n:
        raise InvalidParameterError(f"budget k={k} exceeds n={n}")
    if k < 0:
        raise InvalidParameterError("budget k must be >= 0")
    t = np.zeros(n, dtype=np.int8)
    baseline = float(objective.evaluate(t))
    value = baseline
    incremental = use_incremental and objective.evaluate_add is not None
    order: list[int] = []
    values: list[float] = []
    times: list[float] = []
    start = time.perf_counter()
    remaining = list(range(n))
    for _ in range(k):
        best_j = -1
        best_val = -np.inf
        for j in remaining:
            if incremental:
                cand = objective.evaluate_add(t, value, j)
            else:
                t[j] = 1
                cand = float(objective.evaluate(t))
                t[j] = 0
            if cand > best_val:
                best_val = cand
                best_j = j
        t[best_j] = 1
        remaining.remove(best_j)
        value = best_val
        order.append(best_j)
        values.append(value)
        times.append(time.perf_counter() - start)
    return GreedySchedule(n=n, order=tuple(order), values=tuple(values),
                          baseline=baseline, step_times=tuple(times))


@dataclass(frozen=True)
class GaConfig:
    """Genetic-search knobs. generations=None applies the budget rule
    37*k + 300 for k <= 100, else 5000."""

    population: int = 40
    elites: int = 5
    parents: int = 15
    genes_mutated: int = 1
    crossover: str = "uniform"
    generations: int | None = None

    def __post_init__(self):
        if self.elites >= self.population:
            raise InvalidParameterError("elites must be < population")
        if self.parents > self.population:
            raise InvalidParameterError("parents must be <= population")
        if self.parents < 2:
            raise InvalidParameterError("need at least 2 parents")
        if self.genes_mutated < 0:
            raise InvalidParameterError("genes_mutated must be >= 0")
        if self.crossover != "uniform":
            raise InvalidParameterError("only uniform crossover is supported")

    def generations_for(self, k: int) -> int:
        if self.generations is not None:
            return self.generations
        return 37 * k + 300 if k <= 100 else 5000


def ga_fitness(objective: TteObjective, t: np.ndarray, k: int) -> float:
    """Objective value if the budget holds, else exactly 0."""
    if int(np.sum(t)) > k:
        return 0.0
    return float(objective.evaluate(t))


def genetic(
    objective: TteObjective,
    n: int,
    k: int,
    config: GaConfig,
    seed_allocations,
    rng: np.random.Generator,
    on_generation: Callable[[int, float], None] | None = None,
) -> Allocation:
    """Genetic search over binary chromosomes of length n.

    The initial population is the supplied seed allocations (heuristic
    solutions) padded with uniform-random k-subsets. Each generation keeps
    the elite chromosomes, selects the top-fitness parents, pairs them
    sequentially, applies uniform crossover, and bit-flips exactly
    `genes_mutated` genes per child. Returns the best feasible allocation
    ever seen.
    """
    if k > n:
        raise InvalidParameterError(f"budget k={k} exceeds n={n}")
    pop: list[np.ndarray] = []
    for alloc in seed_allocations:
        t = np.asarray(alloc.t if isinstance(alloc, Allocation) else alloc,
                       dtype=np.int8)
        if t.size != n:
            raise InvalidInputError("seed allocation has wrong length")
        if int(t.sum()) > k:
            raise InvalidInputError("seed allocation violates the budget")
        pop.append(t.copy())
    while len(pop) > config.population:
        pop.pop()
    while len(pop) < config.population:
        t = np.zeros(n, dtype=np.int8)
        t[rng.choice(n, size=k, replace=False)] = 1
        pop.append(t)

    def fitnesses(chroms):
        return np.array([ga_fitness(objective, t, k) for t in chroms])

    fits = fitnesses(pop)
    best_t: np.ndarray | None = None
    best_val = -np.inf

    def update_best(chroms, values):
        nonlocal best_t, best_val
        for t, v in zip(chroms, values):
            if int(t.sum()) <= k and v > best_val:
                best_val = v
                best_t = t.copy()

    update_best(pop, fits)
    n_children = config.population - config.elites
    for gen in range(config.generations_for(k)):
        rank = np.lexsort((np.arange(len(pop)), -fits))
        parents = [pop[i] for i in rank[: config.parents]]
        elites = [pop[i] for i in rank[: config.elites]]
        elite_fits = [fits[i] for i in rank[: config.elites]]
        children = []
        for c in range(n_children):
            pa = parents[c % config.parents]
            pb = parents[(c + 1) % config.parents]
            mask = rng.random(n) < 0.5
            child = np.where(mask, pa, pb).astype(np.int8)
            if config.genes_mutated:
                flip = rng.choice(n, size=config.genes_mutated, replace=False)
                child[flip] = 1 - child[flip]
            children.append(child)
        child_fits = fitnesses(children)
        update_best(children, child_fits)
        pop = elites + children
        fits = np.concatenate((elite_fits, child_fits))
        if on_generation is not None:
            on_generation(gen, best_val)
    if best_t is None:
        raise InfeasibleSearchError("no feasible allocation was ever produced")
    return Allocation(t=best_t, k=k)


def ic_simulate(graph: Graph, seeds, p: float, rng: np.random.Generator) -> int:
    """One independent-cascade run; returns the activated count, seeds included.

    Every newly activated node gets a single chance to activate each still
    inactive neighbor with probability p.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError("activation probability must be in [0, 1]")
    active = np.zeros(graph.n, dtype=bool)
    frontier = sorted(set(int(s) for s in seeds))
    active[frontier] = True
    while frontier:
        new: list[int] = []
        for v in frontier:
            nbrs = graph.neighbors(v)
            candidates = nbrs[~active[nbrs]]
            if candidates.size == 0:
                continue
            hits = candidates[rng.random(candidates.size) < p]
            active[hits] = True
            new.extend(int(h) for h in hits)
        frontier = new
    return int(active.sum())


def ic_mean_spread(graph: Graph, seeds, p: float, n_sims: int,
                   rng: np.random.Generator) -> float:
    """Mean activated count over n_sims cascade runs.

    The first propagation round is drawn as one Bernoulli block across all
    simulations; only simulations with at least one round-one activation pay
    for a Python cascade continuation, which makes small-p estimates cheap.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError("activation probability must be in [0, 1]")
    seed_list = sorted(set(int(s) for s in seeds))
    if not seed_list:
        return 0.0
    base_active = np.zeros(graph.n, dtype=bool)
    base_active[seed_list] = True
    targets = [graph.neighbors(s) for s in seed_list]
    targets = [t[~base_active[t]] for t in targets]
    targets = (np.concatenate(targets) if targets else
               np.zeros(0, dtype=np.int64))
    if targets.size == 0:
        return float(len(seed_list))
    total = 0.0
    chunk = max(1, int(4_000_000 // max(targets.size, 1)))
    done = 0
    while done < n_sims:
        batch = min(chunk, n_sims - done)
        draws = rng.random((batch, targets.size)) < p
        for s in range(batch):
            hit = targets[draws[s]]
            if hit.size == 0:
                total += len(seed_list)
                continue
            active = base_active.copy()
            first = np.unique(hit)
            active[first] = True
            frontier = [int(v) for v in first]
            while frontier:
                new: list[int] = []
                for v in frontier:
                    nbrs = graph.neighbors(v)
                    candidates = nbrs[~active[nbrs]]
                    if candidates.size == 0:
                        continue
                    hits = candidates[rng.random(candidates.size) < p]
                    active[hits] = True
                    new.extend(int(h) for h in hits)
                frontier = new
            total += float(active.sum())
        done += batch
    return total / n_sims


def celf(graph: Graph, k: int, p: float = 0.01, n_sims: int = 1000,
         rng: np.random.Generator | None = None) -> GreedySchedule:
    """Lazy greedy seed selection under the independent-cascade model.

    Cached marginal gains carry the round they were computed in; a popped
    entry is only trusted if its stamp matches the current round, otherwise
    the node is re-simulated and pushed back. Each (round, node) evaluation
    owns a derived random stream, so results do not depend on how many
    evaluations laziness skipped.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if k > graph.n:
        raise InvalidParameterError(f"budget k={k} exceeds n={graph.n}")
    session = int(rng.integers(2**62))

    def estimate_spread(seed_nodes, extra, round_idx):
        stream = np.random.default_rng(
            np.random.SeedSequence([session, round_idx, extra])
        )
        return ic_mean_spread(graph, list(seed_nodes) + [extra], p, n_sims, stream)

    selected: list[int] = []
    values: list[float] = []
    times: list[float] = []
    start = time.perf_counter()
    current = 0.0
    heap: list[tuple[float, int, int]] = []
    for v in range(graph.n):
        gain = estimate_spread(selected, v, 0) - current
        heap.append((-gain, v, 0))
    heapq.heapify(heap)
    while len(selected) < k:
        neg_gain, v, stamp = heapq.heappop(heap)
        if stamp == len(selected):
            selected.append(v)
            current += -neg_gain
            values.append(current)
            times.append(time.perf_counter() - start)
        else:
            gain = estimate_spread(selected, v, len(selected)) - current
            heapq.heappush(heap, (-gain, v, len(selected)))
    return GreedySchedule(n=graph.n, order=tuple(selected), values=tuple(values),
                          baseline=0.0, step_times=tuple(times))


def degree_topk(graph: Graph, k: int) -> Allocation:
    """The k highest-degree nodes, ties by lowest index."""
    if k > graph.n:
        raise InvalidParameterError(f"budget k={k} exceeds n={graph.n}")
    order = np.lexsort((np.arange(graph.n), -graph.degrees))
    return Allocation.from_selected(graph.n, order[:k], k)


def single_discount(graph: Graph, k: int) -> Allocation:
    """Iterative degree heuristic: after each pick, the picked node's edges
    are removed and degrees recomputed."""
    if k > graph.n:
        raise InvalidParameterError(f"budget k={k} exceeds n={graph.n}")
    deg = graph.degrees.astype(np.int64).copy()
    alive = np.ones(graph.n, dtype=bool)
    chosen: list[int] = []
    for _ in range(k):
        candidates = np.flatnonzero(alive)
        v = int(candidates[np.argmax(deg[candidates])])
        chosen.append(v)
        alive[v] = False
        deg[graph.neighbors(v)] -= 1
    return Allocation.from_selected(graph.n, chosen, k)


def uplift_topk(scores: np.ndarray, k: int) -> Allocation:
    """Rank-and-treat: the k highest scores win, ties by lowest index."""
    scores = np.asarray(scores, dtype=float)
    if k > scores.size:
        raise InvalidParameterError(f"budget k={k} exceeds n={scores.size}")
    order = np.lexsort((np.arange(scores.size), -scores))
    return Allocation.from_selected(scores.size, order[:k], k)


def random_allocation(n: int, k: int, rng: np.random.Generator) -> Allocation:
    """Uniform k-subset."""
    if k > n:
        raise InvalidParameterError(f"budget k={k} exceeds n={n}")
    return Allocation.from_selected(n, rng.choice(n, size=k, replace=False), k)


def brute_force(objective: TteObjective, n: int, k: int,
                cap: int = 2_000_000) -> Allocation:
    """Exact argmax over every allocation of size <= k.

    Ties prefer smaller subsets, then lexicographic order. Refuses to run if
    the candidate count exceeds `cap`.
    """
    k_eff = min(k, n)
    total = sum(comb(n, j) for j in range(k_eff + 1))
    if total > cap:
        raise EnumerationCapError(total, cap)
    t = np.zeros(n, dtype=np.int8)
    best_val = float(objective.evaluate(t))
    best_nodes: tuple[int, ...] = ()
    for j in range(1, k_eff + 1):
        for nodes in combinations(range(n), j):
            t[:] = 0
            t[list(nodes)] = 1
            val = float(objective.evaluate(t))
            if val > best_val:
                best_val = val
                best_nodes = nodes
    return Allocation.from_selected(n, list(best_nodes), k)


def write_allocation_json(path, allocation: Allocation, method: str,
                          objective_value: float, seed: int) -> None:
    payload = {
        "k": allocation.k,
        "selected": [int(v) for v in allocation.selected],
        "objective_value": objective_value,
        "method": method,
        "seed": seed,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_allocation_json(path, n: int) -> tuple[Allocation, dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    alloc = Allocation.from_selected(n, payload["selected"], payload["k"])
    return alloc, payload


def write_value_trace(path, values, label: str = "step") -> None:
    """CSV of best-so-far objective values, one row per step/generation."""
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{label},value\n")
        for idx, v in enumerate(values):
            fh.write(f"{idx},{float(v)!r}\n")
