"""Partition search: sequential (move) heuristic, agglomerative merging, and
exhaustive enumeration for small instances."""

from dataclasses import dataclass, field

import numpy as np

from .chains import as_chain
from .costs import CostFunction, cost_report
from .exceptions import InvalidConfig, TooLarge, UnsupportedCost
from .projection import PartitionMap

# a move must improve the cost by more than this to be accepted
MOVE_TOL = 1e-13
MAX_ENUMERATION = 10**6


@dataclass(frozen=True)
class SearchConfig:
    n_groups: int
    cost_kind: str = "pred"
    order: int = 1
    restarts: int = 10
    max_sweeps: int = 100
    seed: int = 0
    forbid_empty_groups: bool = True

    def validate(self, n_states):
        if self.cost_kind not in ("pred", "lump"):
            raise InvalidConfig(f"cost_kind must be 'pred' or 'lump', got {self.cost_kind!r}")
        if self.order < 1:
            raise InvalidConfig("order must be >= 1")
        if not 1 < self.n_groups < n_states:
            raise InvalidConfig(
                f"n_groups must satisfy 1 < M < N (got M={self.n_groups}, N={n_states})"
            )
        if self.restarts < 1:
            raise InvalidConfig("restarts must be >= 1")
        if self.max_sweeps < 1:
            raise InvalidConfig("max_sweeps must be >= 1")


@dataclass
class SearchTrace:
    """Record of one search run.

    ``costs`` holds the cost after initialization followed by the cost after
    every sweep (or merge, for the agglomerative method).
    """

    costs: list = field(default_factory=list)
    n_moves: int = 0
    partition: PartitionMap = None
    converged: bool = False
    restart: int = 0
    restart_costs: list = field(default_factory=list)
    restart_partitions: list = field(default_factory=list)

    def to_rows(self):
        return [{"step": i, "cost": c} for i, c in enumerate(self.costs)]


def random_partition(n_states, n_groups, rng):
    """Uniformly random surjective labeling: one seed state per group, the rest free."""
    perm = rng.permutation(n_states)
    labels = np.empty(n_states, dtype=np.intp)
    labels[perm[:n_groups]] = np.arange(n_groups)
    labels[perm[n_groups:]] = rng.integers(0, n_groups, size=n_states - n_groups)
    return labels


def _sequential_run(cost_fn, n_states, config, rng):
    M = config.n_groups
    labels = random_partition(n_states, M, rng)
    counts = np.bincount(labels, minlength=M)
    cost = cost_fn(labels, M)
    trace = SearchTrace(costs=[cost])
    candidates = np.empty(M)
    for _ in range(config.max_sweeps):
        moved = False
        for i in rng.permutation(n_states):
            cur = labels[i]
            if config.forbid_empty_groups and counts[cur] == 1:
                continue
            for b in range(M):
                if b == cur:
                    candidates[b] = cost
                else:
                    labels[i] = b
                    candidates[b] = cost_fn(labels, M)
            best = int(np.argmin(candidates))
            if best != cur and candidates[best] < cost - MOVE_TOL:
                labels[i] = best
                counts[cur] -= 1
                counts[best] += 1
                cost = candidates[best]
                trace.n_moves += 1
                moved = True
            else:
                labels[i] = cur
        trace.costs.append(cost)
        if not moved:
            trace.converged = True
            break
    trace.partition = PartitionMap(labels.copy(), M)
    return trace


def sequential_aggregate(chain, config):
    """Best-of-restarts sequential search.

    Every restart starts from a random surjective partition and sweeps over
    the states in a shuffled order, moving each state to the group with the
    lowest cost (ties to the lowest group index) while that strictly lowers
    the cost. A sweep without moves ends the restart. Restart ``r`` draws
    from ``numpy.random.default_rng([seed, r])``.

    Returns ``(partition, report, trace)`` for the best restart (lowest cost,
    then lowest restart index).
    """
    chain = as_chain(chain)
    config.validate(chain.n_states)
    cost_fn = CostFunction(chain, config.cost_kind, config.order)
    best = None
    restart_costs, restart_partitions = [], []
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        trace = _sequential_run(cost_fn, chain.n_states, config, rng)
        trace.restart = r
        restart_costs.append(trace.costs[-1])
        restart_partitions.append(trace.partition)
        if best is None or trace.costs[-1] < best.costs[-1]:
            best = trace
    best.restart_costs = restart_costs
    best.restart_partitions = restart_partitions
    g = best.partition
    return g, cost_report(chain, g, config.order), best


def _merge(labels, a, b):
    """Merge group ``b`` into ``a`` (a < b) and close the gap in numbering."""
    out = labels.copy()
    out[out == b] = a
    out[out > b] -= 1
    return out


def agglomerative_aggregate(chain, config):
    """Greedy merging from singletons down to ``config.n_groups`` groups.

    Each step merges the pair of groups whose union gives the lowest
    prediction cost (lexicographically smallest pair on ties). Only the
    prediction cost is supported; the lumpability cost is not monotone under
    merging.
    """
    chain = as_chain(chain)
    if config.cost_kind != "pred":
        raise UnsupportedCost("agglomerative search supports only cost_kind='pred'")
    config.validate(chain.n_states)
    cost_fn = CostFunction(chain, "pred", config.order)
    labels = np.arange(chain.n_states)
    n = chain.n_states
    trace = SearchTrace(costs=[cost_fn(labels, n)])
    while n > config.n_groups:
        best_cost, best_labels = np.inf, None
        for a in range(n):
            for b in range(a + 1, n):
                cand = _merge(labels, a, b)
                c = cost_fn(cand, n - 1)
                if c < best_cost:
                    best_cost, best_labels = c, cand
        labels, n = best_labels, n - 1
        trace.costs.append(best_cost)
        trace.n_moves += 1
    trace.converged = True
    g = PartitionMap(labels, config.n_groups)
    trace.partition = g
    trace.restart_costs = [trace.costs[-1]]
    trace.restart_partitions = [g]
    return g, cost_report(chain, g, config.order), trace


def stirling2(n, m):
    """Number of partitions of ``n`` labeled items into ``m`` nonempty blocks."""
    from sympy.functions.combinatorial.numbers import stirling

    return int(stirling(n, m, kind=2))


def set_partitions(n, m):
    """Yield label arrays for every partition of ``range(n)`` into ``m`` blocks."""
    from sympy.utilities.iterables import multiset_partitions

    for blocks in multiset_partitions(list(range(n)), m):
        labels = np.empty(n, dtype=np.intp)
        for b, block in enumerate(blocks):
            labels[block] = b
        yield labels


def exhaustive_aggregate(chain, config):
    """Global optimum by enumerating all partitions into ``config.n_groups`` blocks.

    Raises :class:`TooLarge` when there are more than one million candidates.
    """
    chain = as_chain(chain)
    config.validate(chain.n_states)
    count = stirling2(chain.n_states, config.n_groups)
    if count > MAX_ENUMERATION:
        raise TooLarge(f"{count} partitions exceed the enumeration limit {MAX_ENUMERATION}")
    cost_fn = CostFunction(chain, config.cost_kind, config.order)
    best_cost, best_labels = np.inf, None
    for labels in set_partitions(chain.n_states, config.n_groups):
        c = cost_fn(labels, config.n_groups)
        if c < best_cost:
            best_cost, best_labels = c, labels
    g = PartitionMap(best_labels, config.n_groups)
    return g, cost_report(chain, g, config.order)
