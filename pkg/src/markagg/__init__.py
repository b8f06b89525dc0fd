"""Reduce a first-order Markov chain on a large alphabet to a higher-order
Markov chain on a small alphabet by information-theoretic partition search."""

from .chains import (
    FirstOrderChain,
    HigherOrderChain,
    entropy_rate,
    expand_transition_chain,
    kldr,
    load_chain,
    redundancy_rate,
    save_chain,
    stationary_context_dist,
    stationary_distribution,
)
from .costs import (
    CostReport,
    cost_chain_report,
    fano_check,
    kldr_bracket,
    lump_cost,
    map_predictor,
    pred_cost,
)
from .estimator import MarkovAggregator
from .projection import (
    JointDist,
    PartitionMap,
    mu_lift,
    optimal_aggregation,
    p_lift_first_order,
    project_joint,
    project_joint_keyed,
    viewed_as_order_k,
)
from .search import (
    SearchConfig,
    SearchTrace,
    agglomerative_aggregate,
    exhaustive_aggregate,
    sequential_aggregate,
)

__version__ = "0.1.0"

__all__ = [
    "agglomerative_aggregate",
    "cost_chain_report",
    "CostReport",
    "entropy_rate",
    "exhaustive_aggregate",
    "expand_transition_chain",
    "fano_check",
    "FirstOrderChain",
    "HigherOrderChain",
    "JointDist",
    "kldr",
    "kldr_bracket",
    "load_chain",
    "lump_cost",
    "map_predictor",
    "MarkovAggregator",
    "mu_lift",
    "optimal_aggregation",
    "p_lift_first_order",
    "PartitionMap",
    "pred_cost",
    "project_joint",
    "project_joint_keyed",
    "redundancy_rate",
    "save_chain",
    "SearchConfig",
    "SearchTrace",
    "sequential_aggregate",
    "stationary_context_dist",
    "stationary_distribution",
    "viewed_as_order_k",
]
