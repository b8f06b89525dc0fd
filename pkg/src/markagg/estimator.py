"""scikit-learn style front end to the partition search."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .projection import optimal_aggregation
from .costs import map_predictor
from .search import SearchConfig, agglomerative_aggregate, exhaustive_aggregate, sequential_aggregate
from .validation import check_chain, check_state_sequence

_ALGORITHMS = {
    "sequential": sequential_aggregate,
    "agglomerative": agglomerative_aggregate,
    "exhaustive": exhaustive_aggregate,
}


class MarkovAggregator(BaseEstimator):
    """Aggregate a first-order Markov chain into an order-``k`` chain on groups.

    Parameters
    ----------
    n_groups : int, default=2
        Number of groups ``M``; must satisfy ``1 < M < N``.
    order : int, default=1
        Order ``k`` of the aggregated chain.
    cost : {"pred", "lump"}, default="pred"
        Prediction cost or lumpability cost.
    algorithm : {"sequential", "agglomerative", "exhaustive"}, default="sequential"
    restarts : int, default=10
        Random restarts of the sequential search.
    max_sweeps : int, default=100
    random_state : int, default=0
        Master seed of the sequential search.

    Attributes
    ----------
    partition_ : PartitionMap
    labels_ : ndarray of shape (n_states,)
    aggregation_ : Aggregation
        Best order-``k`` approximation of the projected process.
    report_ : CostReport
    trace_ : SearchTrace or None
    cost_ : float
        Value of the minimized cost.

    Examples
    --------
    >>> from markagg.models import gen_toy
    >>> est = MarkovAggregator(n_groups=3, order=2).fit(gen_toy(epsilon=0.01, seed=0))
    >>> est.labels_.tolist()
    [0, 0, 2, 2, 1, 1]
    """

    def __init__(self, n_groups=2, order=1, cost="pred", algorithm="sequential", restarts=10,
                 max_sweeps=100, random_state=0):
        self.n_groups = n_groups
        self.order = order
        self.cost = cost
        self.algorithm = algorithm
        self.restarts = restarts
        self.max_sweeps = max_sweeps
        self.random_state = random_state

    def fit(self, X, y=None):
        """Search a partition of the states of ``X`` (transition matrix or chain)."""
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        chain = check_chain(X)
        config = SearchConfig(
            n_groups=self.n_groups,
            cost_kind=self.cost,
            order=self.order,
            restarts=self.restarts,
            max_sweeps=self.max_sweeps,
            seed=self.random_state,
        )
        result = _ALGORITHMS[self.algorithm](chain, config)
        self.partition_, self.report_ = result[0], result[1]
        self.trace_ = result[2] if len(result) > 2 else None
        self.labels_ = np.array(self.partition_.labels)
        self.cost_ = self.report_.pred_cost if self.cost == "pred" else self.report_.lump_cost
        self.aggregation_ = optimal_aggregation(chain, self.partition_, self.order)
        self.n_states_ = chain.n_states
        self._predictor = map_predictor(self.aggregation_)
        return self

    def transform(self, X):
        """Map a state sequence to its group sequence."""
        check_is_fitted(self, "partition_")
        return self.labels_[check_state_sequence(X, self.n_states_)]

    def predict(self, X):
        """Most likely next group for each row of ``k`` past groups (oldest first)."""
        check_is_fitted(self, "partition_")
        X = np.atleast_2d(np.asarray(X, dtype=np.intp))
        if X.shape[1] != self.order:
            raise ValueError(f"contexts must have {self.order} columns")
        return self._predictor.predict(X)

    def predict_error(self):
        """Exact error probability of :meth:`predict` under stationarity."""
        check_is_fitted(self, "partition_")
        return self._predictor.error
