"""Input validation helpers shared by the estimator and the CLI."""

import numpy as np
from sklearn.utils import check_array

from .chains import FirstOrderChain, HigherOrderChain, check_stochastic
from .exceptions import DimensionMismatch
from .projection import PartitionMap


def check_transition_matrix(X, atol=1e-9):
    """Return a validated square row-stochastic float array."""
    if isinstance(X, HigherOrderChain):
        if X.order != 1:
            raise DimensionMismatch("expected a first-order chain")
        return np.array(X.matrix)
    P = check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)
    if P.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"transition matrix must be square, got {P.shape}")
    check_stochastic(P, atol=atol)
    return P


def check_chain(X):
    if isinstance(X, FirstOrderChain):
        return X
    return FirstOrderChain(check_transition_matrix(X))


def check_partition(g, n_states=None):
    """Accept a :class:`PartitionMap` or 0-based label array."""
    if not isinstance(g, PartitionMap):
        g = PartitionMap(np.asarray(g))
    if n_states is not None and g.n_states != n_states:
        raise DimensionMismatch(f"partition covers {g.n_states} states, expected {n_states}")
    return g


def check_state_sequence(seq, n_states):
    seq = np.asarray(seq)
    if seq.ndim != 1 or not np.issubdtype(seq.dtype, np.integer):
        raise ValueError("state sequences must be 1-D integer arrays")
    if seq.size and (seq.min() < 0 or seq.max() >= n_states):
        raise ValueError(f"states must lie in [0, {n_states})")
    return seq
