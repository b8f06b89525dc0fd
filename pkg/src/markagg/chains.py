"""First- and higher-order Markov chains on finite alphabets.

A chain of order ``k`` on ``M`` states stores its transition tensor with
shape ``(M,) * (k + 1)``; the entry ``T[i_1, ..., i_k, j]`` is the probability
of moving to ``j`` after the context ``(i_1, ..., i_k)`` (oldest first).
``chain.matrix`` is the same data flattened to ``(M**k, M)`` in row-major
context order.

All information quantities are in bits.
"""

import json
import logging
import math
import warnings

import numpy as np
from scipy.sparse.csgraph import connected_components

from ._info import entropy, row_entropies
from .exceptions import DimensionMismatch, NotIrreducible, ParseError, SupportViolation

logger = logging.getLogger(__name__)

ROW_SUM_ATOL = 1e-9
STATIONARY_ATOL = 1e-10
SOLVE_RESIDUAL = 1e-12

# row-sum handling on load: silent renormalization, warned renormalization, error
LOAD_SILENT_TOL = 1e-6
LOAD_ERROR_TOL = 1e-3


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def check_stochastic(matrix, atol=ROW_SUM_ATOL):
    """Raise ``ValueError`` unless ``matrix`` is row stochastic along its last axis."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("transition probabilities must be finite")
    if matrix.min() < -atol or matrix.max() > 1 + atol:
        raise ValueError("transition probabilities must lie in [0, 1]")
    dev = np.abs(matrix.sum(axis=-1) - 1.0).max()
    if dev > atol:
        raise ValueError(f"rows must sum to 1 (max deviation {dev:.3g})")


class HigherOrderChain:
    """Time-homogeneous Markov chain of order ``k`` on ``n_states`` symbols.

    Parameters
    ----------
    transitions : array_like
        Either the full tensor of shape ``(M,) * (k + 1)`` or its flattened
        form of shape ``(M**k, M)``.
    order : int, default=1
    context_dist : array_like, optional
        Invariant distribution of ``k`` consecutive symbols. Computed lazily
        when omitted. A supplied value is checked for invariance.
    """

    def __init__(self, transitions, order=1, context_dist=None):
        T = np.array(transitions, dtype=float)
        if order < 1:
            raise ValueError("order must be >= 1")
        if T.ndim < 2:
            raise DimensionMismatch("transitions must be at least 2-dimensional")
        M = T.shape[-1]
        if T.ndim == 2 and order > 1:
            if T.shape[0] != M**order:
                raise DimensionMismatch(
                    f"flattened order-{order} tensor needs {M**order} rows, got {T.shape[0]}"
                )
            T = T.reshape((M,) * (order + 1))
        if T.shape != (M,) * (order + 1):
            raise DimensionMismatch(f"bad transition tensor shape {T.shape} for order {order}")
        check_stochastic(T)
        self._T = _readonly(np.clip(T, 0.0, 1.0))
        self._order = order
        self._context_dist = None
        if context_dist is not None:
            p = np.asarray(context_dist, dtype=float).reshape((M,) * order)
            if abs(p.sum() - 1.0) > STATIONARY_ATOL or p.min() < -STATIONARY_ATOL:
                raise ValueError("context distribution must be a probability vector")
            shifted = (p[..., None] * self._T).sum(axis=0)
            if np.abs(shifted - p).sum() > STATIONARY_ATOL:
                raise ValueError("context distribution is not invariant under the transitions")
            self._context_dist = _readonly(p)

    @property
    def order(self):
        return self._order

    @property
    def n_states(self):
        return self._T.shape[-1]

    @property
    def transitions(self):
        return self._T

    @property
    def matrix(self):
        return self._T.reshape(-1, self.n_states)

    @property
    def context_dist(self):
        if self._context_dist is None:
            self._context_dist = _readonly(stationary_context_dist(self))
        return self._context_dist

    def __repr__(self):
        return f"{type(self).__name__}(order={self.order}, n_states={self.n_states})"

    def to_dict(self, include_stationary=True):
        d = {"order": self.order, "n_states": self.n_states, "transitions": self.matrix.tolist()}
        if include_stationary:
            d["stationary"] = self.context_dist.ravel().tolist()
        return d


class FirstOrderChain(HigherOrderChain):
    """First-order chain given by a row-stochastic ``N x N`` matrix."""

    def __init__(self, transitions, stationary=None):
        T = np.asarray(transitions, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise DimensionMismatch(f"transition matrix must be square, got shape {T.shape}")
        super().__init__(T, order=1, context_dist=stationary)

    @property
    def stationary(self):
        return self.context_dist

    def __repr__(self):
        return f"FirstOrderChain(n_states={self.n_states})"


def as_chain(obj):
    """Coerce an array or chain into a chain object."""
    if isinstance(obj, HigherOrderChain):
        return obj
    return FirstOrderChain(obj)


# --------------------------------------------------------------------------
# stationary distributions


def closed_classes(matrix):
    """Closed communicating classes of the support digraph, as index arrays."""
    adj = np.asarray(matrix) > 0
    n_comp, comp = connected_components(adj, directed=True, connection="strong")
    leaves = np.zeros(n_comp, dtype=bool)
    src, dst = np.nonzero(adj)
    leaving = comp[src] != comp[dst]
    leaves[np.unique(comp[src[leaving]])] = True
    return [np.flatnonzero(comp == c) for c in range(n_comp) if not leaves[c]]


def is_irreducible(matrix):
    adj = np.asarray(matrix) > 0
    n_comp, _ = connected_components(adj, directed=True, connection="strong")
    return n_comp == 1


def _solve_balance(P):
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        mu = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        mu = None
    if mu is not None:
        mu = np.clip(mu, 0.0, None)
        mu /= mu.sum()
        if np.abs(mu @ P - mu).sum() <= SOLVE_RESIDUAL:
            return mu
    logger.debug("direct stationary solve inaccurate; falling back to power iteration")
    lazy = 0.5 * (P + np.eye(n))
    mu = np.full(n, 1.0 / n)
    for _ in range(1_000_000):
        nxt = mu @ lazy
        if np.abs(nxt - mu).sum() < 1e-15:
            mu = nxt
            break
        mu = nxt
    return mu / mu.sum()


def _stationary_of_matrix(P):
    classes = closed_classes(P)
    if len(classes) != 1:
        raise NotIrreducible(
            f"support graph has {len(classes)} closed communicating classes; "
            "stationary distribution is not unique"
        )
    (cls,) = classes
    mu = np.zeros(P.shape[0])
    mu[cls] = _solve_balance(P[np.ix_(cls, cls)])
    return mu


def stationary_distribution(chain):
    """Stationary distribution of a first-order chain.

    The support digraph must have exactly one closed communicating class;
    transient states receive zero mass. Periodic chains are allowed.
    """
    chain = as_chain(chain)
    if chain.order != 1:
        raise DimensionMismatch("use stationary_context_dist for higher-order chains")
    if chain._context_dist is None:
        chain._context_dist = _readonly(_stationary_of_matrix(chain.matrix))
    return chain._context_dist


def expand_transition_chain(chain):
    """First-order chain on ``M**k`` contexts equivalent to an order-``k`` chain."""
    if chain.order == 1:
        return FirstOrderChain(chain.matrix)
    M, k = chain.n_states, chain.order
    n = M**k
    Pt = np.zeros((n, n))
    rows = np.arange(n)
    succ_base = (rows % M ** (k - 1)) * M
    for j in range(M):
        Pt[rows, succ_base + j] = chain.matrix[:, j]
    return FirstOrderChain(Pt)


def stationary_context_dist(chain):
    """Invariant distribution of ``k`` consecutive symbols, shape ``(M,) * k``.

    Computed on the reachable (closed) block of the transition chain.
    """
    if chain.order == 1:
        return np.array(stationary_distribution(chain))
    if chain._context_dist is not None:
        return np.array(chain._context_dist)
    mu = _stationary_of_matrix(expand_transition_chain(chain).matrix)
    return mu.reshape((chain.n_states,) * chain.order)


# --------------------------------------------------------------------------
# information quantities


def entropy_rate(chain):
    """Entropy rate H(Z_{k+1} | Z_1^k) of a stationary order-``k`` chain."""
    chain = as_chain(chain)
    p = chain.context_dist.ravel()
    return float(p @ row_entropies(chain.matrix))


def marginal(chain):
    """One-symbol stationary marginal of a chain."""
    chain = as_chain(chain)
    p = chain.context_dist
    return p.reshape(-1, chain.n_states).sum(axis=0) if chain.order > 1 else np.array(p)


def redundancy_rate(chain):
    """H(Z) minus the entropy rate; equals I(X_2; X_1) for first-order chains."""
    return max(entropy(marginal(chain)) - entropy_rate(chain), 0.0)


def kldr(a, b, strict=False):
    """KL divergence rate between two chains of equal order and alphabet.

    The context weights are the invariant distribution of ``a``. Returns
    ``math.inf`` when ``b`` forbids a transition that ``a`` makes on its
    support; with ``strict=True`` a :class:`SupportViolation` naming the
    offending context is raised instead.
    """
    a, b = as_chain(a), as_chain(b)
    if a.order != b.order or a.n_states != b.n_states:
        raise DimensionMismatch("chains must share order and alphabet size")
    w = a.context_dist.ravel()[:, None] * a.matrix
    mask = w > 0
    bad = mask & (b.matrix <= 0)
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        ctx = np.unravel_index(row, (a.n_states,) * a.order)
        ctx = tuple(int(c) for c in ctx)
        if strict:
            raise SupportViolation(
                f"reference chain forbids transition {ctx} -> {col}", context=ctx, target=col
            )
        return math.inf
    return float(np.sum(w[mask] * np.log2(a.matrix[mask] / b.matrix[mask])))


# --------------------------------------------------------------------------
# JSON I/O


def _normalize_rows(T, source):
    sums = T.sum(axis=-1, keepdims=True)
    dev = float(np.abs(sums - 1.0).max())
    if dev > LOAD_ERROR_TOL:
        raise ParseError(f"{source}: row sums deviate from 1 by {dev:.3g}")
    if dev > LOAD_SILENT_TOL:
        warnings.warn(f"{source}: renormalizing rows (max deviation {dev:.3g})", stacklevel=3)
    # keep exactly-stored values bit-identical on a round trip
    return T / sums if dev > 1e-12 else T


def chain_from_dict(d, source="<dict>"):
    try:
        order = int(d.get("order", 1))
        M = int(d["n_states"])
        T = np.array(d["transitions"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{source}: malformed chain ({exc})") from exc
    if T.shape[-1] != M:
        raise DimensionMismatch(f"{source}: n_states={M} but rows have length {T.shape[-1]}")
    if T.min() < 0:
        raise ParseError(f"{source}: negative transition probability")
    T = _normalize_rows(T, source)
    stationary = d.get("stationary")
    if order == 1:
        return FirstOrderChain(T, stationary=stationary)
    return HigherOrderChain(T.reshape(-1, M), order=order, context_dist=stationary)


def load_chain(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return chain_from_dict(d, source=str(path))


def save_chain(chain, path, include_stationary=True):
    with open(path, "w") as fh:
        json.dump(chain.to_dict(include_stationary=include_stationary), fh, indent=1)
