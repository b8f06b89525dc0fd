"""Projections of a first-order chain through a partition, and liftings back.

Given ``X`` with transition matrix ``P`` and a labeling ``g`` of its states,
``Y_n = g(X_n)`` is generally not Markov. Its finite-window distributions
are computed exactly by a forward recursion over (group prefix, current
state), which costs ``O(N**2 * M**(L-1))`` for a window of length ``L``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._info import entropy
from .chains import FirstOrderChain, HigherOrderChain, as_chain, stationary_distribution
from .exceptions import DimensionMismatch, ParseError, SupportViolation, WindowTooLarge

DEFAULT_WINDOW_CAP = 6


class PartitionMap:
    """Surjective labeling of ``n_states`` states onto ``n_groups`` groups.

    Labels are 0-based internally; the JSON form uses 1-based labels.
    """

    def __init__(self, labels, n_groups=None):
        labels = np.array(labels, dtype=np.intp).ravel()
        if labels.size == 0:
            raise ValueError("a partition needs at least one state")
        if n_groups is None:
            n_groups = int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= n_groups:
            raise ValueError(f"labels must lie in [0, {n_groups})")
        counts = np.bincount(labels, minlength=n_groups)
        if np.any(counts == 0):
            raise ValueError(f"partition is not surjective: empty groups {np.flatnonzero(counts == 0)}")
        labels.setflags(write=False)
        self._labels = labels
        self._n_groups = int(n_groups)

    @classmethod
    def from_groups(cls, groups, n_states=None):
        """Build from an iterable of state collections (0-based)."""
        groups = [list(grp) for grp in groups]
        if n_states is None:
            n_states = sum(len(grp) for grp in groups)
        labels = np.full(n_states, -1, dtype=np.intp)
        for b, grp in enumerate(groups):
            if np.any(labels[grp] >= 0):
                raise ValueError("groups overlap")
            labels[grp] = b
        if np.any(labels < 0):
            raise ValueError("groups do not cover all states")
        return cls(labels, len(groups))

    @classmethod
    def identity(cls, n_states):
        return cls(np.arange(n_states), n_states)

    @classmethod
    def constant(cls, n_states):
        return cls(np.zeros(n_states, dtype=np.intp), 1)

    @property
    def labels(self):
        return self._labels

    @property
    def n_states(self):
        return self._labels.size

    @property
    def n_groups(self):
        return self._n_groups

    def indicator(self):
        """One-hot ``(n_states, n_groups)`` membership matrix."""
        G = np.zeros((self.n_states, self.n_groups))
        G[np.arange(self.n_states), self._labels] = 1.0
        return G

    def groups(self):
        return [np.flatnonzero(self._labels == b) for b in range(self.n_groups)]

    def canonical(self):
        """Same partition with groups numbered by first appearance."""
        _, first = np.unique(self._labels, return_index=True)
        order = np.argsort(first)
        remap = np.empty(self.n_groups, dtype=np.intp)
        remap[order] = np.arange(self.n_groups)
        return PartitionMap(remap[self._labels], self.n_groups)

    def same_partition(self, other):
        """True when both labelings induce the same set partition."""
        if self.n_states != other.n_states or self.n_groups != other.n_groups:
            return False
        return bool(np.array_equal(self.canonical().labels, other.canonical().labels))

    def __eq__(self, other):
        if not isinstance(other, PartitionMap):
            return NotImplemented
        return self.n_groups == other.n_groups and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.n_groups, self._labels.tobytes()))

    def __repr__(self):
        return f"PartitionMap({self._labels.tolist()}, n_groups={self.n_groups})"

    def to_dict(self):
        return {
            "n_states": self.n_states,
            "n_groups": self.n_groups,
            "labels": (self._labels + 1).tolist(),
        }

    @classmethod
    def from_dict(cls, d, source="<dict>"):
        try:
            labels = np.asarray(d["labels"], dtype=np.intp) - 1
            n_groups = int(d["n_groups"])
            n_states = int(d.get("n_states", labels.size))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{source}: malformed partition ({exc})") from exc
        if labels.size != n_states:
            raise DimensionMismatch(f"{source}: n_states={n_states} but {labels.size} labels")
        try:
            return cls(labels, n_groups)
        except ValueError as exc:
            raise ParseError(f"{source}: {exc}") from exc


def load_partition(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return PartitionMap.from_dict(d, source=str(path))


def save_partition(g, path):
    with open(path, "w") as fh:
        json.dump(g.to_dict(), fh)


@dataclass
class JointDist:
    """Exact joint distribution of a window of the projected process.

    ``probs`` has shape ``(M,) * L`` or, when ``keyed``, ``(N,) + (M,) * (L - 1)``
    with the first axis holding ``X_1`` instead of ``Y_1``.
    """

    window_length: int
    probs: np.ndarray
    keyed: bool = False
    shape: tuple = field(init=False)

    def __post_init__(self):
        self.shape = self.probs.shape

    def marginal(self, length):
        """Distribution of the first ``length`` coordinates."""
        if not 1 <= length <= self.window_length:
            raise ValueError("marginal length out of range")
        return self.probs.reshape(self.shape[:length] + (-1,)).sum(axis=-1)

    def entropy(self):
        return entropy(self.probs)


def _check_window(L, cap):
    if L < 1:
        raise ValueError("window length must be >= 1")
    if L > cap:
        raise WindowTooLarge(f"window length {L} exceeds cap {cap}")


def _check_compat(chain, g):
    if g.n_states != chain.n_states:
        raise DimensionMismatch(
            f"partition covers {g.n_states} states but chain has {chain.n_states}"
        )


def _forward(start, P, G, steps):
    """Propagate ``start`` (rows: prefixes, cols: current state) ``steps`` times,
    splitting each prefix by the group of the newly entered state."""
    alpha = start
    GT = G.T
    for _ in range(steps):
        nxt = alpha @ P
        alpha = (nxt[:, None, :] * GT[None, :, :]).reshape(-1, P.shape[0])
    return alpha


def project_joint(chain, g, L, cap=DEFAULT_WINDOW_CAP):
    """Joint distribution of ``(g(X_1), ..., g(X_L))`` under stationarity."""
    chain = as_chain(chain)
    _check_compat(chain, g)
    _check_window(L, cap)
    mu = stationary_distribution(chain)
    G = g.indicator()
    alpha = _forward(G.T * mu[None, :], chain.matrix, G, L - 1)
    probs = alpha.sum(axis=1).reshape((g.n_groups,) * L)
    return JointDist(L, probs)


def project_joint_keyed(chain, g, k, cap=DEFAULT_WINDOW_CAP):
    """Joint distribution of ``(X_1, g(X_2), ..., g(X_{k+1}))``."""
    chain = as_chain(chain)
    _check_compat(chain, g)
    _check_window(k + 1, cap)
    mu = stationary_distribution(chain)
    N = chain.n_states
    beta = _forward(np.diag(mu), chain.matrix, g.indicator(), k)
    probs = beta.sum(axis=1).reshape((N,) + (g.n_groups,) * k)
    return JointDist(k + 1, probs, keyed=True)


class Aggregation(HigherOrderChain):
    """Order-``k`` chain on the groups that best approximates the projection.

    ``zero_contexts`` lists the group contexts that never occur; their rows
    are uniform placeholders.
    """

    def __init__(self, transitions, order, context_dist, partition, zero_contexts=()):
        super().__init__(transitions, order=order, context_dist=context_dist)
        self.partition = partition
        self.zero_contexts = list(zero_contexts)


def optimal_aggregation(chain, g, k, cap=DEFAULT_WINDOW_CAP):
    """Conditional distribution of ``Y_{k+1}`` given ``Y_1^k``, as an order-``k`` chain."""
    joint = project_joint(chain, g, k + 1, cap=cap).probs
    M = g.n_groups
    flat = joint.reshape(-1, M)
    ctx = flat.sum(axis=1)
    zero = ctx <= 0
    Q = np.empty_like(flat)
    Q[~zero] = flat[~zero] / ctx[~zero, None]
    Q[zero] = 1.0 / M
    # renormalize away rounding so the rows pass the stochasticity check
    Q /= Q.sum(axis=1, keepdims=True)
    zero_ctx = [tuple(int(c) for c in np.unravel_index(r, (M,) * k)) for r in np.flatnonzero(zero)]
    ctx = np.clip(ctx, 0.0, None)
    return Aggregation(Q, k, ctx / ctx.sum(), g, zero_ctx)


def viewed_as_order_k(chain, k):
    """A first-order chain written as a (trivial) order-``k`` chain."""
    chain = as_chain(chain)
    if k == 1:
        return FirstOrderChain(chain.matrix, stationary=stationary_distribution(chain))
    N = chain.n_states
    P = chain.matrix
    T = np.broadcast_to(P, (N,) * (k - 1) + (N, N))
    ctx = np.array(stationary_distribution(chain))
    for _ in range(k - 1):
        ctx = ctx[..., None] * P.reshape((1,) * (ctx.ndim - 1) + (N, N))
    return HigherOrderChain(T, order=k, context_dist=ctx)


def mu_lift(q, g, mu):
    """Lift an order-``k`` chain on groups to an order-``k`` chain on states.

    Each group's next-step mass is split across its members in proportion to
    their stationary probabilities ``mu``.
    """
    mu = np.asarray(mu, dtype=float)
    if g.n_groups != q.n_states or mu.size != g.n_states:
        raise DimensionMismatch("aggregation, partition and stationary vector disagree")
    labels = g.labels
    group_mass = np.bincount(labels, weights=mu, minlength=g.n_groups)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(group_mass[labels] > 0, mu / group_mass[labels], 0.0)
    # groups without stationary mass are split evenly to keep rows stochastic
    sizes = np.bincount(labels, minlength=g.n_groups)
    empty = group_mass[labels] <= 0
    w[empty] = 1.0 / sizes[labels[empty]]
    lifted = q.transitions[np.ix_(*([labels] * (q.order + 1)))] * w
    if q.order == 1:
        return FirstOrderChain(lifted)
    return HigherOrderChain(lifted, order=q.order)


def p_lift_first_order(q, g, chain, on_unreachable="raise"):
    """Lift a first-order aggregation using the original transition matrix.

    The mass ``Q[g(i), b]`` leaving state ``i`` toward group ``b`` is shared
    among the members of ``b`` in proportion to ``P[i, j]``. When ``i`` cannot
    reach ``b`` under ``P`` but ``Q`` still sends mass there, the split is
    undefined: with ``on_unreachable="raise"`` a :class:`SupportViolation` is
    raised for states carrying stationary mass; ``"mu"`` splits by the
    stationary distribution instead.
    """
    if q.order != 1:
        raise DimensionMismatch("P-lifting is only defined for first-order aggregations")
    if on_unreachable not in ("raise", "mu"):
        raise ValueError("on_unreachable must be 'raise' or 'mu'")
    chain = as_chain(chain)
    _check_compat(chain, g)
    P = chain.matrix
    mu = stationary_distribution(chain)
    G = g.indicator()
    labels = g.labels
    into_group = P @ G
    Qx = q.matrix[np.ix_(labels, labels)]
    denom = into_group[:, labels]
    lifted = np.zeros_like(P)
    ok = denom > 0
    lifted[ok] = Qx[ok] * P[ok] / denom[ok]
    missing = (~ok) & (Qx > 0)
    if missing.any():
        rows = np.flatnonzero(missing.any(axis=1))
        visited = rows[mu[rows] > 0]
        if on_unreachable == "raise" and visited.size:
            i = int(visited[0])
            b = int(labels[np.flatnonzero(missing[i])[0]])
            raise SupportViolation(
                f"state {i} cannot reach group {b} under P but the aggregation requires it",
                context=(i,),
                target=b,
            )
        group_mass = G.T @ mu
        sizes = G.sum(axis=0)
        share = np.where(group_mass[labels] > 0, mu / np.where(group_mass > 0, group_mass, 1)[labels],
                         1.0 / sizes[labels])
        lifted[missing] = (Qx * share[None, :])[missing]
    return FirstOrderChain(lifted / lifted.sum(axis=1, keepdims=True))
