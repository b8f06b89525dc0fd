"""Aggregation cost functions and the quantities bracketing them.

For a chain ``X``, partition ``g`` and order ``k``:

* ``pred_cost``  = I(X_2; X_1) - I(Y_{k+1}; Y_1^k)
* ``lump_cost``  = H(Y_{k+1} | Y_1^k) - H(Y_{k+1} | Y_2^k, X_1)

Both are computed from exact window distributions, never by simulation.
They obey ``pred_cost(k) >= pred_cost(k+1) >= lump_cost(1) >= lump_cost(k)
>= lump_cost(k+1) >= 0``.
"""

import csv
import logging
from dataclasses import asdict, dataclass

import numpy as np

from ._info import binary_entropy, entropy
from .chains import as_chain, redundancy_rate, stationary_distribution
from .exceptions import DimensionMismatch, InequalityViolation
from .projection import (
    DEFAULT_WINDOW_CAP,
    _check_compat,
    _check_window,
    _forward,
    optimal_aggregation,
    project_joint,
    project_joint_keyed,
)

logger = logging.getLogger(__name__)

NEG_FLOOR = -1e-12
CHAIN_TOL = 1e-10
FANO_TOL = 1e-10


def _floor(value, name):
    if value < NEG_FLOOR:
        logger.warning("%s evaluated to %.3g; clamping to 0", name, value)
    return max(value, 0.0)


class _Windows:
    """Entropies of projected windows up to a maximal order, computed once."""

    def __init__(self, chain, g, k_max, cap=DEFAULT_WINDOW_CAP):
        self.joint = project_joint(chain, g, k_max + 1, cap=cap)
        self.keyed = project_joint_keyed(chain, g, k_max, cap=cap)
        self.mu = stationary_distribution(chain)
        self.k_max = k_max

    def h_y(self, length):
        """H(Y_1^length)."""
        return entropy(self.joint.marginal(length))

    def h_keyed(self, n_groups):
        """H(X_1, Y_2^{n_groups + 1})."""
        if n_groups == 0:
            return entropy(self.mu)
        return entropy(self.keyed.marginal(n_groups + 1))

    def cond_y(self, k):
        """H(Y_{k+1} | Y_1^k)."""
        return self.h_y(k + 1) - self.h_y(k)

    def cond_keyed(self, k):
        """H(Y_{k+1} | Y_2^k, X_1)."""
        return self.h_keyed(k) - self.h_keyed(k - 1)

    def mutual_y(self, k):
        """I(Y_{k+1}; Y_1^k)."""
        return self.h_y(1) - self.cond_y(k)


def lump_cost(chain, g, k, cap=DEFAULT_WINDOW_CAP):
    """Information-theoretic distance from ``k``-lumpability (bits)."""
    w = _Windows(as_chain(chain), g, k, cap)
    return _floor(w.cond_y(k) - w.cond_keyed(k), "lump cost")


def pred_cost(chain, g, k, cap=DEFAULT_WINDOW_CAP):
    """Loss of ``k``-step predictive information caused by the partition (bits)."""
    chain = as_chain(chain)
    w = _Windows(chain, g, k, cap)
    return _floor(redundancy_rate(chain) - w.mutual_y(k), "prediction cost")


def kldr_bracket(chain, g, k, tighten_to=None, cap=DEFAULT_WINDOW_CAP):
    """Interval containing the KL divergence rate between ``Y`` and its best
    order-``k`` Markov approximation.

    The upper end replaces the entropy rate of ``Y`` by the lower bound
    H(Y_{k'+1} | Y_2^{k'}, X_1) with ``k' = tighten_to`` (default ``k``),
    which increases with ``k'``.
    """
    kk = k if tighten_to is None else tighten_to
    if kk < k:
        raise ValueError("tighten_to must be >= k")
    chain = as_chain(chain)
    w = _Windows(chain, g, kk, cap)
    return 0.0, _floor(w.cond_y(k) - w.cond_keyed(kk), "KLDR upper bound")


@dataclass
class MAPPredictor:
    """Most likely next group for every context of ``k`` groups."""

    table: np.ndarray
    error: float

    def predict(self, contexts):
        contexts = np.atleast_2d(np.asarray(contexts, dtype=np.intp))
        return self.table[tuple(contexts.T)]


def map_predictor(q):
    """MAP predictor of an aggregation and its exact error probability.

    Ties go to the lowest group index.
    """
    table = np.argmax(q.transitions, axis=-1)
    best = q.matrix.max(axis=1)
    pe = float(q.context_dist.ravel() @ (1.0 - best))
    return MAPPredictor(table, min(max(pe, 0.0), 1.0))


def fano_check(chain, g, k, cap=DEFAULT_WINDOW_CAP):
    """Check I(Y_{k+1}; Y_1^k) >= -log max p_Y * (1 - p_e) - h(p_e).

    Returns ``(holds, slack)`` where ``slack`` is left minus right side.
    """
    chain = as_chain(chain)
    w = _Windows(chain, g, k, cap)
    q = optimal_aggregation(chain, g, k, cap=cap)
    pe = map_predictor(q).error
    pmax = w.joint.marginal(1).max()
    rhs = -np.log2(pmax) * (1.0 - pe) - binary_entropy(pe)
    slack = float(w.mutual_y(k) - rhs)
    return slack >= -FANO_TOL, slack


@dataclass
class CostReport:
    order: int
    pred_cost: float
    lump_cost: float
    kldr_lower: float
    kldr_upper: float
    map_error: float
    fano_slack: float
    fano_bound_satisfied: bool

    def to_dict(self):
        return asdict(self)


CSV_FIELDS = list(CostReport.__dataclass_fields__)


def cost_report(chain, g, k, cap=DEFAULT_WINDOW_CAP):
    return cost_chain_report(chain, g, k, cap=cap, check=False)[-1]


def cost_chain_report(chain, g, k_max, cap=DEFAULT_WINDOW_CAP, check=True):
    """Cost reports for orders ``1..k_max``.

    With ``check=True`` the ordering of all costs is verified to 1e-10 and a
    violation raises :class:`InequalityViolation`.
    """
    chain = as_chain(chain)
    _check_compat(chain, g)
    _check_window(k_max + 1, cap)
    w = _Windows(chain, g, k_max, cap)
    red = redundancy_rate(chain)
    pmax = w.joint.marginal(1).max()
    reports = []
    for k in range(1, k_max + 1):
        lump = _floor(w.cond_y(k) - w.cond_keyed(k), "lump cost")
        pred = _floor(red - w.mutual_y(k), "prediction cost")
        pe = map_predictor(optimal_aggregation(chain, g, k, cap=cap)).error
        slack = float(w.mutual_y(k) + np.log2(pmax) * (1.0 - pe) + binary_entropy(pe))
        reports.append(CostReport(k, pred, lump, 0.0, lump, pe, slack, slack >= -FANO_TOL))
    if check:
        check_cost_chain(reports)
    return reports


def check_cost_chain(reports, tol=CHAIN_TOL):
    seq = [r.pred_cost for r in reports] + [r.lump_cost for r in reports] + [0.0]
    names = [f"pred_cost[{r.order}]" for r in reports] + [f"lump_cost[{r.order}]" for r in reports]
    names.append("0")
    for a, b, na, nb in zip(seq, seq[1:], names, names[1:]):
        if a < b - tol:
            raise InequalityViolation(f"{na}={a:.17g} < {nb}={b:.17g}")


def write_reports_csv(reports, fh):
    writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.to_dict())


class CostFunction:
    """Fast repeated evaluation of one cost for many labelings of one chain.

    Skips partition validation; intended for search loops.
    """

    def __init__(self, chain, kind, k, cap=DEFAULT_WINDOW_CAP):
        if kind not in ("pred", "lump"):
            raise ValueError(f"unknown cost kind {kind!r}")
        chain = as_chain(chain)
        _check_window(k + 1, cap)
        self.kind = kind
        self.k = k
        self.P = np.ascontiguousarray(chain.matrix)
        self.mu = np.array(stationary_distribution(chain))
        self.n_states = chain.n_states
        self._mi_x = redundancy_rate(chain)
        self._diag_mu = np.diag(self.mu)

    def __call__(self, labels, n_groups):
        if len(labels) != self.n_states:
            raise DimensionMismatch("labeling length differs from chain size")
        G = np.zeros((self.n_states, n_groups))
        G[np.arange(self.n_states), labels] = 1.0
        k = self.k
        alpha = _forward(G.T * self.mu[None, :], self.P, G, k)
        joint = alpha.sum(axis=1)
        h_full = _h(joint)
        h_ctx = _h(joint.reshape(-1, n_groups).sum(axis=1))
        if self.kind == "pred":
            h_y = _h(joint.reshape(n_groups, -1).sum(axis=1))
            return self._mi_x - (h_y - h_full + h_ctx)
        beta = _forward(self._diag_mu, self.P, G, k).sum(axis=1)
        h_keyed = _h(beta)
        h_keyed_ctx = _h(beta.reshape(-1, n_groups).sum(axis=1))
        return (h_full - h_ctx) - (h_keyed - h_keyed_ctx)


def _h(p):
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())
