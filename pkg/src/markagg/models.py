"""Generators for the synthetic and applied models, and a letter bi-gram trainer."""

import re
import warnings
from dataclasses import dataclass

import numpy as np

from .chains import FirstOrderChain, is_irreducible
from .exceptions import AbsorbingState, DimensionMismatch, EmptyText, InvalidRates
from .projection import PartitionMap


def random_stochastic(n_rows, n_cols=None, rng=None):
    """Row-stochastic matrix with entries drawn from U[0, 1], rows normalized."""
    rng = np.random.default_rng(rng)
    A = rng.random((n_rows, n_rows if n_cols is None else n_cols))
    return A / A.sum(axis=1, keepdims=True)


def _as_matrix(base):
    return base.matrix if isinstance(base, FirstOrderChain) else np.asarray(base, dtype=float)


def natural_partition(block_sizes):
    return PartitionMap(np.repeat(np.arange(len(block_sizes)), block_sizes), len(block_sizes))


def block_stochastic_matrix(block_sizes, A, intra_blocks=None, seed=None):
    """Matrix with block ``(i, j)`` equal to ``A[i, j] * P_ij``.

    ``intra_blocks[i][j]`` must be an ``N_i x N_j`` row-stochastic matrix;
    missing blocks (``None``, or the whole argument omitted) are drawn with
    :func:`random_stochastic`.
    """
    sizes = [int(s) for s in block_sizes]
    A = np.asarray(A, dtype=float)
    M = len(sizes)
    if A.shape != (M, M):
        raise DimensionMismatch(f"A must be {M}x{M}, got {A.shape}")
    if np.abs(A.sum(axis=1) - 1).max() > 1e-9 or A.min() < 0:
        raise DimensionMismatch("A must be row stochastic")
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(M):
        row = []
        for j in range(M):
            blk = None if intra_blocks is None else intra_blocks[i][j]
            if blk is None:
                blk = random_stochastic(sizes[i], sizes[j], rng)
            blk = np.asarray(blk, dtype=float)
            if blk.shape != (sizes[i], sizes[j]):
                raise DimensionMismatch(
                    f"block ({i},{j}) must be {sizes[i]}x{sizes[j]}, got {blk.shape}"
                )
            row.append(A[i, j] * blk)
        rows.append(row)
    return np.block(rows)


def gen_block_stochastic(block_sizes, A, intra_blocks=None, seed=None):
    """Block-stochastic chain and its natural (consecutive-block) partition."""
    P = block_stochastic_matrix(block_sizes, A, intra_blocks, seed)
    return FirstOrderChain(P), natural_partition(block_sizes)


def perturb(base, epsilon, E=None, seed=None):
    """``(1 - epsilon) * base + epsilon * E``; ``E`` random uniform if omitted."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    P = _as_matrix(base)
    if E is None:
        E = random_stochastic(P.shape[0], rng=seed)
    E = _as_matrix(E)
    if E.shape != P.shape:
        raise DimensionMismatch("perturbation matrix has the wrong shape")
    if epsilon > 0 and not is_irreducible(E):
        raise ValueError("perturbation matrix must be irreducible")
    out = (1.0 - epsilon) * P + epsilon * E
    return FirstOrderChain(out / out.sum(axis=1, keepdims=True))


def gen_quasi_periodic(block_size=10, seed=None):
    """Two blocks that alternate deterministically: ``[[0, P12], [P21, 0]]``.

    Returns the raw matrix and the natural partition.
    """
    rng = np.random.default_rng(seed)
    n = block_size
    Z = np.zeros((n, n))
    P = np.block([[Z, random_stochastic(n, rng=rng)], [random_stochastic(n, rng=rng), Z]])
    return P, natural_partition([n, n])


TOY_LUMP_PARTITION = PartitionMap([0, 0, 1, 1, 2, 3])
TOY_PRED_PARTITION = PartitionMap([0, 0, 1, 1, 2, 2])


def toy_matrix(p):
    """The unperturbed 6-state toy matrix."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    P = np.zeros((6, 6))
    P[0, 2] = P[1, 3] = 1.0
    P[2, 4] = P[3, 4] = 1.0
    P[4, 0], P[4, 1] = p, 1.0 - p
    P[5, 5] = 1.0
    return P


def gen_toy(p=0.5, epsilon=0.01, E=None, seed=None):
    """Six-state chain that is quasi-1-lumpable w.r.t. {{1,2},{3,4},{5},{6}} and
    highly 2-predictable w.r.t. {{1,2},{3,4},{5,6}} (1-based)."""
    return perturb(toy_matrix(p), epsilon, E=E, seed=seed)


@dataclass
class MaintenanceRates:
    lambda_0: float = 0.05  # spontaneous failure
    lambda_1: float = 1.0  # deterioration
    lambda_m: float = 0.3  # maintenance
    mu_0: float = 1.0  # repair after spontaneous failure
    mu_1: float = 1.0  # repair after deterioration failure
    mu_m: float = 2.0  # end of maintenance

    def validate(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise InvalidRates(f"rate {name} must be positive, got {value}")


class RateMatrix:
    """Generator matrix of a continuous-time chain (rows sum to zero)."""

    def __init__(self, rates, names=None):
        Q = np.array(rates, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionMismatch("rate matrix must be square")
        off = Q - np.diag(np.diag(Q))
        if off.min() < 0:
            raise InvalidRates("off-diagonal rates must be nonnegative")
        np.fill_diagonal(Q, 0.0)
        np.fill_diagonal(Q, -Q.sum(axis=1))
        Q.setflags(write=False)
        self.matrix = Q
        self.names = list(names) if names is not None else [str(i) for i in range(len(Q))]

    @property
    def n_states(self):
        return self.matrix.shape[0]

    def to_dict(self):
        return {"n_states": self.n_states, "names": self.names, "rates": self.matrix.tolist()}


def maintenance_state_names(k):
    return (
        ["W"] + [f"D{i}" for i in range(1, k + 1)] + ["F1", "F0"] + [f"M{i}" for i in range(1, k + 2)]
    )


def gen_maintenance(k=3, rates=None):
    """Maintenance model with ``k`` deterioration states and its reference partition.

    States are ``W, D_1..D_k, F_1, F_0, M_1..M_{k+1}`` (``N = 2k + 4``). Along
    the path ``W, D_1, ..., D_k, F_1`` every non-failed state deteriorates
    (``lambda_1``), fails spontaneously to ``F_0`` (``lambda_0``) or enters
    maintenance (``lambda_m``); maintenance ``M_j`` returns (``mu_m``) to the
    state one step before the one it was entered from (``W`` for ``j <= 2``).
    Both failure states are repaired to ``W``.

    The reference partition has ``k + 3`` groups: ``{W}``, ``{D_i, M_i}`` for
    ``i = 1..k``, ``{F_1, M_{k+1}}`` and ``{F_0}``.
    """
    if k < 1:
        raise InvalidRates("k must be >= 1")
    rates = MaintenanceRates() if rates is None else rates
    if isinstance(rates, dict):
        rates = MaintenanceRates(**rates)
    rates.validate()
    names = maintenance_state_names(k)
    idx = {name: i for i, name in enumerate(names)}
    path = ["W"] + [f"D{i}" for i in range(1, k + 1)] + ["F1"]
    Q = np.zeros((len(names), len(names)))
    for pos in range(k + 1):
        s = idx[path[pos]]
        Q[s, idx[path[pos + 1]]] += rates.lambda_1
        Q[s, idx["F0"]] += rates.lambda_0
        Q[s, idx[f"M{pos + 1}"]] += rates.lambda_m
        Q[idx[f"M{pos + 1}"], idx[path[max(pos - 1, 0)]]] += rates.mu_m
    Q[idx["F0"], idx["W"]] += rates.mu_0
    Q[idx["F1"], idx["W"]] += rates.mu_1

    labels = np.empty(len(names), dtype=np.intp)
    labels[idx["W"]] = 0
    for i in range(1, k + 1):
        labels[idx[f"D{i}"]] = labels[idx[f"M{i}"]] = i
    labels[idx["F1"]] = labels[idx[f"M{k + 1}"]] = k + 1
    labels[idx["F0"]] = k + 2
    return RateMatrix(Q, names), PartitionMap(labels, k + 3)


def embed_jump_chain(rates):
    """Jump chain of a continuous-time chain: ``P_ij = q_ij / sum_l q_il``, ``P_ii = 0``."""
    Q = rates.matrix if isinstance(rates, RateMatrix) else RateMatrix(rates).matrix
    off = Q - np.diag(np.diag(Q))
    exit_rate = off.sum(axis=1)
    if np.any(exit_rate <= 0):
        raise AbsorbingState(f"states {np.flatnonzero(exit_rate <= 0).tolist()} have no exit")
    return FirstOrderChain(off / exit_rate[:, None])


# --------------------------------------------------------------------------
# letter bi-gram model

DEFAULT_HEADING_PATTERN = r"^[ \t]*(?:chapter[ \t]+)?[IVXLC]+\.?[ \t]*$"


def preprocess_text(text, strip_linebreaks=True, heading_pattern=DEFAULT_HEADING_PATTERN):
    """Drop chapter-heading lines and join lines with single spaces.

    Punctuation is kept unchanged.
    """
    if heading_pattern:
        text = re.sub(heading_pattern, "", text, flags=re.MULTILINE | re.IGNORECASE)
    if strip_linebreaks:
        text = re.sub(r"[ \t]*(?:\r?\n)+[ \t]*", " ", text).strip()
    return text


@dataclass
class BigramModel:
    chain: FirstOrderChain
    alphabet: list
    counts: np.ndarray

    def encode(self, text):
        index = {c: i for i, c in enumerate(self.alphabet)}
        return np.array([index[c] for c in text], dtype=np.intp)


def bigram_train(text, smoothing=1e-3):
    """Letter bi-gram chain with additive smoothing.

    The alphabet lists characters by first appearance. ``P_ij = (c_ij + d) /
    (c_i + d * N)``. With ``smoothing == 0`` rows of characters that are never
    followed (the last one) fall back to uniform and a warning is issued if
    the chain is reducible.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    if not text:
        raise EmptyText("text is empty after preprocessing")
    alphabet = list(dict.fromkeys(text))
    index = {c: i for i, c in enumerate(alphabet)}
    seq = np.fromiter((index[c] for c in text), dtype=np.intp, count=len(text))
    N = len(alphabet)
    counts = np.zeros((N, N))
    np.add.at(counts, (seq[:-1], seq[1:]), 1.0)
    P = counts + smoothing
    row = P.sum(axis=1, keepdims=True)
    P = np.where(row > 0, P / np.where(row > 0, row, 1.0), 1.0 / N)
    if smoothing == 0 and not is_irreducible(P):
        warnings.warn("unsmoothed bi-gram chain is reducible", stacklevel=2)
    return BigramModel(FirstOrderChain(P), alphabet, counts)


# Table-I reference partition for the second-order prediction cost.
TABLE1_PRED2_GROUPS = [
    " !'),.03:;?]",
    "bcdfgklmnprstvwxy",
    "aeioué",
    '"$(-12456789ABCDEFGHIJKLMNOPQRSTUVWYZ[hjq',
]


def table1_reference_partition(alphabet, default_group=3):
    """Reference 4-group partition of a character alphabet.

    Characters missing from the table go to ``default_group``.
    """
    lookup = {c: b for b, grp in enumerate(TABLE1_PRED2_GROUPS) for c in grp}
    labels = [lookup.get(c, default_group) for c in alphabet]
    return PartitionMap(labels, len(TABLE1_PRED2_GROUPS))


def sample_path(chain, length, rng=None, start=None):
    """Simulate ``length`` steps of a first-order chain from stationarity."""
    rng = np.random.default_rng(rng)
    P = chain.matrix
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    out = np.empty(length, dtype=np.intp)
    x = rng.choice(chain.n_states, p=chain.stationary) if start is None else start
    u = rng.random(length)
    for t in range(length):
        out[t] = x
        x = int(np.searchsorted(cum[x], u[t], side="right"))
    return out
