"""Entropy helpers in bits with the usual 0 log 0 = 0 convention."""

import numpy as np


def entropy(p):
    """Shannon entropy (bits) of a probability array of any shape."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def binary_entropy(p):
    return entropy([p, 1.0 - p])


def row_entropies(rows):
    """Entropy of every row of a 2-D array."""
    rows = np.asarray(rows, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(rows > 0, rows * np.log2(np.where(rows > 0, rows, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def conditional_entropy(joint, n_conditioning):
    """H(last axes | first ``n_conditioning`` axes) for a joint tensor."""
    joint = np.asarray(joint, dtype=float)
    if n_conditioning == 0:
        return entropy(joint)
    marg = joint.reshape(joint.shape[:n_conditioning] + (-1,)).sum(axis=-1)
    return entropy(joint) - entropy(marg)
