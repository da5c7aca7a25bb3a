"""Closed-form information quantities. All logarithms are base 2.

Sums run in index-ascending order through ``math.fsum`` so that every value
is reproducible bit for bit. Zero-probability terms follow ``0 log 0 = 0``;
divergences that blow up return ``math.inf`` instead of raising.
"""

from __future__ import annotations

import math

import numpy as np

from mutualdim.errors import DimensionError
from mutualdim.measures import JointPmf, MeasureSeq, Pmf, _as_flat_word, marginals


def _probs(a) -> np.ndarray:
    if isinstance(a, JointPmf):
        return a.flat
    if isinstance(a, Pmf):
        return a.p
    return np.asarray(a, dtype=np.float64).ravel()


def _same_k(a: Pmf, b: Pmf):
    if a.k != b.k:
        raise DimensionError(f"alphabet sizes differ: {a.k} vs {b.k}")


def entropy(a) -> float:
    """Shannon entropy of a Pmf (or of a JointPmf viewed as a pmf on pairs)."""
    return math.fsum(-x * math.log2(x) for x in _probs(a).tolist() if x > 0.0)


def mutual_information(j: JointPmf) -> float:
    m1, m2 = marginals(j)
    terms = []
    for a, row in enumerate(j.p.tolist()):
        for b, x in enumerate(row):
            if x > 0.0:
                # log of each factor: the product of two tiny marginals underflows
                terms.append(x * (math.log2(x) - math.log2(m1.p[a]) - math.log2(m2.p[b])))
    # exact sum can dip a hair below 0 for near-independent inputs
    return max(math.fsum(terms), 0.0)


def kl_divergence(a: Pmf, b: Pmf) -> float:
    _same_k(a, b)
    terms = []
    for x, y in zip(a.p.tolist(), b.p.tolist()):
        if x == 0.0:
            continue
        if y == 0.0:
            return math.inf
        terms.append(x * (math.log2(x) - math.log2(y)))
    return max(math.fsum(terms), 0.0)


def cross_entropy(a: Pmf, b: Pmf) -> float:
    """Expected code length sum_x a(x) log 1/b(x); equals H(a) + D(a||b)."""
    _same_k(a, b)
    terms = []
    for x, y in zip(a.p.tolist(), b.p.tolist()):
        if x == 0.0:
            continue
        if y == 0.0:
            return math.inf
        terms.append(-x * math.log2(y))
    return math.fsum(terms)


def self_information(b: Pmf, w) -> float:
    """Code length of ``w`` under the memoryless code for ``b``.

    Accumulated from symbol counts, so it costs O(|w| + k) for long words.
    """
    s = np.asarray(w, dtype=np.int64).ravel()
    if s.size == 0:
        return 0.0
    if s.min() < 0 or s.max() >= b.k:
        raise DimensionError("symbol outside the alphabet")
    counts = np.bincount(s, minlength=b.k).tolist()
    terms = []
    for c, y in zip(counts, b.p.tolist()):
        if c == 0:
            continue
        if y == 0.0:
            return math.inf
        terms.append(-c * math.log2(y))
    return math.fsum(terms)


def pointwise_mi(j: MeasureSeq, u, w) -> float:
    """log2 of mu(u, w) / (mu_1(u) mu_2(w)) under a longitudinal pair measure.

    Returns ``-inf`` when the pair word has probability zero.
    """
    if not j.is_joint:
        raise DimensionError("pointwise_mi needs a measure over pairs")
    u = np.asarray(u, dtype=np.int64).ravel()
    w = np.asarray(w, dtype=np.int64).ravel()
    if u.size != w.size:
        raise DimensionError(f"word lengths differ: {u.size} vs {w.size}")
    if u.size == 0:
        return 0.0
    joint = j.symbol_probs(_as_flat_word(j, np.stack([u, w], axis=1)))
    p1 = j.marginal(0).symbol_probs(u)
    p2 = j.marginal(1).symbol_probs(w)
    if np.any(joint == 0.0):
        return -math.inf
    terms = np.log2(joint) - np.log2(p1) - np.log2(p2)
    return math.fsum(terms.tolist())


def hellinger(a, b) -> float:
    """Hellinger distance sqrt(sum (sqrt a - sqrt b)^2); dimensionless, in [0, sqrt 2]."""
    pa, pb = _probs(a), _probs(b)
    if pa.size != pb.size:
        raise DimensionError(f"alphabet sizes differ: {pa.size} vs {pb.size}")
    return math.sqrt(
        math.fsum((math.sqrt(x) - math.sqrt(y)) ** 2 for x, y in zip(pa.tolist(), pb.tolist()))
    )
