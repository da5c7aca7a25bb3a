"""Billingsley mutual dimension: normalizability, the binary equivalence solver,
and the mutual divergence formula."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mutualdim.errors import (
    DimensionError,
    NoSolutionError,
    NotNormalizableError,
    UnsupportedAlphabetError,
)
from mutualdim.estimate import DensityTrace
from mutualdim.info import cross_entropy, mutual_information
from mutualdim.measures import JointPmf, Pmf, marginals

EQUIV_TOL = 1e-9
UNIFORM_TOL = 1e-12


@dataclass(frozen=True)
class EquivalenceProblem:
    alpha1: Pmf
    beta1: Pmf
    beta2: Pmf

    def __post_init__(self):
        for m in (self.alpha1, self.beta1, self.beta2):
            if m.k != 2:
                raise UnsupportedAlphabetError("the equivalence solver is binary only")
        for m in (self.beta1, self.beta2):
            if not m.strongly_positive(np.nextafter(0.0, 1.0)):
                raise ValueError("beta1 and beta2 must be strictly positive")


def _binary_positive(*ms: Pmf):
    for m in ms:
        if m.k != 2:
            raise UnsupportedAlphabetError(f"binary measures only, got k={m.k}")
        if np.any(m.p <= 0.0):
            raise ValueError("measures must be strictly positive")


def _is_uniform(m: Pmf) -> bool:
    return abs(m.p[0] - 0.5) <= UNIFORM_TOL and abs(m.p[1] - 0.5) <= UNIFORM_TOL


def check_conditions(beta1: Pmf, beta2: Pmf) -> int | None:
    """Which of the five admissible (beta1, beta2) configurations holds, if any.

    1: b2(0) < b1(1) < b1(0) < b2(1)     2: b2(1) < b1(0) < b1(1) < b2(0)
    3: b2(0) < b1(0) < b1(1) < b2(1)     4: b2(1) < b1(1) < b1(0) < b2(0)
    5: beta1 uniform and beta2 not uniform
    """
    _binary_positive(beta1, beta2)
    b10, b11 = beta1.p
    b20, b21 = beta2.p
    chains = {
        1: (b20, b11, b10, b21),
        2: (b21, b10, b11, b20),
        3: (b20, b10, b11, b21),
        4: (b21, b11, b10, b20),
    }
    for cid, chain in chains.items():
        if all(x < y for x, y in zip(chain, chain[1:])):
            return cid
    if _is_uniform(beta1) and not _is_uniform(beta2):
        return 5
    return None


def f_map(x, beta1: Pmf, beta2: Pmf):
    """(x log(b1(1)/b1(0)) + log(b2(1)/b1(1))) / log(b2(1)/b2(0)); ``x`` may be an array."""
    _binary_positive(beta1, beta2)
    b10, b11 = beta1.p
    b20, b21 = beta2.p
    denom = math.log2(b21 / b20)
    if denom == 0.0:
        raise ZeroDivisionError("beta2 is uniform: f is undefined")
    slope = math.log2(b11 / b10)
    offset = math.log2(b21 / b11)
    if np.ndim(x):
        return (np.asarray(x, dtype=np.float64) * slope + offset) / denom
    return (float(x) * slope + offset) / denom


def is_equivalent(a1: Pmf, a2: Pmf, b1: Pmf, b2: Pmf, tol: float = EQUIV_TOL) -> bool:
    """True when a1 under the b1 code and a2 under the b2 code have equal expected length."""
    if len({a1.k, a2.k, b1.k, b2.k}) != 1:
        raise DimensionError("all four measures must share an alphabet")
    return abs(cross_entropy(a1, b1) - cross_entropy(a2, b2)) <= tol


def equivalent_measure(prob: EquivalenceProblem) -> Pmf:
    """The unique binary alpha2 that is (beta1, beta2)-equivalent to alpha1."""
    cid = check_conditions(prob.beta1, prob.beta2)
    if cid is None:
        raise NoSolutionError("(beta1, beta2) satisfies none of the admissible conditions")
    x = f_map(prob.alpha1.p[0], prob.beta1, prob.beta2)
    alpha2 = Pmf([x, 1.0 - x])
    if not is_equivalent(prob.alpha1, alpha2, prob.beta1, prob.beta2):
        raise AssertionError("solver output failed the equivalence check")
    return alpha2


def normalizability_ratio_trace(S, T, b1: Pmf, b2: Pmf, schedule) -> DensityTrace:
    """l_b1(S[:n]) / l_b2(T[:n]) for each n in ``schedule``."""
    S = np.asarray(S, dtype=np.int64).ravel()
    T = np.asarray(T, dtype=np.int64).ravel()
    schedule = np.asarray(schedule, dtype=np.int64)
    if schedule.size and schedule[-1] > min(S.size, T.size):
        raise DimensionError("schedule runs past the end of the words")
    if np.any(b1.p <= 0.0) or np.any(b2.p <= 0.0):
        raise ValueError("b1 and b2 must be strictly positive")
    cs = np.cumsum(-np.log2(b1.p)[S])
    ct = np.cumsum(-np.log2(b2.p)[T])
    idx = schedule - 1
    return DensityTrace(schedule, cs[idx] / ct[idx])


def billingsley_mdim(alpha: JointPmf, beta1: Pmf, beta2: Pmf) -> float:
    """I(alpha_1 : alpha_2) / (H(alpha_1) + D(alpha_1 || beta_1)).

    Requires the marginals to be (beta1, beta2)-equivalent, which makes the
    two forms of the denominator agree.
    """
    if np.any(beta1.p <= 0.0) or np.any(beta2.p <= 0.0):
        raise ValueError("beta1 and beta2 must be strictly positive")
    a1, a2 = marginals(alpha)
    if not is_equivalent(a1, a2, beta1, beta2):
        raise NotNormalizableError(
            "marginals are not (beta1, beta2)-equivalent; mutual normalizability is not guaranteed"
        )
    mi = mutual_information(alpha)
    d1 = cross_entropy(a1, beta1)
    d2 = cross_entropy(a2, beta2)
    v1, v2 = mi / d1, mi / d2
    if abs(v1 - v2) > EQUIV_TOL:
        raise AssertionError(f"denominators disagree: {v1} vs {v2}")
    return v1
