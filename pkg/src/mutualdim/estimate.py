"""Empirical information-density estimators and the likelihood-ratio martingale.

None of this computes Kolmogorov complexity. The plug-in block estimator and
the Krichevsky-Trofimov code length stand in for K(.) at finite length; the
dimension proxies take min/max over the tail half of a prefix schedule.
"""

from __future__ import annotations

import math
import subprocess
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from mutualdim.errors import (
    CapacityError,
    DimensionError,
    InsufficientDataError,
    SingularMeasureError,
)
from mutualdim.genseq import CoupledWords
from mutualdim.measures import MeasureSeq

MAX_TABLE_BITS = 24


# -- compressors -------------------------------------------------------------


class Compressor(Protocol):
    name: str

    def code_length(self, w: np.ndarray, k: int) -> float:
        """Code length of ``w`` (symbols in range(k)) in bits."""
        ...


def kt_code_length(w, k: int) -> float:
    """Adaptive Krichevsky-Trofimov code length in bits.

    Sum over i of log2((i + k/2) / (c_i(w[i]) + 1/2)), c_i counting earlier
    occurrences of the current symbol.
    """
    s = np.asarray(w, dtype=np.int64).ravel()
    n = s.size
    if n == 0:
        return 0.0
    if s.min() < 0 or s.max() >= k:
        raise DimensionError("symbol outside the alphabet")
    order = np.argsort(s, kind="stable")
    sorted_s = s[order]
    starts = np.flatnonzero(np.r_[True, sorted_s[1:] != sorted_s[:-1]])
    group_start = np.repeat(starts, np.diff(np.r_[starts, n]))
    prior = np.empty(n, dtype=np.float64)
    prior[order] = np.arange(n) - group_start
    i = np.arange(n, dtype=np.float64)
    return float(np.sum(np.log2(i + k / 2.0)) - np.sum(np.log2(prior + 0.5)))


class KTCompressor:
    name = "kt"

    def code_length(self, w, k: int) -> float:
        return kt_code_length(w, k)


class ExternalCompressor:
    """Pipes the word (one byte per symbol) through a command and counts output bytes."""

    def __init__(self, command: Sequence[str], name: str | None = None):
        self.command = list(command)
        self.name = name or f"external:{' '.join(self.command)}"

    def code_length(self, w, k: int) -> float:
        s = np.asarray(w, dtype=np.int64).ravel()
        if k > 256:
            raise CapacityError("external compressors take byte symbols only (k <= 256)")
        result = subprocess.run(
            self.command, input=s.astype(np.uint8).tobytes(), capture_output=True, check=True
        )
        return 8.0 * len(result.stdout)


# -- plug-in estimators ---------------------------------------------------------


def _block_codes(w: np.ndarray, k: int, block_len: int) -> np.ndarray:
    if block_len < 1:
        raise ValueError("block_len must be >= 1")
    if block_len * math.log2(k) > MAX_TABLE_BITS:
        raise CapacityError(
            f"block table of {k}^{block_len} cells exceeds 2^{MAX_TABLE_BITS}"
        )
    nb = w.size // block_len
    blocks = w[: nb * block_len].reshape(nb, block_len)
    weights = k ** np.arange(block_len - 1, -1, -1, dtype=np.int64)
    return blocks @ weights


def _entropy_from_counts(counts: np.ndarray) -> float:
    c = counts[counts > 0].astype(np.float64)
    total = float(c.sum())
    if total == 0:
        return 0.0
    # fsum makes the value independent of cell order
    return math.log2(total) - math.fsum((c * np.log2(c)).tolist()) / total


def _plugin_block_entropy(codes: np.ndarray, cells: int) -> float:
    return _entropy_from_counts(np.bincount(codes, minlength=cells))


def plugin_entropy_rate(w, block_len: int, k: int = 2) -> float:
    """Plug-in entropy of non-overlapping blocks divided by block length (bits/symbol)."""
    s = np.asarray(w, dtype=np.int64).ravel()
    codes = _block_codes(s, k, block_len)
    if codes.size == 0:
        raise InsufficientDataError("word shorter than one block")
    return _plugin_block_entropy(codes, k**block_len) / block_len


@dataclass(frozen=True)
class Plugin:
    block_len: int = 4
    name = "plugin"


@dataclass(frozen=True)
class CompressorMethod:
    compressor: Compressor
    name = "compressor"

    @property
    def block_len(self):
        return None


def mi_density(u, w, method=Plugin(4), k: int = 2) -> float:
    """Raw mutual-information density of two equal-length words, normalized by log2 k.

    Plug-in: [H(u) + H(w) - H(pairs)] / log2 k with block entropy rates.
    Compressor: [C(u) + C(w) - C(pairs)] / (|u| log2 k), the pair word coded
    over the k^2 alphabet a * k + b. Clamp with :func:`clamp01` for reporting.
    """
    u = np.asarray(u, dtype=np.int64).ravel()
    w = np.asarray(w, dtype=np.int64).ravel()
    if u.size != w.size:
        raise DimensionError(f"word lengths differ: {u.size} vs {w.size}")
    if u.size == 0:
        raise InsufficientDataError("empty words")
    pairs = u * k + w
    if isinstance(method, Plugin):
        L = method.block_len
        hu = plugin_entropy_rate(u, L, k)
        hw = plugin_entropy_rate(w, L, k)
        hp = plugin_entropy_rate(pairs, L, k * k)
        return (hu + hw - hp) / math.log2(k)
    c = method.compressor
    total = c.code_length(u, k) + c.code_length(w, k) - c.code_length(pairs, k * k)
    return total / (u.size * math.log2(k))


def clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


# -- traces --------------------------------------------------------------------


def geometric_schedule(n_max: int, n0: int = 1024, factor: float = 1.3) -> np.ndarray:
    """Prefix lengths ceil(n0 * factor^j) up to n_max, with n_max appended."""
    pts = []
    j = 0
    while True:
        n = math.ceil(n0 * factor**j)
        if n >= n_max:
            break
        if not pts or n > pts[-1]:
            pts.append(n)
        j += 1
    pts.append(int(n_max))
    return np.asarray(pts, dtype=np.int64)


@dataclass(frozen=True)
class DensityTrace:
    schedule: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        sched = np.asarray(self.schedule, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        if sched.shape != vals.shape:
            raise DimensionError("schedule and values differ in length")
        if sched.size > 1 and np.any(np.diff(sched) <= 0):
            raise ValueError("schedule must be strictly increasing")
        object.__setattr__(self, "schedule", sched)
        object.__setattr__(self, "values", vals)

    @property
    def clamped(self) -> np.ndarray:
        return np.clip(self.values, 0.0, 1.0)

    def __len__(self):
        return int(self.schedule.size)

    def rows(self, method: str, block_len) -> list[tuple]:
        return [
            (int(n), float(v), float(c), method, block_len)
            for n, v, c in zip(self.schedule, self.values, self.clamped)
        ]


def dimension_estimate(trace: DensityTrace) -> tuple[float, float]:
    """(lower, upper) proxies: min and max over the tail half of the trace, clamped."""
    if len(trace) < 4:
        raise InsufficientDataError(f"need at least 4 trace points, got {len(trace)}")
    tail = trace.values[len(trace) // 2 :]
    return clamp01(float(tail.min())), clamp01(float(tail.max()))


def mi_density_trace(u, w, schedule, method=Plugin(4), k: int = 2) -> DensityTrace:
    """mi_density evaluated on each prefix length in ``schedule``."""
    u = np.asarray(u, dtype=np.int64).ravel()
    w = np.asarray(w, dtype=np.int64).ravel()
    if u.size != w.size:
        raise DimensionError(f"word lengths differ: {u.size} vs {w.size}")
    schedule = np.asarray(schedule, dtype=np.int64)
    if schedule.size and schedule[-1] > u.size:
        raise DimensionError("schedule runs past the end of the words")
    if not isinstance(method, Plugin):
        vals = [mi_density(u[:n], w[:n], method, k) for n in schedule]
        return DensityTrace(schedule, np.asarray(vals))
    # block codes are shared across prefixes; each prefix takes its first n // L blocks
    L = method.block_len
    cu = _block_codes(u, k, L)
    cw = _block_codes(w, k, L)
    cp = _block_codes(u * k + w, k * k, L)
    vals = []
    for n in schedule:
        nb = int(n) // L
        if nb == 0:
            raise InsufficientDataError(f"prefix {n} shorter than one block")
        h = (
            _plugin_block_entropy(cu[:nb], k**L)
            + _plugin_block_entropy(cw[:nb], k**L)
            - _plugin_block_entropy(cp[:nb], (k * k) ** L)
        )
        vals.append(h / L / math.log2(k))
    return DensityTrace(schedule, np.asarray(vals))


def entropy_rate_trace(w, schedule, block_len: int, k: int = 2) -> DensityTrace:
    """Plug-in entropy rate / log2 k per prefix; a proxy trace for dim and Dim."""
    s = np.asarray(w, dtype=np.int64).ravel()
    codes = _block_codes(s, k, block_len)
    vals = []
    for n in np.asarray(schedule, dtype=np.int64):
        nb = int(n) // block_len
        if nb == 0:
            raise InsufficientDataError(f"prefix {n} shorter than one block")
        vals.append(_plugin_block_entropy(codes[:nb], k**block_len) / block_len / math.log2(k))
    return DensityTrace(schedule, np.asarray(vals))


# -- likelihood-ratio martingale ----------------------------------------------------


def likelihood_ratio_log(m_num: MeasureSeq, m_den: MeasureSeq, cw: CoupledWords) -> np.ndarray:
    """log2 capital of the martingale mu_num / mu_den after each prefix of ``cw``.

    Entry i holds the value after i + 1 pairs; an empty pair gives an empty array.
    """
    if not (m_num.is_joint and m_den.is_joint) or len({m_num.k, m_den.k, cw.k}) != 1:
        raise DimensionError("both measures must be over pairs of the words' alphabet")
    codes = cw.pairs
    den = m_den.symbol_probs(codes)
    if np.any(den == 0.0):
        i = int(np.flatnonzero(den == 0.0)[0])
        raise SingularMeasureError(f"denominator measure gives probability 0 at position {i}")
    num = m_num.symbol_probs(codes)
    with np.errstate(divide="ignore"):
        steps = np.log2(num) - np.log2(den)
    return np.cumsum(steps)
