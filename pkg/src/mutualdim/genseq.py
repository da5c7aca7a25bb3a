"""Seeded sampling of coupled words, frequency sequences and k-ary real values."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from mutualdim.errors import DimensionError
from mutualdim.measures import MeasureSeq, Pmf, decode_pairs

PRNG_NAME = "philox4x64-10"
PRNG_VERSION = f"numpy-{np.__version__}"


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; ``stream`` selects an independent substream of ``seed``."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=[seed, int(stream)]))


def provenance(measure: MeasureSeq | None, seed: int | None, n: int) -> dict:
    return {
        "measure": measure.to_dict() if measure is not None else None,
        "seed": seed,
        "length": int(n),
        "prng": PRNG_NAME,
        "prng_version": PRNG_VERSION,
    }


@dataclass(frozen=True)
class CoupledWords:
    u: np.ndarray
    w: np.ndarray
    k: int
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.u.shape != self.w.shape:
            raise DimensionError("coupled words must have equal length")

    def __len__(self):
        return int(self.u.size)

    @property
    def pairs(self) -> np.ndarray:
        return self.u * self.k + self.w


def inverse_cdf(cdf: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Symbol index with cdf[s-1] <= x < cdf[s]; rows of ``cdf`` may vary per position."""
    cdf = np.array(cdf, dtype=np.float64)
    # symbols past the last positive mass must stay unreachable despite rounding
    if cdf.ndim == 1:
        top = np.searchsorted(cdf, cdf[-1], side="left")
        cdf[top:] = np.inf
        return np.searchsorted(cdf[:-1], x, side="right")
    total = cdf[:, -1:]
    cdf[cdf >= total] = np.inf
    return np.sum(cdf[:, :-1] <= x[:, None], axis=1)


def sample_symbols(m: MeasureSeq, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """Flat symbol codes for positions 0..n-1, one uniform variate per position."""
    x = make_rng(seed, stream).random(n)
    if m.kind == "constant":
        probs = m.base.flat if m.is_joint else m.base.p
        return inverse_cdf(np.cumsum(probs), x)
    return inverse_cdf(np.cumsum(m.prob_matrix(n), axis=1), x)


def sample_coupled(m: MeasureSeq, n: int, seed: int) -> CoupledWords:
    if not m.is_joint:
        raise DimensionError("sample_coupled needs a measure over pairs")
    if n < 0:
        raise ValueError("length must be non-negative")
    codes = sample_symbols(m, n, seed)
    u, w = decode_pairs(codes, m.k)
    return CoupledWords(u, w, m.k, provenance(m, seed, n))


def sample_word(m: MeasureSeq, n: int, seed: int) -> np.ndarray:
    if m.is_joint:
        raise DimensionError("sample_word needs a single-alphabet measure")
    return sample_symbols(m, n, seed)


def freq_sequence(a: Pmf, n: int) -> np.ndarray:
    """Greedy largest-deficit word whose symbol frequencies track ``a``.

    At step i (1-based) emit the symbol maximizing a(s) * i - count(s), the
    smallest index winning ties.
    """
    p = a.p.tolist()
    k = len(p)
    counts = [0] * k
    out = np.empty(n, dtype=np.int64)
    for i in range(1, n + 1):
        best, best_d = 0, p[0] * i - counts[0]
        for s in range(1, k):
            d = p[s] * i - counts[s]
            if d > best_d:
                best, best_d = s, d
        counts[best] += 1
        out[i - 1] = best
    return out


def real_representation(w, k: int = 2, precision_digits: int = 20) -> tuple[Fraction, str]:
    """Exact value of sum w[i] k^-(i+1) and its decimal rendering."""
    w = [int(x) for x in np.asarray(w).ravel()]
    if not w:
        raise ValueError("word must be nonempty")
    if min(w) < 0 or max(w) >= k:
        raise DimensionError("symbol outside the alphabet")
    num = 0
    for x in w:
        num = num * k + x
    value = Fraction(num, k ** len(w))
    scaled = round(value * 10**precision_digits)
    whole, frac = divmod(scaled, 10**precision_digits)
    text = f"{whole}.{frac:0{precision_digits}d}" if precision_digits > 0 else str(whole)
    return value, text
