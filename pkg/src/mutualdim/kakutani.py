"""Hellinger-sum dichotomy for rho-coupled binary pairs versus the independent product.

Verdicts are analytic per schedule family. Partial sums are reported for
inspection only; convergence is never read off a truncated sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mutualdim.errors import RangeError, UnclassifiableError
from mutualdim.measures import MeasureSeq, RhoSchedule

# sup over |rho| <= 1 of H^2 / rho^2, attained at |rho| = 1
H2_OVER_RHO2_MAX = 2.0 - math.sqrt(2.0)

CONVERGES = "SumConverges"
DIVERGES = "SumDiverges"

_AGREE = (
    "the coupled and product measure sequences have the same random pairs: "
    "a pair is random for the coupling iff it is independently random"
)
_DISJOINT = (
    "no pair is random for both the coupling and the product; "
    "a coupled-random (R1, R2) is not independently random"
)


def hellinger_sq_coupled(rho):
    """Squared Hellinger distance 2 - sqrt(1+rho) - sqrt(1-rho) between the
    rho-coupling and the product of its uniform marginals.

    Evaluated as 2 rho^2 / ((1+a)(1+b)(a+b)) with a = sqrt(1+rho), b = sqrt(1-rho),
    which avoids cancellation for small rho. Accepts scalars or arrays.
    """
    r = np.asarray(rho, dtype=np.float64)
    if np.any(np.abs(r) > 1.0):
        raise RangeError("rho must lie in [-1, 1]")
    a = np.sqrt(1.0 + r)
    b = np.sqrt(1.0 - r)
    out = 2.0 * r * r / ((1.0 + a) * (1.0 + b) * (a + b))
    return float(out) if out.ndim == 0 else out


def hellinger_partial_sums(rho: RhoSchedule, N: int, chunk: int = 1 << 20) -> np.ndarray:
    """Cumulative sums of H^2 for n < N, accumulated chunk by chunk in index order."""
    if N < 1:
        raise ValueError("N must be >= 1")
    out = np.empty(N)
    carry = 0.0
    for lo in range(0, N, chunk):
        hi = min(lo + chunk, N)
        part = np.cumsum(hellinger_sq_coupled(rho.values(hi - lo, start=lo)))
        out[lo:hi] = part + carry
        carry = float(out[hi - 1])
    return out


def hellinger_total(rho: RhoSchedule, N: int, chunk: int = 1 << 20) -> float:
    """Final partial sum without keeping the whole vector."""
    total = 0.0
    for lo in range(0, N, chunk):
        hi = min(lo + chunk, N)
        total += math.fsum(hellinger_sq_coupled(rho.values(hi - lo, start=lo)).tolist())
    return total


@dataclass(frozen=True)
class DichotomyVerdict:
    tag: str
    partial_sums: np.ndarray
    basis: str
    interpretation: str
    bound: float | None = None
    margin: float = 0.0
    strongly_positive: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self, include_sums: bool = False) -> dict:
        d = {
            "verdict": self.tag,
            "basis": self.basis,
            "interpretation": self.interpretation,
            "bound": self.bound,
            "strong_positivity_margin": self.margin,
            "strongly_positive": self.strongly_positive,
            "notes": list(self.notes),
            "n_terms": int(self.partial_sums.size),
            "last_partial_sum": float(self.partial_sums[-1]) if self.partial_sums.size else 0.0,
        }
        if include_sums:
            d["partial_sums"] = self.partial_sums.tolist()
        return d


def _harmonic_sq_tail(c: float) -> float:
    # sum_{n>=0} 1/(n+c)^2 <= 1/c^2 + integral_c^inf x^-2 dx
    return 1.0 / c**2 + 1.0 / c


def classify_schedule(rho: RhoSchedule, N: int = 10_000) -> DichotomyVerdict:
    """Decide whether sum_n H(product, coupling_n)^2 converges.

    Uses rho^2 / 4 <= H^2 <= (2 - sqrt 2) rho^2, so the Hellinger sum converges
    exactly when sum rho_n^2 does. ``bound`` is an upper bound on the full
    sum for convergent schedules.
    """
    f, q = rho.family, rho.params
    if f == "const":
        tag = CONVERGES if q["rho"] == 0.0 else DIVERGES
        bound = 0.0 if tag == CONVERGES else None
        basis = "closed-form"
    elif f == "inv_sqrt":
        tag, bound, basis = DIVERGES, None, "bound-certified"
    elif f == "harmonic":
        tag, basis = CONVERGES, "bound-certified"
        bound = H2_OVER_RHO2_MAX * _harmonic_sq_tail(q["offset"])
    elif f == "geometric":
        r, r0 = q["ratio"], q["rho0"]
        if r0 == 0.0 or abs(r) < 1.0:
            tag, basis = CONVERGES, "bound-certified"
            bound = H2_OVER_RHO2_MAX * r0 * r0 / (1.0 - r * r) if abs(r) < 1.0 else 0.0
        else:
            tag, bound, basis = DIVERGES, None, "closed-form"
    elif f == "explicit":
        if not math.isfinite(q["tail"]):
            raise UnclassifiableError("explicit schedule needs a finite tail constant")
        if q["tail"] == 0.0:
            tag, basis = CONVERGES, "closed-form"
            bound = math.fsum(hellinger_sq_coupled(np.asarray(q["values"])).tolist()) if q["values"] else 0.0
        else:
            tag, bound, basis = DIVERGES, None, "closed-form"
    else:
        raise UnclassifiableError(f"no analytic rule for family {f!r}")

    margin = analytic_margin(MeasureSeq.rho_family(rho))
    notes = []
    if margin <= 0.0:
        notes.append("schedule reaches |rho| = 1: not strongly positive, the dichotomy does not apply")
    return DichotomyVerdict(
        tag=tag,
        partial_sums=hellinger_partial_sums(rho, N),
        basis=basis,
        interpretation=_AGREE if tag == CONVERGES else _DISJOINT,
        bound=bound,
        margin=margin,
        strongly_positive=margin > 0.0,
        notes=notes,
    )


def analytic_margin(m: MeasureSeq) -> float:
    """inf over all positions and symbols of alpha^(n)(symbol)."""
    if m.kind == "constant":
        return float(m.base.p.min())
    if m.kind == "tabulated":
        return float(min([t.p.min() for t in m.table] + [m.tail.p.min()]))
    f, q = m.schedule.family, m.schedule.params
    if f == "const":
        sup = abs(q["rho"])
    elif f == "inv_sqrt":
        sup = 1.0 / math.sqrt(q["offset"])
    elif f == "harmonic":
        sup = 1.0 / q["offset"]
    elif f == "geometric":
        sup = abs(q["rho0"])
    else:
        sup = max([abs(v) for v in q["values"]] + [abs(q["tail"])])
    return (1.0 - sup) / 4.0


def strong_positivity_margin(m: MeasureSeq, N: int) -> tuple[float, float]:
    """(min over n < N of the smallest per-position probability, analytic infimum)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if m.kind == "constant":
        observed = float(m.base.p.min())
    else:
        observed = float(m.prob_matrix(N).min())
    return observed, analytic_margin(m)
