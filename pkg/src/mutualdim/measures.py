"""Probability measures on finite alphabets, pair alphabets and longitudinal products.

Words over a pair alphabet are carried as flat codes ``a * k + b``; see
:func:`encode_pairs`.  A :class:`MeasureSeq` is one of three closed variants
(constant, rho-family, tabulated) so that :func:`limit` is always defined.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from mutualdim.errors import DimensionError, RangeError

SUM_TOL = 1e-9
MAX_ALPHABET = 256


def _validated(p, shape_name: str) -> np.ndarray:
    arr = np.array(p, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{shape_name}: entries must be finite")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{shape_name}: entries must lie in [0, 1]")
    total = math.fsum(arr.ravel().tolist())
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"{shape_name}: entries sum to {total!r}, not 1")
    # sub-ulp deviations are left alone so exact inputs survive unchanged
    if abs(total - 1.0) > 1e-15:
        arr = arr / total
    arr.setflags(write=False)
    return arr


class Pmf:
    """Probability mass function on the alphabet ``{0, ..., k-1}``."""

    __slots__ = ("p",)

    def __init__(self, p):
        arr = _validated(p, "Pmf")
        if arr.ndim != 1:
            raise DimensionError("Pmf needs a 1-d probability vector")
        if not 2 <= arr.size <= MAX_ALPHABET:
            raise DimensionError(f"alphabet size must be in [2, {MAX_ALPHABET}], got {arr.size}")
        object.__setattr__(self, "p", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Pmf is immutable")

    @property
    def k(self) -> int:
        return int(self.p.size)

    def strongly_positive(self, delta: float) -> bool:
        return bool(np.all(self.p >= delta))

    def __getitem__(self, a: int) -> float:
        return float(self.p[a])

    def __eq__(self, other):
        return isinstance(other, Pmf) and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash(("Pmf", self.p.tobytes()))

    def __repr__(self):
        return f"Pmf({self.p.tolist()})"

    def to_dict(self) -> dict:
        return {"kind": "pmf", "k": self.k, "p": self.p.tolist()}


class JointPmf:
    """Probability mass function on pairs ``(a, b)``; row index is the first coordinate."""

    __slots__ = ("p",)

    def __init__(self, p):
        arr = _validated(p, "JointPmf")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError("JointPmf needs a square k x k matrix")
        if not 2 <= arr.shape[0] <= MAX_ALPHABET:
            raise DimensionError(f"alphabet size must be in [2, {MAX_ALPHABET}]")
        object.__setattr__(self, "p", arr)

    def __setattr__(self, name, value):
        raise AttributeError("JointPmf is immutable")

    @property
    def k(self) -> int:
        return int(self.p.shape[0])

    @property
    def flat(self) -> np.ndarray:
        """Probabilities indexed by the pair code ``a * k + b``."""
        return self.p.ravel()

    def marginals(self) -> tuple[Pmf, Pmf]:
        return marginals(self)

    def __eq__(self, other):
        return isinstance(other, JointPmf) and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash(("JointPmf", self.p.tobytes()))

    def __repr__(self):
        return f"JointPmf({self.p.tolist()})"

    def to_dict(self) -> dict:
        return {"kind": "joint", "k": self.k, "p": self.p.tolist()}


Measure = Union[Pmf, JointPmf]


def uniform(k: int) -> Pmf:
    return Pmf(np.full(k, 1.0 / k))


def marginals(j: JointPmf) -> tuple[Pmf, Pmf]:
    rows = [math.fsum(r) for r in j.p.tolist()]
    cols = [math.fsum(c) for c in j.p.T.tolist()]
    return Pmf(rows), Pmf(cols)


def product(p1: Pmf, p2: Pmf) -> JointPmf:
    if p1.k != p2.k:
        raise DimensionError(f"alphabet sizes differ: {p1.k} vs {p2.k}")
    return JointPmf(np.outer(p1.p, p2.p))


def rho_joint(rho: float) -> JointPmf:
    """Binary coupling with diagonal mass (1+rho)/4 and off-diagonal mass (1-rho)/4."""
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise RangeError(f"rho must lie in [-1, 1], got {rho}")
    d = (1.0 + rho) / 4.0
    o = (1.0 - rho) / 4.0
    return JointPmf([[d, o], [o, d]])


def encode_pairs(u, w, k: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    if u.shape != w.shape:
        raise DimensionError(f"word lengths differ: {u.size} vs {w.size}")
    return u * k + w


def decode_pairs(codes, k: int) -> tuple[np.ndarray, np.ndarray]:
    codes = np.asarray(codes, dtype=np.int64)
    return codes // k, codes % k


# -- rho schedules -----------------------------------------------------------

RHO_FAMILIES = ("const", "inv_sqrt", "harmonic", "geometric", "explicit")


class RhoSchedule:
    """A sequence of correlation parameters rho_n in [-1, 1].

    Build with the classmethods :meth:`const`, :meth:`inv_sqrt`,
    :meth:`harmonic`, :meth:`geometric` and :meth:`explicit`.
    """

    __slots__ = ("family", "params")

    def __init__(self, family: str, **params):
        if family not in RHO_FAMILIES:
            raise ValueError(f"unknown rho family {family!r}")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", dict(params))
        self._check()

    def __setattr__(self, name, value):
        raise AttributeError("RhoSchedule is immutable")

    @classmethod
    def const(cls, rho: float) -> "RhoSchedule":
        return cls("const", rho=float(rho))

    @classmethod
    def inv_sqrt(cls, offset: float = 2.0) -> "RhoSchedule":
        return cls("inv_sqrt", offset=float(offset))

    @classmethod
    def harmonic(cls, offset: float = 1.0) -> "RhoSchedule":
        return cls("harmonic", offset=float(offset))

    @classmethod
    def geometric(cls, rho0: float, ratio: float) -> "RhoSchedule":
        return cls("geometric", rho0=float(rho0), ratio=float(ratio))

    @classmethod
    def explicit(cls, values: Sequence[float], tail: float) -> "RhoSchedule":
        return cls("explicit", values=tuple(float(v) for v in values), tail=float(tail))

    def _check(self):
        f, q = self.family, self.params

        def in_range(x, name):
            if not (isinstance(x, float) and -1.0 <= x <= 1.0):
                raise RangeError(f"{name} must lie in [-1, 1], got {x!r}")

        if f == "const":
            in_range(q["rho"], "rho")
        elif f in ("inv_sqrt", "harmonic"):
            if not q["offset"] >= 1.0:
                raise RangeError(f"offset must be >= 1, got {q['offset']}")
        elif f == "geometric":
            in_range(q["rho0"], "rho0")
            # ratio -1 oscillates without a limit
            if not -1.0 < q["ratio"] <= 1.0:
                raise RangeError(f"ratio must lie in (-1, 1], got {q['ratio']}")
        else:
            for v in q["values"]:
                in_range(v, "explicit value")
            in_range(q["tail"], "tail")

    def values(self, n: int, start: int = 0) -> np.ndarray:
        """rho_start, ..., rho_{start+n-1} as a float array."""
        idx = np.arange(start, start + n, dtype=np.float64)
        f, q = self.family, self.params
        if f == "const":
            return np.full(n, q["rho"])
        if f == "inv_sqrt":
            return 1.0 / np.sqrt(idx + q["offset"])
        if f == "harmonic":
            return 1.0 / (idx + q["offset"])
        if f == "geometric":
            return q["rho0"] * np.power(q["ratio"], idx)
        vals = np.asarray(q["values"], dtype=np.float64)
        out = np.full(n, q["tail"])
        lo, hi = start, min(start + n, vals.size)
        if hi > lo:
            out[: hi - lo] = vals[lo:hi]
        return out

    def at(self, n: int) -> float:
        return float(self.values(1, start=n)[0])

    def limit(self) -> float:
        f, q = self.family, self.params
        if f == "const":
            return q["rho"]
        if f in ("inv_sqrt", "harmonic"):
            return 0.0
        if f == "geometric":
            return q["rho0"] if q["ratio"] == 1.0 else 0.0
        return q["tail"]

    def to_dict(self) -> dict:
        d = {"family": self.family}
        for key, val in self.params.items():
            d[key] = list(val) if isinstance(val, tuple) else val
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RhoSchedule":
        d = dict(d)
        family = d.pop("family")
        try:
            if family == "explicit":
                return cls.explicit(d["values"], d["tail"])
            return cls(family, **{key: float(v) for key, v in d.items()})
        except (KeyError, TypeError) as exc:
            raise ValueError(f"incomplete {family!r} rho schedule: {exc}") from None

    def __eq__(self, other):
        return isinstance(other, RhoSchedule) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))

    def __repr__(self):
        args = ", ".join(f"{key}={v!r}" for key, v in self.params.items())
        return f"RhoSchedule.{self.family}({args})"


# -- longitudinal products ---------------------------------------------------


class MeasureSeq:
    """Per-position measures alpha^(0), alpha^(1), ... of a longitudinal product.

    Variants: ``MeasureSeq.constant(pmf)``, ``MeasureSeq.rho_family(schedule)``
    and ``MeasureSeq.tabulated(table, tail)``.
    """

    __slots__ = ("kind", "base", "schedule", "table", "tail")

    def __init__(self, kind, base=None, schedule=None, table=(), tail=None):
        for name, val in zip(self.__slots__, (kind, base, schedule, tuple(table), tail)):
            object.__setattr__(self, name, val)

    def __setattr__(self, name, value):
        raise AttributeError("MeasureSeq is immutable")

    @classmethod
    def constant(cls, m: Measure) -> "MeasureSeq":
        if not isinstance(m, (Pmf, JointPmf)):
            raise TypeError("constant measure must be a Pmf or JointPmf")
        return cls("constant", base=m)

    @classmethod
    def rho_family(cls, schedule: RhoSchedule) -> "MeasureSeq":
        return cls("rho", schedule=schedule)

    @classmethod
    def tabulated(cls, table: Sequence[Measure], tail: Measure) -> "MeasureSeq":
        kinds = {type(m) for m in table} | {type(tail)}
        if len(kinds) != 1 or not kinds <= {Pmf, JointPmf}:
            raise TypeError("tabulated entries and tail must all be Pmf or all JointPmf")
        if any(m.k != tail.k for m in table):
            raise DimensionError("tabulated entries must share the tail's alphabet size")
        return cls("tabulated", table=table, tail=tail)

    @property
    def is_joint(self) -> bool:
        if self.kind == "rho":
            return True
        ref = self.base if self.kind == "constant" else self.tail
        return isinstance(ref, JointPmf)

    @property
    def k(self) -> int:
        """Size of the underlying (single-coordinate) alphabet."""
        if self.kind == "rho":
            return 2
        ref = self.base if self.kind == "constant" else self.tail
        return ref.k

    @property
    def n_symbols(self) -> int:
        return self.k * self.k if self.is_joint else self.k

    def at(self, n: int) -> Measure:
        if self.kind == "constant":
            return self.base
        if self.kind == "rho":
            return rho_joint(self.schedule.at(n))
        return self.table[n] if n < len(self.table) else self.tail

    def limit(self) -> Measure:
        return limit(self)

    def _flat(self, m: Measure) -> np.ndarray:
        return m.flat if isinstance(m, JointPmf) else m.p

    def prob_matrix(self, n: int) -> np.ndarray:
        """(n, n_symbols) array whose row i is alpha^(i) over flat symbol codes."""
        if self.kind == "constant":
            return np.broadcast_to(self._flat(self.base), (n, self.n_symbols))
        if self.kind == "rho":
            rho = self.schedule.values(n)
            d = (1.0 + rho) / 4.0
            o = (1.0 - rho) / 4.0
            return np.stack([d, o, o, d], axis=1)
        out = np.empty((n, self.n_symbols))
        m = min(n, len(self.table))
        for i in range(m):
            out[i] = self._flat(self.table[i])
        out[m:] = self._flat(self.tail)
        return out

    def symbol_probs(self, symbols) -> np.ndarray:
        """alpha^(i)(symbols[i]) for every position i of a flat-coded word."""
        s = np.asarray(symbols, dtype=np.int64)
        if s.size and (s.min() < 0 or s.max() >= self.n_symbols):
            raise DimensionError("symbol outside the alphabet")
        if self.kind == "constant":
            return self._flat(self.base)[s]
        if self.kind == "rho":
            rho = self.schedule.values(s.size)
            diag = (s == 0) | (s == 3)
            return np.where(diag, (1.0 + rho) / 4.0, (1.0 - rho) / 4.0)
        out = self._flat(self.tail)[s]
        m = min(s.size, len(self.table))
        for i in range(m):
            out[i] = self._flat(self.table[i])[s[i]]
        return out

    def marginal(self, which: int) -> "MeasureSeq":
        """Per-position first (``which=0``) or second (``which=1``) marginal sequence."""
        if not self.is_joint:
            raise DimensionError("marginal of a single-alphabet measure")
        if self.kind == "constant":
            return MeasureSeq.constant(marginals(self.base)[which])
        if self.kind == "rho":
            return MeasureSeq.constant(uniform(2))
        return MeasureSeq.tabulated(
            [marginals(m)[which] for m in self.table], marginals(self.tail)[which]
        )

    def product_of_marginals(self) -> "MeasureSeq":
        """The independent coupling with the same per-position marginals."""
        if self.kind == "constant":
            return MeasureSeq.constant(product(*marginals(self.base)))
        if self.kind == "rho":
            return MeasureSeq.constant(product(uniform(2), uniform(2)))
        return MeasureSeq.tabulated(
            [product(*marginals(m)) for m in self.table], product(*marginals(self.tail))
        )

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return self.base.to_dict()
        if self.kind == "rho":
            return {"kind": "rho", "k": 2, "rho": self.schedule.to_dict()}
        return {
            "kind": "tabulated",
            "k": self.k,
            "table": [m.to_dict() for m in self.table],
            "tail": self.tail.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureSeq":
        return measure_from_dict(d)

    def __eq__(self, other):
        return isinstance(other, MeasureSeq) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))

    def __repr__(self):
        if self.kind == "constant":
            return f"MeasureSeq.constant({self.base!r})"
        if self.kind == "rho":
            return f"MeasureSeq.rho_family({self.schedule!r})"
        return f"MeasureSeq.tabulated(<{len(self.table)} entries>, tail={self.tail!r})"


def limit(m: MeasureSeq) -> Measure:
    if m.kind == "constant":
        return m.base
    if m.kind == "rho":
        return rho_joint(m.schedule.limit())
    return m.tail


def _as_flat_word(m: MeasureSeq, w) -> np.ndarray:
    arr = np.asarray(w, dtype=np.int64)
    if m.is_joint and arr.ndim == 2:
        if arr.shape[1] != 2:
            raise DimensionError("pair words must have shape (n, 2)")
        return encode_pairs(arr[:, 0], arr[:, 1], m.k)
    return arr.reshape(-1)


def cylinder_prob(m: MeasureSeq, w) -> tuple[float, float]:
    """Probability of the cylinder of ``w`` and its base-2 logarithm.

    ``w`` is a flat-coded word, or for pair measures an ``(n, 2)`` array of
    pairs. The log is accumulated with ``math.fsum`` so long words keep a
    usable value after the linear probability underflows.
    """
    s = _as_flat_word(m, w)
    if s.size == 0:
        return 1.0, 0.0
    probs = m.symbol_probs(s)
    with np.errstate(divide="ignore"):
        logs = np.log2(probs)
    if np.any(np.isneginf(logs)):
        return 0.0, -math.inf
    log2p = math.fsum(logs.tolist())
    return math.prod(probs.tolist()), log2p


# -- JSON descriptions ---------------------------------------------------------

MEASURE_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["pmf", "joint", "rho", "tabulated"]},
        "k": {"type": "integer", "minimum": 2, "maximum": MAX_ALPHABET},
        "p": {"type": "array"},
        "rho": {
            "type": "object",
            "properties": {
                "family": {"enum": list(RHO_FAMILIES)},
                "rho": {"type": "number"},
                "offset": {"type": "number"},
                "rho0": {"type": "number"},
                "ratio": {"type": "number"},
                "values": {"type": "array", "items": {"type": "number"}},
                "tail": {"type": "number"},
            },
            "required": ["family"],
            "additionalProperties": False,
        },
        "table": {"type": "array", "items": {"type": "object"}},
        "tail": {"type": "object"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}


def pmf_from_dict(d: dict) -> Measure:
    if d.get("kind") == "pmf":
        return Pmf(d["p"])
    if d.get("kind") == "joint":
        p = np.asarray(d["p"], dtype=np.float64)
        if p.ndim == 1:
            k = d.get("k") or math.isqrt(p.size)
            p = p.reshape(k, k)
        return JointPmf(p)
    raise ValueError(f"expected a pmf or joint description, got kind={d.get('kind')!r}")


def measure_from_dict(d: dict) -> MeasureSeq:
    """Build a MeasureSeq from its JSON description (validated against MEASURE_SCHEMA)."""
    import jsonschema

    try:
        jsonschema.validate(d, MEASURE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValueError(f"invalid measure description: {exc.message}") from None
    kind = d["kind"]
    if kind in ("pmf", "joint"):
        m = pmf_from_dict(d)
        if "k" in d and d["k"] != m.k:
            raise DimensionError(f"declared k={d['k']} but p has alphabet size {m.k}")
        return MeasureSeq.constant(m)
    if kind == "rho":
        if "rho" not in d:
            raise ValueError("rho description needs a 'rho' schedule object")
        return MeasureSeq.rho_family(RhoSchedule.from_dict(d["rho"]))
    if "tail" not in d:
        raise ValueError("tabulated description needs a 'tail' entry")
    return MeasureSeq.tabulated(
        [pmf_from_dict(e) for e in d.get("table", [])], pmf_from_dict(d["tail"])
    )
