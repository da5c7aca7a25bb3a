"""Named, config-driven experiments with reproducible JSON reports.

Every experiment names the formula its target comes from; the value is
computed by the calculator code at run time.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

import mutualdim
from mutualdim.billingsley import EquivalenceProblem, equivalent_measure, normalizability_ratio_trace
from mutualdim.estimate import (
    CompressorMethod,
    KTCompressor,
    Plugin,
    dimension_estimate,
    geometric_schedule,
    likelihood_ratio_log,
    mi_density_trace,
)
from mutualdim.genseq import PRNG_NAME, PRNG_VERSION, freq_sequence, make_rng, sample_coupled
from mutualdim.info import cross_entropy, mutual_information, self_information
from mutualdim.measures import (
    MEASURE_SCHEMA,
    JointPmf,
    MeasureSeq,
    Pmf,
    measure_from_dict,
    product,
    uniform,
)

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "experiment": {"type": "string"},
        "measure": {"oneOf": [MEASURE_SCHEMA, {"type": "null"}]},
        "n_max": {"type": "integer", "minimum": 1},
        "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "estimator": {
            "type": "object",
            "properties": {
                "method": {"enum": ["plugin", "compressor"]},
                "block_len": {"type": "integer", "minimum": 1},
                "compressor": {"enum": ["kt"]},
            },
            "required": ["method"],
            "additionalProperties": False,
        },
        "params": {"type": "object"},
        "tolerance": {"type": ["number", "null"]},
        "outputs": {
            "type": "object",
            "properties": {"report": {"type": "string"}, "trace_dir": {"type": "string"}},
            "additionalProperties": False,
        },
        "workers": {"type": "integer", "minimum": 1},
    },
    "required": ["experiment", "n_max", "seeds"],
    "additionalProperties": False,
}


@dataclass
class ExperimentConfig:
    experiment: str
    n_max: int
    seeds: list
    measure: dict | None = None
    estimator: dict = field(default_factory=lambda: {"method": "plugin", "block_len": 4})
    params: dict = field(default_factory=dict)
    tolerance: float | None = None
    outputs: dict = field(default_factory=dict)
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        import jsonschema

        try:
            jsonschema.validate(d, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ValueError(f"invalid experiment config: {exc.message}") from None
        cfg = cls(**d)
        if cfg.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {cfg.experiment!r}; known: {sorted(EXPERIMENTS)}")
        return cfg

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def canonical(self) -> dict:
        """Everything that determines the primary outputs (paths and worker count excluded)."""
        d = asdict(self)
        d.pop("outputs")
        d.pop("workers")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class ExperimentReport:
    experiment: str
    seeds: list
    per_seed: list
    aggregate: dict
    target: dict
    passed: bool
    checks: dict
    provenance: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


# -- targets ------------------------------------------------------------------------


def _mi_over_log_k(m: MeasureSeq, **_) -> float:
    return mutual_information(m.limit()) / math.log2(m.k)


def _half_rho_sq_sum_over_ln2(m: MeasureSeq, n: int, **_) -> float:
    # leading-order expected log-likelihood ratio: I(rho) ~ rho^2 / (2 ln 2)
    rho = m.schedule.values(n)
    return math.fsum((rho * rho).tolist()) / (2.0 * math.log(2.0))


def _exact_mi_sum(m: MeasureSeq, n: int, **_) -> float:
    rho = m.schedule.values(n)
    p = (1.0 + rho) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return math.fsum((1.0 - h).tolist())


TARGET_FORMULAS = {
    "mutual_information_over_log_k": _mi_over_log_k,
    "half_rho_sq_sum_over_ln2": _half_rho_sq_sum_over_ln2,
    "exact_mi_sum": _exact_mi_sum,
}


# -- helpers ------------------------------------------------------------------------


def _method(cfg: ExperimentConfig):
    est = cfg.estimator
    if est["method"] == "plugin":
        return Plugin(int(est.get("block_len", 4)))
    return CompressorMethod(KTCompressor())


def _measure(cfg: ExperimentConfig, default: MeasureSeq) -> MeasureSeq:
    return measure_from_dict(cfg.measure) if cfg.measure else default


def _write_trace(cfg: ExperimentConfig, seed: int, trace, method):
    out_dir = cfg.outputs.get("trace_dir")
    if not out_dir:
        return
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{cfg.experiment}_seed{seed}.csv")
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["prefix_len", "density_raw", "density_clamped", "method", "block_len"])
        for row in trace.rows(method.name, method.block_len):
            wr.writerow([row[0], repr(row[1]), repr(row[2]), row[3], "" if row[4] is None else row[4]])


def _stats(xs) -> dict:
    arr = np.asarray(xs, dtype=np.float64)
    if arr.size == 0:
        return {"mean": None, "std": None, "n": 0}
    return {"mean": float(arr.mean()), "std": float(arr.std()), "n": int(arr.size)}


# -- per-seed workers -----------------------------------------------------------------


def _density_seed(cfg: ExperimentConfig, m: MeasureSeq, seed: int, with_lr: bool) -> dict:
    method = _method(cfg)
    cw = sample_coupled(m, cfg.n_max, seed)
    trace = mi_density_trace(cw.u, cw.w, geometric_schedule(cfg.n_max), method, m.k)
    _write_trace(cfg, seed, trace, method)
    lower, upper = dimension_estimate(trace)
    row = {
        "seed": seed,
        "density_raw": float(trace.values[-1]),
        "density_clamped": float(trace.clamped[-1]),
        "lower": lower,
        "upper": upper,
    }
    if with_lr:
        lr = likelihood_ratio_log(m, m.product_of_marginals(), cw)
        row["log2_lr"] = float(lr[-1]) if lr.size else 0.0
    return row


def _freq_seed(cfg: ExperimentConfig, seed: int) -> dict:
    rng = make_rng(seed, stream=1)
    ks = cfg.params.get("alphabet_sizes", [2, 3, 4])
    floor = float(cfg.params.get("beta_floor", 0.01))
    k = int(ks[rng.integers(len(ks))])
    alpha = Pmf(rng.dirichlet(np.ones(k)))
    b = floor + (1.0 - k * floor) * rng.dirichlet(np.ones(k))
    beta = Pmf(b / b.sum())
    word = freq_sequence(alpha, cfg.n_max)
    rate = self_information(beta, word) / cfg.n_max
    target = cross_entropy(alpha, beta)
    return {
        "seed": seed,
        "k": k,
        "alpha": alpha.p.tolist(),
        "beta": beta.p.tolist(),
        "rate": rate,
        "target": target,
        "error": abs(rate - target),
    }


def _run_seed(args):
    cfg, seed = args
    try:
        return _SEED_WORKERS[cfg.experiment](cfg, seed)
    except ValueError as exc:
        # capacity and input errors are reported per seed; remaining seeds still run
        return {"seed": seed, "error_message": f"{type(exc).__name__}: {exc}"}


def _coupled_seed(cfg, seed):
    return _density_seed(cfg, _measure(cfg, DEFAULT_COUPLED), seed, with_lr=False)


def _independent_seed(cfg, seed):
    return _density_seed(cfg, _independent_measure(cfg), seed, with_lr=False)


def _counterexample_seed(cfg, seed):
    return _density_seed(cfg, _measure(cfg, DEFAULT_COUNTEREXAMPLE), seed, with_lr=True)


_SEED_WORKERS = {
    "coupled-mdim": _coupled_seed,
    "independent-zero": _independent_seed,
    "zero-mdim-not-independent": _counterexample_seed,
    "freq-divergence": _freq_seed,
}

DEFAULT_COUPLED = MeasureSeq.constant(JointPmf([[0.375, 0.125], [0.125, 0.375]]))
DEFAULT_COUNTEREXAMPLE = measure_from_dict(
    {"kind": "rho", "k": 2, "rho": {"family": "inv_sqrt", "offset": 2.0}}
)


def _independent_measure(cfg: ExperimentConfig) -> MeasureSeq:
    if cfg.measure:
        return measure_from_dict(cfg.measure)
    a1 = Pmf(cfg.params.get("alpha1", [0.5, 0.5]))
    a2 = Pmf(cfg.params.get("alpha2", uniform(a1.k).p.tolist()))
    return MeasureSeq.constant(product(a1, a2))


def _map_seeds(cfg: ExperimentConfig) -> list:
    jobs = [(cfg, int(s)) for s in cfg.seeds]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            return list(ex.map(_run_seed, jobs))
    return [_run_seed(j) for j in jobs]


def _ok(rows):
    return [r for r in rows if "error_message" not in r]


# -- experiment bodies ------------------------------------------------------------------


def _coupled_mdim(cfg: ExperimentConfig, m: MeasureSeq):
    rows = _map_seeds(cfg)
    good = _ok(rows)
    tol = 0.01 if cfg.tolerance is None else cfg.tolerance
    spread_tol = float(cfg.params.get("spread_tol", 0.02))
    target = TARGET_FORMULAS["mutual_information_over_log_k"](m)
    agg = _stats([r["density_raw"] for r in good])
    spreads = [r["upper"] - r["lower"] for r in good]
    checks = {
        "all_seeds_ran": len(good) == len(rows),
        "mean_within_tolerance": agg["mean"] is not None and abs(agg["mean"] - target) <= tol,
        "lower_upper_agree": bool(spreads) and max(spreads) <= spread_tol,
    }
    agg["max_lower_upper_spread"] = max(spreads) if spreads else None
    return rows, agg, {"formula": "mutual_information_over_log_k", "value": target, "tolerance": tol}, checks


def _independent_zero(cfg: ExperimentConfig, m: MeasureSeq):
    rows = _map_seeds(cfg)
    good = _ok(rows)
    tol = 0.01 if cfg.tolerance is None else cfg.tolerance
    target = TARGET_FORMULAS["mutual_information_over_log_k"](m)
    agg = _stats([r["density_raw"] for r in good])
    checks = {
        "all_seeds_ran": len(good) == len(rows),
        "mean_at_most_target_plus_tol": agg["mean"] is not None and agg["mean"] <= target + tol,
    }
    return rows, agg, {"formula": "mutual_information_over_log_k", "value": target, "tolerance": tol}, checks


def _counterexample(cfg: ExperimentConfig, m: MeasureSeq):
    rows = _map_seeds(cfg)
    good = _ok(rows)
    tol = 0.01 if cfg.tolerance is None else cfg.tolerance
    min_pos = float(cfg.params.get("min_positive_fraction", 0.95))
    lr_rel = float(cfg.params.get("lr_relative_tolerance", 0.5))
    density_target = TARGET_FORMULAS["mutual_information_over_log_k"](m)
    lr_target = TARGET_FORMULAS["half_rho_sq_sum_over_ln2"](m, n=cfg.n_max)
    lrs = [r["log2_lr"] for r in good]
    agg = _stats([r["density_raw"] for r in good])
    agg["log2_lr"] = _stats(lrs)
    agg["log2_lr_positive"] = sum(1 for x in lrs if x > 0)
    frac = agg["log2_lr_positive"] / len(rows)
    checks = {
        "all_seeds_ran": len(good) == len(rows),
        "density_mean_small": agg["mean"] is not None and agg["mean"] <= density_target + tol,
        "lr_positive_fraction": frac >= min_pos,
        "lr_mean_near_target": bool(lrs) and abs(agg["log2_lr"]["mean"] - lr_target) <= lr_rel * lr_target,
    }
    target = {
        "formula": "mutual_information_over_log_k",
        "value": density_target,
        "tolerance": tol,
        "log2_lr_formula": "half_rho_sq_sum_over_ln2",
        "log2_lr_value": lr_target,
        "log2_lr_exact_mi_sum": TARGET_FORMULAS["exact_mi_sum"](m, n=cfg.n_max),
        "log2_lr_relative_tolerance": lr_rel,
        "min_positive_fraction": min_pos,
    }
    return rows, agg, target, checks


def _freq_divergence(cfg: ExperimentConfig, m=None):
    rows = _map_seeds(cfg)
    good = _ok(rows)
    tol = 1e-3 if cfg.tolerance is None else cfg.tolerance
    errors = [r["error"] for r in good]
    agg = _stats(errors)
    agg["max_error"] = max(errors) if errors else None
    checks = {
        "all_seeds_ran": len(good) == len(rows),
        "all_within_tolerance": bool(errors) and max(errors) <= tol,
    }
    return rows, agg, {"formula": "cross_entropy", "value": None, "tolerance": tol}, checks


def _normalizability(cfg: ExperimentConfig, m=None):
    p = cfg.params
    tol = 1e-3 if cfg.tolerance is None else cfg.tolerance
    gap = float(p.get("control_gap", 0.05))
    b1 = Pmf(p.get("beta1", [0.5, 0.5]))
    b2 = Pmf(p.get("beta2", [0.25, 0.75]))
    a1 = Pmf(p.get("alpha1", [0.5, 0.5]))
    a2 = equivalent_measure(EquivalenceProblem(a1, b1, b2))
    sched = geometric_schedule(cfg.n_max)
    trace = normalizability_ratio_trace(
        freq_sequence(a1, cfg.n_max), freq_sequence(a2, cfg.n_max), b1, b2, sched
    )
    ctrl = p.get("control", {"alpha1": [0.9, 0.1], "alpha2": [0.9, 0.1], "beta1": [0.4, 0.6], "beta2": [0.2, 0.8]})
    c1, c2, cb1, cb2 = (Pmf(ctrl[key]) for key in ("alpha1", "alpha2", "beta1", "beta2"))
    ctrace = normalizability_ratio_trace(
        freq_sequence(c1, cfg.n_max), freq_sequence(c2, cfg.n_max), cb1, cb2, sched
    )
    final, cfinal = float(trace.values[-1]), float(ctrace.values[-1])
    rows = [
        {
            "alpha1": a1.p.tolist(),
            "alpha2": a2.p.tolist(),
            "final_ratio": final,
            "control_final_ratio": cfinal,
            "control_limit": cross_entropy(c1, cb1) / cross_entropy(c2, cb2),
        }
    ]
    agg = {"final_ratio": final, "control_final_ratio": cfinal}
    checks = {
        "ratio_near_one": abs(final - 1.0) <= tol,
        "control_bounded_away": abs(cfinal - 1.0) >= gap,
    }
    return rows, agg, {"formula": "unit_ratio", "value": 1.0, "tolerance": tol, "control_gap": gap}, checks


EXPERIMENTS = {
    "coupled-mdim": (_coupled_mdim, lambda cfg: _measure(cfg, DEFAULT_COUPLED)),
    "independent-zero": (_independent_zero, _independent_measure),
    "zero-mdim-not-independent": (_counterexample, lambda cfg: _measure(cfg, DEFAULT_COUNTEREXAMPLE)),
    "freq-divergence": (_freq_divergence, lambda cfg: None),
    "normalizability": (_normalizability, lambda cfg: None),
}
# names used by published configs
ALIASES = {
    "theorem-3.5": "coupled-mdim",
    "corollary-3.9-independent": "independent-zero",
    "corollary-3.14-counterexample": "zero-mdim-not-independent",
}
for _alias, _name in ALIASES.items():
    EXPERIMENTS[_alias] = EXPERIMENTS[_name]
    if _name in _SEED_WORKERS:
        _SEED_WORKERS[_alias] = _SEED_WORKERS[_name]


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    body, measure_of = EXPERIMENTS[cfg.experiment]
    m = measure_of(cfg)
    rows, agg, target, checks = body(cfg, m)
    report = ExperimentReport(
        experiment=cfg.experiment,
        seeds=[int(s) for s in cfg.seeds],
        per_seed=rows,
        aggregate=agg,
        target=target,
        passed=all(checks.values()),
        checks=checks,
        provenance={
            "version": mutualdim.__version__,
            "prng": PRNG_NAME,
            "prng_version": PRNG_VERSION,
            "config_hash": cfg.config_hash(),
            "measure": m.to_dict() if m is not None else None,
            "estimator": cfg.estimator,
            "n_max": cfg.n_max,
        },
    )
    path = cfg.outputs.get("report")
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(report.to_json())
    return report
