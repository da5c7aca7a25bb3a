"""Command-line entry point: ``mutualdim <subcommand> ...``.

Exit codes: 0 success, 1 experiment FAIL, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from mutualdim import billingsley, estimate, info, kakutani
from mutualdim.errors import UnclassifiableError
from mutualdim.experiments import ExperimentConfig, run_experiment
from mutualdim.genseq import provenance, sample_coupled, sample_word
from mutualdim.measures import (
    JointPmf,
    MeasureSeq,
    Pmf,
    RhoSchedule,
    measure_from_dict,
    rho_joint,
)


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _pmf(text: str) -> Pmf:
    return Pmf(_floats(text))


def _word(text: str) -> list[int]:
    text = text.strip()
    if "," in text:
        return [int(x) for x in text.split(",")]
    return [int(c) for c in text]


def _json_value(x: float):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _joint_from_args(args) -> JointPmf:
    if getattr(args, "rho", None) is not None:
        return rho_joint(args.rho)
    if getattr(args, "joint", None):
        vals = _floats(args.joint)
        k = math.isqrt(len(vals))
        if k * k != len(vals):
            raise UsageError("--joint needs k*k comma-separated entries (row-major)")
        return JointPmf(np.reshape(vals, (k, k)))
    raise UsageError("give --rho or --joint")


def _measure_from_args(args) -> MeasureSeq:
    if getattr(args, "measure", None):
        with open(args.measure) as fh:
            return measure_from_dict(json.load(fh))
    if getattr(args, "rho_const", None) is not None:
        return MeasureSeq.rho_family(RhoSchedule.const(args.rho_const))
    if getattr(args, "rho_inv_sqrt", None) is not None:
        return MeasureSeq.rho_family(RhoSchedule.inv_sqrt(args.rho_inv_sqrt))
    if getattr(args, "joint", None):
        return MeasureSeq.constant(_joint_from_args(args))
    if getattr(args, "pmf", None):
        return MeasureSeq.constant(_pmf(args.pmf))
    raise UsageError("give --measure FILE, --rho-const, --rho-inv-sqrt, --joint or --pmf")


# -- calc ---------------------------------------------------------------------------

BITS, DIMLESS = "bits", "dimensionless"


def cmd_calc(args) -> int:
    q = args.quantity
    inputs = {k: v for k, v in vars(args).items() if k not in ("func", "quantity", "command") and v is not None}
    units = BITS
    if q == "entropy":
        value = info.entropy(_pmf(args.pmf))
    elif q == "mi":
        value = info.mutual_information(_joint_from_args(args))
    elif q == "kl":
        value = info.kl_divergence(_pmf(args.pmf), _pmf(args.pmf2))
    elif q == "cross-entropy":
        value = info.cross_entropy(_pmf(args.pmf), _pmf(args.pmf2))
    elif q == "self-information":
        value = info.self_information(_pmf(args.pmf), _word(args.word or ""))
    elif q == "pmi":
        m = MeasureSeq.constant(_joint_from_args(args))
        value = info.pointwise_mi(m, _word(args.u or ""), _word(args.w or ""))
    elif q == "hellinger":
        value, units = info.hellinger(_pmf(args.pmf), _pmf(args.pmf2)), DIMLESS
    elif q == "hellinger2-coupled":
        if args.rho is None:
            raise UsageError("hellinger2-coupled needs --rho")
        value, units = kakutani.hellinger_sq_coupled(args.rho), DIMLESS
    elif q == "billingsley-mdim":
        value = billingsley.billingsley_mdim(_joint_from_args(args), _pmf(args.beta1), _pmf(args.beta2))
        units = DIMLESS
    elif q == "f-map":
        if args.x is None:
            raise UsageError("f-map needs --x")
        value = billingsley.f_map(args.x, _pmf(args.beta1), _pmf(args.beta2))
        units = DIMLESS
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown quantity {q}")
    _emit({"quantity": q, "value_bits": _json_value(float(value)), "units": units, "inputs": inputs})
    return 0


# -- generate -------------------------------------------------------------------------


def cmd_generate(args) -> int:
    m = _measure_from_args(args)
    if args.n < 0:
        raise UsageError("-n must be non-negative")
    if m.is_joint:
        cw = sample_coupled(m, args.n, args.seed)
        u, w = cw.u, cw.w
    else:
        u, w = sample_word(m, args.n, args.seed), None
    fmt = args.format or ("pairs" if w is not None else "digits")
    if fmt == "bytes":
        data = u.astype(np.uint8).tobytes() if w is None else cw.pairs.astype(np.uint16).tobytes()
    elif fmt == "digits":
        lines = [" ".join(map(str, u.tolist()))]
        if w is not None:
            lines.append(" ".join(map(str, w.tolist())))
        data = ("\n".join(lines) + "\n").encode()
    elif fmt == "pairs":
        if w is None:
            raise UsageError("pairs format needs a measure over pairs")
        data = "".join(f"{a} {b}\n" for a, b in zip(u.tolist(), w.tolist())).encode()
    else:
        raise UsageError(f"unknown format {fmt}")
    prov = provenance(m, args.seed, args.n)
    prov["format"] = fmt
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
        with open(args.output + ".provenance.json", "w") as fh:
            fh.write(json.dumps(prov, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.buffer.write(data)
    return 0


# -- estimate --------------------------------------------------------------------------


def _read_pairs(path: str) -> tuple[np.ndarray, np.ndarray]:
    arr = np.loadtxt(path, dtype=np.int64, ndmin=2)
    if arr.shape[1] != 2:
        raise UsageError(f"{path}: expected two columns (u w)")
    return arr[:, 0], arr[:, 1]


def _read_word(path: str) -> np.ndarray:
    with open(path) as fh:
        text = fh.read().split()
    if len(text) == 1:
        return np.asarray(_word(text[0]), dtype=np.int64)
    return np.asarray([int(x) for x in text], dtype=np.int64)


def cmd_estimate(args) -> int:
    if args.input:
        u, w = _read_pairs(args.input)
    elif args.u and args.w:
        u, w = _read_word(args.u), _read_word(args.w)
    elif args.u and args.quantity == "entropy-rate":
        u, w = _read_word(args.u), None
    else:
        raise UsageError("give --input PAIRS or --u/--w word files")
    if args.method == "plugin":
        method = estimate.Plugin(args.block_len)
    else:
        method = estimate.CompressorMethod(estimate.KTCompressor())
    sched = estimate.geometric_schedule(len(u), n0=min(args.n0, len(u)))
    if args.quantity == "entropy-rate":
        trace = estimate.entropy_rate_trace(u, sched, args.block_len, args.k)
    else:
        trace = estimate.mi_density_trace(u, w, sched, method, args.k)
    rows = trace.rows(method.name, method.block_len)
    if args.json:
        lower, upper = estimate.dimension_estimate(trace) if len(trace) >= 4 else (None, None)
        keys = ("prefix_len", "density_raw", "density_clamped", "method", "block_len")
        _emit({"trace": [dict(zip(keys, r)) for r in rows], "lower": lower, "upper": upper})
    else:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["prefix_len", "density_raw", "density_clamped", "method", "block_len"])
        for r in rows:
            wr.writerow([r[0], repr(r[1]), repr(r[2]), r[3], "" if r[4] is None else r[4]])
        sys.stdout.write(buf.getvalue())
    return 0


# -- solve-equivalence / billingsley / kakutani -----------------------------------------------


def cmd_solve_equivalence(args) -> int:
    b1, b2 = _pmf(args.beta1), _pmf(args.beta2)
    prob = billingsley.EquivalenceProblem(_pmf(args.alpha1), b1, b2)
    a2 = billingsley.equivalent_measure(prob)
    _emit(
        {
            "alpha1": prob.alpha1.p.tolist(),
            "alpha2": a2.p.tolist(),
            "beta1": b1.p.tolist(),
            "beta2": b2.p.tolist(),
            "condition": billingsley.check_conditions(b1, b2),
            "cross_entropy_bits": info.cross_entropy(prob.alpha1, b1),
        }
    )
    return 0


def cmd_billingsley(args) -> int:
    j = _joint_from_args(args)
    b1, b2 = _pmf(args.beta1), _pmf(args.beta2)
    _emit(
        {
            "quantity": "billingsley-mdim",
            "value": billingsley.billingsley_mdim(j, b1, b2),
            "joint": j.p.tolist(),
            "beta1": b1.p.tolist(),
            "beta2": b2.p.tolist(),
        }
    )
    return 0


def _schedule_from_args(args) -> RhoSchedule:
    f = args.family
    if f == "const":
        return RhoSchedule.const(args.rho if args.rho is not None else 0.0)
    if f == "inv_sqrt":
        return RhoSchedule.inv_sqrt(args.offset if args.offset is not None else 2.0)
    if f == "harmonic":
        return RhoSchedule.harmonic(args.offset if args.offset is not None else 1.0)
    if f == "geometric":
        if args.rho is None or args.ratio is None:
            raise UsageError("geometric needs --rho (rho0) and --ratio")
        return RhoSchedule.geometric(args.rho, args.ratio)
    if args.values is None:
        raise UnclassifiableError("explicit schedule needs --values and --tail")
    if args.tail is None:
        raise UnclassifiableError("explicit schedule without a tail constant cannot be classified")
    return RhoSchedule.explicit(_floats(args.values), args.tail)


def cmd_kakutani(args) -> int:
    sched = _schedule_from_args(args)
    if args.action == "classify":
        verdict = kakutani.classify_schedule(sched, N=args.N)
        out = verdict.to_dict()
        out["schedule"] = sched.to_dict()
        _emit(out)
        sums = verdict.partial_sums
    else:
        sums = kakutani.hellinger_partial_sums(sched, args.N)
        _emit({"schedule": sched.to_dict(), "n_terms": args.N, "last_partial_sum": float(sums[-1])})
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["n", "partial_sum"])
            for i, s in enumerate(sums.tolist()):
                wr.writerow([i, repr(s)])
    return 0


# -- experiment ---------------------------------------------------------------------------


def cmd_experiment(args) -> int:
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
    else:
        if not args.name:
            raise UsageError("give --config FILE or an experiment name")
        d = {"experiment": args.name, "n_max": args.n_max, "seeds": list(range(args.seeds))}
    if args.report:
        d.setdefault("outputs", {})["report"] = args.report
    if args.trace_dir:
        d.setdefault("outputs", {})["trace_dir"] = args.trace_dir
    if args.workers:
        d["workers"] = args.workers
    cfg = ExperimentConfig.from_dict(d)
    report = run_experiment(cfg)
    if not cfg.outputs.get("report"):
        sys.stdout.write(report.to_json())
    status = "PASS" if report.passed else "FAIL"
    sys.stderr.write(f"{cfg.experiment}: {status}\n")
    return 0 if report.passed else 1


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mutualdim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("calc", help="exact information quantities")
    c.add_argument(
        "quantity",
        choices=[
            "entropy", "mi", "kl", "cross-entropy", "self-information", "pmi",
            "hellinger", "hellinger2-coupled", "billingsley-mdim", "f-map",
        ],
    )
    c.add_argument("--pmf")
    c.add_argument("--pmf2")
    c.add_argument("--rho", type=float)
    c.add_argument("--joint", help="row-major k*k entries")
    c.add_argument("--word")
    c.add_argument("--u")
    c.add_argument("--w")
    c.add_argument("--beta1")
    c.add_argument("--beta2")
    c.add_argument("--x", type=float)
    c.set_defaults(func=cmd_calc)

    g = sub.add_parser("generate", help="sample coupled or single words")
    g.add_argument("--measure", help="measure JSON file")
    g.add_argument("--rho-const", type=float)
    g.add_argument("--rho-inv-sqrt", type=float, metavar="OFFSET")
    g.add_argument("--joint")
    g.add_argument("--pmf")
    g.add_argument("-n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=["bytes", "digits", "pairs"])
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("estimate", help="information-density traces")
    e.add_argument("--input", help="two-column pair file from `generate --format pairs`")
    e.add_argument("--u")
    e.add_argument("--w")
    e.add_argument("--quantity", choices=["mi", "entropy-rate"], default="mi")
    e.add_argument("--method", choices=["plugin", "compressor"], default="plugin")
    e.add_argument("--block-len", type=int, default=4)
    e.add_argument("-k", type=int, default=2)
    e.add_argument("--n0", type=int, default=1024)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("solve-equivalence", help="binary (beta1, beta2)-equivalence solver")
    s.add_argument("--alpha1", required=True)
    s.add_argument("--beta1", required=True)
    s.add_argument("--beta2", required=True)
    s.set_defaults(func=cmd_solve_equivalence)

    b = sub.add_parser("billingsley", help="mutual divergence formula")
    b.add_argument("--rho", type=float)
    b.add_argument("--joint")
    b.add_argument("--beta1", required=True)
    b.add_argument("--beta2", required=True)
    b.set_defaults(func=cmd_billingsley)

    k = sub.add_parser("kakutani", help="Hellinger-sum dichotomy for rho schedules")
    k.add_argument("action", choices=["classify", "sums"])
    k.add_argument("--family", choices=["const", "inv_sqrt", "harmonic", "geometric", "explicit"], required=True)
    k.add_argument("--rho", type=float)
    k.add_argument("--offset", type=float)
    k.add_argument("--ratio", type=float)
    k.add_argument("--values")
    k.add_argument("--tail", type=float)
    k.add_argument("-N", type=int, default=10_000)
    k.add_argument("--csv")
    k.set_defaults(func=cmd_kakutani)

    x = sub.add_parser("experiment", help="run a named experiment")
    x.add_argument("name", nargs="?")
    x.add_argument("--config")
    x.add_argument("--n-max", type=int, default=1_000_000)
    x.add_argument("--seeds", type=int, default=10, help="number of seeds 0..S-1 (flag mode)")
    x.add_argument("--report")
    x.add_argument("--trace-dir")
    x.add_argument("--workers", type=int)
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValueError, ZeroDivisionError, OSError) as exc:
        sys.stderr.write(f"mutualdim {args.command}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
