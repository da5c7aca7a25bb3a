"""Acceptance criteria, one test each. Every test logs a PASS/FAIL line that is
printed in the terminal summary."""

import math
import os
import time

import numpy as np
import pytest

import oracles
from mutualdim import billingsley, info, kakutani
from mutualdim.billingsley import EquivalenceProblem, equivalent_measure, f_map
from mutualdim.estimate import Plugin, geometric_schedule, mi_density_trace, plugin_entropy_rate
from mutualdim.experiments import ExperimentConfig, run_experiment
from mutualdim.genseq import sample_coupled, sample_word
from mutualdim.measures import JointPmf, MeasureSeq, Pmf, product, rho_joint, uniform

WORKERS = max(1, min(8, os.cpu_count() or 1))


def record(log, num, ok, detail):
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    log.append(line)
    print(line)
    assert ok, line


def rho_measure(rho):
    return {"kind": "rho", "k": 2, "rho": {"family": "const", "rho": rho}}


def one_minus_h(p):
    return float(1 - oracles.entropy([p, 1 - p]))


# -- 1 -----------------------------------------------------------------------------


def _random_pmf(rng, k, zeros=False):
    p = rng.dirichlet(np.ones(k))
    if zeros and rng.random() < 0.3:
        p[rng.integers(k)] = 0.0
        p = p / p.sum()
    return Pmf(p)


def _random_condition(rng, cid):
    lo = rng.uniform(1e-3, 0.5 - 1e-3)
    inner = rng.uniform(1e-4, lo)
    b = lambda x: Pmf([x, 1 - x])
    return {
        1: (b(1 - lo), b(inner)),
        2: (b(lo), b(1 - inner)),
        3: (b(lo), b(inner)),
        4: (b(1 - lo), b(1 - inner)),
        5: (uniform(2), b(rng.uniform(0.01, 0.49) if rng.random() < 0.5 else rng.uniform(0.51, 0.99))),
    }[cid]


def test_criterion_01_calculators_match_oracle(acceptance_log):
    rng = np.random.default_rng(2024)
    n = 1000
    worst = {}
    t0 = time.perf_counter()

    def err(name, got, ref):
        e = abs(got - float(ref))
        worst[name] = max(worst.get(name, 0.0), e)

    for _ in range(n):
        k = int(rng.integers(2, 9))
        a, b = _random_pmf(rng, k, zeros=True), _random_pmf(rng, k)
        err("entropy", info.entropy(a), oracles.entropy(a.p))
        err("kl", info.kl_divergence(a, b), oracles.kl(a.p, b.p))
        err("cross_entropy", info.cross_entropy(a, b), oracles.cross_entropy(a.p, b.p))
        err("hellinger", info.hellinger(a, b), oracles.hellinger(a.p, b.p))

        kj = int(rng.integers(2, 5))
        j = JointPmf(rng.dirichlet(np.ones(kj * kj)).reshape(kj, kj))
        err("mutual_information", info.mutual_information(j), oracles.mutual_information(j.p))

        rho = float(rng.uniform(-1, 1))
        err("hellinger_sq_coupled", kakutani.hellinger_sq_coupled(rho), oracles.hellinger_sq_coupled(rho))

        cid = int(rng.integers(1, 6))
        b1, b2 = _random_condition(rng, cid)
        x = float(rng.uniform())
        a1 = Pmf([x, 1 - x])
        a2 = equivalent_measure(EquivalenceProblem(a1, b1, b2))
        err("equivalent_measure", a2.p[0], oracles.f_map(x, b1.p, b2.p))

        # a coupling of (a1, a2): mixture of the product and the comonotone coupling
        lo = min(a1.p[0], a2.p[0])
        como = np.array([[lo, a1.p[0] - lo], [a2.p[0] - lo, 1 - a1.p[0] - a2.p[0] + lo]])
        mix = float(rng.uniform())
        jm = JointPmf(np.clip((1 - mix) * product(a1, a2).p + mix * como, 0.0, 1.0))
        err("billingsley_mdim", billingsley.billingsley_mdim(jm, b1, b2), oracles.billingsley_mdim(jm.p, b1.p))

    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-9 for v in worst.values()) and elapsed < 10.0
    top = max(worst, key=worst.get)
    record(acceptance_log, 1, ok, f"{n} inputs x {len(worst)} calculators, worst {top} {worst[top]:.2e}, {elapsed:.1f}s")


# -- 2 -----------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_02_coupled_density(acceptance_log):
    t0 = time.perf_counter()
    parts, ok = [], True
    for rho in (0.25, 0.5, 0.8):
        target = one_minus_h((1 + rho) / 2)
        cfg = ExperimentConfig.from_dict(
            {"experiment": "coupled-mdim", "measure": rho_measure(rho), "n_max": 10**6,
             "seeds": list(range(10)), "estimator": {"method": "plugin", "block_len": 4}, "workers": WORKERS}
        )
        r = run_experiment(cfg)
        mean = r.aggregate["mean"]
        spread = r.aggregate["max_lower_upper_spread"]
        good = abs(mean - target) <= 0.01 and spread <= 0.02 and abs(r.target["value"] - target) < 1e-12
        ok &= good
        parts.append(f"rho={rho}: mean {mean:.4f} vs {target:.6f}, spread {spread:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60.0
    record(acceptance_log, 2, ok, "; ".join(parts) + f"; {elapsed:.1f}s")


# -- 3 -----------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_03_convergent_family(acceptance_log):
    target = one_minus_h(0.65)
    assert target == pytest.approx(0.065932, abs=5e-7)
    # rho_n = 0.3 + 0.3 / sqrt(n + 1) for n < 10^4, then 0.3 exactly
    table = [rho_joint(0.3 + 0.3 / math.sqrt(i + 1)) for i in range(10_000)]
    m = MeasureSeq.tabulated(table, rho_joint(0.3))
    n = 10**6
    sched = geometric_schedule(n)
    vals = []
    for seed in range(10):
        cw = sample_coupled(m, n, seed)
        vals.append(float(mi_density_trace(cw.u, cw.w, sched, Plugin(4)).values[-1]))
    worst = max(abs(v - target) for v in vals)
    record(acceptance_log, 3, worst <= 0.015, f"10 seeds, worst |density - {target:.6f}| = {worst:.4f}")


# -- 4 -----------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_04_independent_pair(acceptance_log):
    cfg = ExperimentConfig.from_dict(
        {"experiment": "independent-zero", "n_max": 10**6, "seeds": list(range(10)), "workers": WORKERS}
    )
    r = run_experiment(cfg)
    mean = r.aggregate["mean"]
    record(acceptance_log, 4, mean <= 0.01 and r.passed, f"mean density {mean:.2e}")


# -- 5 -----------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_05_zero_density_but_dependent(acceptance_log):
    t0 = time.perf_counter()
    cfg = ExperimentConfig.from_dict(
        {"experiment": "zero-mdim-not-independent", "n_max": 10**6, "seeds": list(range(100)), "workers": WORKERS}
    )
    r = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    mean = r.aggregate["mean"]
    lr = r.aggregate["log2_lr"]["mean"]
    pos = r.aggregate["log2_lr_positive"]
    stated = 9.96
    computed = r.target["log2_lr_value"]
    ok = (
        mean <= 0.01
        and pos >= 95
        and abs(lr - stated) <= 0.5 * stated
        and abs(lr - computed) <= 0.5 * computed
        and elapsed < 300
    )
    record(
        acceptance_log, 5, ok,
        f"density mean {mean:.2e}, LR>0 in {pos}/100, LR mean {lr:.2f} bits (targets {stated} stated, {computed:.2f} computed), {elapsed:.0f}s",
    )


# -- 6 -----------------------------------------------------------------------------


def test_criterion_06_biased_coin_entropy_rate(acceptance_log):
    target = float(oracles.entropy([0.75, 0.25]))
    assert target == pytest.approx(0.811278, abs=5e-7)
    w = sample_word(MeasureSeq.constant(Pmf([0.75, 0.25])), 10**6, seed=0)
    h = plugin_entropy_rate(w, 4)
    record(acceptance_log, 6, abs(h - target) <= 0.01, f"rate {h:.5f} vs {target:.6f}")


# -- 7 -----------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_07_frequency_divergence(acceptance_log):
    cfg = ExperimentConfig.from_dict(
        {"experiment": "freq-divergence", "n_max": 10**5, "seeds": list(range(100)), "workers": WORKERS}
    )
    r = run_experiment(cfg)
    worst = r.aggregate["max_error"]
    record(acceptance_log, 7, r.passed and worst <= 1e-3 and len(r.per_seed) == 100, f"100 pairs, worst error {worst:.2e}")


# -- 8 -----------------------------------------------------------------------------


def test_criterion_08_normalizability(acceptance_log):
    cfg = ExperimentConfig.from_dict({"experiment": "normalizability", "n_max": 10**5, "seeds": [0]})
    r = run_experiment(cfg)
    ratio, control = r.aggregate["final_ratio"], r.aggregate["control_final_ratio"]
    ok = abs(ratio - 1) <= 1e-3 and abs(control - 1) >= 0.05
    record(acceptance_log, 8, ok, f"ratio {ratio:.7f}, control {control:.4f}")


# -- 9 -----------------------------------------------------------------------------


def _sample_betas(rng, cid, size):
    lo = rng.uniform(0, 0.5, size)
    inner = rng.uniform(0, 1, size) * lo
    if cid == 1:
        return 1 - lo, inner
    if cid == 2:
        return lo, 1 - inner
    if cid == 3:
        return lo, inner
    if cid == 4:
        return 1 - lo, 1 - inner
    b20 = rng.uniform(0, 1, size)
    return np.full(size, 0.5), b20


def test_criterion_09_f_maps_into_open_interval(acceptance_log):
    rng = np.random.default_rng(9)
    xs = np.linspace(0.0, 1.0, 1000)
    violations, checked, skipped = 0, 0, 0
    for cid in range(1, 6):
        b10s, b20s = _sample_betas(rng, cid, 10_000)
        for b10, b20 in zip(b10s.tolist(), b20s.tolist()):
            b1, b2 = Pmf([b10, 1 - b10]), Pmf([b20, 1 - b20])
            if b10 in (0.0, 1.0) or b20 in (0.0, 1.0) or billingsley.check_conditions(b1, b2) != cid:
                skipped += 1
                continue
            f = f_map(xs, b1, b2)
            violations += int(np.count_nonzero((f <= 0.0) | (f >= 1.0)))
            checked += 1
    ok = violations == 0 and skipped == 0
    record(acceptance_log, 9, ok, f"{checked} beta pairs x {xs.size} points, {violations} violations, {skipped} rejected samples")


# -- 10 ----------------------------------------------------------------------------


def test_criterion_10_closed_form_matches_generic_hellinger(acceptance_log):
    rhos = np.linspace(-1.0, 1.0, 1000)
    ind = product(uniform(2), uniform(2))
    worst = max(
        abs(kakutani.hellinger_sq_coupled(r) - info.hellinger(ind, rho_joint(r)) ** 2) for r in rhos.tolist()
    )
    record(acceptance_log, 10, worst < 1e-12, f"1000 rho values, worst difference {worst:.2e}")


# -- 11 ----------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["coupled-mdim", "independent-zero", "zero-mdim-not-independent", "freq-divergence", "normalizability"])
def test_criterion_11_report_determinism(name, tmp_path, acceptance_log):
    blobs, hashes = [], set()
    for i, workers in enumerate((1, 2, 1)):
        path = tmp_path / f"r{i}.json"
        cfg = ExperimentConfig.from_dict(
            {"experiment": name, "n_max": 100_000, "seeds": [0, 1, 2], "workers": workers,
             "outputs": {"report": str(path)}}
        )
        run_experiment(cfg)
        blobs.append(path.read_bytes())
        hashes.add(cfg.config_hash())
    ok = len(hashes) == 1 and all(b == blobs[0] for b in blobs)
    record(acceptance_log, 11, ok, f"{name}: 3 runs, byte-identical reports")
