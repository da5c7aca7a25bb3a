import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mutualdim.billingsley import (
    EquivalenceProblem,
    billingsley_mdim,
    check_conditions,
    equivalent_measure,
    f_map,
    is_equivalent,
    normalizability_ratio_trace,
)
from mutualdim.errors import NoSolutionError, NotNormalizableError, UnsupportedAlphabetError
from mutualdim.estimate import geometric_schedule
from mutualdim.genseq import freq_sequence
from mutualdim.info import cross_entropy
from mutualdim.measures import Pmf, product, rho_joint, uniform

B1, B2 = Pmf([0.4, 0.6]), Pmf([0.2, 0.8])
Q = Pmf([0.25, 0.75])


def binary(p0):
    return Pmf([p0, 1.0 - p0])


class TestConditions:
    def test_examples(self):
        assert check_conditions(B1, B2) == 3
        assert check_conditions(uniform(2), Q) == 5
        assert check_conditions(uniform(2), uniform(2)) is None

    @pytest.mark.parametrize(
        "b1,b2,cid",
        [
            ([0.6, 0.4], [0.2, 0.8], 1),
            ([0.4, 0.6], [0.8, 0.2], 2),
            ([0.4, 0.6], [0.2, 0.8], 3),
            ([0.6, 0.4], [0.8, 0.2], 4),
            ([0.5, 0.5], [0.9, 0.1], 5),
            ([0.3, 0.7], [0.3, 0.7], None),
            ([0.1, 0.9], [0.2, 0.8], None),
        ],
    )
    def test_each_condition(self, b1, b2, cid):
        assert check_conditions(Pmf(b1), Pmf(b2)) == cid

    def test_non_binary(self):
        with pytest.raises(UnsupportedAlphabetError):
            check_conditions(uniform(3), uniform(3))


class TestFMap:
    def test_condition_five_is_flat(self):
        xs = np.linspace(0, 1, 11)
        np.testing.assert_allclose(f_map(xs, uniform(2), Q), 0.3690702464285426, atol=1e-15)

    def test_condition_three_endpoints(self):
        assert f_map(0.0, B1, B2) == pytest.approx(0.2075187496394219, abs=1e-15)
        assert f_map(1.0, B1, B2) == pytest.approx(0.5, abs=1e-15)

    def test_uniform_beta2(self):
        with pytest.raises(ZeroDivisionError):
            f_map(0.3, B1, uniform(2))

    @given(st.floats(0, 1))
    def test_against_oracle(self, x):
        assert f_map(x, B1, B2) == pytest.approx(float(oracles.f_map(x, B1.p, B2.p)), abs=1e-12)


class TestEquivalentMeasure:
    def test_condition_five(self):
        for a in ([0.5, 0.5], [0.0, 1.0], [0.9, 0.1]):
            a2 = equivalent_measure(EquivalenceProblem(Pmf(a), uniform(2), Q))
            np.testing.assert_allclose(a2.p, [0.3690702464285426, 0.6309297535714574], atol=1e-15)
            assert cross_entropy(a2, Q) == pytest.approx(1.0, abs=1e-12)

    def test_condition_three_endpoints(self):
        # alpha1(0) = 0 selects f(0); alpha1(0) = 1 selects f(1)
        a2 = equivalent_measure(EquivalenceProblem(Pmf([0.0, 1.0]), B1, B2))
        np.testing.assert_allclose(a2.p, [0.2075187496394219, 0.7924812503605781], atol=1e-15)
        a2 = equivalent_measure(EquivalenceProblem(Pmf([1.0, 0.0]), B1, B2))
        np.testing.assert_allclose(a2.p, [0.5, 0.5], atol=1e-15)

    def test_no_solution(self):
        with pytest.raises(NoSolutionError):
            equivalent_measure(EquivalenceProblem(uniform(2), Pmf([0.3, 0.7]), Pmf([0.3, 0.7])))

    def test_problem_validation(self):
        with pytest.raises(UnsupportedAlphabetError):
            EquivalenceProblem(uniform(3), uniform(2), Q)
        with pytest.raises(ValueError):
            EquivalenceProblem(uniform(2), Pmf([1.0, 0.0]), Q)


def sample_condition(cid, rng):
    """Random (beta1, beta2) satisfying condition ``cid``."""
    lo = rng.uniform(1e-6, 0.5 - 1e-6)
    inner = rng.uniform(1e-9, lo)
    if cid == 1:
        return binary(1 - lo), binary(inner)
    if cid == 2:
        return binary(lo), binary(1 - inner)
    if cid == 3:
        return binary(lo), binary(inner)
    if cid == 4:
        return binary(1 - lo), binary(1 - inner)
    b20 = rng.uniform(1e-6, 1 - 1e-6)
    return uniform(2), binary(b20)


class TestRoundTrip:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 2**32), st.floats(0, 1))
    def test_solver_round_trip(self, cid, seed, x):
        b1, b2 = sample_condition(cid, np.random.default_rng(seed))
        assert check_conditions(b1, b2) == cid
        a1 = binary(x)
        a2 = equivalent_measure(EquivalenceProblem(a1, b1, b2))
        assert is_equivalent(a1, a2, b1, b2)

    @pytest.mark.parametrize("cid", [1, 2, 3, 4, 5])
    def test_uniqueness_on_grid(self, cid):
        rng = np.random.default_rng(cid)
        step = 1e-4
        grid = np.arange(0, 1 + step / 2, step)
        for _ in range(20):
            b1, b2 = sample_condition(cid, rng)
            a1 = binary(rng.uniform())
            sol = equivalent_measure(EquivalenceProblem(a1, b1, b2)).p[0]
            target = cross_entropy(a1, b1)
            ce2 = grid * -np.log2(b2.p[0]) + (1 - grid) * -np.log2(b2.p[1])
            hits = grid[np.abs(ce2 - target) <= 1e-9]
            assert np.all(np.abs(hits - sol) <= 2 * step)
            # the cross-entropy difference changes sign exactly once, next to the solution
            sign = np.sign(ce2 - target)
            flips = np.flatnonzero(sign[1:] * sign[:-1] < 0)
            assert flips.size <= 1
            if flips.size:
                assert abs(grid[flips[0]] - sol) <= 2 * step


class TestIsEquivalent:
    def test_examples(self):
        a = Pmf([0.3, 0.7])
        assert is_equivalent(a, a, B1, B1)
        assert is_equivalent(Pmf([0.9, 0.1]), Pmf([0.2, 0.8]), uniform(2), uniform(2))
        assert is_equivalent(Pmf([0.0, 1.0]), Pmf([0.2075187496394219, 0.7924812503605781]), B1, B2)
        assert not is_equivalent(Pmf([1.0, 0.0]), Pmf([0.2075187496394219, 0.7924812503605781]), B1, B2)

    def test_general_alphabet(self):
        a = Pmf([0.2, 0.3, 0.5])
        assert is_equivalent(a, a, uniform(3), uniform(3))


class TestNormalizability:
    def test_identical(self):
        w = freq_sequence(Pmf([0.3, 0.7]), 5000)
        tr = normalizability_ratio_trace(w, w, B1, B1, geometric_schedule(5000, n0=100))
        np.testing.assert_array_equal(tr.values, 1.0)

    def test_equivalent_freq_pair(self):
        a1 = uniform(2)
        a2 = equivalent_measure(EquivalenceProblem(a1, uniform(2), Q))
        n = 10**5
        tr = normalizability_ratio_trace(freq_sequence(a1, n), freq_sequence(a2, n), uniform(2), Q, geometric_schedule(n))
        assert abs(tr.values[-1] - 1.0) <= 1e-3

    def test_control_pair(self):
        a = Pmf([0.9, 0.1])
        n = 10**5
        tr = normalizability_ratio_trace(freq_sequence(a, n), freq_sequence(a, n), B1, B2, geometric_schedule(n))
        limit = cross_entropy(a, B1) / cross_entropy(a, B2)
        assert tr.values[-1] == pytest.approx(limit, abs=1e-3)
        assert abs(tr.values[-1] - 1.0) >= 0.05


class TestBillingsleyMdim:
    def test_product_is_zero(self):
        assert billingsley_mdim(product(Pmf([0.3, 0.7]), Pmf([0.8, 0.2])), uniform(2), uniform(2)) == pytest.approx(0.0, abs=1e-15)

    def test_rho_half(self):
        assert billingsley_mdim(rho_joint(0.5), uniform(2), uniform(2)) == pytest.approx(0.18872187554086714, abs=1e-15)

    def test_rho_one(self):
        assert billingsley_mdim(rho_joint(1), uniform(2), uniform(2)) == 1.0

    def test_not_normalizable(self):
        with pytest.raises(NotNormalizableError):
            billingsley_mdim(rho_joint(0.5), B1, B2)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 2**32), st.floats(0.01, 0.99), st.floats(0, 1))
    def test_in_unit_interval_with_equivalent_marginals(self, cid, seed, x, mix):
        b1, b2 = sample_condition(cid, np.random.default_rng(seed))
        a1 = binary(x)
        a2 = equivalent_measure(EquivalenceProblem(a1, b1, b2))
        indep = product(a1, a2).p
        # a coupling with the same marginals: mix the product with a comonotone coupling
        lo = min(a1.p[0], a2.p[0])
        como = np.array([[lo, a1.p[0] - lo], [a2.p[0] - lo, 1 - a1.p[0] - a2.p[0] + lo]])
        from mutualdim.measures import JointPmf

        j = JointPmf(np.clip((1 - mix) * indep + mix * como, 0, 1))
        v = billingsley_mdim(j, b1, b2)
        assert 0.0 <= v <= 1.0
        assert v == pytest.approx(float(oracles.billingsley_mdim(j.p, b1.p)), abs=1e-9)
