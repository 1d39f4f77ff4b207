import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermoshift import measures, ruelle, sft
from thermoshift import potentials as pot
from thermoshift.errors import InadmissibleWord, NoAdmissibleSupport, ValidationError

from _util import GAMMA, random_cocycle, random_irreducible, seeds

F2 = sft.full_shift(2)
GM = sft.golden_mean()
SWAP = sft.validate([[0, 1], [1, 0]])
PARRY_Q = np.array([[1 / GAMMA, 1 / GAMMA ** 2], [1.0, 0.0]])


def random_markov(rng, A):
    Q = A.entries * rng.uniform(0.05, 1.0, (A.n, A.n))
    Q /= Q.sum(axis=1, keepdims=True)
    return measures.markov_from_Q(A, Q)


class TestStationary:
    def test_uniform(self):
        pi, erg = measures.stationary(np.full((2, 2), 0.5))
        assert np.allclose(pi, 0.5) and erg

    def test_permutation(self):
        assert np.allclose(measures.stationary(SWAP.entries)[0], 0.5)

    def test_parry(self):
        pi, _ = measures.stationary(PARRY_Q)
        assert np.allclose(pi, np.array([GAMMA ** 2, 1]) / (GAMMA ** 2 + 1), atol=1e-14)

    def test_two_closed_classes(self):
        pi, erg = measures.stationary(np.eye(2))
        assert not erg and np.allclose(pi, 0.5)

    def test_transient_state_gets_no_mass(self):
        Q = np.array([[0.5, 0.5, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        pi, erg = measures.stationary(Q)
        assert erg and pi[0] == 0.0 and np.allclose(pi[1:], 0.5)

    def test_measure_validation(self):
        with pytest.raises(ValidationError):
            measures.MarkovMeasure(GM, np.full((2, 2), 0.5), [0.5, 0.5])
        with pytest.raises(ValidationError):
            measures.MarkovMeasure(F2, np.full((2, 2), 0.5), [0.9, 0.2])
        with pytest.raises(ValidationError):
            measures.MarkovMeasure(F2, [[0.9, 0.1], [0.1, 0.9]], [0.8, 0.2])


class TestMasses:
    def test_bernoulli(self):
        assert measures.cylinder_mass(measures.bernoulli(F2, [0.5, 0.5]), (0, 1, 0)) == 0.125

    def test_permutation(self):
        mu = measures.markov_from_Q(SWAP, SWAP.entries.astype(float))
        assert measures.cylinder_mass(mu, (0, 1, 0, 1)) == 0.5

    def test_parry(self):
        mu = measures.markov_from_Q(GM, PARRY_Q)
        assert abs(measures.cylinder_mass(mu, (0, 0)) - mu.pi[0] / GAMMA) <= 1e-15

    def test_inadmissible(self):
        with pytest.raises(InadmissibleWord):
            measures.cylinder_mass(measures.markov_from_Q(GM, PARRY_Q), (1, 1))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), seeds, st.integers(1, 6))
    def test_masses_are_consistent(self, n, seed, depth):
        rng = np.random.default_rng(seed)
        mu = random_markov(rng, random_irreducible(rng, n))
        m = measures.word_masses(mu, depth)
        assert abs(m.sum() - 1) <= 1e-12
        words = sft.admissible_words(mu.A, depth)
        assert np.allclose(m, [measures.cylinder_mass(mu, w) for w in words], rtol=0, atol=1e-15)


class TestEntropy:
    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_uniform(self, n):
        A = sft.full_shift(n)
        assert abs(measures.entropy(measures.bernoulli(A, np.full(n, 1 / n))) - math.log(n)) <= 1e-14

    def test_permutation(self):
        assert measures.entropy(measures.markov_from_Q(SWAP, SWAP.entries.astype(float))) == 0.0

    def test_parry(self):
        assert abs(measures.entropy(measures.markov_from_Q(GM, PARRY_Q)) - math.log(GAMMA)) <= 1e-14

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 5), seeds)
    def test_bounds(self, n, seed):
        rng = np.random.default_rng(seed)
        mu = random_markov(rng, random_irreducible(rng, n))
        h = measures.entropy(mu)
        assert 0.0 <= h <= math.log(mu.A.out_degree.max()) + 1e-14


class TestIntegrate:
    def test_constant(self):
        mu = measures.markov_from_Q(GM, PARRY_Q)
        assert abs(measures.integrate(mu, pot.constant(GM, 3.0)) - 3.0) <= 1e-15

    def test_log_half(self):
        mu = measures.bernoulli(F2, [0.5, 0.5])
        assert measures.integrate(mu, pot.constant(F2, math.log(0.5))) == -math.log(2)

    def test_minus_inf_only_where_charged(self):
        mu = measures.markov_from_Q(GM, PARRY_Q)
        f = pot.log(pot.indicator(GM, (0,)))
        assert measures.integrate(mu, f) == -math.inf
        nu = measures.MarkovMeasure(GM, [[1.0, 0.0], [1.0, 0.0]], [1.0, 0.0])
        assert measures.integrate(nu, f) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), seeds)
    def test_lift_invariance(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_irreducible(rng, n)
        mu = random_markov(rng, A)
        f = pot.from_function(A, 2, lambda w: float(rng.normal()))
        assert abs(measures.integrate(mu, f) - measures.integrate(mu, pot.lift_depth(f, 3))) <= 1e-14


class TestVariational:
    def test_full_two(self):
        res = measures.variational_search(F2, pot.constant(F2, 0.0), restarts=5)
        assert abs(res.value - math.log(2)) <= 1e-9
        assert np.allclose(res.measure.Q, 0.5, atol=1e-5)

    def test_golden_mean(self):
        res = measures.variational_search(GM, pot.constant(GM, 0.0), restarts=5)
        assert abs(res.value - math.log(GAMMA)) <= 1e-9
        assert np.allclose(res.measure.Q, PARRY_Q, atol=1e-5)

    def test_stochastic_weight(self):
        P = np.array([[0.3, 0.6], [0.7, 0.4]])
        b = pot.log(pot.from_function(F2, 2, lambda w: P[w[0], w[1]]))
        res = measures.variational_search(F2, b, restarts=5)
        assert abs(res.value) <= 1e-9
        mu = ruelle.gibbs_markov(F2, pot.exp(b))
        assert np.allclose(res.measure.Q, mu.Q, atol=1e-5)

    def test_depth_three_runs_on_blocks(self):
        b = pot.from_function(GM, 3, lambda w: 0.3 * w[0] - 0.2 * w[2])
        res = measures.variational_search(GM, b, restarts=5)
        assert abs(res.value - ruelle.pressure(GM, b).value) <= 1e-6

    def test_zero_allowed(self):
        b = pot.log(pot.indicator(F2, (1,)))
        res = measures.variational_search(F2, b, restarts=4)
        assert abs(res.value) <= 1e-12

    def test_no_support(self):
        with pytest.raises(NoAdmissibleSupport):
            measures.variational_search(F2, pot.constant(F2, -np.inf), restarts=2)

    def test_deterministic(self):
        b = pot.from_function(GM, 2, lambda w: 0.1 * sum(w))
        r1 = measures.variational_search(GM, b, restarts=3, seed=7)
        r2 = measures.variational_search(GM, b, restarts=3, seed=7)
        assert r1.value == r2.value and np.array_equal(r1.measure.Q, r2.measure.Q)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 4), seeds)
    def test_dominance(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_irreducible(rng, n)
        b = pot.from_function(A, 2, lambda w: float(rng.normal()))
        mu = random_markov(rng, A)
        J = measures.integrate(mu, b) + measures.entropy(mu)
        assert J <= ruelle.pressure(A, b).value + 1e-9

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), seeds)
    def test_equilibrium_attained(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_irreducible(rng, n)
        b = pot.from_function(A, 2, lambda w: float(rng.normal()))
        mu = ruelle.gibbs_markov(A, pot.exp(b))
        J = measures.integrate(mu, b) + measures.entropy(mu)
        assert abs(J - ruelle.pressure(A, b).value) <= 1e-8


class TestTEntropy:
    def test_uniform_bernoulli(self):
        mu = measures.bernoulli(F2, [0.5, 0.5])
        assert abs(measures.t_entropy(mu, pot.uniform_cocycle(F2))) <= 1e-15

    def test_permutation(self):
        mu = measures.markov_from_Q(SWAP, SWAP.entries.astype(float))
        assert measures.t_entropy(mu, pot.constant(SWAP, 1.0)) == 0.0

    def test_golden_mean_value(self):
        # frozen from the closed form: ln(1/2) times the mass of the words (i, 0), plus ln(gamma)
        mu = measures.markov_from_Q(GM, PARRY_Q)
        expect = math.log(GAMMA) - math.log(2) * GAMMA ** 2 / (GAMMA ** 2 + 1)
        assert abs(measures.t_entropy(mu, pot.uniform_cocycle(GM)) - expect) <= 1e-14

    def test_estimate_uniform(self):
        mu = measures.bernoulli(F2, [0.5, 0.5])
        assert abs(measures.t_entropy_definition_estimate(mu, pot.uniform_cocycle(F2), 4, 4)) <= 1e-2

    def test_estimate_permutation_exact(self):
        mu = measures.markov_from_Q(SWAP, SWAP.entries.astype(float))
        for n, m in [(1, 1), (3, 2), (5, 4)]:
            assert measures.t_entropy_definition_estimate(mu, pot.constant(SWAP, 1.0), n, m) == 0.0

    def test_estimate_golden_mean(self):
        mu = measures.markov_from_Q(GM, PARRY_Q)
        rho = pot.uniform_cocycle(GM)
        est = measures.t_entropy_definition_estimate(mu, rho, 6, 6)
        assert abs(est - measures.t_entropy(mu, rho)) <= 5e-2

    def test_rejects_non_cocycle(self):
        with pytest.raises(ValidationError):
            measures.t_entropy(measures.markov_from_Q(GM, PARRY_Q), pot.constant(GM, 1.0))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 3), seeds)
    def test_estimate_monotone_and_above_formula(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_irreducible(rng, n)
        mu = random_markov(rng, A)
        rho = random_cocycle(rng, A, 2)
        tau = measures.t_entropy(mu, rho)
        prev_m = math.inf
        for m in range(1, 5):
            est = [measures.t_entropy_definition_estimate(mu, rho, k, m) for k in (1, 2, 3)]
            assert est[0] >= est[1] >= est[2]
            assert est[2] <= prev_m + 1e-12
            assert est[2] >= tau - 1e-9
            prev_m = est[2]
