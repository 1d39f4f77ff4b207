import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermoshift import measures, ruelle, sft
from thermoshift import potentials as pot
from thermoshift.errors import ConvergenceError, NotIrreducible, ValidationError, ZeroEdgeWeight

from _util import GAMMA, perron_root_oracle, random_cocycle, random_irreducible, seeds, transition_matrices

F2 = sft.full_shift(2)
GM = sft.golden_mean()


class TestBuildTransfer:
    def test_full_two_constant(self):
        assert np.array_equal(ruelle.build_transfer(F2, pot.constant(F2, 1.0)).W, np.ones((2, 2)))

    def test_golden_mean_is_A(self):
        assert np.array_equal(ruelle.build_transfer(GM, pot.constant(GM, 1.0)).W, GM.entries)

    def test_edge_weights(self):
        p = np.array([[0.2, 0.6], [0.8, 0.4]])
        c = pot.from_function(F2, 2, lambda w: p[w[0], w[1]])
        assert np.array_equal(ruelle.build_transfer(F2, c).W, p)

    def test_depth_three_blocks(self):
        c = pot.from_function(GM, 3, lambda w: 1.0 + w[0] + 2 * w[2])
        T = ruelle.build_transfer(GM, c)
        assert T.presentation.block_states == [(0, 0), (0, 1), (1, 0)]
        assert T.W[0, 1] == 3.0 and T.W[2, 0] == 2.0 and T.W[1, 1] == 0.0

    def test_rejects_negative_and_complex(self):
        with pytest.raises(ValidationError):
            ruelle.build_transfer(F2, pot.constant(F2, -1.0))
        with pytest.raises(ValidationError):
            ruelle.build_transfer(F2, pot.constant(F2, 1j))

    def test_apply_is_transpose(self):
        p = np.array([[0.2, 0.6], [0.8, 0.4]])
        T = ruelle.build_transfer(F2, pot.from_function(F2, 2, lambda w: p[w[0], w[1]]))
        f = np.array([1.0, 3.0])
        assert np.allclose(T.apply(f), p.T @ f)


class TestSpectralRadius:
    def test_full_two(self):
        assert ruelle.spectral_radius(np.ones((2, 2))).rho == 2.0

    def test_golden_mean(self):
        enc = ruelle.spectral_radius(GM.entries)
        assert abs(enc.rho - GAMMA) <= 1e-10 and enc.lo <= GAMMA <= enc.hi

    def test_isolated_state_ignored(self):
        W = np.zeros((3, 3))
        W[:2, :2] = GM.entries
        W[2, 0] = 5.0
        assert abs(ruelle.spectral_radius(W).rho - GAMMA) <= 1e-10

    def test_nilpotent(self):
        enc = ruelle.spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert enc.rho == 0.0 and enc.components == []

    def test_periodic_block(self):
        enc = ruelle.spectral_radius(np.array([[0.0, 2.0], [0.5, 0.0]]))
        assert abs(enc.rho - 1.0) <= 1e-12

    def test_budget_exhaustion_reported(self):
        rng = np.random.default_rng(3)
        W = rng.random((5, 5))
        enc = ruelle.spectral_radius(W, tol=1e-30, max_iter=3)
        assert not enc.converged and enc.lo <= enc.hi

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            ruelle.spectral_radius(np.array([[-1.0]]))

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 6), seeds, st.floats(0.2, 1.0))
    def test_collatz_wielandt_encloses_oracle(self, n, seed, density):
        rng = np.random.default_rng(seed)
        W = rng.random((n, n)) * (rng.random((n, n)) < density) * 3
        exact = float(np.max(np.abs(np.linalg.eigvals(W)))) if n else 0.0
        enc = ruelle.spectral_radius(W)
        slack = 1e-12 * max(exact, 1.0)
        assert enc.lo - slack <= exact <= enc.hi + slack
        assert abs(enc.rho - exact) <= 1e-9 * max(exact, 1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 6), seeds)
    def test_gelfand(self, n, seed):
        rng = np.random.default_rng(seed)
        W = rng.random((n, n)) + 0.05      # positive, hence irreducible and aperiodic
        v = np.ones(n)
        log_norm = 0.0
        for _ in range(64):
            v = W @ v
            s = v.max()
            v /= s
            log_norm += math.log(s)
        assert abs(log_norm / 64 - math.log(ruelle.spectral_radius(W).rho)) <= 0.05


class TestPressure:
    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_full_shift(self, n):
        A = sft.full_shift(n)
        assert abs(ruelle.pressure(A, pot.constant(A, 0.0)).value - math.log(n)) <= 1e-10

    def test_golden_mean(self):
        p = ruelle.pressure(GM, pot.constant(GM, 0.0))
        assert abs(p.value - math.log(GAMMA)) <= 1e-10
        assert p.enclosure[0] <= math.log(GAMMA) <= p.enclosure[1]

    def test_log_indicator(self):
        b = pot.log(pot.indicator(F2, (1,)))
        assert ruelle.pressure(F2, b).value == 0.0

    def test_all_minus_inf(self):
        assert ruelle.pressure(F2, pot.constant(F2, -np.inf)).value == -math.inf

    def test_constant_shift(self):
        b = pot.constant(GM, 0.7)
        assert abs(ruelle.pressure(GM, b).value - math.log(GAMMA) - 0.7) <= 1e-10

    @settings(max_examples=40, deadline=None)
    @given(transition_matrices(max_n=3), transition_matrices(max_n=3), seeds)
    def test_additive_under_disjoint_union(self, A1, A2, seed):
        rng = np.random.default_rng(seed)
        A = sft.block_diag(A1, A2)
        b = pot.from_function(A, 2, lambda w: float(rng.normal()))
        n1 = A1.n
        b1 = pot.from_function(A1, 2, lambda w: b(w))
        b2 = pot.from_function(A2, 2, lambda w: b(tuple(x + n1 for x in w)))
        whole = ruelle.pressure(A, b).value
        parts = max(ruelle.pressure(A1, b1).value, ruelle.pressure(A2, b2).value)
        assert whole == parts


class TestPreimageSums:
    def test_full_two(self):
        T = ruelle.build_transfer(F2, pot.constant(F2, 1.0))
        for y in (0, 1):
            assert abs(ruelle.preimage_sum_estimate(T, y, 10) - math.log(2)) <= 1e-14

    def test_golden_mean(self):
        T = ruelle.build_transfer(GM, pot.constant(GM, 1.0))
        assert abs(ruelle.preimage_sum_estimate(T, 0, 20) - math.log(GAMMA)) <= 0.05

    def test_only_upstream_blocks_count(self):
        # state 2 loops and feeds the full 2-shift on {0, 1}; nothing flows back
        A = sft.validate([[1, 1, 0], [1, 1, 0], [1, 0, 1]])
        T = ruelle.build_transfer(A, pot.constant(A, 1.0))
        assert ruelle.preimage_sum_estimate(T, 2, 40) == 0.0
        assert abs(ruelle.preimage_sum_estimate(T, 0, 40) - math.log(2)) <= 0.05


class TestEigendata:
    def test_full_two(self):
        d = ruelle.perron_eigendata(np.ones((2, 2)))
        assert d.rho == 2.0 and np.allclose(d.r, 1) and np.allclose(d.l, 0.5)

    def test_period_two(self):
        d = ruelle.perron_eigendata(np.array([[0.0, 2.0], [0.5, 0.0]]))
        assert abs(d.rho - 1) <= 1e-12 and d.period == 2
        assert np.allclose(d.r, [1.0, 0.5], atol=1e-12)

    def test_golden_mean(self):
        d = ruelle.perron_eigendata(GM.entries.astype(float))
        assert np.allclose(d.r / d.r[1], [GAMMA, 1.0], atol=1e-12)

    def test_reducible(self):
        with pytest.raises(NotIrreducible):
            ruelle.perron_eigendata(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_budget(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ConvergenceError) as exc:
            ruelle.perron_eigendata(rng.random((4, 4)), tol=1e-30, max_iter=2)
        assert exc.value.result is not None

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), seeds)
    def test_residuals(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_irreducible(rng, n)
        W = A.entries * rng.uniform(0.1, 2.0, (n, n))
        d = ruelle.perron_eigendata(W)
        assert np.max(np.abs(W @ d.r - d.rho * d.r)) <= 1e-10 * d.rho
        assert np.max(np.abs(d.l @ W - d.rho * d.l)) <= 1e-10 * d.rho
        assert d.r.max() == 1.0 and abs(d.l @ d.r - 1) <= 1e-12


class TestGibbs:
    def test_uniform_cocycle_gives_bernoulli(self):
        mu = ruelle.gibbs_markov(F2, pot.uniform_cocycle(F2))
        assert np.allclose(mu.Q, 0.5, atol=1e-15) and np.allclose(mu.pi, 0.5, atol=1e-15)

    def test_parry(self):
        mu = ruelle.gibbs_markov(GM, pot.constant(GM, 1.0))
        assert abs(mu.Q[0, 0] - 1 / GAMMA) <= 1e-12
        assert abs(mu.Q[0, 1] - 1 / GAMMA ** 2) <= 1e-12

    def test_stochastic_weight_masses(self):
        P = np.array([[0.3, 0.6], [0.7, 0.4]])          # column sums 1
        w, v = np.linalg.eig(P)
        p = np.real(v[:, np.argmax(np.real(w))])
        p /= p.sum()
        mu = ruelle.gibbs_markov(F2, pot.from_function(F2, 2, lambda x: P[x[0], x[1]]))
        for word in sft.admissible_words(F2, 4):
            expect = p[word[-1]] * np.prod([P[a, b] for a, b in zip(word[:-1], word[1:])])
            assert abs(measures.cylinder_mass(mu, word) - expect) <= 1e-12

    def test_zero_edge_rejected(self):
        with pytest.raises(ZeroEdgeWeight):
            ruelle.gibbs_markov(F2, pot.indicator(F2, (1,), depth=2))

    def test_depth_limit(self):
        with pytest.raises(ValidationError):
            ruelle.gibbs_markov(F2, pot.constant(F2, 1.0, depth=3))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), seeds)
    def test_invariant_under_unital_operator(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_irreducible(rng, n)
        rho = random_cocycle(rng, A, 2)
        mu = ruelle.gibbs_markov(A, rho)
        for k in range(1, 5):
            for w in sft.admissible_words(A, k):
                f = pot.indicator(A, w)
                lhs = measures.integrate(mu, ruelle.ruelle_apply(rho, f))
                assert abs(lhs - measures.integrate(mu, f)) <= 1e-10


class TestRuelleApply:
    def test_constant_one(self):
        out = ruelle.ruelle_apply(pot.constant(F2, 1.0), pot.constant(F2, 1.0))
        assert np.all(out.values == 2.0)

    def test_depth_of_output(self):
        c = pot.constant(GM, 1.0, depth=3)
        assert ruelle.ruelle_apply(c, pot.constant(GM, 1.0)).depth == 2

    @settings(max_examples=40, deadline=None)
    @given(transition_matrices(max_n=4), seeds)
    def test_matches_transfer_matrix(self, A, seed):
        rng = np.random.default_rng(seed)
        c = pot.from_function(A, 2, lambda w: float(rng.random()))
        f = pot.from_function(A, 1, lambda w: float(rng.normal()))
        T = ruelle.build_transfer(A, c)
        assert np.allclose(ruelle.ruelle_apply(c, f).values, T.apply(f.values), atol=1e-14)
