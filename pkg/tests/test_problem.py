import numpy as np
import pytest

from bregsaddle import build_problem, load_instance
from bregsaddle.errors import ConfigError, NegativeGapError
from bregsaddle.geometry import GeometryKind
from bregsaddle.problem import (AffineQuadraticTerm, CouplingOperator, FiniteSumSmooth,
                                LinearTerm, full_gradients, gap, primal_dual_gap_pair,
                                product_bregman_distance)


@pytest.fixture(scope="module")
def quad1d():
    return build_problem(load_instance("quad-1d"))[0]


@pytest.fixture(scope="module")
def rps():
    return build_problem(load_instance("rps-game"))[0]


class TestFiniteSumSmooth:
    def test_counts_and_mean_lipschitz(self):
        fs = FiniteSumSmooth([AffineQuadraticTerm([[1.0]], [0.0]),
                              AffineQuadraticTerm([[2.0]], [0.0])])
        assert fs.count == 2
        assert fs.lipschitz == pytest.approx([1.0, 4.0])
        assert fs.mean_lipschitz == pytest.approx(2.5)

    def test_rejects_undershooting_lipschitz(self):
        with pytest.raises(ConfigError):
            FiniteSumSmooth([AffineQuadraticTerm([[3.0]], [0.0])], lipschitz=[1.0])

    def test_aggregate_gradient_is_average(self):
        rng = np.random.default_rng(0)
        terms = [AffineQuadraticTerm(rng.standard_normal((3, 3)), rng.standard_normal(3))
                 for _ in range(4)]
        fs = FiniteSumSmooth(terms)
        for _ in range(50):
            x = rng.standard_normal(3)
            mean = np.mean([t.gradient(x) for t in terms], axis=0)
            assert np.linalg.norm(fs.gradient(x) - mean) <= 1e-12

    def test_finite_difference_gradients(self):
        rng = np.random.default_rng(1)
        terms = [AffineQuadraticTerm(rng.standard_normal((3, 3)), rng.standard_normal(3),
                                     rng.standard_normal(3)),
                 LinearTerm(rng.standard_normal(3))]
        step = 1e-6
        for term in terms:
            for _ in range(50):
                x = rng.standard_normal(3)
                g = term.gradient(x)
                for i in range(3):
                    e = np.zeros(3)
                    e[i] = step
                    fd = (term.value(x + e) - term.value(x - e)) / (2 * step)
                    assert fd == pytest.approx(g[i], rel=1e-5, abs=1e-7)


class TestCouplingOperator:
    def test_adjoint_consistency(self):
        rng = np.random.default_rng(2)
        K = CouplingOperator(rng.standard_normal((4, 3)),
                             GeometryKind.EUCLIDEAN, GeometryKind.EUCLIDEAN)
        for _ in range(50):
            x = rng.standard_normal(3)
            v = rng.standard_normal(4)
            assert float(np.dot(K.apply(x), v)) == pytest.approx(
                float(np.dot(x, K.adjoint_apply(v))), abs=1e-12)

    def test_euclidean_norm_is_spectral(self):
        rng = np.random.default_rng(3)
        M = rng.standard_normal((5, 4))
        K = CouplingOperator(M, GeometryKind.EUCLIDEAN, GeometryKind.EUCLIDEAN)
        assert K.norm == pytest.approx(np.linalg.norm(M, 2), rel=1e-10)

    def test_entropy_pairing_norm_is_max_abs(self):
        M = np.array([[0.5, -2.0], [1.0, 0.25]])
        K = CouplingOperator(M, GeometryKind.NEGATIVE_ENTROPY,
                             GeometryKind.NEGATIVE_ENTROPY)
        assert K.norm == pytest.approx(2.0)

    def test_norm_dominates_random_probes(self, rps):
        rng = np.random.default_rng(4)
        K = rps.coupling
        for _ in range(100):
            x = rng.dirichlet(np.ones(3)) - rng.dirichlet(np.ones(3))
            nx = np.sum(np.abs(x))
            if nx < 1e-12:
                continue
            # l1 primal / l1-paired dual: image measured in the dual norm (max-abs)
            assert np.max(np.abs(K.apply(x))) <= K.norm * nx + 1e-12


class TestSaddleProblemFields:
    def test_mu0_is_max_of_mean_lipschitz(self):
        prob = build_problem(load_instance("strongly-convex-quad"))[0]
        expected = max(prob.h.mean_lipschitz, prob.ell.mean_lipschitz)
        assert prob.mu0 == expected

    def test_alpha_min_of_f_gstar(self):
        prob = build_problem(load_instance("strongly-convex-quad"))[0]
        assert prob.alpha == 1.0
        quad = build_problem(load_instance("quad-1d"))[0]
        assert quad.alpha == 0.0


class TestGap:
    def test_rps_uniform_is_zero(self, rps):
        u = np.full(3, 1.0 / 3.0)
        assert gap(rps, u, u) == pytest.approx(0.0, abs=1e-15)

    def test_infeasible_primal_plus_inf(self, rps):
        assert gap(rps, np.array([2.0, 0.0, 0.0]), np.full(3, 1.0 / 3.0)) == np.inf

    def test_infeasible_dual_minus_inf(self, rps):
        assert gap(rps, np.full(3, 1.0 / 3.0), np.array([2.0, 0.0, 0.0])) == -np.inf

    def test_quad_hand_value(self, quad1d):
        # G(2, 0) = h(2) = 2 on the 1-d quadratic instance
        assert gap(quad1d, np.array([2.0]), np.array([0.0])) == pytest.approx(2.0)

    def test_convexity_in_x_concavity_in_v(self, quad1d):
        rng = np.random.default_rng(5)
        for _ in range(100):
            x1, x2, v = rng.standard_normal(3)
            t = rng.random()
            xa, xb, vv = np.array([x1]), np.array([x2]), np.array([v])
            mix = gap(quad1d, t * xa + (1 - t) * xb, vv)
            assert mix <= t * gap(quad1d, xa, vv) + (1 - t) * gap(quad1d, xb, vv) + 1e-9
            v1, v2, x = rng.standard_normal(3)
            va, vb, xx = np.array([v1]), np.array([v2]), np.array([x])
            mixv = gap(quad1d, xx, t * va + (1 - t) * vb)
            assert mixv >= t * gap(quad1d, xx, va) + (1 - t) * gap(quad1d, xx, vb) - 1e-9


class TestGapPair:
    def test_zero_at_saddle(self, quad1d):
        z = np.array([0.0])
        assert primal_dual_gap_pair(quad1d, z, z, z, z) == 0.0

    def test_rps_pure_strategy(self, rps):
        u = np.full(3, 1.0 / 3.0)
        pure = np.array([1.0, 0.0, 0.0])
        assert primal_dual_gap_pair(rps, pure, u, u, u) == pytest.approx(0.0, abs=1e-12)

    def test_quad_hand_value(self, quad1d):
        one = np.array([1.0])
        zero = np.array([0.0])
        assert primal_dual_gap_pair(quad1d, one, one, zero, zero) == pytest.approx(1.0)

    def test_negative_gap_raises(self, quad1d):
        # swapping the roles of saddle and probe produces a negative value
        one = np.array([1.0])
        zero = np.array([0.0])
        with pytest.raises(NegativeGapError):
            primal_dual_gap_pair(quad1d, zero, zero, one, one)


class TestFullGradients:
    def test_two_term_average(self):
        h = FiniteSumSmooth([AffineQuadraticTerm([[1.0]], [0.0]),
                             AffineQuadraticTerm([[1.0]], [2.0])])
        grads = np.mean([t.gradient(np.array([1.0])) for t in h.terms], axis=0)
        assert grads == pytest.approx([0.0])

    def test_zero_ell(self, rps):
        _, gl = full_gradients(rps, np.full(3, 1.0 / 3.0), np.full(3, 1.0 / 3.0))
        np.testing.assert_array_equal(gl, np.zeros(3))

    def test_linear_terms_average(self):
        h = FiniteSumSmooth([LinearTerm([1.0, 0.0]), LinearTerm([0.0, 1.0])])
        np.testing.assert_allclose(h.gradient(np.array([5.0, -7.0])), [0.5, 0.5])


class TestProductDistance:
    def test_sums_both_blocks(self, quad1d):
        x = np.array([1.0])
        v = np.array([2.0])
        y = np.array([0.0])
        w = np.array([0.0])
        assert product_bregman_distance(quad1d, x, v, y, w) == pytest.approx(2.5)
