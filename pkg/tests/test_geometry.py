import numpy as np
import pytest

from bregsaddle import geometry as geo
from bregsaddle.errors import DomainError, UnsupportedPair

E2 = geo.LegendreGeometry(dim=2, kind=geo.GeometryKind.EUCLIDEAN)
NE2 = geo.LegendreGeometry(dim=2, kind=geo.GeometryKind.NEGATIVE_ENTROPY)
ZERO = geo.SimpleFunction(geo.SimpleFunctionKind.ZERO)
SIMPLEX = geo.SimpleFunction(geo.SimpleFunctionKind.SIMPLEX)


def random_interior(geom, rng, size=None):
    shape = (geom.dim,) if size is None else (size, geom.dim)
    if geom.kind == geo.GeometryKind.EUCLIDEAN:
        return rng.standard_normal(shape)
    pts = rng.dirichlet(np.ones(geom.dim), size=size)
    return np.clip(pts, 1e-12, None) / np.clip(pts, 1e-12, None).sum(axis=-1, keepdims=True)


class TestGrad:
    def test_euclidean_identity(self):
        np.testing.assert_array_equal(geo.grad(E2, [1.0, 2.0]), [1.0, 2.0])

    def test_entropy_at_ones(self):
        geom = geo.LegendreGeometry(dim=2, kind=geo.GeometryKind.NEGATIVE_ENTROPY)
        np.testing.assert_allclose(geo.grad(geom, [1.0, 1.0]), [1.0, 1.0])

    def test_entropy_at_inv_e(self):
        x = np.full(2, np.exp(-1.0))
        np.testing.assert_allclose(geo.grad(NE2, x), [0.0, 0.0], atol=1e-15)

    def test_entropy_domain_error(self):
        with pytest.raises(DomainError):
            geo.grad(NE2, [0.5, -0.5])


class TestGradConjugate:
    def test_euclidean_identity(self):
        np.testing.assert_array_equal(geo.grad_conjugate(E2, [3.0, -1.0]), [3.0, -1.0])

    def test_entropy_inverse_of_grad(self):
        np.testing.assert_allclose(geo.grad_conjugate(NE2, [1.0, 1.0]), [1.0, 1.0])

    def test_entropy_at_zero(self):
        np.testing.assert_allclose(geo.grad_conjugate(NE2, [0.0, 0.0]),
                                   np.full(2, np.exp(-1.0)))

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            geo.grad_conjugate(NE2, [800.0, 0.0])


class TestBregmanDistance:
    def test_euclidean_half_squared(self):
        assert geo.bregman_distance(E2, [1.0, 2.0], [0.0, 0.0]) == pytest.approx(2.5)

    def test_zero_at_equal_points(self):
        assert geo.bregman_distance(NE2, [0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_kl_value(self):
        # KL([.5,.5] || [.25,.75]) = .5 ln 2 + .5 ln(2/3)
        expected = 0.5 * np.log(2.0) + 0.5 * np.log(2.0 / 3.0)
        got = geo.bregman_distance(NE2, [0.5, 0.5], [0.25, 0.75])
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.14384103622589045, abs=1e-12)


class TestMirrorProx:
    def test_euclidean_zero_identity(self):
        np.testing.assert_array_equal(geo.mirror_prox(E2, ZERO, 0.1, [2.0, 4.0]),
                                      [2.0, 4.0])

    def test_entropy_simplex_symmetric(self):
        for c in (0.0, -3.0, 12.0):
            np.testing.assert_allclose(
                geo.mirror_prox(NE2, SIMPLEX, 0.7, [c, c]), [0.5, 0.5])

    def test_euclidean_l1_soft_threshold(self):
        l1 = geo.SimpleFunction(geo.SimpleFunctionKind.L1, weight=1.0)
        np.testing.assert_allclose(geo.mirror_prox(E2, l1, 0.5, [2.0, -0.3]),
                                   [1.5, 0.0])

    def test_entropy_simplex_normalization(self):
        got = geo.mirror_prox(NE2, SIMPLEX, 1.0, np.log([1.0, 3.0]))
        np.testing.assert_allclose(got, [0.25, 0.75], atol=1e-14)

    def test_euclidean_box_clip(self):
        box = geo.SimpleFunction(geo.SimpleFunctionKind.BOX)
        np.testing.assert_allclose(geo.mirror_prox(E2, box, 0.3, [2.0, -0.4]),
                                   [1.0, -0.4])

    def test_euclidean_scaled_geometry(self):
        sg = geo.SimpleFunction(geo.SimpleFunctionKind.SCALED_GEOMETRY, weight=2.0)
        np.testing.assert_allclose(geo.mirror_prox(E2, sg, 0.5, [4.0, -2.0]),
                                   [2.0, -1.0])

    def test_entropy_zero_positive_orthant(self):
        got = geo.mirror_prox(NE2, ZERO, 0.1, [1.0, 0.0])
        np.testing.assert_allclose(got, [1.0, np.exp(-1.0)])

    def test_unsupported_pair(self):
        l1 = geo.SimpleFunction(geo.SimpleFunctionKind.L1, weight=1.0)
        with pytest.raises(UnsupportedPair):
            geo.mirror_prox(NE2, l1, 0.1, [0.1, 0.2])

    def test_overflow_shift_makes_large_inputs_safe(self):
        got = geo.mirror_prox(NE2, SIMPLEX, 1.0, [1000.0, 999.0])
        assert np.all(np.isfinite(got))
        assert got.sum() == pytest.approx(1.0)


class TestIdentities:
    """Three-point and symmetric Bregman identities on random interior points."""

    @pytest.mark.parametrize("geom", [E2, NE2], ids=["euclidean", "entropy"])
    def test_three_point_identity(self, geom):
        rng = np.random.default_rng(1)
        for _ in range(200):
            x = random_interior(geom, rng)
            p = random_interior(geom, rng)
            z = random_interior(geom, rng)
            lhs = float(np.dot(x - p, geo.grad(geom, z) - geo.grad(geom, p)))
            rhs = (geo.bregman_distance(geom, x, p) + geo.bregman_distance(geom, p, z)
                   - geo.bregman_distance(geom, x, z))
            assert abs(lhs - rhs) <= 1e-10 * (1.0 + abs(geo.bregman_distance(geom, x, z)))

    @pytest.mark.parametrize("geom", [E2, NE2], ids=["euclidean", "entropy"])
    def test_symmetric_identity(self, geom):
        rng = np.random.default_rng(2)
        for _ in range(200):
            z = random_interior(geom, rng)
            p = random_interior(geom, rng)
            lhs = float(np.dot(z - p, geo.grad(geom, z) - geo.grad(geom, p)))
            rhs = geo.bregman_distance(geom, z, p) + geo.bregman_distance(geom, p, z)
            assert abs(lhs - rhs) <= 1e-10

    @pytest.mark.parametrize("geom", [E2, NE2], ids=["euclidean", "entropy"])
    def test_strong_convexity_lower_bound(self, geom):
        rng = np.random.default_rng(3)
        for _ in range(200):
            x = random_interior(geom, rng)
            y = random_interior(geom, rng)
            dist = geo.bregman_distance(geom, x, y)
            assert dist >= 0.5 * geo.paired_norm(geom, x - y) ** 2 - 1e-12

    @pytest.mark.parametrize("geom", [E2, NE2], ids=["euclidean", "entropy"])
    def test_inverse_roundtrip(self, geom):
        rng = np.random.default_rng(4)
        for _ in range(200):
            x = random_interior(geom, rng)
            back = geo.grad_conjugate(geom, geo.grad(geom, x))
            assert np.max(np.abs(back - x)) <= 1e-12


class TestProxOptimality:
    def test_subgradient_inequality_l1(self):
        # gamma f(x) >= gamma f(p) + <grad phi(z) - grad phi(p), x - p>
        rng = np.random.default_rng(5)
        gamma = 0.4
        l1 = geo.SimpleFunction(geo.SimpleFunctionKind.L1, weight=0.8)
        for _ in range(50):
            z = rng.standard_normal(2)
            p = geo.mirror_prox(E2, l1, gamma, geo.grad(E2, z))
            for _ in range(20):
                x = rng.standard_normal(2)
                lhs = gamma * geo.evaluate(l1, E2, x)
                rhs = (gamma * geo.evaluate(l1, E2, p)
                       + float(np.dot(geo.grad(E2, z) - geo.grad(E2, p), x - p)))
                assert lhs >= rhs - 1e-9

    def test_subgradient_inequality_entropy_simplex(self):
        rng = np.random.default_rng(6)
        gamma = 0.7
        for _ in range(50):
            z = random_interior(NE2, rng)
            p = geo.mirror_prox(NE2, SIMPLEX, gamma, geo.grad(NE2, z))
            for _ in range(20):
                x = random_interior(NE2, rng)
                lhs = gamma * geo.evaluate(SIMPLEX, NE2, x)
                rhs = float(np.dot(geo.grad(NE2, z) - geo.grad(NE2, p), x - p))
                assert lhs >= rhs - 1e-9

    def test_relative_strong_convexity_prox_inequality(self):
        # g(p) + D(p,z) <= g(x) + D(x,z) - (1+alpha) D(x,p) for scaled geometry
        rng = np.random.default_rng(7)
        mu_f = 1.5
        gamma = 1.0
        sg = geo.SimpleFunction(geo.SimpleFunctionKind.SCALED_GEOMETRY, weight=mu_f)
        for _ in range(300):
            z = rng.standard_normal(2)
            p = geo.mirror_prox(E2, sg, gamma, geo.grad(E2, z))
            x = rng.standard_normal(2)
            lhs = gamma * geo.evaluate(sg, E2, p) + geo.bregman_distance(E2, p, z)
            rhs = (gamma * geo.evaluate(sg, E2, x) + geo.bregman_distance(E2, x, z)
                   - (1.0 + gamma * mu_f) * geo.bregman_distance(E2, x, p))
            assert lhs <= rhs + 1e-9


class TestSimpleFunction:
    def test_rsc_zero_unless_scaled(self):
        assert SIMPLEX.relative_strong_convexity == 0.0
        assert ZERO.relative_strong_convexity == 0.0
        sg = geo.SimpleFunction(geo.SimpleFunctionKind.SCALED_GEOMETRY, weight=2.5)
        assert sg.relative_strong_convexity == 2.5

    def test_evaluate_indicators(self):
        assert geo.evaluate(SIMPLEX, NE2, [0.5, 0.5]) == 0.0
        assert geo.evaluate(SIMPLEX, NE2, [2.0, 0.0]) == np.inf
        box = geo.SimpleFunction(geo.SimpleFunctionKind.BOX)
        assert geo.evaluate(box, E2, [0.5, -1.0]) == 0.0
        assert geo.evaluate(box, E2, [1.5, 0.0]) == np.inf

    def test_evaluate_l1(self):
        l1 = geo.SimpleFunction(geo.SimpleFunctionKind.L1, weight=2.0)
        assert geo.evaluate(l1, E2, [1.0, -3.0]) == pytest.approx(8.0)
