import numpy as np
import pytest

from fwgap import (
    Box,
    DiagonalQuadratic,
    L1Ball,
    Quadratic,
    Simplex,
    UnsupportedOperation,
    UsageError,
    curvature_lipschitz_bound,
    curvature_sampled,
    finite_diff_check,
    global_min_separable_box,
    grid_min,
)
from fwgap.objectives import AffineComposition, curvature_exact_vertexpair, power_iteration


def naive_value(A, b, x):
    total = 0.0
    for i in range(len(x)):
        for j in range(len(x)):
            total += 0.5 * x[i] * A[i][j] * x[j]
        total += b[i] * x[i]
    return total


def random_symmetric(rng, d, scale=3.0):
    M = rng.uniform(-scale, scale, (d, d))
    return 0.5 * (M + M.T)


def random_instances(rng, n=10):
    out = []
    for k in range(n):
        d = int(rng.integers(1, 8))
        if k % 2:
            out.append(DiagonalQuadratic(rng.uniform(-3, 3, d), rng.uniform(-1, 1, d)))
        else:
            out.append(Quadratic(random_symmetric(rng, d), rng.uniform(-1, 1, d)))
    return out


class TestValueGradient:
    def test_identity(self):
        obj = Quadratic(np.eye(2))
        assert obj.value([1, 0]) == 0.5
        np.testing.assert_array_equal(obj.gradient([1, 0]), [1, 0])

    def test_diagonal_cancels(self):
        assert DiagonalQuadratic([1, -1]).value([1, 1]) == 0.0

    def test_diagonal_gradient_by_hand(self):
        np.testing.assert_array_equal(DiagonalQuadratic([2, -3], [1, 1]).gradient([1, 1]), [3, -2])

    def test_matches_naive_double_loop(self, rng):
        for _ in range(50):
            d = int(rng.integers(1, 7))
            A = random_symmetric(rng, d)
            b = rng.uniform(-1, 1, d)
            x = rng.standard_normal(d)
            assert Quadratic(A, b).value(x) == pytest.approx(naive_value(A, b, x), rel=1e-12, abs=1e-12)
            diag = rng.uniform(-3, 3, d)
            assert DiagonalQuadratic(diag, b).value(x) == pytest.approx(
                naive_value(np.diag(diag), b, x), rel=1e-12, abs=1e-12
            )

    def test_dimension_mismatch(self):
        with pytest.raises(UsageError):
            Quadratic(np.eye(2)).value([1, 2, 3])
        with pytest.raises(UsageError):
            DiagonalQuadratic([1, 2]).gradient([1])

    def test_symmetrized(self):
        obj = Quadratic([[1.0, 2.0], [0.0, 1.0]])
        np.testing.assert_array_equal(obj.matrix, [[1, 1], [1, 1]])


class TestFiniteDifferences:
    def test_random_instances(self, rng):
        for obj in random_instances(rng, 100):
            x = rng.uniform(-2, 2, obj.dim)
            assert finite_diff_check(obj, x, 1e-5) < 1e-6

    def test_linear_is_exact(self, rng):
        obj = Quadratic(np.zeros((3, 3)), [0.3, -1.2, 2.0])
        assert finite_diff_check(obj, np.zeros(3), 1e-5) < 1e-12
        # away from 0 the floor is round-off in f, about eps * |f| / h
        for x in rng.standard_normal((20, 3)):
            floor = 4 * np.finfo(float).eps * max(1.0, abs(obj.value(x))) / 1e-5
            assert finite_diff_check(obj, x, 1e-5) < floor

    def test_large_step_exact_on_quadratic(self):
        assert finite_diff_check(Quadratic(np.eye(3)), [0.3, -0.7, 1.1], 1e-1) < 1e-12

    def test_rejects_bad_h(self):
        with pytest.raises(UsageError):
            finite_diff_check(Quadratic(np.eye(2)), [0, 0], 0.0)


class TestLipschitzBound:
    def test_diagonal_on_simplex(self):
        est = curvature_lipschitz_bound(DiagonalQuadratic([2, -1]), Simplex(2), "l2")
        assert est.value == pytest.approx(4.0, rel=1e-15)
        assert est.method == "analytic_lipschitz_bound"

    def test_identity_on_box(self):
        est = curvature_lipschitz_bound(Quadratic(np.eye(2)), Box([-1, -1], [1, 1]), "l2")
        assert est.value == pytest.approx(8.0, rel=1e-15)

    def test_power_iteration_against_eigensolve(self, rng):
        for d in range(1, 11):
            A = random_symmetric(rng, d)
            exact = float(np.max(np.abs(np.linalg.eigvalsh(A))))
            assert power_iteration(A) == pytest.approx(exact, rel=1e-6)
            est = curvature_lipschitz_bound(Quadratic(A), Box(-np.ones(d), np.ones(d)))
            assert est.value == pytest.approx(exact * 4 * d, rel=1e-6)

    def test_missing_L(self):
        comp = AffineComposition(Quadratic(np.eye(2)), np.eye(2), [0, 0])
        with pytest.raises(UsageError, match="Lipschitz"):
            curvature_lipschitz_bound(comp, Simplex(2))

    @pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
    def test_bound_dominates_sampled_in_every_norm(self, norm, rng):
        for obj in random_instances(rng, 10):
            d = obj.dim
            for dom in (Simplex(d), Box(-np.ones(d), 2 * np.ones(d)), L1Ball(1.3, d)):
                bound = curvature_lipschitz_bound(obj, dom, norm).value
                assert curvature_sampled(obj, dom, 2000, seed=3).value <= bound + 1e-9


class TestSampledCurvature:
    def test_identity_on_simplex(self):
        est = curvature_sampled(Quadratic(np.eye(2)), Simplex(2), 100_000, seed=0)
        assert 1.9 <= est.value <= 2.0
        assert est.heuristic and est.samples_used == 100_000

    def test_linear_objective_zero(self):
        est = curvature_sampled(Quadratic(np.zeros((3, 3)), [1, 2, 3]), Box([0, 0, 0], [1, 1, 1]), 1000)
        assert est.value == 0.0

    def test_deterministic_given_seed(self):
        obj = DiagonalQuadratic([1, -2, 0.5])
        dom = L1Ball(1, 3)
        assert curvature_sampled(obj, dom, 500, 9) == curvature_sampled(obj, dom, 500, 9)

    def test_below_exact_vertex_pair_sup(self, rng):
        for _ in range(5):
            M = rng.standard_normal((3, 3))
            obj = Quadratic(M @ M.T)
            dom = Box([-1, 0, 0], [1, 2, 1])
            exact = curvature_exact_vertexpair(obj, dom).value
            assert curvature_sampled(obj, dom, 5000, 1).value <= exact + 1e-9

    def test_vertex_pair_rejects_indefinite(self):
        with pytest.raises(UnsupportedOperation):
            curvature_exact_vertexpair(DiagonalQuadratic([1, -1]), Simplex(2))

    def test_rejects_zero_samples(self):
        with pytest.raises(UsageError):
            curvature_sampled(Quadratic(np.eye(2)), Simplex(2), 0)


def test_descent_lemma_random_triples(rng):
    for obj in random_instances(rng, 12):
        d = obj.dim
        for dom in (Simplex(d), Box(-np.ones(d), np.ones(d)), L1Ball(2.0, d)):
            C = curvature_lipschitz_bound(obj, dom).value
            X, S = dom.sample(rng, 1000), dom.sample(rng, 1000)
            for x, s, g in zip(X, S, rng.random(1000)):
                lhs = obj.value(x + g * (s - x))
                rhs = obj.value(x) + g * float(obj.gradient(x) @ (s - x)) + 0.5 * g * g * C
                assert lhs <= rhs + 1e-9


class TestGlobalMinBox:
    def test_indefinite_tie_goes_to_lo(self):
        fmin, arg = global_min_separable_box(DiagonalQuadratic([1, -1]), Box([-1, -1], [1, 1]))
        assert fmin == -0.5
        np.testing.assert_array_equal(arg, [0, -1])
        assert not np.signbit(arg[0])

    def test_linear(self):
        fmin, arg = global_min_separable_box(DiagonalQuadratic([0, 0], [1, -1]), Box([0, 0], [1, 1]))
        assert fmin == -1.0
        np.testing.assert_array_equal(arg, [0, 1])

    def test_matches_dense_grid(self, rng):
        box = Box([-1, -1], [1, 1])
        for _ in range(10):
            obj = DiagonalQuadratic(rng.uniform(-3, 3, 2), rng.uniform(-1, 1, 2))
            exact, _ = global_min_separable_box(obj, box)
            grid, _ = grid_min(obj, box, 2001)
            assert exact <= grid + 1e-12
            assert grid - exact <= 1e-6

    def test_below_every_sample(self, rng):
        for _ in range(10):
            d = int(rng.integers(1, 11))
            box = Box(rng.uniform(-2, -0.5, d), rng.uniform(0.5, 2, d))
            obj = DiagonalQuadratic(rng.uniform(-3, 3, d), rng.uniform(-1, 1, d))
            fmin, arg = global_min_separable_box(obj, box)
            assert box.contains(arg)
            vals = [obj.value(x) for x in box.sample(rng, 2000)]
            assert fmin <= min(vals) + 1e-12

    def test_rejects_wrong_inputs(self):
        with pytest.raises(UsageError):
            global_min_separable_box(DiagonalQuadratic([1, 1]), Simplex(2))
        with pytest.raises(UsageError):
            global_min_separable_box(Quadratic(np.eye(2)), Box([0, 0], [1, 1]))


class TestGridMin:
    def test_concave_corner(self):
        fmin, arg = grid_min(Quadratic(-2 * np.eye(2)), Box([-1, -1], [1, 1]), 3)
        assert fmin == -2.0
        assert np.all(np.abs(arg) == 1)

    def test_convex_origin(self):
        fmin, arg = grid_min(Quadratic(np.eye(2)), Box([-1, -1], [1, 1]), 5)
        assert fmin == 0.0
        np.testing.assert_array_equal(arg, [0, 0])

    def test_agrees_with_exact_within_spacing(self, rng):
        box = Box([-1, -0.5], [2, 1.5])
        res = 41
        spacing = (box.hi - box.lo) / (res - 1)
        for _ in range(10):
            obj = DiagonalQuadratic(rng.uniform(-3, 3, 2), rng.uniform(-1, 1, 2))
            exact, _ = global_min_separable_box(obj, box)
            grid, _ = grid_min(obj, box, res)
            corners = box.vertices()
            grad_bound = max(np.abs(obj.diag)) * np.max(np.abs(corners)) + np.max(np.abs(obj.b))
            assert 0 <= grid - exact <= grad_bound * np.linalg.norm(spacing) / 2 * np.sqrt(2) + 1e-12

    def test_simplex_barycentric_grid(self):
        fmin, arg = grid_min(Quadratic(np.eye(3)), Simplex(3), 4)
        assert fmin == pytest.approx(1 / 6)
        np.testing.assert_allclose(arg, [1 / 3] * 3)

    def test_high_dim_unsupported(self):
        with pytest.raises(UnsupportedOperation):
            grid_min(Quadratic(np.eye(4)), Box(-np.ones(4), np.ones(4)), 3)


class TestAffineComposition:
    def test_value_and_gradient_pull_back(self, rng):
        base = Quadratic(random_symmetric(rng, 3), rng.standard_normal(3))
        M = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        q = rng.standard_normal(3)
        comp = AffineComposition(base, M, q)
        x = rng.standard_normal(3)
        y = M @ x + q
        assert comp.value(y) == pytest.approx(base.value(x), rel=1e-12)
        assert finite_diff_check(comp, y, 1e-5) < 1e-6
