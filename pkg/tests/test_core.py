import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DOMAIN_IDS, DOMAINS, brute_vertices
from fwgap import Box, OracleError, Quadratic, Simplex, UsageError, clamp_gap, fw_gap
from fwgap.errors import NumericError


class TestClampGap:
    def test_positive_passes_through(self):
        assert clamp_gap(0.5) == 0.5

    def test_roundoff_clamped_to_zero(self):
        assert clamp_gap(-1e-14) == 0.0

    def test_large_negative_is_oracle_error(self):
        with pytest.raises(OracleError):
            clamp_gap(-1e-3)

    def test_threshold_edges(self):
        assert clamp_gap(-1e-10) == 0.0
        with pytest.raises(OracleError):
            clamp_gap(-1.01e-10)

    def test_nan_rejected(self):
        with pytest.raises(NumericError):
            clamp_gap(float("nan"))


class TestFWGap:
    def test_zero_gradient(self):
        res = fw_gap([1.0, 0.0], [0.0, 0.0], Simplex(2))
        assert res.gap == 0.0
        assert Simplex(2).is_extreme(res.atom)

    def test_hand_example(self):
        res = fw_gap([1.0, 0.0], [1.0, 0.0], Simplex(2))
        np.testing.assert_array_equal(res.atom, [0.0, 1.0])
        np.testing.assert_array_equal(res.direction, [-1.0, 1.0])
        assert res.gap == 1.0

    def test_matches_vertex_enumeration_on_simplex(self, rng):
        dom = Simplex(3)
        for _ in range(200):
            x = rng.dirichlet(np.ones(3))
            grad = rng.standard_normal(3)
            expected = max(float(np.dot(e - x, -grad)) for e in np.eye(3))
            assert fw_gap(x, grad, dom).gap == expected

    def test_frozen_instance(self):
        # max over e_i of <e_i - x, -grad>, evaluated by hand:
        # x = (0.2, 0.3, 0.5), grad = (1, -2, 0.5); <x, grad> = -0.15
        # <e_i, -grad> = -1, 2, -0.5 -> best i = 1, gap = 2 + (-0.15) = 1.85
        res = fw_gap([0.2, 0.3, 0.5], [1.0, -2.0, 0.5], Simplex(3))
        assert res.gap == pytest.approx(1.85, abs=1e-15)
        np.testing.assert_array_equal(res.atom, [0.0, 1.0, 0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(UsageError):
            fw_gap([1.0, 0.0], [1.0, 0.0, 0.0], Simplex(2))

    def test_infeasible_point_names_constraint(self):
        with pytest.raises(UsageError, match="sum"):
            fw_gap([0.5, 0.6], [1.0, 0.0], Simplex(2))
        with pytest.raises(UsageError, match="coordinate 1"):
            fw_gap([0.0, 3.0], [1.0, 0.0], Box([-1, -1], [1, 1]))


@pytest.mark.parametrize("domain", DOMAINS, ids=DOMAIN_IDS)
def test_gap_nonnegative_and_reconstructs(domain, rng):
    xs = domain.sample(rng, 1000)
    for x in xs:
        grad = rng.standard_normal(domain.dim) * rng.uniform(0.1, 10)
        res = fw_gap(x, grad, domain)
        assert res.gap >= 0.0
        assert abs(res.gap - float(np.dot(res.direction, -grad))) <= 1e-12
        np.testing.assert_array_equal(res.direction, res.atom - x)


@pytest.mark.parametrize("domain", DOMAINS, ids=DOMAIN_IDS)
def test_gap_equals_brute_force_max(domain, rng):
    verts = brute_vertices(domain)
    for x in domain.sample(rng, 200):
        grad = rng.standard_normal(domain.dim)
        expected = -np.inf
        for v in verts:
            val = float(np.dot(v - x, -grad))
            if val > expected:
                expected = val
        assert fw_gap(x, grad, domain).gap == max(expected, 0.0)


def test_gap_zero_at_interior_stationary_points():
    # unconstrained minimizer inside the box: gradient vanishes
    obj = Quadratic(np.diag([1.0, 2.0]), [-0.2, 0.4])
    x_star = np.array([0.2, -0.2])
    assert fw_gap(x_star, obj.gradient(x_star), Box([-1, -1], [1, 1])).gap <= 1e-9
    # barycenter is the constrained minimizer of 1/2 ||x||^2 on the simplex
    obj = Quadratic(np.eye(5))
    x_star = np.full(5, 0.2)
    assert fw_gap(x_star, obj.gradient(x_star), Simplex(5)).gap <= 1e-9


@settings(max_examples=200, deadline=None)
@given(
    w=st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
    g=st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=4),
)
def test_gap_nonnegative_property(w, g):
    x = np.array(w) / np.sum(w)
    res = fw_gap(x, g, Simplex(4), tol=1e-9)
    assert res.gap >= 0.0
