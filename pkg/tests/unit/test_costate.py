import numpy as np
import pytest

from handsoff.core.system import LtiSystem
from handsoff.errors import InvalidSystemError
from handsoff.pmp.costate import (
    CostateSpec,
    hamiltonian_lp,
    normality_diagnostic,
    pointwise_argmin,
    switching_function,
    switching_samples,
    synthesize,
)


@pytest.fixture
def affine_spec(di):
    """``s(t) = t - 1.5`` for the double integrator."""
    return CostateSpec(np.array([-1.0, -1.5]), di)


class TestCostateSpec:
    def test_rejects_wrong_length(self, di):
        with pytest.raises(InvalidSystemError):
            CostateSpec(np.array([1.0]), di)

    def test_rejects_non_finite(self, di):
        with pytest.raises(InvalidSystemError):
            CostateSpec(np.array([1.0, np.nan]), di)

    def test_costate_double_integrator(self, affine_spec):
        np.testing.assert_allclose(affine_spec.costate(2.0), [-1.0, 0.5])

    def test_costate_samples_shape(self, affine_spec):
        assert affine_spec.costate_samples([0.0, 1.0, 2.0]).shape == (3, 2)

    def test_costate_satisfies_adjoint_equation(self):
        sys = LtiSystem([[-0.3, 1.0], [-2.0, 0.1]], [0.0, 1.0])
        spec = CostateSpec(np.array([0.4, -0.7]), sys)
        h = 1e-6
        derivative = (spec.costate(1.0 + h) - spec.costate(1.0 - h)) / (2 * h)
        np.testing.assert_allclose(derivative, -sys.a_matrix.T @ spec.costate(1.0), atol=1e-7)


class TestSwitchingFunction:
    def test_affine_for_double_integrator(self, affine_spec):
        for t in (0.0, 0.5, 1.5, 4.0):
            assert switching_function(affine_spec, t) == pytest.approx(t - 1.5)

    def test_midpoint_samples(self, affine_spec):
        s = switching_samples(affine_spec, 5.0, 10)
        np.testing.assert_allclose(s, np.arange(10) * 0.5 + 0.25 - 1.5, atol=1e-12)

    def test_average_equals_midpoint_when_affine(self, affine_spec):
        mid = switching_samples(affine_spec, 5.0, 50, "midpoint")
        avg = switching_samples(affine_spec, 5.0, 50, "average")
        np.testing.assert_allclose(avg, mid, atol=1e-12)

    def test_average_is_interval_mean(self):
        sys = LtiSystem([[0.0, 1.0], [-1.0, 0.0]], [0.0, 1.0])
        spec = CostateSpec(np.array([1.0, 0.0]), sys)
        avg = switching_samples(spec, np.pi, 4, "average")
        fine = np.array([switching_function(spec, t) for t in np.linspace(0, np.pi, 40001)])
        # left Riemann mean on each quarter
        quarters = np.split(fine[:-1], 4)
        np.testing.assert_allclose(avg, [q.mean() for q in quarters], atol=1e-4)

    def test_unknown_sampling(self, affine_spec):
        with pytest.raises(ValueError):
            switching_samples(affine_spec, 1.0, 10, "left")


class TestPointwiseMinimisation:
    @pytest.mark.parametrize(
        "s, expected",
        [
            (-2.0, {1}),
            (-1.0, {0, 1}),
            (-0.3, {0}),
            (0.0, {0}),
            (0.99, {0}),
            (1.0, {-1, 0}),
            (1.5, {-1}),
        ],
    )
    def test_argmin(self, s, expected):
        assert pointwise_argmin(s) == frozenset(expected)

    @pytest.mark.parametrize("p", [0.1, 0.5, 1.0])
    def test_argmin_matches_brute_force(self, p):
        grid = np.linspace(-1.0, 1.0, 2001)
        for s in (-3.0, -1.2, -0.5, 0.4, 1.7):
            cost = np.abs(grid) ** p + s * grid
            best = grid[np.argmin(cost)]
            assert int(round(best)) in pointwise_argmin(s, p)

    def test_bad_exponent(self):
        with pytest.raises(ValueError):
            pointwise_argmin(0.0, p=0.0)

    def test_hamiltonian(self, di):
        value = hamiltonian_lp([1.0, 0.0], [1.0, 1.0], 0.5, 1.0, di)
        assert value == pytest.approx(1.0)
        assert hamiltonian_lp([0.0, 2.0], [1.0, 0.0], 0.0, 0.5, di) == pytest.approx(2.0)
        assert hamiltonian_lp([1.0, -1.0], [1.0, 1.0], 1.0, 0.5, di) == pytest.approx(1.0)
        assert hamiltonian_lp([0.0, 0.0], [0.0, 0.0], 1.0, 0.3, di) == 1.0
        with pytest.raises(ValueError):
            hamiltonian_lp([0.0, 0.0], [0.0, 0.0], 0.0, 1.5, di)


class TestSynthesize:
    def test_bang_off_bang_from_affine_switching(self, affine_spec):
        u = synthesize(affine_spec, 5.0, 500)
        np.testing.assert_array_equal(u.values[:50], 1.0)
        np.testing.assert_array_equal(u.values[50:250], 0.0)
        np.testing.assert_array_equal(u.values[250:], -1.0)
        assert u.support_intervals() == [(0.0, pytest.approx(0.5)), (pytest.approx(2.5), pytest.approx(5.0))]

    def test_pinned_switching_resolves_to_zero(self, di):
        u = synthesize(CostateSpec(np.array([0.0, -1.0]), di), 5.0, 100)
        assert not np.any(u.values)

    def test_dead_zone_only(self, di):
        u = synthesize(CostateSpec(np.array([0.0, 0.2]), di), 1.0, 20)
        assert u.values.tolist() == [0.0] * 20


class TestNormality:
    def test_pinned_costate_has_full_measure(self, di):
        spec = CostateSpec(np.array([0.0, -1.0]), di)
        assert normality_diagnostic(spec, 5.0, 500) == pytest.approx(5.0)

    def test_normal_costate_has_zero_measure(self, affine_spec):
        assert normality_diagnostic(affine_spec, 5.0, 500) == 0.0
