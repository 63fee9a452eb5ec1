"""
Tests for charted spacetimes, curvature and Killing-field operations.
"""

import numpy as np
import pytest

from errors import DegeneratePlaneError, NotNullError, PreconditionError, ScenarioValidationError, SignatureError
from spacetime import (
    ChartedSpacetime,
    VectorField,
    closedness_residual,
    curvature_invariants,
    hessian_identity_residual,
    killing_plane_identity,
    killing_residual,
    ncc_report,
    ncc_residual,
    null_sectional_curvature,
    null_vectors,
    riemann,
    sectional_curvature,
    unnormalized_plane_curvature,
)

SPHERE_POINT = [0.2, 1.1, 0.4]


def _field(sphere_space, *sources):
    return VectorField(list(sources), sphere_space.coordinates)


class TestChartedSpacetime:
    """Construction, validation and chart helpers."""

    def test_triangle_and_square_metrics_agree(self, flat_space):
        """An upper triangle expands to the same symmetric matrix as a full one."""
        square = ChartedSpacetime(
            ["t", "x", "y", "z"],
            [["-1", "0", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]],
            [(-2.0, 2.0)] * 4,
        )
        point = [0.1, 0.2, 0.3, 0.4]
        np.testing.assert_array_equal(square.metric(point), flat_space.metric(point))

    def test_constant_metric_detection(self, flat_space, sphere_space):
        assert flat_space.has_constant_metric
        assert not sphere_space.has_constant_metric

    def test_dimension_out_of_range(self):
        """Two-dimensional charts are rejected with a field path."""
        with pytest.raises(ScenarioValidationError) as info:
            ChartedSpacetime(["t", "x"], [["-1", "0"], ["1"]], [(0, 1), (0, 1)])
        assert any(problem.startswith("dimension") for problem in info.value.problems)

    def test_inverted_bounds(self):
        with pytest.raises(ScenarioValidationError, match="bounds.x"):
            ChartedSpacetime(["t", "x", "y"], [["-1", "0", "0"], ["1", "0"], ["1"]], [(0, 1), (1, 0), (0, 1)])

    def test_riemannian_metric_fails_signature(self):
        """A positive-definite metric has no timelike direction."""
        space = ChartedSpacetime(["a", "b", "c"], [["1", "0", "0"], ["1", "0"], ["1"]], [(0, 1)] * 3)
        with pytest.raises(SignatureError, match="0 negative"):
            space.check_signature(per_axis=3)

    def test_lorentzian_metric_passes_signature(self, sphere_space):
        sphere_space.check_signature(per_axis=4)

    def test_non_periodic_metric_rejected(self):
        """sin(th)^2 is not invariant under th -> th + 1."""
        space = ChartedSpacetime(
            ["t", "th", "ph"],
            [["-1", "0", "0"], ["1", "0"], ["sin(th)^2"]],
            [(0, 1), (0.0, 1.0), (0, 1)],
            periods={"th": 1.0},
        )
        with pytest.raises(ScenarioValidationError, match="periodic.th"):
            space.check_periodicity()

    def test_reduce_wraps_periodic_coordinates(self, sphere_space):
        reduced = sphere_space.reduce([5.0, 1.0, 2.0 * np.pi + 0.5])
        np.testing.assert_allclose(reduced, [5.0, 1.0, 0.5])
        assert not sphere_space.is_compact_quotient

    def test_in_chart_ignores_periodic_axes(self, sphere_space):
        assert sphere_space.in_chart([0.0, 1.0, 40.0])
        assert not sphere_space.in_chart([0.0, 3.0, 0.0])


class TestCurvature:
    """Christoffel symbols and curvature of known metrics."""

    def test_flat_space_has_no_curvature(self, flat_space):
        tensors = riemann(flat_space, [0.3, -0.2, 0.1, 0.5])
        assert np.max(np.abs(tensors.christoffel)) == 0.0
        assert np.max(np.abs(tensors.riemann)) == 0.0

    def test_unit_sphere_factor(self, sphere_space):
        """The round factor has sectional curvature 1 and scalar curvature 2."""
        tensors = riemann(sphere_space, SPHERE_POINT)
        assert tensors.sectional([0, 1, 0], [0, 0, 1]) == pytest.approx(1.0, abs=1e-12)
        assert tensors.scalar == pytest.approx(2.0, abs=1e-12)
        assert tensors.ricci[1, 1] == pytest.approx(1.0, abs=1e-12)
        assert tensors.ricci[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_time_planes_are_flat(self, sphere_space):
        assert sectional_curvature(sphere_space, SPHERE_POINT, [1, 0, 0], [0, 1, 0]) == pytest.approx(0.0, abs=1e-12)

    def test_unnormalized_plane_curvature(self, sphere_space):
        """g(R(∂th, ∂ph)∂ph, ∂th) = K sin²th on the unit factor."""
        value = unnormalized_plane_curvature(sphere_space, SPHERE_POINT, [0, 1, 0], [0, 0, 1])
        assert value == pytest.approx(np.sin(1.1) ** 2, abs=1e-12)

    def test_degenerate_plane(self, sphere_space):
        """A plane spanned by one vector has zero Gram determinant."""
        with pytest.raises(DegeneratePlaneError):
            sectional_curvature(sphere_space, SPHERE_POINT, [0, 1, 0], [0, 2, 0])

    def test_algebraic_symmetries(self, sphere_space, rng):
        """First Bianchi identity and the antisymmetries hold to rounding."""
        result = curvature_invariants(sphere_space, SPHERE_POINT, rng)
        assert result["bianchi"] < 1e-12
        assert result["antisymmetry"] < 1e-12
        assert result["pair_antisymmetry"] < 1e-12

    def test_null_sectional_curvature_in_flat_space(self, flat_space):
        value = null_sectional_curvature(flat_space, [0, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0])
        assert value == 0.0

    def test_null_sectional_curvature_rejects_timelike(self, flat_space):
        with pytest.raises(NotNullError):
            null_sectional_curvature(flat_space, [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0])


class TestKillingFields:
    """Killing and closedness residuals, and the Killing identities."""

    def test_translations_and_rotations_are_killing(self, sphere_space):
        """∂t, ∂ph and the tilted rotation of the sphere are Killing."""
        for field in (
            _field(sphere_space, "1", "0", "0"),
            _field(sphere_space, "0", "0", "1"),
            _field(sphere_space, "0", "sin(ph)", "cos(ph)*cos(th)/sin(th)"),
        ):
            assert np.max(np.abs(killing_residual(sphere_space, SPHERE_POINT, field))) < 1e-12

    def test_polar_direction_is_not_killing(self, sphere_space):
        residual = killing_residual(sphere_space, SPHERE_POINT, _field(sphere_space, "0", "1", "0"))
        th = SPHERE_POINT[1]
        assert residual[2, 2] == pytest.approx(2.0 * np.sin(th) * np.cos(th), rel=1e-12)

    def test_closedness(self, sphere_space):
        """g(∂t, ·) = -dt is closed; g(∂ph, ·) = sin^2(th) dph is not."""
        assert np.max(np.abs(closedness_residual(sphere_space, SPHERE_POINT, _field(sphere_space, "1", "0", "0")))) == 0.0
        residual = closedness_residual(sphere_space, SPHERE_POINT, _field(sphere_space, "0", "0", "1"))
        th = SPHERE_POINT[1]
        assert residual[1, 2] == pytest.approx(2.0 * np.sin(th) * np.cos(th), rel=1e-12)
        assert residual[2, 1] == pytest.approx(-residual[1, 2])

    def test_hessian_identity_for_rotation(self, sphere_space, rng):
        """Hess f + g(R(x,ζ)ζ, y) - g(∇_xζ, ∇_yζ) vanishes for a Killing ζ."""
        field = _field(sphere_space, "0", "sin(ph)", "cos(ph)*cos(th)/sin(th)")
        for _ in range(4):
            x, y = rng.uniform(-1.0, 1.0, size=(2, 3))
            assert abs(hessian_identity_residual(sphere_space, SPHERE_POINT, field, x, y)) < 1e-10

    def test_hessian_identity_requires_killing(self, sphere_space):
        with pytest.raises(PreconditionError, match="not Killing"):
            hessian_identity_residual(sphere_space, SPHERE_POINT, _field(sphere_space, "0", "1", "0"), [1, 0, 0], [0, 1, 0])

    def test_killing_plane_identity_flat(self, flat_space):
        """For ζ = ∂t and the null ξ = -∂t + ∂x both sides vanish; Gram determinant is -1."""
        zeta = VectorField(["1", "0", "0", "0"], flat_space.coordinates)
        xi = VectorField(["-1", "1", "0", "0"], flat_space.coordinates)
        result = killing_plane_identity(flat_space, [0.1, 0.2, 0.3, 0.4], zeta, xi)
        assert result["denominator"] == -1.0
        assert result["residual"] == 0.0
        assert result["xi_geodesic_defect"] == 0.0


class TestNullEnergy:
    """Null convergence probes."""

    def test_null_vectors_are_null(self, sphere_space, rng):
        metric = sphere_space.metric(SPHERE_POINT)
        vectors = null_vectors(metric, rng.normal(size=(6, 2)))
        norms = np.einsum("ni,ij,nj->n", vectors, metric, vectors)
        assert np.max(np.abs(norms)) < 1e-12

    def test_flat_space_minimum_is_zero(self, flat_space):
        report = ncc_report(flat_space, samples=5, seed=3, directions=4)
        assert report["min_ricci"] == 0.0
        assert report["samples"] == 20

    def test_round_factor_satisfies_ncc(self, sphere_space):
        assert ncc_report(sphere_space, samples=8, seed=3)["min_ricci"] > 0.0

    def test_ncc_residual_rejects_timelike(self, flat_space):
        with pytest.raises(NotNullError):
            ncc_residual(flat_space, [0, 0, 0, 0], [1, 0, 0, 0])
