"""
Tests for the rigged frame and the fundamental forms of the hypersurface.
"""

import numpy as np
import pytest

from errors import NotNullError, PreconditionError, TangencyError, TransversalityError
from rigging import (
    NullHypersurfaceScenario,
    build_frame,
    cbar,
    eq1_residual,
    frame_invariants,
    leaf_second_fundamental_form,
    max_abs_b,
    radical_degeneracy,
    radical_independence,
    require_totally_geodesic,
    rotation_one_form_tau,
    rotation_one_form_tau_alt,
    screen_fundamental_C,
    screen_integrability_residual,
    second_fundamental_B,
    second_fundamental_B_extension,
    shape_consistency,
    shape_operators,
    totally_geodesic_report,
)

PLANE_POINT = [0.2, 0.2, 0.1, -0.3]


class TestScenarioChecks:
    """Null and transversality checks at points of L."""

    def test_plane_point(self, minkowski):
        result = minkowski.hypersurface.check_point(PLANE_POINT)
        assert result["null"] == 0.0
        assert result["pairing"] == 1.0

    def test_spacelike_level_set_is_not_null(self, flat_space):
        scenario = NullHypersurfaceScenario(flat_space, "t", ["1", "0", "0", "0"], "t")
        with pytest.raises(NotNullError, match="not null"):
            scenario.check_point([0.0, 0.1, 0.2, 0.3])

    def test_tangent_rigging(self, flat_space):
        """d/dy is tangent to t = x and cannot rig it."""
        scenario = NullHypersurfaceScenario(flat_space, "t - x", ["0", "0", "1", "0"], "t")
        with pytest.raises(TransversalityError):
            scenario.check_point([0.0, 0.0, 0.0, 0.0])
        with pytest.raises(TransversalityError):
            build_frame(scenario, [0.0, 0.0, 0.0, 0.0])

    def test_frame_off_hypersurface(self, minkowski):
        with pytest.raises(TangencyError, match="not on L"):
            build_frame(minkowski.hypersurface, [0.5, 0.2, 0.0, 0.0])


class TestFrame:
    """Construction of ξ, N and the screen."""

    def test_plane_frame_vectors(self, minkowski):
        """ξ = -(∂t + ∂x) and N = (∂t - ∂x)/2 for the unit timelike rigging."""
        frame = build_frame(minkowski.hypersurface, PLANE_POINT)
        np.testing.assert_allclose(frame.xi, [-1.0, -1.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(frame.null_rigging, [0.5, -0.5, 0.0, 0.0], atol=1e-15)
        assert frame.q == 2
        assert frame.screen_indices == (2, 3)

    @pytest.mark.parametrize("name", ["minkowski", "cone", "ppwave", "twisted", "desitter", "ads"])
    def test_invariants_hold(self, name, request):
        """Every algebraic identity of the frame holds to 1e-10 at sampled points."""
        hypersurface = request.getfixturevalue(name).hypersurface
        for point in hypersurface.samples(5, seed=11):
            residuals = frame_invariants(build_frame(hypersurface, point))
            worst = max(residuals.values())
            assert worst < 1e-10, residuals

    def test_rigged_metric_is_identity_on_frame(self, desitter):
        point = desitter.hypersurface.samples(1, seed=3)[0]
        frame = build_frame(desitter.hypersurface, point)
        np.testing.assert_allclose(frame.rigged_metric, np.eye(3), atol=1e-12)

    def test_frame_coordinates_round_trip(self, desitter):
        """A tangent vector is recovered from its frame coordinates."""
        frame = build_frame(desitter.hypersurface, desitter.hypersurface.samples(1, seed=3)[0])
        vector = 0.3 * frame.xi - 1.2 * frame.screen[0] + 0.7 * frame.screen[1]
        np.testing.assert_allclose(frame.frame_coordinates(vector), [0.3, -1.2, 0.7], atol=1e-12)

    def test_same_radical_for_rescaled_rigging(self, minkowski, minkowski_scaled):
        """Rescaling ζ rescales ξ but keeps the radical direction."""
        point = [0.2, 0.2, 0.1, 0.1]
        assert radical_independence(minkowski.hypersurface, minkowski_scaled.hypersurface, point) < 1e-12


class TestFundamentalForms:
    """B, C, τ and the shape operators."""

    def test_cone_second_fundamental_form(self, cone):
        """On the light cone B = 1/r on the screen, so max |B| * r = 1."""
        hypersurface = cone.hypersurface
        for point in hypersurface.samples(6, seed=5):
            frame = build_frame(hypersurface, point)
            r = np.linalg.norm(point[1:])
            assert max_abs_b(frame) * r == pytest.approx(1.0, abs=1e-6)
            assert radical_degeneracy(frame) < 1e-10

    def test_b_is_symmetric_and_agrees_across_routes(self, cone):
        frame = build_frame(cone.hypersurface, cone.hypersurface.samples(1, seed=5)[0])
        basis = frame.tangent_basis
        for u in basis:
            for v in basis:
                b = second_fundamental_B(frame, u, v)
                assert b == pytest.approx(second_fundamental_B(frame, v, u), abs=1e-10)
                assert b == pytest.approx(second_fundamental_B_extension(frame, u, v), abs=1e-10)

    def test_b_rejects_transverse_vectors(self, minkowski):
        frame = build_frame(minkowski.hypersurface, PLANE_POINT)
        with pytest.raises(TangencyError):
            second_fundamental_B(frame, frame.null_rigging, frame.xi)

    def test_c_rejects_non_screen_vectors(self, minkowski):
        frame = build_frame(minkowski.hypersurface, PLANE_POINT)
        with pytest.raises(TangencyError, match="screen"):
            screen_fundamental_C(frame, frame.screen[0], frame.xi)

    @pytest.mark.parametrize("name", ["minkowski_scaled", "cone", "desitter", "twisted"])
    def test_c_relation_and_tau_routes(self, name, request):
        """C(u,x) + g(∇_u ζ, x) + ½ g(ζ,ζ) B(u,x) = 0 and both τ routes agree."""
        hypersurface = request.getfixturevalue(name).hypersurface
        frame = build_frame(hypersurface, hypersurface.samples(1, seed=7)[0])
        for u in frame.tangent_basis:
            assert rotation_one_form_tau(frame, u) == pytest.approx(rotation_one_form_tau_alt(frame, u), abs=1e-9)
            for x in frame.screen:
                assert abs(eq1_residual(frame, u, x)) < 1e-9

    def test_shape_operators(self, cone):
        frame = build_frame(cone.hypersurface, cone.hypersurface.samples(1, seed=5)[0])
        a, a_star = shape_operators(frame)
        assert a.shape == a_star.shape == (3, 3)
        # A* maps into the screen
        np.testing.assert_allclose(a_star[0], 0.0, atol=1e-10)
        result = shape_consistency(frame)
        assert max(result.values()) < 1e-9

    def test_cbar_on_rescaled_plane(self, minkowski_scaled):
        """With ζ = (1 + x)∂t, C̄(ξ, ξ) = 1/(1 + x)^2, which is 1 at x = 0."""
        frame = build_frame(minkowski_scaled.hypersurface, [0.0, 0.0, 0.3, -0.2])
        assert cbar(frame, frame.xi, frame.xi) == pytest.approx(1.0, abs=1e-12)
        assert rotation_one_form_tau(frame, frame.xi) == pytest.approx(-1.0, abs=1e-12)

    def test_leaf_second_fundamental_form_of_plane(self, minkowski):
        frame = build_frame(minkowski.hypersurface, PLANE_POINT)
        second = leaf_second_fundamental_form(frame, frame.screen[0], frame.screen[1])
        np.testing.assert_allclose(second, 0.0, atol=1e-14)


class TestGlobalReports:
    """Sampled reports over the hypersurface."""

    def test_plane_is_totally_geodesic(self, minkowski):
        report = totally_geodesic_report(minkowski.hypersurface, samples=10, seed=1)
        assert report["samples"] == 10
        assert report["max_abs_B"] < 1e-12
        assert report["totally_geodesic"]

    def test_cone_is_not(self, cone):
        report = totally_geodesic_report(cone.hypersurface, samples=10, seed=1)
        assert not report["totally_geodesic"]
        assert 0.5 - 1e-6 <= report["max_abs_B"] <= 1.0 + 1e-6

    def test_require_totally_geodesic(self, cone):
        frame = build_frame(cone.hypersurface, cone.hypersurface.samples(1, seed=2)[0])
        with pytest.raises(PreconditionError, match="max \\|B\\|"):
            require_totally_geodesic(frame)

    def test_screen_integrability(self, ppwave, twisted):
        """The twisted rigging has a non-integrable screen with |dω| = 1."""
        point = [0.0, 0.3, 0.2, -0.4]
        assert screen_integrability_residual(build_frame(ppwave.hypersurface, point)) < 1e-12
        assert screen_integrability_residual(build_frame(twisted.hypersurface, point)) == pytest.approx(1.0, abs=1e-10)
