"""
Tests for geodesic integration, the metric correspondence on L, and the periodic geodesic search.
"""

import numpy as np
import pytest

from errors import ChartExitError, PreconditionError, TangencyError
from geodesics import (
    ATOL,
    RTOL,
    GeodesicState,
    cbar_criterion,
    causal_character,
    cross_metric_residual,
    find_periodic_geodesic,
    hunt_periodic_geodesics,
    integrate,
    killing_energy,
    prop3_equivalence_check,
    reversibility_residual,
    velocity_grid,
    verify_orbit,
    wrap_displacement,
    xi_orbit_views,
)
from rigging import build_frame, cbar

HORIZON_POINT = [0.0, 1.0, 1.2, 0.5]
HORIZON_VELOCITY = [0.1, 0.05, 0.1, 0.2]


class TestIntegration:
    """Ambient and submanifold geodesics."""

    def test_straight_line_in_flat_space(self, flat_space):
        trajectory = integrate(flat_space, GeodesicState([0, 0, 0, 0], [1.0, 0.5, 0.0, -0.5]), 1.0, samples=5)
        np.testing.assert_allclose(trajectory.positions[-1], [1.0, 0.5, 0.0, -0.5], atol=1e-12)
        assert trajectory.energy_drift < 1e-14
        assert trajectory.times.shape == (5,)

    def test_leaving_the_chart(self, flat_space):
        """Crossing a bounded coordinate stops the integration with the exit parameter."""
        with pytest.raises(ChartExitError) as info:
            integrate(flat_space, GeodesicState([0, 0, 0, 0], [0.0, 1.0, 0.0, 0.0]), 5.0)
        assert info.value.parameter == pytest.approx(2.0, abs=1e-6)

    def test_periodic_axes_never_exit(self, torus):
        trajectory = integrate(torus.spacetime, GeodesicState([0, 0, 0], [0.0, 3.0, 0.0]), 2.0, samples=3)
        assert trajectory.positions[-1][1] == pytest.approx(6.0, abs=1e-10)

    def test_energy_is_conserved(self, desitter):
        """g(γ′, γ′) and the Killing energies g(γ′, ∂u), g(γ′, ∂ph) stay constant."""
        spacetime = desitter.spacetime
        trajectory = integrate(spacetime, GeodesicState(HORIZON_POINT, HORIZON_VELOCITY), 0.5, samples=11)
        assert trajectory.energy_drift < 1e-8
        for field in desitter.killing_fields:
            energies = killing_energy(spacetime, trajectory, field)
            assert np.max(np.abs(energies - energies[0])) < 1e-8

    def test_reversibility(self, desitter):
        state = GeodesicState(HORIZON_POINT, HORIZON_VELOCITY)
        assert reversibility_residual(desitter.spacetime, state, 0.5) < 1e-8

    def test_unknown_metric_selector(self):
        with pytest.raises(ValueError, match="metric selector"):
            GeodesicState([0, 0, 0], [1, 0, 0], metric="conformal")

    def test_rigged_geodesic_needs_hypersurface(self, flat_space):
        with pytest.raises(PreconditionError, match="hypersurface"):
            integrate(flat_space, GeodesicState([0, 0, 0, 0], [0, 0, 1, 0], "rigged"), 1.0)

    def test_rigged_velocity_must_be_tangent(self, minkowski):
        state = GeodesicState([0.2, 0.2, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], "rigged")
        with pytest.raises(TangencyError, match="not tangent"):
            integrate(minkowski.hypersurface, state, 0.5)

    def test_rigged_geodesic_stays_on_l(self, cone):
        hypersurface = cone.hypersurface
        point = hypersurface.project([1.5, 0.8, 0.9, 0.7])
        radial = np.concatenate([[1.0], point[1:] / point[0]])
        trajectory = integrate(hypersurface, GeodesicState(point, 0.2 * radial, "rigged"), 1.0, samples=6)
        for x in trajectory.positions:
            assert abs(float(hypersurface.level_function(x))) < 1e-10


class TestCorrespondence:
    """When g̃-geodesics on L are g-geodesics."""

    def test_screen_direction_is_geodesic_in_both(self, minkowski_scaled):
        """C̄ vanishes on screen directions, so the rigged geodesic is an ambient one."""
        hypersurface = minkowski_scaled.hypersurface
        state = GeodesicState([0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], "rigged")
        trajectory = integrate(hypersurface, state, 0.5, samples=5)
        result = cross_metric_residual(hypersurface, trajectory)
        assert result["ambient"] < 1e-8
        assert result["rigged"] < 1e-8
        assert result["cbar"] < 1e-10

    def test_radical_direction_is_not(self, minkowski_scaled):
        """Along ξ, C̄(ξ, ξ) = 1/(1 + x)^2 and the rigged geodesic bends away in g."""
        hypersurface = minkowski_scaled.hypersurface
        frame = build_frame(hypersurface, [0.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(frame.xi, [-1.0, -1.0, 0.0, 0.0], atol=1e-12)
        assert cbar(frame, frame.xi, frame.xi) == pytest.approx(1.0, abs=1e-6)
        state = GeodesicState([0.0, 0.0, 0.0, 0.0], [-1.0, -1.0, 0.0, 0.0], "rigged")
        trajectory = integrate(hypersurface, state, 0.1, samples=3)
        result = cross_metric_residual(hypersurface, trajectory)
        assert result["rigged"] < 1e-8
        assert result["ambient"] > 1e-3
        assert result["cbar"] >= 1.0 - 1e-6

    def test_cbar_criterion_both_directions(self, minkowski_scaled):
        """A screen direction gives an "if" verdict, the radical direction an "only if" one."""
        hypersurface = minkowski_scaled.hypersurface
        screen = integrate(hypersurface, GeodesicState([0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], "rigged"), 0.5, samples=5)
        radical = integrate(hypersurface, GeodesicState([0.0, 0.0, 0.0, 0.0], [-1.0, -1.0, 0.0, 0.0], "rigged"), 0.1, samples=3)
        vanishing = cbar_criterion(hypersurface, screen)
        assert vanishing["direction"] == "if"
        assert vanishing["residual"] < 1e-8
        nonvanishing = cbar_criterion(hypersurface, radical)
        assert nonvanishing["direction"] == "only_if"
        assert nonvanishing["ambient"] > 1e-3
        assert nonvanishing["residual"] == 0.0

    def test_verdicts_hold_at_half_tolerance(self, minkowski, minkowski_scaled):
        """Halving the integration tolerances leaves the C̄ and three-metric verdicts unchanged."""
        hypersurface = minkowski_scaled.hypersurface
        halved = {"rtol": RTOL / 2.0, "atol": ATOL / 2.0}
        for velocity, length in (([0.0, 0.0, 1.0, 0.0], 0.5), ([-1.0, -1.0, 0.0, 0.0], 0.1)):
            verdicts = []
            for control in ({}, halved):
                state = GeodesicState([0.0, 0.0, 0.0, 0.0], velocity, "rigged")
                result = cbar_criterion(hypersurface, integrate(hypersurface, state, length, samples=3, **control))
                verdicts.append((result["direction"], result["residual"] < 1e-6))
            assert verdicts[0] == verdicts[1]
        point, velocity = [0.2, 0.2, 0.1, -0.3], [0.0, 0.0, 1.0, 0.5]
        default = prop3_equivalence_check(minkowski.hypersurface, point, velocity, length=0.8)
        finer = prop3_equivalence_check(minkowski.hypersurface, point, velocity, length=0.8, **halved)
        assert (max(default.values()) < 1e-6) == (max(finer.values()) < 1e-6)
        assert max(finer.values()) < 1e-8

    def test_three_metrics_agree_on_leaves(self, minkowski):
        """On the null plane, a leaf geodesic is a geodesic of g̃, of g and of the leaf."""
        result = prop3_equivalence_check(minkowski.hypersurface, [0.2, 0.2, 0.1, -0.3], [0.0, 0.0, 1.0, 0.5], length=0.8)
        assert set(result) == {"ambient_rigged", "ambient_leaf", "rigged_leaf"}
        assert max(result.values()) < 1e-8

    def test_twisted_screen_is_rejected(self, twisted):
        with pytest.raises(PreconditionError, match="not integrable"):
            prop3_equivalence_check(twisted.hypersurface, [0.0, 0.3, 0.2, -0.4], [0.0, 0.0, 1.0, 0.0])

    def test_xi_orbit_in_flat_space(self, minkowski):
        """ξ is constant on the null plane, so its flow is the geodesic with velocity ξ."""
        views = xi_orbit_views(minkowski.hypersurface, [0.2, 0.2, 0.1, -0.3], 0.5, samples=6)
        assert views["separation"] < 1e-10
        assert views["xi_geodesic_defect"] == 0.0
        assert views["flow_closure"] == pytest.approx(np.sqrt(2.0) * 0.5, abs=1e-10)


class TestPeriodicSearch:
    """Closed geodesics on compact quotients."""

    def test_causal_character(self):
        assert causal_character(-0.5) == "timelike"
        assert causal_character(1e-12) == "null"
        assert causal_character(2.0) == "spacelike"

    def test_wrap_displacement(self, torus):
        wrapped = wrap_displacement(torus.spacetime, np.array([0.9, -0.6, 2.2]))
        np.testing.assert_allclose(wrapped, [-0.1, 0.4, 0.2], atol=1e-12)

    def test_velocity_grid(self):
        grid = velocity_grid((0.0, 1.0), 3)
        assert len(grid) == 7
        assert not any(np.all(v == 0) for v in grid)

    def test_null_orbit_from_exact_guess(self, torus):
        """(1, 1, 0) closes after one period and is null."""
        orbit = find_periodic_geodesic(torus.spacetime, GeodesicState([0, 0, 0], [1.0, 1.0, 0.0]))
        assert orbit.converged
        assert orbit.causal == "null"
        assert orbit.closure < 1e-8
        assert verify_orbit(torus.spacetime, orbit) < 1e-8

    def test_spacelike_orbit_is_unit_speed(self, torus):
        orbit = find_periodic_geodesic(torus.spacetime, GeodesicState([0, 0, 0], [0.0, 1.0, 1.0]))
        assert orbit.causal == "spacelike"
        assert orbit.norm == 1.0
        assert orbit.period == pytest.approx(np.sqrt(2.0), abs=1e-10)

    def test_causal_target(self, torus):
        """A closed orbit of the wrong causal type is reported but not converged."""
        null = find_periodic_geodesic(torus.spacetime, GeodesicState([0, 0, 0], [1.0, 1.0, 0.0]), causal="null")
        assert null.converged
        timelike = find_periodic_geodesic(torus.spacetime, GeodesicState([0, 0, 0], [1.0, 0.0, 0.0]), causal="spacelike")
        assert timelike.causal == "timelike"
        assert timelike.closure < 1e-8
        assert not timelike.converged

    def test_search_needs_periodic_coordinates(self, flat_space):
        with pytest.raises(PreconditionError, match="no periodic coordinate"):
            find_periodic_geodesic(flat_space, GeodesicState([0, 0, 0, 0], [1.0, 0, 0, 0]))

    def test_zero_velocity_guess(self, torus):
        with pytest.raises(ValueError, match="nonzero"):
            find_periodic_geodesic(torus.spacetime, GeodesicState([0, 0, 0], [0.0, 0.0, 0.0]))

    def test_empty_grid(self, torus):
        table = hunt_periodic_geodesics(torus.spacetime, levels=(0.0,))
        assert table.empty
        assert list(table.columns) == ["guess", "position", "velocity", "period", "closure", "causal", "converged"]

    def test_small_hunt(self, torus):
        table = hunt_periodic_geodesics(torus.spacetime, levels=(0.0, 1.0))
        assert len(table) == 7
        assert table["converged"].all()
        assert (table["closure"] < 1e-8).all()
        assert set(table["causal"]) == {"null", "spacelike", "timelike"}

    @pytest.mark.slow
    def test_full_hunt(self, torus):
        """The default grid finds null and spacelike orbits, each of which re-closes when re-integrated."""
        table = hunt_periodic_geodesics(torus.spacetime)
        converged = table[table["converged"]]
        assert len(converged) >= 3
        assert (converged["causal"] == "null").sum() >= 1
        assert (converged["causal"] == "spacelike").sum() >= 1
        assert (converged["closure"] < 1e-8).all()
