"""
Tests for graph charts on the hypersurface and on screen leaves.
"""

import numpy as np
import pytest

from charts import GraphChart, InducedChart, LeafChart
from errors import ChartBreakdownError


class TestGraphChart:
    """Root solving and embedding jets."""

    def test_projection_onto_plane(self, minkowski):
        """Solving t - x = 0 along t moves only the t coordinate."""
        chart = minkowski.hypersurface.chart
        point = chart.solve([0.9, 0.2, 0.1, -0.3])
        np.testing.assert_allclose(point, [0.2, 0.2, 0.1, -0.3], atol=1e-14)

    def test_projection_onto_cone(self, cone):
        point = cone.hypersurface.project([0.3, 0.6, 0.8, 0.0])
        assert point[0] == pytest.approx(1.0, abs=1e-12)

    def test_root_outside_chart(self, cone):
        """A root beyond the t bounds is a chart breakdown."""
        with pytest.raises(ChartBreakdownError):
            cone.hypersurface.project([1.0, 2.5, 2.5, 2.5])

    def test_unknown_metric_kind(self, minkowski):
        hypersurface = minkowski.hypersurface
        with pytest.raises(ValueError, match="kind"):
            GraphChart(hypersurface.spacetime, [hypersurface.level_function], [0], kind="conformal")

    def test_embedding_jets_of_plane(self, minkowski):
        """The graph t = x has the x seed as its t component."""
        chart = minkowski.hypersurface.chart
        jets = chart.embedding_jets([0.2, 0.2, 0.0, 0.0])
        assert chart.free == (1, 2, 3)
        np.testing.assert_allclose(jets[0].grad, [1.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(jets[0].hess, np.zeros((3, 3)), atol=1e-15)

    def test_embedding_jets_of_cone(self, cone):
        """t = r has gradient x/r and Hessian (I - x x^T / r^2) / r."""
        chart = cone.hypersurface.chart
        x = np.array([0.6, 0.8, 0.0])
        jets = chart.embedding_jets([1.0, *x])
        np.testing.assert_allclose(jets[0].grad, x, atol=1e-12)
        np.testing.assert_allclose(jets[0].hess, np.eye(3) - np.outer(x, x), atol=1e-12)

    def test_push_forward_is_tangent(self, cone):
        chart = cone.hypersurface.chart
        point = np.array([1.0, 0.6, 0.8, 0.0])
        vector = chart.push_forward(point, [0.0, 0.0, 1.0])
        df = np.array([1.0, -0.6, -0.8, 0.0])
        assert abs(df @ vector) < 1e-12


class TestPulledBackMetrics:
    """Rigged metric on L and induced metric on leaves."""

    def test_rigged_metric_of_plane_is_euclidean(self, minkowski):
        """i*g + ω⊗ω on t = x is the identity in (x, y, z)."""
        chart = InducedChart(minkowski.hypersurface)
        metric = chart.metric_jet([0.3, 0.3, 0.1, 0.2])
        np.testing.assert_allclose(metric.value, np.eye(3), atol=1e-14)
        assert np.max(np.abs(metric.grad)) < 1e-14

    def test_induced_metric_is_degenerate(self, minkowski):
        chart = InducedChart(minkowski.hypersurface, kind="induced")
        metric = chart.metric_jet([0.3, 0.3, 0.1, 0.2]).value
        assert abs(np.linalg.det(metric)) < 1e-14

    def test_rigged_curvature_of_horizon(self, desitter):
        """The rigged metric of the de Sitter horizon has unit curvature on the sphere."""
        chart = desitter.hypersurface.chart
        point = desitter.hypersurface.project([0.4, 0.95, 1.2, 0.7])
        th = point[2]
        # chart coordinates (u, th, ph)
        tensors = chart.curvature(point)
        u_plane = tensors.sectional([0.0, 1.0, 0.0], [0.0, 0.0, 1.0 / np.sin(th)])
        assert u_plane == pytest.approx(1.0, abs=1e-9)

    def test_leaf_of_plane(self, minkowski):
        """Leaves {t = x = c} carry the flat metric dy^2 + dz^2."""
        chart = LeafChart(minkowski.hypersurface, [0.4, 0.4, 0.0, 0.1])
        assert chart.level == pytest.approx(0.4)
        metric = chart.metric_jet([0.4, 0.4, 0.0, 0.1])
        np.testing.assert_allclose(metric.value, np.eye(2), atol=1e-14)

    def test_leaf_needs_leaf_function(self, cone):
        with pytest.raises(ValueError, match="leaf function"):
            LeafChart(cone.hypersurface, [1.0, 0.6, 0.8, 0.0])
