"""
Graph parametrizations of submanifolds cut out by level functions.

A GraphChart solves k constraints for k designated ("solved") coordinates;
the remaining coordinates are the chart coordinates y. The embedding x(y)
is expanded to order 3 by Newton iteration carried out in jet arithmetic,
so pulled-back metrics and their curvature come out exact to arithmetic
precision.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy import optimize

try:
    from .errors import ChartBreakdownError
    from .exprlang import CompiledExpr
    from .jets import Jet3, jet_einsum
    from .spacetime import ChartedSpacetime, CurvatureTensors, VectorField, christoffel_from_metric, curvature_from_metric
except ImportError:
    from errors import ChartBreakdownError
    from exprlang import CompiledExpr
    from jets import Jet3, jet_einsum
    from spacetime import ChartedSpacetime, CurvatureTensors, VectorField, christoffel_from_metric, curvature_from_metric

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-12


class GraphChart:
    """Chart on {C_1 = ... = C_k = 0} solving for the coordinates in ``solved``.

    ``kind`` selects the pulled-back metric: "induced" for i*g, "rigged" for
    i*g + ω⊗ω with ω the pullback of g(ζ, ·).
    """

    def __init__(
        self,
        spacetime: ChartedSpacetime,
        constraints: Sequence[CompiledExpr],
        solved: Sequence[int],
        kind: str = "induced",
        rigging: Optional[VectorField] = None,
        name: str = "chart",
    ):
        if len(constraints) != len(solved):
            raise ValueError("Need one solved coordinate per constraint")
        if kind not in ("induced", "rigged"):
            raise ValueError(f"Unknown chart metric kind '{kind}'")
        if kind == "rigged" and rigging is None:
            raise ValueError("A rigged chart needs the rigging field")
        self.spacetime = spacetime
        self.constraints = tuple(constraints)
        self.solved = tuple(solved)
        self.free = tuple(i for i in range(spacetime.n) if i not in self.solved)
        self.m = len(self.free)
        self.kind = kind
        self.rigging = rigging
        self.name = name

    # ----------------------------------------------------------- root solve

    def residual(self, point: Sequence[float]) -> np.ndarray:
        values = self.spacetime.reduce(point)
        return np.array([float(c(values)) for c in self.constraints])

    def constraint_jacobian(self, point: Sequence[float]) -> np.ndarray:
        """∂C/∂x_solved at a point (k × k)."""
        seeds = self.spacetime.seeds(point, 1)
        rows = []
        for c in self.constraints:
            value = c(seeds)
            rows.append(value.grad[list(self.solved)] if isinstance(value, Jet3) else np.zeros(len(self.solved)))
        return np.array(rows)

    def solve(self, point: Sequence[float]) -> np.ndarray:
        """Move the solved coordinates of ``point`` onto the submanifold."""
        point = np.array(point, dtype=float)
        if len(self.solved) == 1:
            point = self._bracket(point)
        point = self._newton(point)
        error = float(np.max(np.abs(self.residual(point))))
        if error > ROOT_TOLERANCE:
            raise ChartBreakdownError(f"{self.name}: root-solve stalled at |C| = {error:.3e}")
        if not self.spacetime.in_chart(point, slack=1e-9):
            raise ChartBreakdownError(f"{self.name}: root {np.round(point, 6).tolist()} leaves the chart")
        return point

    def _bracket(self, point: np.ndarray) -> np.ndarray:
        index = self.solved[0]
        start = point[index]

        def f(s):
            trial = point.copy()
            trial[index] = s
            return self.residual(trial)[0]

        f0 = f(start)
        if f0 == 0.0:
            return point
        lo, hi = self.spacetime.bounds[index]
        span = max(hi - lo, 1.0)
        step = 1e-6 * span
        while step <= 2.0 * span:
            for a, b in ((start - step, start), (start, start + step)):
                if f(a) * f(b) <= 0.0:
                    point = point.copy()
                    point[index] = optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
                    return point
            step *= 2.0
        raise ChartBreakdownError(f"{self.name}: no sign change of the constraint near {start:.6g}")

    def _newton(self, point: np.ndarray, iterations: int = 30) -> np.ndarray:
        solved = list(self.solved)
        for _ in range(iterations):
            residual = self.residual(point)
            if np.max(np.abs(residual)) <= 0.1 * ROOT_TOLERANCE:
                break
            jacobian = self.constraint_jacobian(point)
            try:
                step = np.linalg.solve(jacobian, residual)
            except np.linalg.LinAlgError as exc:
                raise ChartBreakdownError(f"{self.name}: graph coordinate is degenerate here") from exc
            point = point.copy()
            point[solved] -= step
            if np.max(np.abs(step)) < 1e-16:
                break
        return point

    # ------------------------------------------------------------ embedding

    def chart_point(self, point: Sequence[float]) -> np.ndarray:
        return np.asarray(point, dtype=float)[list(self.free)]

    def embed(self, y: Sequence[float], guess: Sequence[float]) -> np.ndarray:
        point = np.array(guess, dtype=float)
        point[list(self.free)] = y
        return self.solve(point)

    def embedding_jets(self, point: Sequence[float], order: int = 3) -> List[Jet3]:
        """x(y) around an on-submanifold point, as n jets in the m chart variables."""
        point = np.asarray(point, dtype=float)
        chart_seeds = Jet3.seeds(point[list(self.free)], order)
        jets: List[Optional[Jet3]] = [None] * self.spacetime.n
        for a, i in enumerate(self.free):
            jets[i] = chart_seeds[a]
        for i in self.solved:
            jets[i] = Jet3.constant(point[i], self.m, order)
        inverse = np.linalg.inv(self.constraint_jacobian(point))
        # chord iteration: each pass fixes one more Taylor order
        for _ in range(order + 1):
            reduced = self.spacetime.reduce_jets(jets)
            values = []
            for c in self.constraints:
                value = c(reduced)
                values.append(value if isinstance(value, Jet3) else Jet3.constant(value, self.m, order))
            correction = jet_einsum("ij,j->i", inverse, Jet3.stack(values))
            for j, i in enumerate(self.solved):
                jets[i] = jets[i] - correction[j]
        return jets

    def push_forward(self, point: Sequence[float], chart_vector: Sequence[float]) -> np.ndarray:
        return self.jacobian(point) @ np.asarray(chart_vector, dtype=float)

    def jacobian(self, point: Sequence[float]) -> np.ndarray:
        """J[i, a] = ∂x^i/∂y^a."""
        return Jet3.stack(self.embedding_jets(point, order=1)).grad

    def to_chart(self, vector: Sequence[float]) -> np.ndarray:
        """Chart components of an ambient vector tangent to the submanifold."""
        return np.asarray(vector, dtype=float)[list(self.free)]

    # --------------------------------------------------------------- metric

    def pullback(self, point: Sequence[float], order: int = 2):
        """(metric, ω) in chart coordinates from one embedding expansion; ω is None unless rigged."""
        x = self.embedding_jets(point, order + 1)
        dx = Jet3.stack(x).diff()  # dx[i, a] = ∂x^i/∂y^a
        g = self.spacetime.metric_jet(seeds=x)
        pulled = jet_einsum("ia,ij,jb->ab", dx, g, dx)
        omega = None
        if self.kind == "rigged":
            omega = self.omega_jet(point, order, x=x, g=g, dx=dx)
            pulled = pulled + jet_einsum("a,b->ab", omega, omega)
        return pulled, omega

    def metric_jet(self, point: Sequence[float], order: int = 2) -> Jet3:
        """Pulled-back metric in chart coordinates, exact through ``order``."""
        return self.pullback(point, order)[0]

    def omega_jet(self, point: Sequence[float], order: int = 2, x=None, g=None, dx=None) -> Jet3:
        """Pullback of α = g(ζ, ·) in chart coordinates."""
        if self.rigging is None:
            raise ValueError(f"{self.name}: no rigging to pull back")
        if x is None:
            x = self.embedding_jets(point, order + 1)
            dx = Jet3.stack(x).diff()
            g = self.spacetime.metric_jet(seeds=x)
        zeta = self.spacetime.field_jet(self.rigging, x)
        return jet_einsum("ij,j,ia->a", g, zeta, dx)

    def christoffel(self, point: Sequence[float]) -> np.ndarray:
        return christoffel_from_metric(self.metric_jet(point, order=1)).value

    def curvature(self, point: Sequence[float]) -> CurvatureTensors:
        return curvature_from_metric(self.metric_jet(point, order=2))

    def sectional_curvature(self, point: Sequence[float], u: Sequence[float], v: Sequence[float]) -> float:
        """Sectional curvature of the pulled-back metric for ambient tangent vectors u, v."""
        return self.curvature(point).sectional(self.to_chart(u), self.to_chart(v))

    def __repr__(self) -> str:
        solved = [self.spacetime.coordinates[i] for i in self.solved]
        return f"GraphChart({self.name!r}, kind={self.kind!r}, solved={solved})"


class InducedChart(GraphChart):
    """Chart on L = {F = 0} carrying the rigged metric g̃ = i*g + ω⊗ω."""

    def __init__(self, scenario, kind: str = "rigged"):
        super().__init__(
            scenario.spacetime,
            [scenario.level_function],
            [scenario.graph_coordinate],
            kind=kind,
            rigging=scenario.rigging,
            name=f"{scenario.name}/L",
        )


class LeafChart(GraphChart):
    """Chart on a screen leaf {F = 0, G = G(p)} carrying the induced metric i*g."""

    def __init__(self, scenario, point: Sequence[float]):
        if scenario.leaf_function is None:
            raise ValueError(f"Scenario '{scenario.name}' declares no leaf function")
        point = np.asarray(point, dtype=float)
        spacetime = scenario.spacetime
        level = float(scenario.leaf_function(spacetime.reduce(point)))
        leaf = _ShiftedExpr(scenario.leaf_function, level)
        second = _best_partner(spacetime, scenario.level_function, scenario.leaf_function, scenario.graph_coordinate, point)
        super().__init__(
            spacetime,
            [scenario.level_function, leaf],
            [scenario.graph_coordinate, second],
            kind="induced",
            name=f"{scenario.name}/leaf",
        )
        self.level = level


class _ShiftedExpr:
    """G − c, evaluated through the same closure as G."""

    def __init__(self, expr: CompiledExpr, level: float):
        self.expr = expr
        self.level = level

    def __call__(self, values):
        return self.expr(values) - self.level


def _best_partner(spacetime: ChartedSpacetime, level_function, leaf_function, graph: int, point: np.ndarray) -> int:
    """Second solved coordinate maximizing |det ∂(F, G)/∂(x_graph, x_j)|."""
    seeds = spacetime.seeds(point, 1)
    df, dg = level_function(seeds).grad, leaf_function(seeds).grad
    best, best_det = None, 0.0
    for j in range(spacetime.n):
        if j == graph:
            continue
        det = abs(df[graph] * dg[j] - df[j] * dg[graph])
        if det > best_det + 1e-12:
            best, best_det = j, det
    if best is None:
        raise ChartBreakdownError("Leaf function is not independent of the level function here")
    return best
