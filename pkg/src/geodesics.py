"""
Geodesics of the ambient metric g, the rigged metric g̃ on L and the
induced metric on a screen leaf; the correspondence checks between them;
and a shooting search for periodic geodesics on compact quotients.

Rigged and leaf geodesics are integrated in graph-chart coordinates, so
they stay on L (or on the leaf) by construction.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import linalg, optimize
from scipy.integrate import solve_ivp

try:
    from .charts import GraphChart, LeafChart
    from .errors import ChartBreakdownError, ChartExitError, PreconditionError, StepSizeUnderflowError, TangencyError
    from .jets import Jet3
    from .rigging import (
        NullHypersurfaceScenario,
        build_frame,
        cbar,
        max_abs_b,
        screen_fundamental_C,
        screen_integrability_residual,
        TOTALLY_GEODESIC_THRESHOLD,
    )
    from .spacetime import ChartedSpacetime, FieldLike, christoffel, christoffel_from_metric
except ImportError:
    from charts import GraphChart, LeafChart
    from errors import ChartBreakdownError, ChartExitError, PreconditionError, StepSizeUnderflowError, TangencyError
    from jets import Jet3
    from rigging import (
        NullHypersurfaceScenario,
        build_frame,
        cbar,
        max_abs_b,
        screen_fundamental_C,
        screen_integrability_residual,
        TOTALLY_GEODESIC_THRESHOLD,
    )
    from spacetime import ChartedSpacetime, FieldLike, christoffel, christoffel_from_metric

logger = logging.getLogger(__name__)

METRICS = ("ambient", "rigged", "leaf")
RTOL = 1e-11
ATOL = 1e-12
ON_SURFACE_TOLERANCE = 1e-8
CAUSAL_THRESHOLD = 1e-9
CLOSURE_TOLERANCE = 1e-8
INTEGRABILITY_THRESHOLD = 1e-7
SCREEN_C_THRESHOLD = 1e-8
CBAR_VANISHING = 1e-8
CBAR_NONZERO = 1e-4
DEFECT_RATIO = 1e-3
FD_STEP = 1e-6

Target = Union[ChartedSpacetime, NullHypersurfaceScenario]


@dataclass
class GeodesicState:
    """Initial data: ambient position and velocity, the metric to follow, the start parameter."""

    position: np.ndarray
    velocity: np.ndarray
    metric: str = "ambient"
    parameter: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        if self.metric not in METRICS:
            raise ValueError(f"Unknown metric selector '{self.metric}', expected one of {METRICS}")


@dataclass
class Trajectory:
    """Samples of an integrated geodesic, always in ambient coordinates."""

    metric: str
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray
    energies: np.ndarray

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energies - self.energies[0])))

    def state(self, index: int = -1) -> GeodesicState:
        return GeodesicState(self.positions[index], self.velocities[index], self.metric, float(self.times[index]))


@dataclass
class PeriodicOrbitResult:
    position: np.ndarray
    velocity: np.ndarray
    period: float
    closure: float
    causal: str
    norm: float
    converged: bool
    trace: List[Dict[str, float]] = field(default_factory=list)


# --------------------------------------------------------------- integration


def _spacetime(target: Target) -> ChartedSpacetime:
    return target.spacetime if isinstance(target, NullHypersurfaceScenario) else target


def _ambient_christoffel(spacetime: ChartedSpacetime) -> Callable[[np.ndarray], np.ndarray]:
    if spacetime.has_constant_metric:
        zeros = np.zeros((spacetime.n,) * 3)
        return lambda x: zeros
    return lambda x: christoffel(spacetime, x).christoffel


class _ChartFlow:
    """Geodesic flow in graph-chart coordinates; carries the last ambient point as the root-solve guess."""

    def __init__(self, chart: GraphChart, start: np.ndarray):
        self.chart = chart
        self.guess = np.array(start, dtype=float)
        self.parameter = 0.0

    def embed(self, y: np.ndarray) -> np.ndarray:
        point = self.chart.embed(y, self.guess)
        self.guess = point
        return point

    def rhs(self, t: float, state: np.ndarray) -> np.ndarray:
        self.parameter = t
        m = self.chart.m
        y, dy = state[:m], state[m:]
        gamma = self.chart.christoffel(self.embed(y))
        return np.concatenate([dy, -np.einsum("kij,i,j->k", gamma, dy, dy)])


def _bounds_event(bounds: np.ndarray, indices: Sequence[int]):
    def event(t, state):
        y = state[: len(bounds)]
        if not indices:
            return 1.0
        return float(min(min(y[i] - bounds[i, 0], bounds[i, 1] - y[i]) for i in indices))

    event.terminal = True
    event.direction = -1
    return event


def _chart_for(target: Target, state: GeodesicState) -> Optional[GraphChart]:
    if state.metric == "ambient":
        return None
    if not isinstance(target, NullHypersurfaceScenario):
        raise PreconditionError(f"{state.metric} geodesics need a hypersurface scenario")
    if state.metric == "rigged":
        return target.chart
    return LeafChart(target, state.position)


def _check_initial_data(target: Target, state: GeodesicState, chart: Optional[GraphChart]) -> None:
    spacetime = _spacetime(target)
    if not spacetime.in_chart(state.position):
        raise ChartExitError("Initial point is outside the chart", state.parameter)
    if chart is None:
        return
    residual = float(np.max(np.abs(chart.residual(state.position))))
    if residual > ON_SURFACE_TOLERANCE:
        raise TangencyError(f"Initial point is not on the {state.metric} submanifold (|C| = {residual:.3e})")
    seeds = spacetime.seeds(state.position, 1)
    gradients = np.array([c(seeds).grad for c in chart.constraints])
    drift = float(np.max(np.abs(gradients @ state.velocity)))
    if drift > ON_SURFACE_TOLERANCE * max(1.0, float(np.max(np.abs(state.velocity)))):
        raise TangencyError(f"Initial velocity is not tangent to the {state.metric} submanifold (|dC(v)| = {drift:.3e})")


def integrate(
    target: Target,
    state: GeodesicState,
    length: float,
    samples: int = 21,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Trajectory:
    """Integrate the geodesic equation of the selected metric over a parameter length (negative runs backward)."""
    spacetime = _spacetime(target)
    chart = _chart_for(target, state)
    _check_initial_data(target, state, chart)
    t0 = state.parameter
    times = np.linspace(t0, t0 + length, max(samples, 2))
    if chart is None:
        gamma = _ambient_christoffel(spacetime)

        def rhs(t, z):
            x, v = z[: spacetime.n], z[spacetime.n:]
            return np.concatenate([v, -np.einsum("kij,i,j->k", gamma(x), v, v)])

        bounded = [i for i in range(spacetime.n) if i not in spacetime.periods]
        event = _bounds_event(spacetime.bounds, bounded)
        start = np.concatenate([state.position, state.velocity])
        flow = None
    else:
        flow = _ChartFlow(chart, state.position)
        rhs = flow.rhs
        event = _bounds_event(spacetime.bounds[list(chart.free)], [
            a for a, i in enumerate(chart.free) if i not in spacetime.periods
        ])
        start = np.concatenate([chart.chart_point(state.position), chart.to_chart(state.velocity)])
    try:
        solution = solve_ivp(
            rhs, (t0, t0 + length), start, method="DOP853", t_eval=times, events=event, rtol=rtol, atol=atol
        )
    except ChartBreakdownError as exc:
        raise ChartExitError(f"Geodesic left the {state.metric} chart ({exc})", flow.parameter) from exc
    if solution.status == -1:
        raise StepSizeUnderflowError(f"Integration failed: {solution.message}")
    if solution.status == 1:
        raise ChartExitError("Geodesic left the chart", float(solution.t_events[0][0]))
    logger.debug("Integrated %s geodesic over %.4g with %d RHS evaluations", state.metric, length, solution.nfev)
    return _sample(spacetime, chart, state, solution.t, solution.y.T)


def _sample(spacetime, chart, state, times, states) -> Trajectory:
    n = spacetime.n
    positions, velocities, accelerations, energies = [], [], [], []
    guess = state.position
    gamma = _ambient_christoffel(spacetime)
    for z in states:
        if chart is None:
            x, v = z[:n], z[n:]
            a = -np.einsum("kij,i,j->k", gamma(x), v, v)
            energy = float(v @ spacetime.metric(x) @ v)
        else:
            m = chart.m
            y, dy = z[:m], z[m:]
            x = chart.embed(y, guess)
            guess = x
            embedding = Jet3.stack(chart.embedding_jets(x, order=2))
            metric = chart.metric_jet(x, order=1)
            from_chart = embedding.grad  # [i, a]
            ddy = -np.einsum("kij,i,j->k", christoffel_from_metric(metric).value, dy, dy)
            v = from_chart @ dy
            a = from_chart @ ddy + np.einsum("iab,a,b->i", embedding.hess, dy, dy)
            energy = float(dy @ metric.value @ dy)
        positions.append(x)
        velocities.append(v)
        accelerations.append(a)
        energies.append(energy)
    return Trajectory(
        metric=state.metric,
        times=np.asarray(times),
        positions=np.array(positions),
        velocities=np.array(velocities),
        accelerations=np.array(accelerations),
        energies=np.array(energies),
    )


# ------------------------------------------------------------- conservation


def killing_energy(spacetime: ChartedSpacetime, trajectory: Trajectory, field_: FieldLike) -> np.ndarray:
    """g(γ′, Z) at the trajectory samples; constant along ambient geodesics for Killing Z."""
    values = []
    for x, v in zip(trajectory.positions, trajectory.velocities):
        seeds = spacetime.seeds(x, 1)
        z = spacetime.field_jet(field_, seeds).value
        values.append(float(v @ spacetime.metric(x) @ z))
    return np.array(values)


def reversibility_residual(target: Target, state: GeodesicState, length: float, **control) -> float:
    """Integrate forward, reverse the velocity, integrate back; distance to the start."""
    forward = integrate(target, state, length, samples=2, **control)
    end = forward.state()
    back = integrate(target, GeodesicState(end.position, -end.velocity, state.metric), length, samples=2, **control)
    final = back.state()
    return float(max(np.max(np.abs(final.position - state.position)), np.max(np.abs(final.velocity + state.velocity))))


# ------------------------------------------------------------ correspondence


def geodesic_defects(scenario: NullHypersurfaceScenario, trajectory: Trajectory, leaf: Optional[LeafChart] = None):
    """Per-sample |γ̈ + Γ(γ′,γ′)| for the ambient, rigged and (if given) leaf metrics."""
    spacetime = scenario.spacetime
    chart = scenario.chart
    ambient_gamma = _ambient_christoffel(spacetime)
    ambient, rigged, on_leaf = [], [], []
    for x, v, a in zip(trajectory.positions, trajectory.velocities, trajectory.accelerations):
        level = abs(float(scenario.level_function(spacetime.reduce(x))))
        if level > ON_SURFACE_TOLERANCE:
            raise TangencyError(f"Trajectory leaves L (|F| = {level:.3e})")
        ambient.append(float(np.linalg.norm(a + np.einsum("kij,i,j->k", ambient_gamma(x), v, v))))
        for graph, out in ((chart, rigged), (leaf, on_leaf)):
            if graph is None:
                continue
            y_dot, y_ddot = graph.to_chart(v), graph.to_chart(a)
            gamma = graph.christoffel(x)
            out.append(float(np.linalg.norm(y_ddot + np.einsum("kij,i,j->k", gamma, y_dot, y_dot))))
    return {"ambient": np.array(ambient), "rigged": np.array(rigged), "leaf": np.array(on_leaf)}


def cross_metric_residual(scenario: NullHypersurfaceScenario, trajectory: Trajectory) -> Dict[str, float]:
    """Geodesic defects of a curve on L in g and in g̃, with the sampled max |C̄(γ′, γ′)|."""
    defects = geodesic_defects(scenario, trajectory)
    worst_cbar = 0.0
    for x, v in zip(trajectory.positions, trajectory.velocities):
        frame = build_frame(scenario, x, order=2)
        worst_cbar = max(worst_cbar, abs(cbar(frame, v, v)))
    return {
        "ambient": float(np.max(defects["ambient"])),
        "rigged": float(np.max(defects["rigged"])),
        "cbar": worst_cbar,
    }


def cbar_criterion(scenario: NullHypersurfaceScenario, trajectory: Trajectory) -> Dict[str, object]:
    """Both directions of the C̄ criterion on one g̃-geodesic.

    Where C̄(γ′, γ′) vanishes the residual is the ambient geodesic defect
    ("if"). Where it is clearly non-zero the residual is the fraction by which
    the ambient defect falls short of DEFECT_RATIO · max |C̄| ("only_if").
    In between there is no verdict and ``direction`` is None.
    """
    result: Dict[str, object] = dict(cross_metric_residual(scenario, trajectory))
    worst, ambient = result["cbar"], result["ambient"]
    if worst < CBAR_VANISHING:
        result.update(direction="if", residual=ambient)
    elif worst >= CBAR_NONZERO:
        result.update(direction="only_if", residual=max(0.0, 1.0 - ambient / (DEFECT_RATIO * worst)))
    else:
        result.update(direction=None, residual=None)
    return result


def _prop3_preconditions(scenario: NullHypersurfaceScenario, points: Sequence[np.ndarray]) -> None:
    for point in points:
        frame = build_frame(scenario, point)
        integrability = screen_integrability_residual(frame)
        if integrability > INTEGRABILITY_THRESHOLD:
            raise PreconditionError(f"screen is not integrable (|g̃([X,Y], ξ)| = {integrability:.3g})")
        screen_c = max(
            (
                abs(screen_fundamental_C(frame, x, x, check=False))
                for x in list(frame.screen)
                + [(a + b) / np.sqrt(2.0) for a, b in itertools.combinations(frame.screen, 2)]
            ),
            default=0.0,
        )
        if screen_c > SCREEN_C_THRESHOLD:
            raise PreconditionError(f"C(X, X) does not vanish on the screen (max = {screen_c:.3g})")
        b = max_abs_b(frame)
        if b > TOTALLY_GEODESIC_THRESHOLD:
            raise PreconditionError(f"not totally geodesic (max |B| = {b:.3g})")


def prop3_equivalence_check(
    scenario: NullHypersurfaceScenario,
    point: Sequence[float],
    velocity: Sequence[float],
    length: float = 1.0,
    samples: int = 11,
    precondition_samples: int = 5,
    seed: int = 42,
    **control,
) -> Dict[str, float]:
    """Integrate one initial condition tangent to a screen leaf in g̃, g and the leaf metric; pairwise discrepancies."""
    point = np.asarray(point, dtype=float)
    _prop3_preconditions(scenario, [point] + list(scenario.samples(precondition_samples, seed)))
    trajectories = {
        metric: integrate(scenario, GeodesicState(point, velocity, metric), length, samples=samples, **control)
        for metric in METRICS
    }
    result = {}
    for first, second in itertools.combinations(METRICS, 2):
        a, b = trajectories[first], trajectories[second]
        result[f"{first}_{second}"] = float(
            max(np.max(np.abs(a.positions - b.positions)), np.max(np.abs(a.velocities - b.velocities)))
        )
    return result


def xi_orbit_views(scenario: NullHypersurfaceScenario, point: Sequence[float], length: float, samples: int = 21) -> Dict[str, float]:
    """The integral curve of ξ through a point next to the ambient geodesic with initial velocity ξ."""
    spacetime = scenario.spacetime

    def xi(x):
        seeds = spacetime.seeds(x, 1)
        df = scenario.level_function(seeds).grad
        grad_f = np.linalg.solve(spacetime.metric(x), df)
        return grad_f / float(df @ scenario.rigging.at(spacetime.reduce(x)))

    point = np.asarray(point, dtype=float)
    times = np.linspace(0.0, length, samples)
    flow = solve_ivp(lambda t, x: xi(x), (0.0, length), point, method="DOP853", t_eval=times, rtol=RTOL, atol=ATOL)
    if flow.status == -1:
        raise StepSizeUnderflowError(f"ξ-flow integration failed: {flow.message}")
    geodesic = integrate(scenario, GeodesicState(point, xi(point)), length, samples=samples)
    return {
        "flow_closure": wrapped_distance(spacetime, flow.y[:, -1] - point),
        "geodesic_closure": wrapped_distance(spacetime, geodesic.positions[-1] - point),
        "separation": float(np.max(np.abs(flow.y.T - geodesic.positions))),
        "xi_geodesic_defect": float(np.max(geodesic_defects(scenario, geodesic)["ambient"])),
    }


# --------------------------------------------------------- periodic search


def wrap_displacement(spacetime: ChartedSpacetime, delta: np.ndarray) -> np.ndarray:
    """Reduce periodic components of a displacement into [−P/2, P/2)."""
    delta = np.array(delta, dtype=float)
    for i, period in spacetime.periods.items():
        delta[i] = (delta[i] + 0.5 * period) % period - 0.5 * period
    return delta


def wrapped_distance(spacetime: ChartedSpacetime, delta: np.ndarray) -> float:
    return float(np.linalg.norm(wrap_displacement(spacetime, delta)))


def causal_character(norm: float, threshold: float = CAUSAL_THRESHOLD) -> str:
    if norm < -threshold:
        return "timelike"
    if norm > threshold:
        return "spacelike"
    return "null"


class _Shooting:
    """Closure map of the ambient geodesic flow over (x0, v, T)."""

    def __init__(self, spacetime: ChartedSpacetime, null_target: bool, rtol: float, atol: float):
        self.spacetime = spacetime
        self.n = spacetime.n
        self.null_target = null_target
        self.rtol = rtol
        self.atol = atol

    def unpack(self, z: np.ndarray):
        n = self.n
        raw = z[n: 2 * n]
        return z[:n], raw / np.linalg.norm(raw), float(z[-1])

    def residual(self, z: np.ndarray) -> np.ndarray:
        x0, v0, period = self.unpack(z)
        trajectory = integrate(
            self.spacetime, GeodesicState(x0, v0), period, samples=2, rtol=self.rtol, atol=self.atol
        )
        parts = [
            wrap_displacement(self.spacetime, trajectory.positions[-1] - x0),
            trajectory.velocities[-1] - v0,
        ]
        if self.null_target:
            parts.append([float(v0 @ self.spacetime.metric(x0) @ v0)])
        return np.concatenate(parts)

    def closure(self, z: np.ndarray) -> float:
        n = self.n
        r = self.residual(z)
        value = float(np.linalg.norm(r[:n]) + np.linalg.norm(r[n: 2 * n]))
        return value + (abs(r[-1]) if self.null_target else 0.0)


def find_periodic_geodesic(
    spacetime: ChartedSpacetime,
    guess: GeodesicState,
    period: float = 1.0,
    causal: Optional[str] = None,
    budget: int = 400,
    newton_steps: int = 8,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> PeriodicOrbitResult:
    """Shoot for γ(T) ≡ γ(0) and γ′(T) = γ′(0) on a quotient.

    The velocity is searched on the Euclidean unit sphere and the period in
    [T₀/2, 2T₀] with T₀ = period·‖v_guess‖. A Nelder–Mead stage runs unless
    the guess already closes, then Gauss–Newton with forward-difference
    Jacobians polishes the result.
    """
    if not spacetime.periods:
        raise PreconditionError(f"'{spacetime.name}' has no periodic coordinate")
    if period <= 0:
        raise ValueError("The period guess must be positive")
    speed = float(np.linalg.norm(guess.velocity))
    if speed == 0.0:
        raise ValueError("The velocity guess must be nonzero")
    if causal not in (None, "null", "timelike", "spacelike"):
        raise ValueError(f"Unknown causal target '{causal}'")
    t0 = period * speed
    shooting = _Shooting(spacetime, causal == "null", rtol, atol)
    z = np.concatenate([guess.position, guess.velocity / speed, [t0]])
    trace = []
    closure = shooting.closure(z)
    trace.append({"stage": "guess", "closure": closure})

    def clamp(z):
        z = np.array(z, dtype=float)
        z[-1] = float(np.clip(z[-1], 0.5 * t0, 2.0 * t0))
        return z

    if closure >= CLOSURE_TOLERANCE:
        result = optimize.minimize(
            lambda w: shooting.closure(clamp(w)),
            z,
            method="Nelder-Mead",
            options={"maxfev": budget, "xatol": 1e-12, "fatol": 1e-14},
        )
        z = clamp(result.x)
        closure = shooting.closure(z)
        trace.append({"stage": "simplex", "closure": closure, "evaluations": int(result.nfev)})
    for step in range(newton_steps):
        if closure < 1e-13:
            break
        residual = shooting.residual(z)
        jacobian = np.empty((len(residual), len(z)))
        for j in range(len(z)):
            shifted = z.copy()
            shifted[j] += FD_STEP
            jacobian[:, j] = (shooting.residual(shifted) - residual) / FD_STEP
        delta, *_ = linalg.lstsq(jacobian, -residual)
        candidate = clamp(z + delta)
        candidate_closure = shooting.closure(candidate)
        if candidate_closure >= closure:
            break
        z, closure = candidate, candidate_closure
        trace.append({"stage": f"newton{step + 1}", "closure": closure})
    x0, v0, length = shooting.unpack(z)
    norm = float(v0 @ spacetime.metric(x0) @ v0)
    character = causal_character(norm)
    if character != "null":
        # unit-speed parametrization of the same orbit
        scale = np.sqrt(abs(norm))
        v0, length, norm = v0 / scale, length * scale, float(np.sign(norm))
    converged = closure < CLOSURE_TOLERANCE and (causal is None or causal == character)
    logger.debug("Periodic search from %s: closure %.3e, %s", guess.velocity.tolist(), closure, character)
    return PeriodicOrbitResult(
        position=spacetime.reduce(x0),
        velocity=v0,
        period=length,
        closure=closure,
        causal=character,
        norm=norm,
        converged=converged,
        trace=trace,
    )


def verify_orbit(spacetime: ChartedSpacetime, orbit: PeriodicOrbitResult) -> float:
    """Closure error of a reported orbit, re-integrated from scratch."""
    trajectory = integrate(spacetime, GeodesicState(orbit.position, orbit.velocity), orbit.period, samples=2)
    return wrapped_distance(spacetime, trajectory.positions[-1] - orbit.position) + float(
        np.linalg.norm(trajectory.velocities[-1] - orbit.velocity)
    )


def velocity_grid(levels: Sequence[float], n: int) -> List[np.ndarray]:
    """All velocity guesses with components from ``levels``, excluding the zero vector."""
    return [np.array(v, dtype=float) for v in itertools.product(levels, repeat=n) if any(v)]


def hunt_periodic_geodesics(
    spacetime: ChartedSpacetime,
    levels: Sequence[float] = (-1.0, 0.0, 1.0),
    origin: Optional[Sequence[float]] = None,
    period: float = 1.0,
    budget: int = 400,
    causal: Optional[str] = None,
) -> pd.DataFrame:
    """Run the periodic search over a velocity grid; one row per distinct orbit, best closure first."""
    origin = np.zeros(spacetime.n) if origin is None else np.asarray(origin, dtype=float)
    rows = []
    for cell in velocity_grid(levels, spacetime.n):
        try:
            orbit = find_periodic_geodesic(spacetime, GeodesicState(origin, cell), period, causal=causal, budget=budget)
        except (ChartExitError, StepSizeUnderflowError) as exc:
            logger.info("Grid cell %s failed: %s", cell.tolist(), exc)
            rows.append({"guess": cell, "position": None, "velocity": None, "period": np.nan,
                         "closure": np.inf, "causal": "failed", "converged": False})
            continue
        rows.append({
            "guess": cell,
            "position": orbit.position,
            "velocity": orbit.velocity,
            "period": orbit.period,
            "closure": orbit.closure,
            "causal": orbit.causal,
            "converged": orbit.converged,
        })
    columns = ["guess", "position", "velocity", "period", "closure", "causal", "converged"]
    if not rows:
        return pd.DataFrame(columns=columns)
    distinct: List[Dict] = []
    for row in rows:
        if row["converged"] and any(_same_orbit(spacetime, row, other) for other in distinct if other["converged"]):
            continue
        distinct.append(row)
    distinct.sort(key=lambda r: (r["closure"], tuple(r["guess"])))
    table = pd.DataFrame(distinct, columns=columns)
    for name in ("guess", "position", "velocity"):
        table[name] = table[name].map(lambda v: None if v is None else tuple(np.round(v, 12).tolist()))
    return table.reset_index(drop=True)


def _same_orbit(spacetime: ChartedSpacetime, a: Dict, b: Dict, tolerance: float = 1e-6) -> bool:
    return (
        wrapped_distance(spacetime, a["position"] - b["position"]) < tolerance
        and float(np.linalg.norm(a["velocity"] - b["velocity"])) < tolerance
        and abs(a["period"] - b["period"]) < tolerance
    )
