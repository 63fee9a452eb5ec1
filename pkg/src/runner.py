"""
Check runner: loads a scenario, runs the check suites over seeded samples
and assembles the CheckReport.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

try:
    from .catalog import Scenario, resolve, sample_check
    from .errors import ChartExitError, NullRigError, PreconditionError, ScenarioValidationError, StepSizeUnderflowError
    from .geodesics import (
        ATOL,
        CBAR_NONZERO,
        RTOL,
        GeodesicState,
        cbar_criterion,
        cross_metric_residual,
        hunt_periodic_geodesics,
        integrate,
        killing_energy,
        prop3_equivalence_check,
        reversibility_residual,
        verify_orbit,
        PeriodicOrbitResult,
    )
    from .report import CheckRecord, CheckReport
    from .rigging import (
        TOTALLY_GEODESIC_THRESHOLD,
        RiggedFrame,
        build_frame,
        cbar,
        eq1_residual,
        frame_invariants,
        max_abs_b,
        radical_degeneracy,
        rotation_one_form_tau,
        rotation_one_form_tau_alt,
        second_fundamental_B,
        second_fundamental_B_extension,
        shape_consistency,
    )
    from .sampling import halton_points
    from .spacetime import (
        KILLING_THRESHOLD,
        curvature_invariants,
        hessian_identity_residual,
        killing_plane_identity,
        killing_residual,
        ncc_report,
    )
    from .transverse import (
        classify_curvature,
        connection_properties,
        curvat_identity_check,
        domega_two_route,
        flow_residual,
        is_closed,
        killing_xi_residual,
        pullback_consistency,
        sample_planes,
        transverse_connection,
        transverse_curvature_literal,
        transverse_curvature_tensor,
        transverse_data,
    )
except ImportError:
    from catalog import Scenario, resolve, sample_check
    from errors import ChartExitError, NullRigError, PreconditionError, ScenarioValidationError, StepSizeUnderflowError
    from geodesics import (
        ATOL,
        CBAR_NONZERO,
        RTOL,
        GeodesicState,
        cbar_criterion,
        cross_metric_residual,
        hunt_periodic_geodesics,
        integrate,
        killing_energy,
        prop3_equivalence_check,
        reversibility_residual,
        verify_orbit,
        PeriodicOrbitResult,
    )
    from report import CheckRecord, CheckReport
    from rigging import (
        TOTALLY_GEODESIC_THRESHOLD,
        RiggedFrame,
        build_frame,
        cbar,
        eq1_residual,
        frame_invariants,
        max_abs_b,
        radical_degeneracy,
        rotation_one_form_tau,
        rotation_one_form_tau_alt,
        second_fundamental_B,
        second_fundamental_B_extension,
        shape_consistency,
    )
    from sampling import halton_points
    from spacetime import (
        KILLING_THRESHOLD,
        curvature_invariants,
        hessian_identity_residual,
        killing_plane_identity,
        killing_residual,
        ncc_report,
    )
    from transverse import (
        classify_curvature,
        connection_properties,
        curvat_identity_check,
        domega_two_route,
        flow_residual,
        is_closed,
        killing_xi_residual,
        pullback_consistency,
        sample_planes,
        transverse_connection,
        transverse_curvature_literal,
        transverse_curvature_tensor,
        transverse_data,
    )

logger = logging.getLogger(__name__)

SUITES = ("frame", "induced", "flow", "transverse", "curvat", "geodesic", "periodic", "expected")

# check id -> (identity being checked, default tolerance)
CHECKS: Dict[str, tuple] = {
    "frame.invariants": ("g(ξ,ξ)=0, g(ξ,ζ)=1, g(N,N)=0, g(N,ξ)=1, S ⟂ {ξ, N}, g̃(T_i,T_j)=δ_ij", 1e-9),
    "frame.bianchi": ("R(X,Y)Z + R(Y,Z)X + R(Z,X)Y = 0 and antisymmetries", 1e-8),
    "frame.radical_degeneracy": ("B(ξ, ·) = 0", 1e-8),
    "induced.rigged_metric": ("g̃ = i*g + ω⊗ω, chart vs frame", 1e-9),
    "induced.eq1": ("C(U,X) = −g(∇_U ζ, X) − ½g(ζ,ζ)B(U,X)", 1e-8),
    "induced.b_two_route": ("B(U,V) = −g(∇_U ξ, V) = g(∇_U V, ξ)", 1e-8),
    "induced.b_symmetry": ("B(U,V) = B(V,U)", 1e-8),
    "induced.tau_two_route": ("τ(U) = g(∇_U ζ, ξ) = −g(∇_U ξ, N)", 1e-8),
    "induced.shape_consistency": ("g(A*_ξ U, X) = B(U,X), A*_ξ U ∈ S, A_N U tangent", 1e-8),
    "flow.lemma": ("(L_ξ g̃)(X,Y) = −2B(X,Y)", 1e-7),
    "flow.killing_xi": ("closed ζ, B = 0 ⇒ L_ξ g̃ = 0", 1e-8),
    "flow.xi_parallel": ("closed ζ, B = 0 ⇒ ∇̃ξ = 0", 1e-7),
    "flow.hessian": ("Hess f(X,Y) = −g(R(X,Z)Z,Y) + g(∇_X Z, ∇_Y Z), f = ½g(Z,Z)", 1e-6),
    "flow.killing_plane": ("ξ(ξ(f)) = K(ζ,ξ) + g(∇_ξ ζ, ∇_ξ ζ)", 1e-7),
    "transverse.connection": ("∇^T = ∇* on the screen frame", 1e-7),
    "transverse.metric_compat": ("∇* is g̃-compatible on S", 1e-8),
    "transverse.torsion": ("∇*_X Y − ∇*_Y X = P[X,Y]", 1e-8),
    "transverse.domega_two_route": ("dω(X,Y) = g̃(∇̃_X ξ, Y) − g̃(∇̃_Y ξ, X)", 1e-8),
    "transverse.ricci_symmetry": ("Ric^T is symmetric", 1e-8),
    "transverse.scalar_trace": ("S^T = tr ρ^T", 1e-9),
    "transverse.ricci_bound": ("Ric^T(X,X) = Ric(X,X) − 2g(R(ξ,X)X,N)", 1e-5),
    "transverse.curvature_routes": ("K^T from R^T(X,Y)Y = K^T from the curvature tensor", 1e-7),
    "transverse.closed_domega": ("closed ζ ⇒ dω = 0", 1e-8),
    "curvat.rigged": ("K^T(X,Y) = K̃(X,Y) + ¾dω(X,Y)²", 1e-5),
    "curvat.ambient": ("K^T(X,Y) = K(X,Y)", 1e-5),
    "curvat.constant_mean": ("constant K ⇒ K^T = c", 1e-4),
    "curvat.constant_std": ("constant K ⇒ K^T constant", 1e-5),
    "geodesic.energy": ("g(γ′,γ′) and g(γ′,Z) conserved", 1e-8),
    "geodesic.reversibility": ("forward then backward returns to the start", 1e-8),
    "geodesic.cbar_criterion": ("C̄(γ′,γ′) = 0 ⇒ g̃-geodesic is a g-geodesic", 1e-6),
    "geodesic.cbar_only_if": ("C̄(γ′,γ′) ≠ 0 ⇒ g̃-geodesic is not a g-geodesic", 1e-6),
    "geodesic.prop3": ("g-, g̃- and leaf geodesics coincide on screen leaves", 1e-6),
    "geodesic.tolerance_stability": ("C̄ and three-metric verdicts unchanged at half the integration tolerances", 0.5),
    "periodic.hunt": ("γ′(0) = γ′(T)", 1e-8),
}

GEODESIC_SAMPLES = 10
GEODESIC_LENGTH = 0.5
XI_PROBE_LENGTH = 0.1


def _format_b(value: float) -> str:
    return f"{value:.1f}" if value >= 0.1 else f"{value:.3g}"


@dataclass
class _Context:
    """Per-run state shared by the suites."""

    scenario: Scenario
    samples: int
    seed: int
    tolerances: Dict[str, float]
    points: List[np.ndarray] = field(default_factory=list)
    frames: List[RiggedFrame] = field(default_factory=list)
    facts: Dict[str, object] = field(default_factory=dict)

    def rng(self, suite: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, SUITES.index(suite)])

    def record(self, check_id: str, residuals, detail=None) -> CheckRecord:
        anchor, _ = CHECKS[check_id]
        return CheckRecord.measured(check_id, anchor, check_id.split(".")[0], self.tolerances[check_id], residuals, detail)

    def skip(self, check_id: str, reason: str) -> CheckRecord:
        anchor, _ = CHECKS[check_id]
        return CheckRecord.skipped(check_id, anchor, check_id.split(".")[0], self.tolerances[check_id], reason)

    def fail(self, check_id: str, reason: str) -> CheckRecord:
        anchor, _ = CHECKS[check_id]
        return CheckRecord.failed(check_id, anchor, check_id.split(".")[0], self.tolerances[check_id], reason)

    @property
    def hypersurface(self):
        return self.scenario.hypersurface

    @property
    def totally_geodesic(self) -> bool:
        return bool(self.facts.get("totally_geodesic"))

    @property
    def closed(self) -> bool:
        return bool(self.facts.get("closed_rigging"))

    def not_totally_geodesic(self) -> str:
        return f"not totally geodesic (max |B| = {_format_b(self.facts['max_abs_B'])})"


class CheckRunner:
    """Runs check suites on one scenario at a time."""

    def __init__(self, verbose: bool = True):
        self.scenario: Optional[Scenario] = None
        self.verbose = verbose

    def _say(self, message: str) -> None:
        if self.verbose:
            print(message)

    def load_scenario(self, name_or_path: str) -> Scenario:
        """Load a built-in scenario by name, or a YAML/JSON scenario file."""
        self.scenario = resolve(name_or_path)
        self._say(f"Scenario loaded: {self.scenario.name} (dimension {self.scenario.spacetime.n})")
        return self.scenario

    def set_scenario(self, scenario: Scenario) -> None:
        self.scenario = scenario

    def describe_scenario(self) -> str:
        if self.scenario is None:
            return "No scenario loaded. Please load a scenario first."
        s = self.scenario
        lines = [f"Scenario: {s.name}", f"  {s.description}" if s.description else "  (no description)"]
        lines.append(f"  coordinates: {', '.join(s.spacetime.coordinates)}")
        if s.spacetime.periods:
            periods = {s.spacetime.coordinates[i]: p for i, p in sorted(s.spacetime.periods.items())}
            lines.append(f"  periodic: {periods}")
        if s.hypersurface is not None:
            lines.append(f"  level function: {s.hypersurface.level_source}")
            lines.append(f"  rigging: {list(s.hypersurface.rigging.sources)}")
        else:
            lines.append("  no hypersurface")
        lines.append(f"  expected values: {len(s.expected)}, Killing fields: {len(s.killing_fields)}")
        return "\n".join(lines)

    def _require_scenario(self) -> Scenario:
        if self.scenario is None:
            raise ScenarioValidationError(["<scenario>: no scenario loaded"])
        return self.scenario

    # ------------------------------------------------------------------ run

    def run(
        self,
        suites: Optional[Sequence[str]] = None,
        samples: int = 100,
        seed: Optional[int] = None,
        tolerances: Optional[Mapping[str, float]] = None,
    ) -> CheckReport:
        """Run the selected suites; skipped suites are reported with their reason."""
        scenario = self._require_scenario()
        suites = list(SUITES if not suites else suites)
        unknown = [s for s in suites if s not in SUITES]
        if unknown:
            raise ValueError(f"Unknown suite(s): {', '.join(unknown)} (known: {', '.join(SUITES)})")
        table = {check_id: tol for check_id, (_, tol) in CHECKS.items()}
        for check_id, value in (tolerances or {}).items():
            if check_id not in table and not check_id.startswith("expected."):
                raise ValueError(f"Unknown check id '{check_id}' in tolerance override")
            table[check_id] = float(value)
        seed = scenario.seed if seed is None else int(seed)
        context = _Context(scenario, samples, seed, table)
        started = time.perf_counter()
        report = CheckReport(scenario=scenario.name, seed=seed, samples=samples)
        self._prepare(context)
        for suite in SUITES:
            if suite not in suites:
                continue
            self._say(f"Running {suite} checks...")
            try:
                report.extend(_SUITE_RUNNERS[suite](context))
            except PreconditionError as e:
                report.add(CheckRecord.skipped(f"{suite}.aborted", "suite hypotheses", suite, 0.0, str(e)))
            except NullRigError as e:
                logger.exception("Suite %s aborted", suite)
                report.add(CheckRecord.failed(f"{suite}.aborted", "suite completed", suite, 0.0, f"Failed to run suite: {str(e)}"))
        report.facts = dict(context.facts)
        report.wall_time = time.perf_counter() - started
        counts = report.counts
        self._say(f"Done: {counts['pass']} passed, {counts['fail']} failed, {counts['skip']} skipped")
        return report

    def _prepare(self, context: _Context) -> None:
        """Sample points of L, check they are null and transverse, build their frames once and record the hypothesis facts."""
        hypersurface = context.hypersurface
        if hypersurface is None:
            context.facts["hypersurface"] = False
            return
        context.points = hypersurface.samples(context.samples, context.seed)
        if context.points:
            problems = sample_check(context.scenario, points=context.points)
            if problems:
                raise ScenarioValidationError(problems, context.scenario.name)
        context.frames = [build_frame(hypersurface, p) for p in context.points]
        worst = max((max_abs_b(f) for f in context.frames), default=0.0)
        context.facts.update(
            {
                "hypersurface": True,
                "points": len(context.points),
                "max_abs_B": worst,
                "totally_geodesic": worst < TOTALLY_GEODESIC_THRESHOLD,
                "closed_rigging": bool(context.points) and all(is_closed(hypersurface, p) for p in context.points),
                "screen_rank": context.frames[0].q if context.frames else 0,
            }
        )

    # ----------------------------------------------------------------- hunt

    def hunt(
        self,
        levels: Sequence[float] = (-1.0, 0.0, 1.0),
        period: float = 1.0,
        budget: int = 400,
        causal: Optional[str] = None,
    ) -> pd.DataFrame:
        scenario = self._require_scenario()
        if not scenario.spacetime.periods:
            raise ScenarioValidationError([f"periodic: '{scenario.name}' has no periodic coordinates"], scenario.name)
        self._say(f"Hunting periodic geodesics on {scenario.name} over a {len(levels)}^{scenario.spacetime.n} grid...")
        table = hunt_periodic_geodesics(scenario.spacetime, levels, period=period, budget=budget, causal=causal)
        self._say(f"Found {int(table['converged'].sum()) if len(table) else 0} distinct periodic geodesics")
        return table

    # ------------------------------------------------------------- validate

    def validate(self, name_or_path: str, samples: int = 20) -> List[str]:
        """Every problem with a scenario: schema, signature grid, periodicity, null and transversality."""
        try:
            scenario = resolve(name_or_path)
        except ScenarioValidationError as e:
            return e.problems
        except NullRigError as e:
            return [f"<scenario>: {str(e)}"]
        self.scenario = scenario
        return sample_check(scenario, samples)


# ------------------------------------------------------------------- suites


def _guarded(context: _Context, check_id: str, compute: Callable[[], CheckRecord]) -> CheckRecord:
    try:
        return compute()
    except PreconditionError as e:
        return context.skip(check_id, str(e))
    except NullRigError as e:
        return context.fail(check_id, f"{type(e).__name__}: {str(e)}")


def _no_hypersurface(context: _Context, ids: Sequence[str]) -> Optional[List[CheckRecord]]:
    if context.hypersurface is None:
        return [context.skip(i, "scenario has no hypersurface") for i in ids]
    if not context.points:
        return [context.fail(i, "no sample could be projected onto the hypersurface") for i in ids]
    return None


def _frame_suite(context: _Context) -> List[CheckRecord]:
    ids = ["frame.invariants", "frame.bianchi", "frame.radical_degeneracy"]
    spacetime = context.scenario.spacetime
    rng = context.rng("frame")
    if context.hypersurface is None:
        points = halton_points(spacetime.bounds, context.samples, context.seed)
        bianchi = [max(curvature_invariants(spacetime, p, rng).values()) for p in points]
        return [
            context.skip("frame.invariants", "scenario has no hypersurface"),
            context.record("frame.bianchi", bianchi),
            context.skip("frame.radical_degeneracy", "scenario has no hypersurface"),
        ]
    early = _no_hypersurface(context, ids)
    if early:
        return early
    invariants, bianchi, radical = [], [], []
    worst: Dict[str, float] = {}
    for point, frame in zip(context.points, context.frames):
        values = frame_invariants(frame)
        for key, value in values.items():
            worst[key] = max(worst.get(key, 0.0), value)
        invariants.append(max(values.values()))
        bianchi.append(max(curvature_invariants(spacetime, point, rng).values()))
        radical.append(radical_degeneracy(frame))
    return [
        context.record("frame.invariants", invariants, worst),
        context.record("frame.bianchi", bianchi),
        context.record("frame.radical_degeneracy", radical),
    ]


def _induced_suite(context: _Context) -> List[CheckRecord]:
    ids = ["induced.rigged_metric", "induced.eq1", "induced.b_two_route", "induced.b_symmetry",
           "induced.tau_two_route", "induced.shape_consistency"]
    early = _no_hypersurface(context, ids)
    if early:
        return early
    scenario = context.hypersurface
    rigged, eq1, two_route, symmetry, tau, shape = [], [], [], [], [], []
    for point, frame in zip(context.points, context.frames):
        basis = frame.tangent_basis
        rigged.append(pullback_consistency(scenario, point, frame))
        eq1.append(max((abs(eq1_residual(frame, u, x)) for u in basis for x in frame.screen), default=0.0))
        two_route.append(max(
            abs(second_fundamental_B(frame, u, v) - second_fundamental_B_extension(frame, u, v))
            for u in basis for v in basis
        ))
        symmetry.append(max(
            abs(second_fundamental_B(frame, u, v) - second_fundamental_B(frame, v, u)) for u in basis for v in basis
        ))
        tau.append(max(abs(rotation_one_form_tau(frame, u) - rotation_one_form_tau_alt(frame, u)) for u in basis))
        shape.append(max(shape_consistency(frame).values()))
    return [
        context.record("induced.rigged_metric", rigged),
        context.record("induced.eq1", eq1),
        context.record("induced.b_two_route", two_route),
        context.record("induced.b_symmetry", symmetry),
        context.record("induced.tau_two_route", tau),
        context.record("induced.shape_consistency", shape),
    ]


def _hessian_points(context: _Context) -> List[np.ndarray]:
    if context.points:
        return context.points
    return list(halton_points(context.scenario.spacetime.bounds, context.samples, context.seed))


def _flow_suite(context: _Context) -> List[CheckRecord]:
    records = []
    spacetime = context.scenario.spacetime
    rng = context.rng("flow")

    def hessian() -> CheckRecord:
        if not context.scenario.killing_fields:
            return context.skip("flow.hessian", "scenario declares no Killing fields")
        residuals = []
        for point in _hessian_points(context):
            for killing in context.scenario.killing_fields:
                x, y = rng.uniform(-1.0, 1.0, size=(2, spacetime.n))
                residuals.append(hessian_identity_residual(spacetime, point, killing, x, y))
        return context.record("flow.hessian", residuals, {"fields": float(len(context.scenario.killing_fields))})

    ids = ["flow.lemma", "flow.killing_xi", "flow.xi_parallel", "flow.killing_plane"]
    early = _no_hypersurface(context, ids)
    if early:
        return early + [_guarded(context, "flow.hessian", hessian)]
    scenario = context.hypersurface

    def lemma() -> CheckRecord:
        residuals = []
        for point, frame in zip(context.points, context.frames):
            basis = frame.tangent_basis
            residuals.append(max(abs(flow_residual(scenario, point, u, v, frame)) for u in basis for v in basis))
        return context.record("flow.lemma", residuals)

    records.append(_guarded(context, "flow.lemma", lemma))
    if not context.totally_geodesic:
        reason = context.not_totally_geodesic()
        records += [context.skip("flow.killing_xi", reason), context.skip("flow.xi_parallel", reason)]
    elif not context.closed:
        reason = "rigging is not closed"
        records += [context.skip("flow.killing_xi", reason), context.skip("flow.xi_parallel", reason)]
    else:
        killing, parallel = [], []
        for point, frame in zip(context.points, context.frames):
            values = killing_xi_residual(scenario, point, frame)
            killing.append(values["killing"])
            parallel.append(values["parallel"])
        records += [context.record("flow.killing_xi", killing), context.record("flow.xi_parallel", parallel)]
    records.append(_guarded(context, "flow.hessian", hessian))

    def plane() -> CheckRecord:
        residuals = []
        for point, frame in zip(context.points, context.frames):
            if np.max(np.abs(killing_residual(spacetime, point, scenario.rigging))) > KILLING_THRESHOLD:
                return context.skip("flow.killing_plane", "rigging is not a Killing field")
            values = killing_plane_identity(spacetime, point, scenario.rigging, frame.jets.xi)
            if values["xi_geodesic_defect"] > 1e-8:
                return context.skip("flow.killing_plane", "ξ is not geodesic (∇_ξ ξ ≠ 0)")
            residuals.append(values["residual"])
        return context.record("flow.killing_plane", residuals)

    records.append(_guarded(context, "flow.killing_plane", plane))
    return records


def _transverse_suite(context: _Context) -> List[CheckRecord]:
    ids = ["transverse.connection", "transverse.metric_compat", "transverse.torsion",
           "transverse.domega_two_route", "transverse.ricci_symmetry", "transverse.scalar_trace",
           "transverse.ricci_bound", "transverse.curvature_routes", "transverse.closed_domega"]
    early = _no_hypersurface(context, ids)
    if early:
        return early
    scenario = context.hypersurface
    records = []
    domega_residuals = []
    for point, frame in zip(context.points, context.frames):
        basis = frame.tangent_basis
        domega_residuals.append(max(
            abs(a - b) for a, b in (domega_two_route(scenario, point, u, v) for u in basis for v in basis)
        ))
    records.append(context.record("transverse.domega_two_route", domega_residuals))
    if not context.totally_geodesic:
        reason = context.not_totally_geodesic()
        return records + [context.skip(i, reason) for i in ids if i != "transverse.domega_two_route"]

    connection, metric, torsion, symmetry, trace, bound, routes, closed = [], [], [], [], [], [], [], []
    for point, frame in zip(context.points, context.frames):
        connection.append(transverse_connection(scenario, point, frame)["difference"])
        properties = connection_properties(frame)
        metric.append(properties["metric"])
        torsion.append(properties["torsion"])
        data = transverse_data(scenario, point, frame)
        symmetry.append(data.ricci_symmetry)
        trace.append(data.trace_residual)
        if data.bound_residual is not None:
            bound.append(data.bound_residual)
        if frame.q >= 2:
            x, y = frame.screen[0], frame.screen[1]
            rs = transverse_curvature_tensor(frame)
            routes.append(transverse_curvature_literal(frame, x, y) - rs[0, 1, 1, 0])
        if context.closed:
            closed.append(float(np.max(np.abs(data.domega))) if data.domega.size else 0.0)
    records += [
        context.record("transverse.connection", connection),
        context.record("transverse.metric_compat", metric),
        context.record("transverse.torsion", torsion),
        context.record("transverse.ricci_symmetry", symmetry),
        context.record("transverse.scalar_trace", trace),
    ]
    records.append(context.record("transverse.ricci_bound", bound) if bound
                   else context.skip("transverse.ricci_bound", "rigging is not closed"))
    records.append(context.record("transverse.curvature_routes", routes) if routes
                   else context.skip("transverse.curvature_routes", "screen has no 2-planes"))
    records.append(context.record("transverse.closed_domega", closed) if context.closed
                   else context.skip("transverse.closed_domega", "rigging is not closed"))
    return records


def _curvat_suite(context: _Context) -> List[CheckRecord]:
    ids = ["curvat.rigged", "curvat.ambient", "curvat.constant_mean", "curvat.constant_std"]
    early = _no_hypersurface(context, ids)
    if early:
        return early
    if not context.totally_geodesic:
        return [context.skip(i, context.not_totally_geodesic()) for i in ids]
    if context.facts.get("screen_rank", 0) < 2:
        return [context.skip(i, "screen has no 2-planes") for i in ids]
    scenario = context.hypersurface
    rng = context.rng("curvat")
    rigged, ambient, values = [], [], []
    for point, frame in zip(context.points, context.frames):
        for x, y in sample_planes(frame, rng, count=2):
            result = curvat_identity_check(scenario, point, x, y, frame)
            rigged.append(result["residual_rigged"])
            ambient.append(result["residual_ambient"])
            values.append(result["transverse"])
    mean, spread = float(np.mean(values)), float(np.std(values))
    context.facts["transverse_flow"] = classify_curvature(mean, spread)
    records = [
        context.record("curvat.rigged", rigged),
        context.record("curvat.ambient", ambient),
    ]
    constant = context.scenario.constant_curvature
    if constant is None:
        records += [context.skip(i, "no constant curvature declared") for i in ids[2:]]
    else:
        records.append(context.record("curvat.constant_mean", [mean - constant], {"mean": mean, "expected": constant}))
        records.append(context.record("curvat.constant_std", [spread], {"std": spread, "planes": float(len(values))}))
    return records


def _geodesic_starts(context: _Context, rng: np.random.Generator):
    """(point, tangent velocity) pairs; ambient box samples when there is no hypersurface."""
    count = min(context.samples, GEODESIC_SAMPLES)
    if context.hypersurface is None:
        spacetime = context.scenario.spacetime
        for point in halton_points(spacetime.bounds, count, context.seed):
            velocity = rng.normal(size=spacetime.n)
            yield point, 0.5 * velocity / np.linalg.norm(velocity)
        return
    for point, frame in list(zip(context.points, context.frames))[:count]:
        coefficients = rng.normal(size=len(frame.tangent_basis))
        velocity = coefficients @ frame.tangent_basis
        yield point, 0.5 * velocity / np.linalg.norm(velocity)


def _geodesic_suite(context: _Context) -> List[CheckRecord]:
    spacetime = context.scenario.spacetime
    rng = context.rng("geodesic")
    energy, reversibility, exits = [], [], 0
    for point, velocity in _geodesic_starts(context, rng):
        state = GeodesicState(point, velocity)
        try:
            trajectory = integrate(spacetime, state, GEODESIC_LENGTH, samples=11)
            drifts = [trajectory.energy_drift]
            for killing in context.scenario.killing_fields:
                conserved = killing_energy(spacetime, trajectory, killing)
                drifts.append(float(np.max(np.abs(conserved - conserved[0]))))
            energy.append(max(drifts))
            reversibility.append(reversibility_residual(spacetime, state, GEODESIC_LENGTH))
        except (ChartExitError, StepSizeUnderflowError) as exc:
            exits += 1
            logger.debug("Geodesic from %s dropped: %s", np.round(point, 6).tolist(), exc)
    records = [
        context.record("geodesic.energy", energy, {"dropped": float(exits)}),
        context.record("geodesic.reversibility", reversibility),
    ]
    ids = ["geodesic.cbar_criterion", "geodesic.cbar_only_if", "geodesic.prop3", "geodesic.tolerance_stability"]
    early = _no_hypersurface(context, ids)
    if early:
        return records + early
    if not context.totally_geodesic:
        return records + [context.skip(i, context.not_totally_geodesic()) for i in ids]
    scenario = context.hypersurface
    starts = _criterion_starts(context, rng)
    halved = {"rtol": RTOL / 2.0, "atol": ATOL / 2.0}
    verdicts = {}

    def criterion_results(**control) -> List[Optional[Dict[str, object]]]:
        results = []
        for point, velocity in starts:
            try:
                trajectory = integrate(
                    scenario, GeodesicState(point, velocity, "rigged"), GEODESIC_LENGTH, samples=6, **control
                )
            except (ChartExitError, StepSizeUnderflowError):
                results.append(None)
                continue
            results.append(cbar_criterion(scenario, trajectory))
        return results

    def criterion_verdicts(results) -> List[Optional[tuple]]:
        out = []
        for result in results:
            if result is None or result["direction"] is None:
                out.append(None)
                continue
            check_id = "geodesic.cbar_criterion" if result["direction"] == "if" else "geodesic.cbar_only_if"
            out.append((check_id, result["residual"] < context.tolerances[check_id]))
        return out

    def criterion() -> List[CheckRecord]:
        results = criterion_results()
        verdicts["criterion"] = criterion_verdicts(results)
        vanishing = [r["residual"] for r in results if r is not None and r["direction"] == "if"]
        nonvanishing = [r for r in results if r is not None and r["direction"] == "only_if"]
        undecided = sum(1 for r in results if r is not None and r["direction"] is None)
        dropped = sum(1 for r in results if r is None)
        out = []
        if vanishing:
            out.append(context.record("geodesic.cbar_criterion", vanishing, {"undecided": float(undecided), "dropped": float(dropped)}))
        else:
            out.append(context.skip("geodesic.cbar_criterion", "C̄(γ′, γ′) does not vanish along any sampled geodesic"))
        if nonvanishing:
            detail = {
                "min_ambient_defect": min(r["ambient"] for r in nonvanishing),
                "max_cbar": max(r["cbar"] for r in nonvanishing),
            }
            out.append(context.record("geodesic.cbar_only_if", [r["residual"] for r in nonvanishing], detail))
        else:
            out.append(context.skip("geodesic.cbar_only_if", f"no sampled geodesic has |C̄(γ′, γ′)| >= {CBAR_NONZERO:g}"))
        return out

    def prop3_residuals(**control) -> List[Optional[float]]:
        residuals = []
        for point, frame in list(zip(context.points, context.frames))[: min(context.samples, GEODESIC_SAMPLES)]:
            if frame.q == 0:
                continue
            velocity = 0.5 * frame.screen[0]
            try:
                result = prop3_equivalence_check(
                    scenario, point, velocity, length=GEODESIC_LENGTH, samples=6, seed=context.seed, **control
                )
            except (ChartExitError, StepSizeUnderflowError):
                residuals.append(None)
                continue
            residuals.append(max(result.values()))
        return residuals

    def prop3() -> CheckRecord:
        if scenario.leaf_function is None:
            return context.skip("geodesic.prop3", "scenario declares no leaf function")
        residuals = prop3_residuals()
        verdicts["prop3"] = residuals
        return context.record("geodesic.prop3", [r for r in residuals if r is not None])

    def stability() -> CheckRecord:
        tolerance = context.tolerances["geodesic.prop3"]
        pairs = []
        if "criterion" in verdicts:
            again = criterion_verdicts(criterion_results(**halved))
            pairs += [(a, b) for a, b in zip(verdicts["criterion"], again) if a is not None or b is not None]
        if "prop3" in verdicts:
            again = prop3_residuals(**halved)
            pairs += [
                (a < tolerance, b < tolerance)
                for a, b in zip(verdicts["prop3"], again)
                if a is not None and b is not None
            ]
        if not pairs:
            return context.skip("geodesic.tolerance_stability", "no verdicts to compare")
        flips = [0.0 if a == b else 1.0 for a, b in pairs]
        return context.record("geodesic.tolerance_stability", flips, {"verdicts": float(len(pairs))})

    try:
        records += criterion()
    except PreconditionError as e:
        records += [context.skip(i, str(e)) for i in ("geodesic.cbar_criterion", "geodesic.cbar_only_if")]
    except NullRigError as e:
        records += [context.fail(i, f"{type(e).__name__}: {str(e)}") for i in ("geodesic.cbar_criterion", "geodesic.cbar_only_if")]
    records.append(_guarded(context, "geodesic.prop3", prop3))
    records.append(_guarded(context, "geodesic.tolerance_stability", stability))
    return records


def _criterion_starts(context: _Context, rng: np.random.Generator) -> List[tuple]:
    """Random tangent, radical and screen directions at the first geodesic samples."""
    starts = []
    for point, frame in list(zip(context.points, context.frames))[: min(context.samples, GEODESIC_SAMPLES)]:
        directions = [rng.normal(size=len(frame.tangent_basis)) @ frame.tangent_basis, frame.xi]
        if frame.q:
            directions.append(frame.screen[0])
        starts += [(point, 0.5 * d / np.linalg.norm(d)) for d in directions]
    return starts


def _periodic_suite(context: _Context) -> List[CheckRecord]:
    spacetime = context.scenario.spacetime
    if not spacetime.is_compact_quotient:
        return [context.skip("periodic.hunt", "not a compact quotient (some coordinates are not periodic)")]
    table = hunt_periodic_geodesics(spacetime)
    converged = table[table["converged"]] if len(table) else table
    if not len(converged):
        return [context.fail("periodic.hunt", "no periodic geodesic found")]
    closures = []
    for _, row in converged.iterrows():
        orbit = PeriodicOrbitResult(
            np.array(row["position"]), np.array(row["velocity"]), row["period"], row["closure"], row["causal"], 0.0, True
        )
        closures.append(verify_orbit(spacetime, orbit))
    detail = {kind: float((converged["causal"] == kind).sum()) for kind in ("null", "spacelike", "timelike")}
    detail["orbits"] = float(len(converged))
    context.facts["periodic_orbits"] = int(len(converged))
    return [context.record("periodic.hunt", closures, detail)]


# ------------------------------------------------------------ expected values


def _measure_probes(context: _Context) -> Dict[str, object]:
    """Probe values over the run's samples; a probe that cannot be measured maps to its reason."""
    probes: Dict[str, object] = {}
    spacetime = context.scenario.spacetime
    probes["ncc_min"] = ncc_report(spacetime, context.samples, context.seed)["min_ricci"]
    if context.hypersurface is None:
        return probes
    if not context.points:
        return probes
    scenario = context.hypersurface
    probes["max_abs_B"] = context.facts["max_abs_B"]
    ambient = []
    for frame in context.frames:
        if frame.q >= 2:
            ambient.append(frame.tensors.sectional(frame.screen[0], frame.screen[1]))
    if ambient:
        probes["ambient_curvature_mean"] = float(np.mean(ambient))
    transverse_reason = None
    if not context.totally_geodesic:
        transverse_reason = context.not_totally_geodesic()
    elif context.facts.get("screen_rank", 0) < 2:
        transverse_reason = "screen has no 2-planes"
    if transverse_reason is not None:
        for probe in ("transverse_curvature_mean", "transverse_curvature_std", "rigged_curvature_mean",
                      "domega_abs_max", "transverse_scalar_mean"):
            probes[probe] = transverse_reason
        return probes
    k_t, k_rigged, d, scalar = [], [], [], []
    for point, frame in zip(context.points, context.frames):
        result = curvat_identity_check(scenario, point, frame=frame)
        k_t.append(result["transverse"])
        k_rigged.append(result["rigged"])
        d.append(abs(result["domega"]))
        scalar.append(transverse_data(scenario, point, frame).scalar)
    probes.update(
        {
            "transverse_curvature_mean": float(np.mean(k_t)),
            "transverse_curvature_std": float(np.std(k_t)),
            "rigged_curvature_mean": float(np.mean(k_rigged)),
            "domega_abs_max": float(np.max(d)),
            "transverse_scalar_mean": float(np.mean(scalar)),
        }
    )
    return probes


def _point_probe(context: _Context, entry) -> object:
    """A probe evaluated at the projection of ``entry.at`` onto L; a reason string when it cannot be."""
    scenario = context.hypersurface
    if scenario is None:
        return "probe not available for this scenario"
    coordinates = context.scenario.spacetime.coordinates
    try:
        point = scenario.project([entry.at[c] for c in coordinates])
        frame = build_frame(scenario, point)
        if entry.probe == "cbar_xi":
            return float(cbar(frame, frame.xi, frame.xi))
        trajectory = integrate(scenario, GeodesicState(point, frame.xi, "rigged"), XI_PROBE_LENGTH, samples=3)
        return float(cross_metric_residual(scenario, trajectory)["ambient"])
    except NullRigError as e:
        return f"Failed to evaluate {entry.probe}: {str(e)}"


def _expected_suite(context: _Context) -> List[CheckRecord]:
    if not context.scenario.expected:
        return []
    probes = _measure_probes(context)
    records = []
    for entry in context.scenario.expected:
        check_id = f"expected.{entry.probe}"
        if sum(e.probe == entry.probe for e in context.scenario.expected) > 1:
            check_id = f"{check_id}_{entry.relation}"
        anchor = f"{entry.probe} {entry.relation} {entry.value:g}" + (f" ({entry.provenance})" if entry.provenance else "")
        tolerance = context.tolerances.get(check_id, entry.tolerance)
        if entry.at is not None:
            measured = _point_probe(context, entry)
        else:
            measured = probes.get(entry.probe, "probe not available for this scenario")
        if isinstance(measured, str):
            records.append(CheckRecord.failed(check_id, anchor, "expected", tolerance, measured))
            continue
        residual = entry.residual(measured)
        status = "pass" if residual < tolerance else "fail"
        records.append(
            CheckRecord(check_id, anchor, "expected", tolerance, max(len(context.points), 1), residual, status,
                        detail={"measured": measured, "expected": entry.value})
        )
    return records


_SUITE_RUNNERS: Dict[str, Callable[[_Context], List[CheckRecord]]] = {
    "frame": _frame_suite,
    "induced": _induced_suite,
    "flow": _flow_suite,
    "transverse": _transverse_suite,
    "curvat": _curvat_suite,
    "geodesic": _geodesic_suite,
    "periodic": _periodic_suite,
    "expected": _expected_suite,
}
