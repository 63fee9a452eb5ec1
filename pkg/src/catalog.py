"""
Built-in scenarios with known ground truth, and the Scenario type shared
with user-supplied scenario files.
"""

import copy
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

try:
    from .errors import NullRigError, ScenarioValidationError, UnknownScenarioError
    from .rigging import NullHypersurfaceScenario
    from .scenario_file import read_scenario_file, validate_scenario_dict
    from .spacetime import ChartedSpacetime, VectorField
except ImportError:
    from errors import NullRigError, ScenarioValidationError, UnknownScenarioError
    from rigging import NullHypersurfaceScenario
    from scenario_file import read_scenario_file, validate_scenario_dict
    from spacetime import ChartedSpacetime, VectorField

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
RELATIONS = ("eq", "ge", "le")


@dataclass(frozen=True)
class ExpectedValue:
    """One named quantity the engine must reproduce."""

    probe: str
    value: float
    tolerance: float
    provenance: str = ""
    relation: str = "eq"
    at: Optional[Dict[str, float]] = None

    def holds(self, measured: float) -> bool:
        if self.relation == "ge":
            return measured >= self.value - self.tolerance
        if self.relation == "le":
            return measured <= self.value + self.tolerance
        return abs(measured - self.value) <= self.tolerance

    def residual(self, measured: float) -> float:
        """Distance outside the admissible side; zero inside for ge/le."""
        if self.relation == "ge":
            return max(0.0, self.value - measured)
        if self.relation == "le":
            return max(0.0, measured - self.value)
        return abs(measured - self.value)


@dataclass
class Scenario:
    name: str
    spacetime: ChartedSpacetime
    hypersurface: Optional[NullHypersurfaceScenario] = None
    expected: List[ExpectedValue] = field(default_factory=list)
    killing_fields: List[VectorField] = field(default_factory=list)
    constant_curvature: Optional[float] = None
    seed: int = DEFAULT_SEED
    description: str = ""
    source: Dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def has_hypersurface(self) -> bool:
        return self.hypersurface is not None

    @property
    def is_compact_quotient(self) -> bool:
        return self.spacetime.is_compact_quotient


# ------------------------------------------------------------------ catalog

_MINKOWSKI = [["-1", "0", "0", "0"], ["1", "0", "0"], ["1", "0"], ["1"]]
_BOX = {"t": [-2.0, 2.0], "x": [-2.0, 2.0], "y": [-2.0, 2.0], "z": [-2.0, 2.0]}
_PPWAVE_BOUNDS = {"u": [-1.0, 1.0], "v": [-2.0, 2.0], "x": [-1.0, 1.0], "y": [-1.0, 1.0]}
_PPWAVE_SAMPLING = {"u": [-0.5, 0.5], "v": [-1.0, 1.0], "x": [-0.9, 0.9], "y": [-0.9, 0.9]}


def _ppwave(profile: str) -> List[List[str]]:
    return [[profile, "1", "0", "0"], ["0", "0", "0"], ["1", "0"], ["1"]]


def _zeros(*probes: str, provenance: str = "flat screen geometry") -> List[Dict[str, Any]]:
    return [{"probe": p, "value": 0.0, "tolerance": 1e-8, "provenance": provenance} for p in probes]


CATALOG: Dict[str, Dict[str, Any]] = {
    "minkowski_hyperplane": {
        "name": "minkowski_hyperplane",
        "description": "Null hyperplane t = x in Minkowski space, rigged by the unit timelike field",
        "coordinates": ["t", "x", "y", "z"],
        "bounds": _BOX,
        "metric": _MINKOWSKI,
        "level_function": "t - x",
        "rigging": ["1", "0", "0", "0"],
        "graph_coordinate": "t",
        "sampling_domain": {"t": [-1.0, 1.0], "x": [-1.0, 1.0], "y": [-1.0, 1.0], "z": [-1.0, 1.0]},
        "leaf_function": "t",
        "killing_fields": [["1", "0", "0", "0"], ["0", "-y", "x", "0"], ["x", "t", "0", "0"]],
        "constant_curvature": 0.0,
        "expected": _zeros(
            "max_abs_B",
            "transverse_curvature_mean",
            "rigged_curvature_mean",
            "ambient_curvature_mean",
            "domega_abs_max",
        )
        + [{"probe": "ncc_min", "value": 0.0, "tolerance": 1e-8, "provenance": "vacuum", "relation": "ge"}],
    },
    "minkowski_hyperplane_scaled": {
        "name": "minkowski_hyperplane_scaled",
        "description": "The null hyperplane t = x with the non-closed rigging (1 + x) d/dt",
        "coordinates": ["t", "x", "y", "z"],
        "bounds": dict(_BOX, x=[-0.5, 0.5]),
        "metric": _MINKOWSKI,
        "level_function": "t - x",
        "rigging": ["1 + x", "0", "0", "0"],
        "graph_coordinate": "t",
        "sampling_domain": {"t": [-1.0, 1.0], "x": [-0.4, 0.4], "y": [-1.0, 1.0], "z": [-1.0, 1.0]},
        "leaf_function": "t",
        "killing_fields": [["1", "0", "0", "0"], ["0", "0", "1", "0"]],
        "constant_curvature": 0.0,
        "expected": _zeros("max_abs_B", "transverse_curvature_mean", "ambient_curvature_mean")
        + [
            {"probe": "cbar_xi", "value": 1.0, "tolerance": 1e-6, "provenance": "C̄(ξ, ξ) = 1/(1 + x)^2",
             "at": {"t": 0.0, "x": 0.0, "y": 0.0, "z": 0.0}},
            {"probe": "xi_cross_metric", "value": 1e-3, "tolerance": 1e-12, "relation": "ge",
             "provenance": "g̃-geodesic along ξ bends away in g", "at": {"t": 0.0, "x": 0.0, "y": 0.0, "z": 0.0}},
        ],
    },
    "minkowski_cone": {
        "name": "minkowski_cone",
        "description": "Future light cone of the origin, 1 <= r <= 2; not totally geodesic (B = 1/r on the screen)",
        "coordinates": ["t", "x", "y", "z"],
        "bounds": {"t": [0.0, 3.5], "x": [-2.5, 2.5], "y": [-2.5, 2.5], "z": [-2.5, 2.5]},
        "metric": _MINKOWSKI,
        "level_function": "t - sqrt(x^2 + y^2 + z^2)",
        "rigging": ["1", "0", "0", "0"],
        "graph_coordinate": "t",
        "sampling_domain": {"t": [1.0, 2.0], "x": [0.58, 1.15], "y": [0.58, 1.15], "z": [0.58, 1.15]},
        "killing_fields": [["1", "0", "0", "0"], ["0", "-y", "x", "0"]],
        "constant_curvature": 0.0,
        "expected": [
            {"probe": "max_abs_B", "value": 1.0, "tolerance": 1e-6, "provenance": "B = 1/r, r >= 1", "relation": "le"},
            {"probe": "max_abs_B", "value": 0.5, "tolerance": 1e-6, "provenance": "B = 1/r, r <= 2", "relation": "ge"},
            {"probe": "ambient_curvature_mean", "value": 0.0, "tolerance": 1e-8, "provenance": "flat ambient"},
        ],
    },
    "ppwave_wavefront": {
        "name": "ppwave_wavefront",
        "description": "Wave front u = 0 of the plane wave with profile x^2 - y^2, rigged by d/du",
        "coordinates": ["u", "v", "x", "y"],
        "bounds": _PPWAVE_BOUNDS,
        "metric": _ppwave("x^2 - y^2"),
        "level_function": "u",
        "rigging": ["1", "0", "0", "0"],
        "graph_coordinate": "u",
        "sampling_domain": _PPWAVE_SAMPLING,
        "leaf_function": "v",
        "killing_fields": [["1", "0", "0", "0"], ["0", "1", "0", "0"]],
        "expected": _zeros(
            "max_abs_B",
            "transverse_curvature_mean",
            "ambient_curvature_mean",
            provenance="parallel null field d/dv",
        )
        + [{"probe": "ncc_min", "value": 0.0, "tolerance": 1e-8, "provenance": "vacuum plane wave", "relation": "ge"}],
    },
    "ppwave_wavefront_twisted": {
        "name": "ppwave_wavefront_twisted",
        "description": "Wave front u = 0 with the twisted rigging d/du + y d/dx (dω != 0)",
        "coordinates": ["u", "v", "x", "y"],
        "bounds": _PPWAVE_BOUNDS,
        "metric": _ppwave("x^2 - y^2"),
        "level_function": "u",
        "rigging": ["1", "0", "y", "0"],
        "graph_coordinate": "u",
        "sampling_domain": _PPWAVE_SAMPLING,
        "leaf_function": "v",
        "killing_fields": [["1", "0", "0", "0"], ["0", "1", "0", "0"]],
        "expected": _zeros("max_abs_B", "transverse_curvature_mean", "ambient_curvature_mean")
        + [
            {"probe": "rigged_curvature_mean", "value": -0.75, "tolerance": 1e-6, "provenance": "K~ = K^T - 3/4 dω^2"},
            {"probe": "domega_abs_max", "value": 1.0, "tolerance": 1e-8, "provenance": "dω = dy ∧ dx on the screen"},
        ],
    },
    "ppwave_flat": {
        "name": "ppwave_flat",
        "description": "Wave front u = 0 of flat space in null coordinates, closed null rigging d/du",
        "coordinates": ["u", "v", "x", "y"],
        "bounds": _PPWAVE_BOUNDS,
        "metric": _ppwave("0"),
        "level_function": "u",
        "rigging": ["1", "0", "0", "0"],
        "graph_coordinate": "u",
        "sampling_domain": _PPWAVE_SAMPLING,
        "leaf_function": "v",
        "killing_fields": [["1", "0", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"]],
        "constant_curvature": 0.0,
        "expected": _zeros(
            "max_abs_B",
            "transverse_curvature_mean",
            "rigged_curvature_mean",
            "ambient_curvature_mean",
            "domega_abs_max",
            "transverse_scalar_mean",
        ),
    },
    "ppwave_focusing": {
        "name": "ppwave_focusing",
        "description": "Plane wave with profile -(x^4 + y^4): Ric(d/du, d/du) = 6(x^2 + y^2) >= 0",
        "coordinates": ["u", "v", "x", "y"],
        "bounds": _PPWAVE_BOUNDS,
        "metric": _ppwave("-(x^4 + y^4)"),
        "level_function": "u",
        "rigging": ["1", "0", "0", "0"],
        "graph_coordinate": "u",
        "sampling_domain": _PPWAVE_SAMPLING,
        "leaf_function": "v",
        "killing_fields": [["1", "0", "0", "0"], ["0", "1", "0", "0"]],
        "expected": _zeros("max_abs_B", provenance="parallel null field d/dv")
        + [{"probe": "ncc_min", "value": 0.0, "tolerance": 1e-8, "provenance": "Ric_uu = -ΔH/2", "relation": "ge"}],
    },
    "desitter_horizon": {
        "name": "desitter_horizon",
        "description": "Cosmological horizon r = 1 of unit de Sitter space in outgoing null coordinates",
        "coordinates": ["u", "r", "th", "ph"],
        "bounds": {"u": [-2.0, 2.0], "r": [0.5, 1.5], "th": [0.3, math.pi - 0.3], "ph": [0.0, 2.0 * math.pi]},
        "periodic": {"ph": 2.0 * math.pi},
        "metric": [["-(1 - r^2)", "-1", "0", "0"], ["0", "0", "0"], ["r^2", "0"], ["r^2*sin(th)^2"]],
        "level_function": "r - 1",
        "rigging": ["0", "-1", "0", "0"],
        "graph_coordinate": "r",
        "sampling_domain": {"u": [-1.0, 1.0], "r": [0.9, 1.1], "th": [0.5, 2.6], "ph": [0.0, 2.0 * math.pi]},
        "killing_fields": [["1", "0", "0", "0"], ["0", "0", "0", "1"]],
        "constant_curvature": 1.0,
        "expected": [
            {"probe": "transverse_curvature_mean", "value": 1.0, "tolerance": 1e-4, "provenance": "unit radius"},
            {"probe": "transverse_curvature_std", "value": 0.0, "tolerance": 1e-5, "provenance": "constant curvature", "relation": "le"},
            {"probe": "rigged_curvature_mean", "value": 1.0, "tolerance": 1e-4, "provenance": "closed rigging"},
            {"probe": "ambient_curvature_mean", "value": 1.0, "tolerance": 1e-6, "provenance": "unit de Sitter"},
            {"probe": "domega_abs_max", "value": 0.0, "tolerance": 1e-8, "provenance": "ω = du is closed"},
            {"probe": "transverse_scalar_mean", "value": 2.0, "tolerance": 1e-4, "provenance": "unit 2-sphere"},
            {"probe": "max_abs_B", "value": 0.0, "tolerance": 1e-8, "provenance": "Killing horizon"},
            {"probe": "ncc_min", "value": 0.0, "tolerance": 1e-8, "provenance": "Ric = 3g"},
        ],
    },
    "ads_slice": {
        "name": "ads_slice",
        "description": "Null plane t = x in the Poincaré chart of unit anti-de Sitter space",
        "coordinates": ["t", "x", "y", "z"],
        "bounds": {"t": [-1.0, 1.0], "x": [-1.0, 1.0], "y": [-1.0, 1.0], "z": [0.5, 2.0]},
        "metric": [["-1/z^2", "0", "0", "0"], ["1/z^2", "0", "0"], ["1/z^2", "0"], ["1/z^2"]],
        "level_function": "t - x",
        "rigging": ["z^2", "0", "0", "0"],
        "graph_coordinate": "t",
        "sampling_domain": {"t": [-0.8, 0.8], "x": [-0.8, 0.8], "y": [-0.8, 0.8], "z": [0.6, 1.8]},
        "killing_fields": [["1", "0", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"]],
        "constant_curvature": -1.0,
        "expected": [
            {"probe": "transverse_curvature_mean", "value": -1.0, "tolerance": 1e-4, "provenance": "unit radius"},
            {"probe": "transverse_curvature_std", "value": 0.0, "tolerance": 1e-5, "provenance": "constant curvature", "relation": "le"},
            {"probe": "ambient_curvature_mean", "value": -1.0, "tolerance": 1e-6, "provenance": "unit anti-de Sitter"},
            {"probe": "transverse_scalar_mean", "value": -2.0, "tolerance": 1e-4, "provenance": "unit hyperbolic plane"},
            {"probe": "max_abs_B", "value": 0.0, "tolerance": 1e-8, "provenance": "conformally flat null plane"},
        ],
    },
    "flat_torus": {
        "name": "flat_torus",
        "description": "Flat Lorentzian 3-torus, all periods 1; periodic geodesic search only",
        "coordinates": ["t", "x", "y"],
        "periodic": {"t": 1.0, "x": 1.0, "y": 1.0},
        "metric": [["-1", "0", "0"], ["1", "0"], ["1"]],
        "killing_fields": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "constant_curvature": 0.0,
        "expected": [{"probe": "ncc_min", "value": 0.0, "tolerance": 1e-10, "provenance": "flat"}],
    },
}


def list_scenarios() -> List[str]:
    return sorted(CATALOG)


def describe(name: str) -> str:
    if name not in CATALOG:
        raise UnknownScenarioError(f"Unknown scenario '{name}' (known: {', '.join(list_scenarios())})")
    return CATALOG[name].get("description", "")


def scenario_from_dict(data: Dict[str, Any], check: bool = True) -> Scenario:
    """Build a Scenario from a scenario mapping (built-in or read from a file)."""
    data = validate_scenario_dict(copy.deepcopy(data))
    name = data["name"]
    try:
        coordinates = data["coordinates"]
        periodic = data.get("periodic", {})
        given = data.get("bounds", {})
        bounds = [given.get(c, [0.0, periodic.get(c, 1.0)]) for c in coordinates]
        spacetime = ChartedSpacetime(coordinates, data["metric"], bounds, periodic, name=name)
        if check:
            spacetime.check_signature()
            spacetime.check_periodicity()
        hypersurface = None
        if "level_function" in data:
            sampling = data.get("sampling_domain", {})
            domain = [sampling.get(c, b) for c, b in zip(coordinates, bounds)]
            hypersurface = NullHypersurfaceScenario(
                spacetime,
                str(data["level_function"]),
                data["rigging"],
                data["graph_coordinate"],
                sampling_domain=domain,
                leaf_function=str(data["leaf_function"]) if "leaf_function" in data else None,
                name=name,
            )
        scenario = Scenario(
            name=name,
            spacetime=spacetime,
            hypersurface=hypersurface,
            expected=[ExpectedValue(**entry) for entry in data.get("expected", [])],
            killing_fields=[VectorField(f, coordinates) for f in data.get("killing_fields", [])],
            constant_curvature=data.get("constant_curvature"),
            seed=int(data.get("seed", DEFAULT_SEED)),
            description=data.get("description", ""),
            source=data,
        )
    except ScenarioValidationError:
        raise
    except NullRigError as e:
        raise ScenarioValidationError([f"<scenario>: Failed to load scenario: {str(e)}"], name) from e
    except (ValueError, TypeError) as e:
        raise ScenarioValidationError([f"<scenario>: Failed to load scenario: {str(e)}"], name) from e
    logger.debug("Loaded scenario %s (n = %d)", name, spacetime.n)
    return scenario


def load(name: str) -> Scenario:
    """Built-in scenario by name."""
    if name not in CATALOG:
        raise UnknownScenarioError(f"Unknown scenario '{name}' (known: {', '.join(list_scenarios())})")
    return scenario_from_dict(CATALOG[name])


def load_file(path) -> Scenario:
    return scenario_from_dict(read_scenario_file(path))


def resolve(name_or_path: str) -> Scenario:
    """A catalog name, or else a path to a scenario file."""
    if name_or_path in CATALOG:
        return load(name_or_path)
    if name_or_path.endswith((".yaml", ".yml", ".json")):
        return load_file(name_or_path)
    raise UnknownScenarioError(f"Unknown scenario '{name_or_path}' (known: {', '.join(list_scenarios())})")


def sample_check(
    scenario: Scenario,
    samples: int = 20,
    seed: Optional[int] = None,
    points: Optional[List[np.ndarray]] = None,
) -> List[str]:
    """Null and transversality problems at sampled points of the hypersurface.

    One line per kind of problem: the first offending sample and how many
    samples share it. Pass ``points`` to check points already sampled.
    """
    if scenario.hypersurface is None:
        return []
    if points is None:
        seed = scenario.seed if seed is None else seed
        points = scenario.hypersurface.samples(samples, seed)
    if not points:
        return ["sampling_domain: no sample could be projected onto the hypersurface"]
    found: Dict[str, List] = {}
    for k, point in enumerate(points):
        try:
            scenario.hypersurface.check_point(point)
        except NullRigError as exc:
            found.setdefault(type(exc).__name__, []).append((k, exc))
    problems = []
    for failures in found.values():
        k, exc = failures[0]
        line = f"level_function: sample {k}: {exc}"
        if len(failures) > 1:
            line += f" ({len(failures)} of {len(points)} samples)"
        problems.append(line)
    return problems
