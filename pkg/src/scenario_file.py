"""
Scenario descriptions: the JSON Schema, file loading (YAML or JSON), and
the semantic checks the schema cannot express. Problems are reported as
"field.path: message" lines.
"""

import json
import logging
import pathlib
from typing import Any, Dict, List, Union

import yaml
from jsonschema import Draft202012Validator

try:
    from .errors import ExpressionSyntaxError, ScenarioValidationError, UnboundIdentifierError
    from .exprlang import bind, parse
except ImportError:
    from errors import ExpressionSyntaxError, ScenarioValidationError, UnboundIdentifierError
    from exprlang import bind, parse

logger = logging.getLogger(__name__)

PROBES = (
    "max_abs_B",
    "transverse_curvature_mean",
    "transverse_curvature_std",
    "rigged_curvature_mean",
    "ambient_curvature_mean",
    "domega_abs_max",
    "transverse_scalar_mean",
    "ncc_min",
    "cbar_xi",
    "xi_cross_metric",
)

# probes evaluated at one point of L, given under "at"
POINT_PROBES = ("cbar_xi", "xi_cross_metric")

_EXPRESSION = {"type": ["string", "number"]}
_INTERVAL = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Null hypersurface scenario",
    "type": "object",
    "required": ["name", "coordinates", "metric"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "dimension": {"type": "integer", "minimum": 3, "maximum": 6},
        "coordinates": {
            "type": "array",
            "items": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"},
            "minItems": 3,
            "maxItems": 6,
            "uniqueItems": True,
        },
        "bounds": {"type": "object", "additionalProperties": {"$ref": "#/$defs/interval"}},
        "periodic": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
        "metric": {"type": "array", "items": {"type": "array", "items": {"$ref": "#/$defs/expression"}}},
        "level_function": {"$ref": "#/$defs/expression"},
        "rigging": {"type": "array", "items": {"$ref": "#/$defs/expression"}},
        "graph_coordinate": {"type": "string"},
        "sampling_domain": {"type": "object", "additionalProperties": {"$ref": "#/$defs/interval"}},
        "leaf_function": {"$ref": "#/$defs/expression"},
        "killing_fields": {"type": "array", "items": {"type": "array", "items": {"$ref": "#/$defs/expression"}}},
        "constant_curvature": {"type": "number"},
        "seed": {"type": "integer", "minimum": 0},
        "expected": {"type": "array", "items": {"$ref": "#/$defs/expected"}},
    },
    "dependentRequired": {
        "level_function": ["rigging", "graph_coordinate"],
        "rigging": ["level_function"],
        "leaf_function": ["level_function"],
    },
    "$defs": {
        "expression": _EXPRESSION,
        "interval": _INTERVAL,
        "expected": {
            "type": "object",
            "required": ["probe", "value", "tolerance"],
            "additionalProperties": False,
            "properties": {
                "probe": {"enum": list(PROBES)},
                "value": {"type": "number"},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "provenance": {"type": "string"},
                "relation": {"enum": ["eq", "ge", "le"]},
                "at": {"type": "object", "additionalProperties": {"type": "number"}},
            },
        },
    },
}

_VALIDATOR = Draft202012Validator(SCENARIO_SCHEMA)


def field_path(parts) -> str:
    return ".".join(str(p) for p in parts) or "<root>"


def validate_with_schema(data: Any, validator: Draft202012Validator = _VALIDATOR) -> List[str]:
    return [f"{field_path(e.absolute_path)}: {e.message}" for e in sorted(validator.iter_errors(data), key=str)]


def _check_expression(source, coordinates, path: str, problems: List[str]) -> None:
    try:
        bind(parse(str(source)), coordinates)
    except ExpressionSyntaxError as exc:
        problems.append(f"{path}: {exc}")
    except UnboundIdentifierError as exc:
        problems.append(f"{path}: {exc}")


def semantic_problems(data: Dict[str, Any]) -> List[str]:
    """Cross-field checks on a schema-valid scenario mapping."""
    problems: List[str] = []
    coordinates = list(data["coordinates"])
    n = len(coordinates)
    if "dimension" in data and data["dimension"] != n:
        problems.append(f"dimension: {data['dimension']} does not match {n} coordinates")
    periodic = data.get("periodic", {})
    bounds = data.get("bounds", {})
    for name in list(periodic) + list(bounds) + list(data.get("sampling_domain", {})):
        if name not in coordinates:
            problems.append(f"{_section(data, name)}.{name}: not a coordinate")
    for name in coordinates:
        if name not in bounds and name not in periodic:
            problems.append(f"bounds.{name}: missing (only periodic coordinates may omit bounds)")
        elif name in bounds and not bounds[name][0] < bounds[name][1]:
            problems.append(f"bounds.{name}: lower bound must be below upper bound")
    metric = data["metric"]
    triangle = len(metric) == n and all(len(row) == n - i for i, row in enumerate(metric))
    square = len(metric) == n and all(len(row) == n for row in metric)
    if not (triangle or square):
        problems.append(f"metric: expected {n} rows forming an upper triangle or a full {n}x{n} matrix")
    else:
        for i, row in enumerate(metric):
            for j, source in enumerate(row):
                _check_expression(source, coordinates, f"metric.{i}.{j}", problems)
    if "level_function" in data:
        _check_expression(data["level_function"], coordinates, "level_function", problems)
        if len(data["rigging"]) != n:
            problems.append(f"rigging: expected {n} components, got {len(data['rigging'])}")
        for i, source in enumerate(data["rigging"]):
            _check_expression(source, coordinates, f"rigging.{i}", problems)
        if data["graph_coordinate"] not in coordinates:
            problems.append(f"graph_coordinate: '{data['graph_coordinate']}' is not a coordinate")
    if "leaf_function" in data:
        _check_expression(data["leaf_function"], coordinates, "leaf_function", problems)
    for k, field_ in enumerate(data.get("killing_fields", [])):
        if len(field_) != n:
            problems.append(f"killing_fields.{k}: expected {n} components, got {len(field_)}")
        for i, source in enumerate(field_):
            _check_expression(source, coordinates, f"killing_fields.{k}.{i}", problems)
    for k, entry in enumerate(data.get("expected", [])):
        if entry["probe"] != "ncc_min" and "level_function" not in data:
            problems.append(f"expected.{k}.probe: '{entry['probe']}' needs a hypersurface")
        if entry["probe"] in POINT_PROBES and "at" not in entry:
            problems.append(f"expected.{k}.at: '{entry['probe']}' needs a point")
        at = entry.get("at", {})
        if at and entry["probe"] not in POINT_PROBES:
            problems.append(f"expected.{k}.at: '{entry['probe']}' is not evaluated at a point")
        for name in at:
            if name not in coordinates:
                problems.append(f"expected.{k}.at.{name}: not a coordinate")
        if at and set(coordinates) - set(at):
            missing = ", ".join(c for c in coordinates if c not in at)
            problems.append(f"expected.{k}.at: missing coordinates {missing}")
    return problems


def _section(data, name) -> str:
    for key in ("periodic", "bounds", "sampling_domain"):
        if name in data.get(key, {}):
            return key
    return "coordinates"


def validate_scenario_dict(data: Any) -> Dict[str, Any]:
    """Return the mapping if it is a valid scenario description, else raise with every problem found."""
    name = data.get("name") if isinstance(data, dict) else None
    problems = validate_with_schema(data)
    if not problems:
        problems = semantic_problems(data)
    if problems:
        raise ScenarioValidationError(problems, name)
    return data


def read_scenario_file(path: Union[str, pathlib.Path]) -> Dict[str, Any]:
    """Load a YAML or JSON scenario description and validate it."""
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding="utf-8")
        data = json.loads(text) if path.suffix.lower() == ".json" else yaml.safe_load(text)
    except (OSError, ValueError, yaml.YAMLError) as e:
        raise ScenarioValidationError([f"<file>: Failed to load scenario file {path}: {str(e)}"]) from e
    logger.debug("Read scenario file %s", path)
    return validate_scenario_dict(data)
