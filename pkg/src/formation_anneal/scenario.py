"""Scenario files: YAML experiment definitions with a versioned schema.

Example::

    schema: formation-scenario/1
    name: paper-star
    dimension: 2
    graph: star            # or {preset: circle} or {edges: [[1, 2], [2, 3]]}
    target:  [[0, 0], [-1, 1], [1, 1], [1, -1], [-1, -1]]
    initial: [[1, 2], [-2, -1], [1, -1], [3, -2], [-3, 2]]
    dt: 0.01
    t_end: 5000
    record_every: 100
    scheme: stochastic-euler-maruyama
    c1: 0.5
    c2: 0.001
    seed: 0
    ensemble_size: 10
    project_centroid: false
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .core import EPS_CENTROID
from .dynamics import SCHEMES, AnnealingSchedule, IntegratorParams
from .topology import PRESETS, Graph, GraphError

SCHEMA = "formation-scenario/1"

_KEYS = {
    "schema", "name", "dimension", "graph", "target", "initial", "dt", "t_end",
    "record_every", "scheme", "c1", "c2", "seed", "ensemble_size", "project_centroid",
}


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate; the message names the field."""


@dataclass(frozen=True)
class Scenario:
    name: str
    dimension: int
    graph: Graph
    target: np.ndarray
    initial: np.ndarray
    params: IntegratorParams
    schedule: AnnealingSchedule
    seed: int = 0
    ensemble_size: int = 1
    project_centroid: bool = False
    # preset name the graph was built from, kept so files round-trip
    graph_preset: str | None = field(default=None, compare=False)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.name == other.name
            and self.dimension == other.dimension
            and self.graph == other.graph
            and np.array_equal(self.target, other.target)
            and np.array_equal(self.initial, other.initial)
            and self.params == other.params
            and self.schedule == other.schedule
            and self.seed == other.seed
            and self.ensemble_size == other.ensemble_size
            and self.project_centroid == other.project_centroid
        )


def _number(data: dict, key: str, default=None, *, integer: bool = False):
    if key not in data:
        if default is None:
            raise ScenarioError(f"missing required field '{key}'")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"field '{key}' must be a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ScenarioError(f"field '{key}' must be an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ScenarioError(f"field '{key}' must be finite, got {v!r}")
    return float(v)


def _points(data: dict, key: str, dimension: int) -> np.ndarray:
    if key not in data:
        raise ScenarioError(f"missing required field '{key}'")
    try:
        pts = np.array(data[key], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"field '{key}' must be a list of {dimension}-d points: {exc}") from None
    if pts.ndim != 2 or pts.shape[1] != dimension:
        raise ScenarioError(f"field '{key}' must be a list of {dimension}-d points, got shape {pts.shape}")
    if pts.shape[0] < 2:
        raise ScenarioError(f"field '{key}' needs at least 2 points")
    if not np.all(np.isfinite(pts)):
        raise ScenarioError(f"field '{key}' contains non-finite coordinates")
    return pts


def _graph(spec: Any, n: int) -> tuple[Graph, str | None]:
    if isinstance(spec, str):
        spec = {"preset": spec}
    if not isinstance(spec, dict):
        raise ScenarioError(f"field 'graph' must be a preset name or a mapping, got {spec!r}")
    if "n_vertices" in spec and spec["n_vertices"] != n:
        raise ScenarioError(f"field 'graph.n_vertices' is {spec['n_vertices']} but there are {n} points")
    try:
        if "preset" in spec:
            name = spec["preset"]
            if name not in PRESETS:
                raise ScenarioError(f"field 'graph.preset' must be one of {sorted(PRESETS)}, got {name!r}")
            return PRESETS[name](n), name
        if "edges" in spec:
            return Graph(n, spec["edges"]), None
    except GraphError as exc:
        raise ScenarioError(f"field 'graph': {exc}") from None
    except TypeError as exc:
        raise ScenarioError(f"field 'graph.edges' is malformed: {exc}") from None
    raise ScenarioError("field 'graph' needs either 'preset' or 'edges'")


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping at top level")
    unknown = set(data) - _KEYS
    if unknown:
        raise ScenarioError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if data.get("schema") != SCHEMA:
        raise ScenarioError(f"field 'schema' must be {SCHEMA!r}, got {data.get('schema')!r}")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("field 'name' must be a non-empty string")
    dimension = _number(data, "dimension", integer=True)
    if dimension < 1:
        raise ScenarioError(f"field 'dimension' must be >= 1, got {dimension}")
    target = _points(data, "target", dimension)
    initial = _points(data, "initial", dimension)
    if target.shape != initial.shape:
        raise ScenarioError(
            f"fields 'target' and 'initial' have different agent counts ({len(target)} vs {len(initial)})"
        )
    graph, preset = _graph(data.get("graph"), len(target))
    project = data.get("project_centroid", False)
    if not isinstance(project, bool):
        raise ScenarioError(f"field 'project_centroid' must be true or false, got {project!r}")
    for key, pts in (("target", target), ("initial", initial)):
        off = np.linalg.norm(pts.sum(axis=0))
        if off > EPS_CENTROID and not project:
            raise ScenarioError(
                f"field '{key}' has nonzero centroid {pts.mean(axis=0).tolist()}; "
                "recentre it or set project_centroid: true"
            )
    if project:
        # already-centred points are left untouched so dumped files round-trip exactly
        if np.linalg.norm(target.sum(axis=0)) > EPS_CENTROID:
            target = target - target.mean(axis=0)
        if np.linalg.norm(initial.sum(axis=0)) > EPS_CENTROID:
            initial = initial - initial.mean(axis=0)

    scheme = data.get("scheme", "deterministic-rk4")
    if scheme not in SCHEMES:
        raise ScenarioError(f"field 'scheme' must be one of {sorted(SCHEMES)}, got {scheme!r}")
    try:
        params = IntegratorParams(
            dt=_number(data, "dt"),
            t_end=_number(data, "t_end"),
            record_every=_number(data, "record_every", 1, integer=True),
            scheme=scheme,
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"integrator fields: {exc}") from None
    try:
        schedule = AnnealingSchedule(_number(data, "c1", 0.0), _number(data, "c2", 0.0))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"annealing fields: {exc}") from None
    seed = _number(data, "seed", 0, integer=True)
    if seed < 0:
        raise ScenarioError(f"field 'seed' must be >= 0, got {seed}")
    ensemble = _number(data, "ensemble_size", 1, integer=True)
    if ensemble < 1:
        raise ScenarioError(f"field 'ensemble_size' must be >= 1, got {ensemble}")
    for arr in (target, initial):
        arr.setflags(write=False)
    return Scenario(name, dimension, graph, target, initial, params, schedule,
                    seed, ensemble, project, preset)


def scenario_to_dict(s: Scenario) -> dict:
    graph: Any = s.graph_preset if s.graph_preset else {"edges": [list(e) for e in s.graph.edges]}
    return {
        "schema": SCHEMA,
        "name": s.name,
        "dimension": s.dimension,
        "graph": graph,
        "target": s.target.tolist(),
        "initial": s.initial.tolist(),
        "dt": s.params.dt,
        "t_end": s.params.t_end,
        "record_every": s.params.record_every,
        "scheme": s.params.scheme,
        "c1": s.schedule.c1,
        "c2": s.schedule.c2,
        "seed": s.seed,
        "ensemble_size": s.ensemble_size,
        "project_centroid": s.project_centroid,
    }


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not valid YAML: {exc}") from None
    try:
        return scenario_from_dict(data)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def dump_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=None))


# Five agents in the plane; the target is a unit square around a centre agent.
SQUARE_TARGET = [[0, 0], [-1, 1], [1, 1], [1, -1], [-1, -1]]
SPREAD_INITIAL = [[1, 2], [-2, -1], [1, -1], [3, -2], [-3, 2]]


def _five_agent(name: str, graph: str) -> dict:
    return {
        "schema": SCHEMA,
        "name": name,
        "dimension": 2,
        "graph": graph,
        "target": SQUARE_TARGET,
        "initial": SPREAD_INITIAL,
        "dt": 0.01,
        "t_end": 5000.0,
        "record_every": 100,
        "scheme": "stochastic-euler-maruyama",
        "c1": 0.5,
        "c2": 0.001,
        "seed": 0,
        "ensemble_size": 1,
    }


PRESET_SCENARIOS = {
    "paper-star": _five_agent("paper-star", "star"),
    "paper-circle": _five_agent("paper-circle", "circle"),
}

# deterministic counterpart of a preset: RK4 at the default step
NOISELESS = {"scheme": "deterministic-rk4", "dt": 1e-3, "record_every": 1000, "c1": 0.0}


def preset(name: str, *, noise: bool = True) -> Scenario:
    if name not in PRESET_SCENARIOS:
        raise ScenarioError(f"unknown preset {name!r}; expected one of {sorted(PRESET_SCENARIOS)}")
    data = dict(PRESET_SCENARIOS[name])
    if not noise:
        data.update(NOISELESS)
        data["name"] = f"{name}-noiseless"
    return scenario_from_dict(data)
