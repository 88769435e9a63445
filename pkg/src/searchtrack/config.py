"""Scenario configuration: dataclass schema, YAML loading and the built-in presets.

Preset trajectories are approximations reconstructed from the scenario
descriptions (start/stop layout, group structure, late births); no coordinate
tables exist for them.
"""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .motion import CvModel, SensorModel


class ConfigError(ValueError):
    pass


@dataclass
class AreaConfig:
    xmin: float = 0.0
    xmax: float = 1000.0
    ymin: float = 0.0
    ymax: float = 1000.0


@dataclass
class GridConfig:
    rows: int = 100
    cols: int = 100


@dataclass
class ObjectConfig:
    label: str
    birth: int
    death: int
    state: list[float]


@dataclass
class AgentsConfig:
    count: int = 3
    start: list[float] = field(default_factory=lambda: [500.0, 100.0])
    speed: float = 10.0
    margin: float = 0.1


@dataclass
class FilterConfig:
    r_B: float = 0.005
    p_S: float = 0.99
    n_particles: int = 1000
    prune_threshold: float = 1e-3
    # None: centre of the survey area / half its extent
    birth_mean: Optional[list[float]] = None
    birth_std: Optional[list[float]] = None


@dataclass
class PlanningConfig:
    horizon: int = 3
    algorithm: str = "greedy"
    replan_every: int = 1
    predict_grid: bool = False
    hover: bool = True


@dataclass
class EvalConfig:
    ospa_p: float = 1.0
    ospa_c: float = 100.0
    extraction_threshold: float = 0.5


@dataclass
class ScenarioConfig:
    name: str = "custom"
    steps: int = 200
    object_noise: bool = False
    area: AreaConfig = field(default_factory=AreaConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    objects: list[ObjectConfig] = field(default_factory=list)
    agents: AgentsConfig = field(default_factory=AgentsConfig)
    sensor: SensorModel = field(default_factory=SensorModel)
    motion: CvModel = field(default_factory=CvModel)
    filter: FilterConfig = field(default_factory=FilterConfig)
    planner: PlanningConfig = field(default_factory=PlanningConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)

    def validate(self) -> "ScenarioConfig":
        def bad(key, msg):
            raise ConfigError(f"{key}: {msg}")

        if self.steps < 1:
            bad("steps", "must be a positive number of timesteps")
        a = self.area
        if not (a.xmax > a.xmin and a.ymax > a.ymin):
            bad("area", "max must exceed min")
        if self.grid.rows < 1 or self.grid.cols < 1:
            bad("grid", "rows and cols must be positive")
        if self.agents.count < 1:
            bad("agents.count", "need at least one agent")
        if len(self.agents.start) != 2:
            bad("agents.start", "expected [x, y]")
        if self.agents.speed < 0:
            bad("agents.speed", "must be nonnegative")
        f = self.filter
        if not 0 < f.r_B < 1:
            bad("filter.r_B", "must lie in (0, 1)")
        if not 0 <= f.p_S <= 1:
            bad("filter.p_S", "must lie in [0, 1]")
        if f.n_particles < 1:
            bad("filter.n_particles", "must be positive")
        for key in ("birth_mean", "birth_std"):
            v = getattr(f, key)
            if v is not None and len(v) != 4:
                bad(f"filter.{key}", "expected 4 entries [px, vx, py, vy]")
        if self.planner.horizon < 1:
            bad("planner.horizon", "must be >= 1")
        if self.planner.algorithm not in ("greedy", "brute_force"):
            bad("planner.algorithm", "must be greedy or brute_force")
        if self.planner.replan_every < 1:
            bad("planner.replan_every", "must be >= 1")
        labels = [o.label for o in self.objects]
        if len(set(labels)) != len(labels):
            bad("objects", "labels must be unique")
        for i, o in enumerate(self.objects):
            if len(o.state) != 4:
                bad(f"objects[{i}].state", "expected [px, vx, py, vy]")
            if o.death < o.birth:
                bad(f"objects[{i}]", "death precedes birth")
        return self

    @property
    def birth_mean(self) -> np.ndarray:
        if self.filter.birth_mean is not None:
            return np.array(self.filter.birth_mean, dtype=float)
        a = self.area
        return np.array([(a.xmin + a.xmax) / 2, 0.0, (a.ymin + a.ymax) / 2, 0.0])

    @property
    def birth_cov(self) -> np.ndarray:
        if self.filter.birth_std is not None:
            std = np.array(self.filter.birth_std, dtype=float)
        else:
            a = self.area
            std = np.array([(a.xmax - a.xmin) / 2, 10.0, (a.ymax - a.ymin) / 2, 10.0])
        return np.diag(std**2)


def _convert(tp, value, path: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if dataclasses.is_dataclass(tp):
        return from_dict(tp, value, path)
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)][0]
        return _convert(inner, value, path)
    if origin is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list")
        return [_convert(args[0], v, f"{path}[{i}]") for i, v in enumerate(value)]
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if tp is str:
        return str(value)
    return value


def from_dict(cls, data: Any, path: str = ""):
    """Build dataclass ``cls`` from nested mappings, rejecting unknown keys."""
    if isinstance(data, cls):
        return data
    if not isinstance(data, dict):
        raise ConfigError(f"{path or cls.__name__}: expected a mapping")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in names:
            raise ConfigError(f"{where}: unknown key")
        kwargs[key] = _convert(hints[key], value, where)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path or cls.__name__}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path or cls.__name__}: {exc}") from None


def to_dict(cfg) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if dataclasses.is_dataclass(v):
            v = to_dict(v)
        elif isinstance(v, list):
            v = [to_dict(x) if dataclasses.is_dataclass(x) else x for x in v]
        elif isinstance(v, (np.floating, float)):
            v = float(v)
        out[f.name] = v
    return out


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def config_from_dict(data: dict) -> ScenarioConfig:
    """A ``preset`` key selects a base scenario that the remaining keys override."""
    data = dict(data or {})
    preset = data.pop("preset", None)
    if preset is not None:
        data = _deep_merge(to_dict(get_preset(preset)), data)
    return from_dict(ScenarioConfig, data).validate()


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    return config_from_dict(data or {})


def echo_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=None)


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    """Dotted-path overrides, e.g. ``with_overrides(cfg, **{"agents.count": 5})``."""
    data = to_dict(cfg)
    for dotted, value in changes.items():
        node = data
        *head, last = dotted.split(".")
        for key in head:
            node = node[key]
        if last not in node:
            raise ConfigError(f"{dotted}: unknown key")
        node[last] = value
    return from_dict(ScenarioConfig, data).validate()


FAST = 3.0
SLOW = 1.0


def _obj(label, birth, px, py, vx, vy, death=200):
    return ObjectConfig(label, birth, death, [float(px), float(vx), float(py), float(vy)])


def scenario1() -> ScenarioConfig:
    """FastMoving: three fast objects in two groups heading the same way."""
    v = FAST
    objects = [
        _obj("A1", 0, 250, 250, 0.6 * v, 0.8 * v),
        _obj("A2", 0, 290, 220, 0.6 * v, 0.8 * v),
        _obj("B1", 0, 700, 150, 0.6 * v, 0.8 * v),
    ]
    return ScenarioConfig(name="scenario1", objects=objects).validate()


def scenario2() -> ScenarioConfig:
    """LateBirth: four slow objects; groups C and D appear far from the agents."""
    v = SLOW
    objects = [
        _obj("A1", 0, 400, 300, 0.8 * v, 0.6 * v),
        _obj("B1", 0, 650, 350, -0.6 * v, 0.8 * v),
        _obj("C1", 60, 150, 850, 0.95 * v, -0.3 * v),
        _obj("D1", 80, 850, 850, -0.95 * v, -0.3 * v),
    ]
    return ScenarioConfig(name="scenario2", objects=objects).validate()


def scenario3() -> ScenarioConfig:
    """Opposite: group A near the agents, late-born group B far away, moving the other way."""
    v = FAST
    objects = [
        _obj("A1", 0, 420, 250, 0.9 * v, 0.4 * v),
        _obj("A2", 0, 460, 220, 0.9 * v, 0.4 * v),
        _obj("B1", 30, 880, 880, -0.9 * v, -0.4 * v),
        _obj("B2", 30, 840, 910, -0.9 * v, -0.4 * v),
    ]
    return ScenarioConfig(name="scenario3", objects=objects).validate()


def scenario4() -> ScenarioConfig:
    """Explosion: twenty fast objects leaving the centre of a 2 km area in four groups."""
    v = FAST
    objects = []
    groups = [(1, 1, 0), (-1, -1, 0), (-1, 1, 40), (1, -1, 40)]
    for g, (sx, sy, birth) in enumerate(groups):
        for i in range(5):
            ang = np.arctan2(sy, sx) + (i - 2) * 0.12
            px = 1000 + sx * 60 + 25 * (i - 2) * sy
            py = 1000 + sy * 60 - 25 * (i - 2) * sx
            objects.append(
                _obj(f"{'ABCD'[g]}{i + 1}", birth, px, py, v * np.cos(ang), v * np.sin(ang))
            )
    cfg = ScenarioConfig(
        name="scenario4",
        area=AreaConfig(0.0, 2000.0, 0.0, 2000.0),
        objects=objects,
        agents=AgentsConfig(start=[1000.0, 200.0]),
    )
    return cfg.validate()


PRESETS = {
    "scenario1": scenario1,
    "scenario2": scenario2,
    "scenario3": scenario3,
    "scenario4": scenario4,
}


def get_preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"preset: unknown scenario {name!r}; choose from {sorted(PRESETS)}") from None
