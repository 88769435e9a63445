"""Domain types shared by the filter, planner and simulator."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

BASE_ALTITUDE = 30.0
ALTITUDE_GAP = 5.0
WEIGHT_TOL = 1e-9

# unit vectors for the eight compass headings, counter-clockwise from east
_HEADINGS = np.array(
    [[np.cos(k * np.pi / 4), np.sin(k * np.pi / 4)] for k in range(8)]
)
_HEADINGS[np.abs(_HEADINGS) < 1e-15] = 0.0


class DegenerateTrackError(ValueError):
    """Raised when a track's particle weights cannot be normalized."""


def agent_altitude(agent_id: int) -> float:
    """Fixed flight altitude of agent ``agent_id`` (1-based)."""
    return BASE_ALTITUDE + ALTITUDE_GAP * (agent_id - 1)


@dataclass(frozen=True)
class ObjectState:
    px: float
    vx: float
    py: float
    vy: float
    label: str = ""

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.vx, self.py, self.vy], dtype=float)

    @classmethod
    def from_array(cls, x: Sequence[float], label: str = "") -> "ObjectState":
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]), label)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.px, self.py])


@dataclass(frozen=True)
class AgentPose:
    px: float
    py: float
    pz: float
    agent_id: int = 1

    @classmethod
    def at(cls, px: float, py: float, agent_id: int) -> "AgentPose":
        return cls(float(px), float(py), agent_altitude(agent_id), agent_id)

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz])


@dataclass(frozen=True)
class Bounds:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def expanded(self, frac: float) -> "Bounds":
        dx, dy = frac * self.width, frac * self.height
        return Bounds(self.xmin - dx, self.xmax + dx, self.ymin - dy, self.ymax + dy)

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (min(max(x, self.xmin), self.xmax), min(max(y, self.ymin), self.ymax))


@dataclass(frozen=True, eq=False)
class BernoulliTrack:
    """Existence probability plus a weighted particle cloud for one identity.

    ``particles`` has shape (N_s, 4) with rows [px, vx, py, vy].
    """

    label: str
    r: float
    particles: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        particles = np.array(self.particles, dtype=float).reshape(-1, 4)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        particles.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "particles", particles)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "r", float(self.r))

    @property
    def n_particles(self) -> int:
        return len(self.weights)

    def check(self) -> None:
        if self.n_particles < 1:
            raise ValueError(f"track {self.label}: no particles")
        if len(self.particles) != self.n_particles:
            raise ValueError(f"track {self.label}: particle/weight size mismatch")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"track {self.label}: r={self.r} outside [0, 1]")
        if np.any(self.weights < 0):
            raise ValueError(f"track {self.label}: negative weights")
        if abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"track {self.label}: weights sum to {self.weights.sum()}")

    def with_(self, **changes) -> "BernoulliTrack":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Measurement:
    agent_id: int
    label: str
    value: np.ndarray
    kind: str = "real"

    def __post_init__(self):
        if self.kind not in ("real", "clutter"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        value = np.array(self.value, dtype=float)
        value.flags.writeable = False
        object.__setattr__(self, "value", value)


# per-agent measurement set: identity -> measurement (absent identity means empty)
MeasurementSet = dict


@dataclass(frozen=True)
class Action:
    """A compass heading index 0..7 (counter-clockwise from east), or None to hover."""

    heading: Optional[int]
    speed: float

    @property
    def is_hover(self) -> bool:
        return self.heading is None

    def displacement(self, dt: float) -> np.ndarray:
        if self.heading is None:
            return np.zeros(2)
        return _HEADINGS[self.heading] * self.speed * dt


def action_space(speed: float, hover: bool = True) -> list[Action]:
    """The default 9-element action set: eight headings, then hover."""
    actions = [Action(k, speed) for k in range(8)]
    if hover:
        actions.append(Action(None, speed))
    return actions


@dataclass(frozen=True, eq=False)
class ActionPlan:
    agent_id: int
    action: Action
    poses: tuple[AgentPose, ...] = field(default_factory=tuple)

    def positions(self) -> np.ndarray:
        return np.array([p.as_array() for p in self.poses])


def normalize_weights(track: BernoulliTrack) -> BernoulliTrack:
    total = float(np.sum(track.weights))
    if not total > 0.0 or not np.isfinite(total):
        raise DegenerateTrackError(f"track {track.label}: weights sum to {total}")
    return track.with_(weights=track.weights / total)


def unroll_action(
    pose: AgentPose,
    action: Action,
    horizon: int,
    dt: float = 1.0,
    bounds: Optional[Bounds] = None,
) -> ActionPlan:
    """Poses visited over ``horizon`` steps when ``action`` is held.

    When ``bounds`` is given every pose is clamped into it.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    step = action.displacement(dt)
    poses = []
    for j in range(1, horizon + 1):
        x, y = pose.px + j * step[0], pose.py + j * step[1]
        if bounds is not None:
            x, y = bounds.clamp(x, y)
        poses.append(AgentPose(x, y, pose.pz, pose.agent_id))
    return ActionPlan(pose.agent_id, action, tuple(poses))


def estimate_state(track: BernoulliTrack) -> ObjectState:
    x = track.weights @ track.particles
    return ObjectState.from_array(x, track.label)


@dataclass(frozen=True)
class ObjectScript:
    label: str
    birth: int
    death: int
    state: tuple[float, float, float, float]


@dataclass(frozen=True, eq=False)
class ScenarioTruth:
    """Ground-truth trajectories; ``states[i, k]`` is object i at step k (NaN when absent)."""

    scripts: tuple[ObjectScript, ...]
    bounds: Bounds
    states: np.ndarray

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.scripts]

    @property
    def n_steps(self) -> int:
        return self.states.shape[1] - 1

    def alive(self, k: int) -> list[int]:
        return [
            i for i, s in enumerate(self.scripts) if s.birth <= k <= s.death
        ]

    def objects_at(self, k: int) -> list[ObjectState]:
        return [
            ObjectState.from_array(self.states[i, k], self.scripts[i].label)
            for i in self.alive(k)
        ]

    def positions_at(self, k: int) -> np.ndarray:
        idx = self.alive(k)
        if not idx:
            return np.zeros((0, 2))
        return self.states[idx, k][:, [0, 2]]
