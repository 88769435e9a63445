"""Closed-loop receding-horizon simulation of the search-and-track team."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bernoulli import FilterBank, GaussianBirth, step_bank
from .config import ScenarioConfig
from .core import (
    AgentPose,
    Bounds,
    ObjectScript,
    ObjectState,
    ScenarioTruth,
    action_space,
    estimate_state,
    unroll_action,
)
from .grid import OccupancyGrid, grid_predict, grid_update, mean_cell_entropy
from .metrics import OspaParams, ospa
from .motion import gen_clutter, measure
from .planner import PlannerConfig, plan
from .rewards import JointValueModel

MODES = ("v1", "v2", "vmo")


def build_truth(cfg: ScenarioConfig, rng: Optional[np.random.Generator] = None) -> ScenarioTruth:
    """Ground-truth states for steps 0..cfg.steps (NaN outside each object's lifetime)."""
    a = cfg.area
    bounds = Bounds(a.xmin, a.xmax, a.ymin, a.ymax)
    scripts = tuple(ObjectScript(o.label, o.birth, o.death, tuple(o.state)) for o in cfg.objects)
    F, Q = cfg.motion.F, cfg.motion.Q
    states = np.full((len(scripts), cfg.steps + 1, 4), np.nan)
    for i, s in enumerate(scripts):
        if s.birth > cfg.steps:
            continue
        x = np.array(s.state, dtype=float)
        states[i, s.birth] = x
        for k in range(s.birth + 1, min(s.death, cfg.steps) + 1):
            x = F @ x
            if cfg.object_noise:
                x = x + rng.multivariate_normal(np.zeros(4), Q)
            states[i, k] = x
    return ScenarioTruth(scripts, bounds, states)


@dataclass(frozen=True, eq=False)
class RunRecord:
    k: int
    truth: np.ndarray
    estimates: np.ndarray
    ospa_dist: float
    ospa_loc: float
    ospa_card: float
    search_entropy: float
    poses: np.ndarray
    actions: tuple
    n_tracks: int


@dataclass(frozen=True, eq=False)
class World:
    """Static pieces of one closed-loop run."""

    cfg: ScenarioConfig
    truth: ScenarioTruth
    objective: str
    actions: list = field(default_factory=list)
    agent_bounds: Optional[Bounds] = None
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    ospa: OspaParams = field(default_factory=OspaParams)

    @classmethod
    def from_config(cls, cfg: ScenarioConfig, truth: ScenarioTruth, objective: str, actions=None):
        if objective not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        pc = cfg.planner
        return cls(
            cfg=cfg,
            truth=truth,
            objective=objective,
            actions=actions if actions is not None else action_space(cfg.agents.speed, pc.hover),
            agent_bounds=truth.bounds.expanded(cfg.agents.margin),
            planner=PlannerConfig(horizon=pc.horizon, algorithm=pc.algorithm, objective=objective),
            ospa=OspaParams(cfg.evaluation.ospa_p, cfg.evaluation.ospa_c),
        )


@dataclass(frozen=True, eq=False)
class SimState:
    k: int
    poses: tuple
    bank: FilterBank
    grid: OccupancyGrid
    committed: Optional[tuple] = None
    since_plan: int = 0


def initial_state(cfg: ScenarioConfig, truth: ScenarioTruth) -> SimState:
    x0, y0 = cfg.agents.start
    poses = tuple(AgentPose.at(x0, y0, s + 1) for s in range(cfg.agents.count))
    f = cfg.filter
    bank = FilterBank(
        tracks={},
        birth=GaussianBirth(f.r_B, cfg.birth_mean, cfg.birth_cov),
        sensor=cfg.sensor,
        motion=cfg.motion,
        p_S=f.p_S,
        n_particles=f.n_particles,
        prune_threshold=f.prune_threshold,
    )
    grid = OccupancyGrid.uniform(truth.bounds, cfg.grid.rows, cfg.grid.cols, f.r_B, f.p_S)
    return SimState(0, poses, bank, grid)


def value_model(world: World, state: SimState, horizon: Optional[int] = None) -> JointValueModel:
    cfg = world.cfg
    tracks = [] if world.objective == "v2" else list(state.bank.tracks.values())
    grid = None if world.objective == "v1" else state.grid
    return JointValueModel(
        tracks,
        grid,
        state.poses,
        cfg.sensor,
        cfg.motion,
        world.actions,
        horizon or world.planner.horizon,
        r_B=cfg.filter.r_B,
        p_S=cfg.filter.p_S,
        bounds=world.agent_bounds,
        predict_grid=cfg.planner.predict_grid,
    )


def collect_measurements(world: World, k: int, poses, rng: np.random.Generator) -> list[dict]:
    """Per-agent identity -> measurement maps at step k (real detections, else clutter)."""
    truth = world.truth
    sensor = world.cfg.sensor
    alive = set(truth.alive(k))
    out = []
    for pose in poses:
        ms = {}
        for i, script in enumerate(truth.scripts):
            m = None
            if i in alive:
                m = measure(pose, _object(truth, i, k), sensor, rng)
            if m is None:
                m = gen_clutter(script.label, pose, sensor, rng)
            if m is not None:
                ms[script.label] = m
        out.append(ms)
    return out


def _object(truth: ScenarioTruth, i: int, k: int) -> ObjectState:
    return ObjectState.from_array(truth.states[i, k], truth.scripts[i].label)


def extract_estimates(bank: FilterBank, threshold: float) -> np.ndarray:
    pts = [estimate_state(t).position for t in bank.tracks.values() if t.r >= threshold]
    return np.array(pts).reshape(-1, 2)


def step_world(world: World, state: SimState, rng: np.random.Generator):
    """Plan, move every agent one pose along its plan, advance truth, sense, filter, record."""
    cfg = world.cfg
    committed = state.committed
    since = state.since_plan
    if committed is None or since >= cfg.planner.replan_every:
        result = plan(value_model(world, state), world.planner)
        committed, since = result.actions, 0
    poses = []
    for pose, a in zip(state.poses, committed):
        nxt = unroll_action(pose, world.actions[a], 1, cfg.motion.T0, world.agent_bounds)
        poses.append(nxt.poses[0])
    k = state.k + 1
    meas = collect_measurements(world, k, poses, rng)
    bank = step_bank(state.bank, meas, poses, rng)
    grid = grid_update(grid_predict(state.grid), poses, cfg.sensor)
    truth_pts = world.truth.positions_at(k)
    est = extract_estimates(bank, cfg.evaluation.extraction_threshold)
    dist, loc, card = ospa(truth_pts, est, world.ospa)
    record = RunRecord(
        k=k,
        truth=truth_pts,
        estimates=est,
        ospa_dist=dist,
        ospa_loc=loc,
        ospa_card=card,
        search_entropy=mean_cell_entropy(grid),
        poses=np.array([p.as_array() for p in poses]),
        actions=tuple(committed),
        n_tracks=len(bank.tracks),
    )
    new_state = replace(
        state, k=k, poses=tuple(poses), bank=bank, grid=grid, committed=committed, since_plan=since + 1
    )
    return new_state, record


def run_closed_loop(world: World, rng: np.random.Generator, steps: Optional[int] = None):
    """Run the loop from the initial state; returns (final state, records)."""
    state = initial_state(world.cfg, world.truth)
    records = []
    for _ in range(steps or world.cfg.steps):
        state, rec = step_world(world, state, rng)
        records.append(rec)
    return state, records
