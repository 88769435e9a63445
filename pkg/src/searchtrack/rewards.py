"""Information-theoretic value functions for tracking and discovery.

Two routes compute the same quantities: the plain functions
(:func:`tracking_value`, :func:`discovery_value`) roll the filter and grid
forward one plan at a time, while :class:`JointValueModel` precomputes every
(agent, action) contribution once and scores batches of joint actions. The
planners use the batched route; tests check the two agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import xlogy

from .bernoulli import update_track_all_agents
from .core import ActionPlan, AgentPose, BernoulliTrack, Bounds, estimate_state, unroll_action
from .grid import (
    OccupancyGrid,
    binary_entropy,
    grid_entropy,
    grid_predict,
    grid_update,
    predict_occupancy,
)
from .motion import (
    CvModel,
    SensorModel,
    detection_probability,
    eta_many,
    measurement_function,
    null_likelihood,
    p_d_of_distance,
    pims,
)


@dataclass(frozen=True)
class ValueBreakdown:
    v1: float
    v2: float
    v_mo: float = 0.0
    v1_steps: tuple = ()
    v2_steps: tuple = ()


def track_entropy(r: float, weights: np.ndarray) -> float:
    """Entropy of one Bernoulli track with normalized particle weights (nats)."""
    w = np.asarray(weights, dtype=float)
    return float(-xlogy(1.0 - r, 1.0 - r) - xlogy(r, r) - r * np.sum(xlogy(w, w)))


def set_entropy(tracks: Sequence[BernoulliTrack]) -> float:
    return float(sum(track_entropy(t.r, t.weights) for t in tracks))


def rollout_track(
    track: BernoulliTrack, steps: int, motion: CvModel, r_B: float, p_S: float
) -> BernoulliTrack:
    """Deterministic j-step prediction used inside planning rollouts.

    Existence follows the Bernoulli prediction; particles move without process
    noise and keep their weights.
    """
    r = track.r
    for _ in range(steps):
        r = float(predict_occupancy(r, r_B, p_S))
    particles = track.particles @ motion.transition(steps).T
    return track.with_(r=r, particles=particles)


def tracking_value(
    tracks: Sequence[BernoulliTrack],
    plans: Sequence[ActionPlan],
    sensor: SensorModel,
    motion: CvModel,
    horizon: int,
    r_B: float = 0.005,
    p_S: float = 0.99,
    return_steps: bool = False,
):
    """Sum over the horizon of prior minus ideal-measurement posterior set entropy."""
    plans = sorted(plans, key=lambda p: p.agent_id)
    ideal = pims(tracks, plans, sensor, motion)
    steps = []
    for j in range(1, horizon + 1):
        prior = [rollout_track(t, j, motion, r_B, p_S) for t in tracks]
        poses = [p.poses[j - 1] for p in plans]
        post = [
            update_track_all_agents(
                t, [ideal[j - 1][s].get(t.label) for s in range(len(plans))], sensor, poses
            )
            for t in prior
        ]
        steps.append(set_entropy(prior) - set_entropy(post))
    total = float(sum(steps))
    return (total, tuple(steps)) if return_steps else total


def discovery_value(
    grid: OccupancyGrid,
    plans: Sequence[ActionPlan],
    sensor: SensorModel,
    horizon: int,
    predict_between: bool = False,
    return_steps: bool = False,
):
    """Sum over the horizon of grid entropy reduction from ideal empty measurements.

    The conditioned grid accumulates the updates of steps 1..j. With
    ``predict_between`` the grid is also predicted before each step and the
    reference entropy is that of the unconditioned prediction.
    """
    h0 = grid_entropy(grid)
    prior, post = grid, grid
    steps = []
    for j in range(1, horizon + 1):
        poses = [p.poses[j - 1] for p in plans]
        if predict_between:
            prior = grid_predict(prior)
            post = grid_predict(post)
            h0 = grid_entropy(prior)
        post = grid_update(post, poses, sensor)
        steps.append(h0 - grid_entropy(post))
    total = float(sum(steps))
    return (total, tuple(steps)) if return_steps else total


def track_information(r: float, weights, tables: Sequence[np.ndarray]) -> float:
    """Exact mutual information between a discrete Bernoulli track and independent sensors.

    ``tables[s]`` has shape (1 + n_states, n_outcomes): row 0 is the outcome
    distribution when the object is absent, row 1 + i when it sits in state i.
    Sensors are conditionally independent given the state. Every joint outcome
    is enumerated, so keep the alphabets small.
    """
    w = np.asarray(weights, dtype=float)
    prior = np.concatenate([[1.0 - r], r * w])
    h_prior = track_entropy(r, w)
    if not len(tables):
        return 0.0
    like = np.ones((len(prior), 1))
    for t in tables:
        t = np.asarray(t, dtype=float)
        like = (like[:, :, None] * t[:, None, :]).reshape(len(prior), -1)
    joint = prior[:, None] * like
    p_z = joint.sum(axis=0)
    post = joint[:, p_z > 0] / p_z[p_z > 0]
    h_post = -np.sum(xlogy(post, post), axis=0)
    return float(h_prior - p_z[p_z > 0] @ h_post)


def grid_information(cells, p_d: np.ndarray) -> float:
    """Exact mutual information between grid cells and detect/miss outcomes of several looks.

    ``p_d`` has shape (n_looks, n_cells); an occupied cell is detected on each
    look independently, an empty cell never produces a detection.
    """
    r = np.asarray(cells, dtype=float).reshape(-1)
    p_d = np.atleast_2d(np.asarray(p_d, dtype=float)).reshape(-1, r.size)
    miss = np.prod(1.0 - p_d, axis=0)
    p_none = 1.0 - r + r * miss
    # only the all-miss outcome leaves uncertainty; any detection reveals occupancy
    post = np.divide(r * miss, p_none, out=np.zeros_like(r), where=p_none > 0)
    return float(np.sum(binary_entropy(r) - p_none * binary_entropy(post)))


def gcm_scores(v1, v2) -> np.ndarray:
    """Min-max normalize each objective over the candidates and sum.

    An objective that is constant over the candidates contributes 0.
    """
    out = np.zeros(len(v1))
    for v in (np.asarray(v1, dtype=float), np.asarray(v2, dtype=float)):
        lo, hi = v.min(), v.max()
        if hi > lo:
            out += (v - lo) / (hi - lo)
    return out


def gcm_combine(candidates):
    """``candidates``: iterable of (actions, v1, v2); returns [(actions, v_mo)]."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("gcm_combine needs at least one candidate")
    scores = gcm_scores([c[1] for c in candidates], [c[2] for c in candidates])
    return [(c[0], float(v)) for c, v in zip(candidates, scores)]


class JointValueModel:
    """Batched evaluation of (V1, V2) over joint actions.

    Joint actions are integer arrays of shape (n, S): entry ``[c, s]`` is the
    action index of the s-th agent (ordered by agent id) in candidate c, or -1
    when that agent contributes no measurement.
    """

    def __init__(
        self,
        tracks: Sequence[BernoulliTrack],
        grid: Optional[OccupancyGrid],
        poses: Sequence[AgentPose],
        sensor: SensorModel,
        motion: CvModel,
        actions: Sequence,
        horizon: int,
        r_B: float = 0.005,
        p_S: float = 0.99,
        bounds: Optional[Bounds] = None,
        predict_grid: bool = False,
        chunk: int = 256,
    ):
        self.poses = sorted(poses, key=lambda p: p.agent_id)
        self.actions = list(actions)
        self.horizon = horizon
        self.sensor = sensor
        self.predict_grid = predict_grid
        self.chunk = chunk
        self.n_agents = len(self.poses)
        self.plans = [
            [unroll_action(p, a, horizon, motion.T0, bounds) for a in self.actions]
            for p in self.poses
        ]
        self.n_evaluations = 0
        self._prepare_tracks(list(tracks), motion, r_B, p_S)
        self._prepare_grid(grid)

    def plan(self, s: int, a: int) -> ActionPlan:
        return self.plans[s][a]

    def _prepare_tracks(self, tracks, motion, r_B, p_S):
        S, A, H = self.n_agents, len(self.actions), self.horizon
        self._tracks = []
        for track in tracks:
            est0 = estimate_state(track).as_array()
            per_step = []
            for j in range(1, H + 1):
                rolled = rollout_track(track, j, motion, r_B, p_S)
                pos = (motion.transition(j) @ est0)[[0, 2]]
                poses = [self.plans[s][a].poses[j - 1] for s in range(S) for a in range(A)]
                zs = []
                for pose in poses:
                    z = None
                    if detection_probability(pose, pos, self.sensor) >= self.sensor.pims_threshold:
                        z = measurement_function(pos, pose, self.sensor)
                    zs.append(z)
                etas = eta_many(zs, rolled.particles, poses, self.sensor).reshape(S, A, -1)
                nulls = np.array([null_likelihood(z, self.sensor) for z in zs]).reshape(S, A)
                prior = track_entropy(rolled.r, rolled.weights)
                per_step.append((rolled.r, rolled.weights, etas, nulls, prior))
            self._tracks.append(per_step)

    def _prepare_grid(self, grid):
        self._grid_r = None
        if grid is None:
            return
        S, A, H = self.n_agents, len(self.actions), self.horizon
        centers = grid.centers().reshape(-1, 2)
        P = np.array(
            [[p.px, p.py, p.pz] for s in range(S) for a in range(A) for p in self.plans[s][a].poses]
        )
        reach = self.sensor.max_range
        # cells that no pose can see are skipped before computing exact distances
        near = np.zeros(len(centers), dtype=bool)
        for x, y in np.unique(P[:, :2], axis=0):
            near |= (np.abs(centers[:, 0] - x) <= reach) & (np.abs(centers[:, 1] - y) <= reach)
        sub = centers[near]
        d = np.sqrt(
            (sub[None, :, 0] - P[:, 0, None]) ** 2
            + (sub[None, :, 1] - P[:, 1, None]) ** 2
            + (1.0 - P[:, 2, None]) ** 2
        )
        pd = p_d_of_distance(d, self.sensor).reshape(S, A, H, -1)
        active = np.any(pd > 0, axis=(0, 1, 2))
        self._q = 1.0 - pd[..., active]
        self._grid_r = grid.cells.reshape(-1)[near][active]
        self._grid_rB, self._grid_pS = grid.r_B, grid.p_S

    def _v1(self, joint: np.ndarray) -> np.ndarray:
        n = len(joint)
        total = np.zeros(n)
        for per_step in self._tracks:
            for r, w, etas, nulls, prior in per_step:
                P = np.ones((n, len(w)))
                null = np.ones(n)
                for s in range(self.n_agents):
                    a = joint[:, s]
                    m = a >= 0
                    if np.any(m):
                        P[m] *= etas[s, a[m]]
                        null[m] *= nulls[s, a[m]]
                L = P @ w
                den = (1.0 - r) * null + r * L
                ok = (L > 0) & (den > 0)
                r_post = np.where(ok, r * L / np.where(ok, den, 1.0), 0.0)
                W = P * w / np.where(L > 0, L, 1.0)[:, None]
                wlogw = np.sum(xlogy(W, W), axis=1)
                post = -xlogy(1.0 - r_post, 1.0 - r_post) - xlogy(r_post, r_post) - r_post * wlogw
                total += prior - post
        return total

    def _v2(self, joint: np.ndarray) -> np.ndarray:
        n = len(joint)
        if self._grid_r is None or self._grid_r.size == 0:
            return np.zeros(n)
        r0 = self._grid_r
        total = np.zeros(n)
        prior = np.broadcast_to(r0, (n, r0.size))
        post = prior
        h_prior = binary_entropy(r0).sum()
        for j in range(self.horizon):
            q = np.ones((n, r0.size))
            for s in range(self.n_agents):
                a = joint[:, s]
                m = a >= 0
                if np.any(m):
                    q[m] *= self._q[s, a[m], j]
            if self.predict_grid:
                prior = predict_occupancy(prior, self._grid_rB, self._grid_pS)
                post = predict_occupancy(post, self._grid_rB, self._grid_pS)
                h_prior = binary_entropy(prior[0]).sum()
            num = q * post
            den = 1.0 - post + num
            post = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
            total += h_prior - binary_entropy(post).sum(axis=1)
        return total

    def evaluate(self, joint) -> tuple[np.ndarray, np.ndarray]:
        joint = np.atleast_2d(np.asarray(joint, dtype=int))
        self.n_evaluations += len(joint)
        v1 = np.empty(len(joint))
        v2 = np.empty(len(joint))
        for lo in range(0, len(joint), self.chunk):
            block = joint[lo : lo + self.chunk]
            v1[lo : lo + self.chunk] = self._v1(block)
            v2[lo : lo + self.chunk] = self._v2(block)
        return v1, v2
