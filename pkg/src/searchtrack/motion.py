"""Object motion, detection probability, sensor models, clutter and ideal measurements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    ActionPlan,
    AgentPose,
    BernoulliTrack,
    Measurement,
    ObjectState,
    estimate_state,
)

SENSOR_KINDS = ("range_bearing", "vision")
UPDATE_RULES = ("clutter", "paper")


@dataclass(frozen=True)
class CvModel:
    T0: float = 1.0
    sigma_cv: float = 1.0

    def __post_init__(self):
        if not self.T0 > 0:
            raise ValueError("T0 must be positive")
        if self.sigma_cv < 0:
            raise ValueError("sigma_cv must be nonnegative")

    @property
    def F(self) -> np.ndarray:
        return np.kron(np.eye(2), np.array([[1.0, self.T0], [0.0, 1.0]]))

    @property
    def Q(self) -> np.ndarray:
        T = self.T0
        block = np.array([[T**3 / 3, T**2 / 2], [T**2 / 2, T]])
        return self.sigma_cv**2 * np.kron(np.eye(2), block)

    def transition(self, steps: int) -> np.ndarray:
        return np.linalg.matrix_power(self.F, steps)


@dataclass(frozen=True)
class SensorModel:
    """Detection-based sensor with range-dependent noise.

    ``update_rule`` selects the non-existence likelihood used by the filter:
    "paper" uses exp(-clutter_rate) for every measurement set, "clutter" uses
    exp(-clutter_rate) for empty sets and the clutter density for singletons.
    """

    kind: str = "range_bearing"
    r_d: float = 200.0
    hbar: float = 0.008
    p_d_max: float = 0.98
    sigma0_phi: float = 2 * np.pi / 180
    beta_phi: float = 1.7e-5
    sigma0_rho: float = 10.0
    beta_rho: float = 5e-3
    sigma0_xy: float = 10.0
    beta_xy: float = 1e-2
    clutter_rate: float = 0.2
    update_rule: str = "clutter"
    pims_threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in SENSOR_KINDS:
            raise ValueError(f"sensor kind must be one of {SENSOR_KINDS}")
        if self.update_rule not in UPDATE_RULES:
            raise ValueError(f"update_rule must be one of {UPDATE_RULES}")
        if not 0.0 <= self.p_d_max <= 1.0:
            raise ValueError("p_d_max must lie in [0, 1]")
        for name in ("sigma0_phi", "sigma0_rho", "sigma0_xy"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("beta_phi", "beta_rho", "beta_xy", "hbar", "clutter_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def max_range(self) -> float:
        """Distance beyond which the detection probability is exactly zero."""
        if self.hbar == 0:
            return np.inf
        return self.r_d + self.p_d_max / self.hbar

    @property
    def clutter_density(self) -> float:
        """Uniform clutter density over the observation window."""
        R = self.max_range
        if not np.isfinite(R):
            raise ValueError("clutter density needs a finite observation window")
        if self.kind == "range_bearing":
            return 1.0 / (2 * np.pi * R)
        return 1.0 / (np.pi * R**2)

    def noise_std(self, distance):
        d = np.asarray(distance, dtype=float)
        if self.kind == "range_bearing":
            return np.stack(
                [self.sigma0_phi + self.beta_phi * d, self.sigma0_rho + self.beta_rho * d],
                axis=-1,
            )
        s = self.sigma0_xy + self.beta_xy * d
        return np.stack([s, s], axis=-1)


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2 * np.pi)


def predict_object(
    state: ObjectState,
    model: CvModel,
    with_noise: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> ObjectState:
    x = model.F @ state.as_array()
    if with_noise and model.sigma_cv > 0:
        x = x + rng.multivariate_normal(np.zeros(4), model.Q)
    return ObjectState.from_array(x, state.label)


def propagate(particles: np.ndarray, model: CvModel, rng=None, with_noise=False) -> np.ndarray:
    """Vectorized CV step for an (N, 4) particle array."""
    out = particles @ model.F.T
    if with_noise and model.sigma_cv > 0:
        L = np.linalg.cholesky(model.Q)
        out = out + rng.standard_normal(out.shape) @ L.T
    return out


def _offsets(positions: np.ndarray, pose: AgentPose):
    positions = np.asarray(positions, dtype=float)
    dx = positions[..., 0] - pose.px
    dy = positions[..., 1] - pose.py
    dz = 1.0 - pose.pz
    return dx, dy, dz


def distance(positions, pose: AgentPose):
    """3D distance between planar points lifted to height 1 and the agent."""
    dx, dy, dz = _offsets(positions, pose)
    return np.sqrt(dx**2 + dy**2 + dz**2)


def p_d_of_distance(d, sensor: SensorModel):
    d = np.asarray(d, dtype=float)
    falloff = np.maximum(0.0, sensor.p_d_max - (d - sensor.r_d) * sensor.hbar)
    return np.where(d <= sensor.r_d, sensor.p_d_max, falloff)


def detection_probability(
    agent: AgentPose, position, sensor: Optional[SensorModel] = None
):
    """Detection probability of planar point(s) ``position`` (shape (..., 2))."""
    sensor = sensor or SensorModel()
    return p_d_of_distance(distance(position, agent), sensor)


def measurement_function(positions, pose: AgentPose, sensor: SensorModel) -> np.ndarray:
    """Noiseless measurement of planar point(s): [bearing, range] or [x, y]."""
    positions = np.asarray(positions, dtype=float)
    if sensor.kind == "vision":
        return positions[..., :2].copy()
    dx, dy, dz = _offsets(positions, pose)
    bearing = np.arctan2(dy, dx)
    rng_ = np.sqrt(dx**2 + dy**2 + dz**2)
    return np.stack([bearing, rng_], axis=-1)


def invert_measurement(z, pose: AgentPose, sensor: SensorModel) -> np.ndarray:
    """Planar position consistent with a noiseless measurement ``z``."""
    z = np.asarray(z, dtype=float)
    if sensor.kind == "vision":
        return z[:2].copy()
    horiz = np.sqrt(max(z[1] ** 2 - (1.0 - pose.pz) ** 2, 0.0))
    return np.array([pose.px + horiz * np.cos(z[0]), pose.py + horiz * np.sin(z[0])])


def measure(
    agent: AgentPose,
    state: ObjectState,
    sensor: SensorModel,
    rng: np.random.Generator,
    noiseless: bool = False,
) -> Optional[Measurement]:
    """Draw a detection of ``state`` by ``agent``; None on a missed detection."""
    pos = state.position
    d = float(distance(pos, agent))
    if rng.random() >= p_d_of_distance(d, sensor):
        return None
    z = measurement_function(pos, agent, sensor)
    if not noiseless:
        z = z + rng.standard_normal(2) * sensor.noise_std(d)
    if sensor.kind == "range_bearing":
        z[0] = wrap_angle(z[0])
    return Measurement(agent.agent_id, state.label, z, "real")


def gen_clutter(
    label: str, agent: AgentPose, sensor: SensorModel, rng: np.random.Generator
) -> Optional[Measurement]:
    """At most one false detection on the identity channel ``label``."""
    if sensor.clutter_rate == 0:
        return None
    if rng.random() >= 1.0 - np.exp(-sensor.clutter_rate):
        return None
    R = sensor.max_range
    if sensor.kind == "range_bearing":
        z = np.array([wrap_angle(rng.uniform(-np.pi, np.pi)), rng.uniform(0.0, R)])
    else:
        rad = R * np.sqrt(rng.random())
        ang = rng.uniform(-np.pi, np.pi)
        z = np.array([agent.px + rad * np.cos(ang), agent.py + rad * np.sin(ang)])
    return Measurement(agent.agent_id, label, z, "clutter")


def measurement_likelihood(z, particles: np.ndarray, pose: AgentPose, sensor: SensorModel):
    """Gaussian likelihood g(z | x) for each particle row [px, vx, py, vy]."""
    pos = np.asarray(particles)[..., [0, 2]]
    d = distance(pos, pose)
    zhat = measurement_function(pos, pose, sensor)
    sig = sensor.noise_std(d)
    diff = np.asarray(z, dtype=float) - zhat
    if sensor.kind == "range_bearing":
        diff[..., 0] = wrap_angle(diff[..., 0])
    e = diff / sig
    return np.exp(-0.5 * np.sum(e * e, axis=-1)) / (2 * np.pi * sig[..., 0] * sig[..., 1])


def eta(z, particles: np.ndarray, pose: AgentPose, sensor: SensorModel) -> np.ndarray:
    """Per-particle likelihood of the measurement set {z} (or the empty set when z is None)."""
    pd = p_d_of_distance(distance(np.asarray(particles)[..., [0, 2]], pose), sensor)
    lam = sensor.clutter_rate
    if sensor.update_rule == "paper":
        if z is None:
            return 1.0 - pd
        return pd * measurement_likelihood(z, particles, pose, sensor)
    if z is None:
        return (1.0 - pd) * np.exp(-lam)
    clutter = -np.expm1(-lam) * sensor.clutter_density if lam > 0 else 0.0
    return pd * measurement_likelihood(z, particles, pose, sensor) + (1.0 - pd) * clutter


def eta_many(zs, particles: np.ndarray, poses: Sequence[AgentPose], sensor: SensorModel) -> np.ndarray:
    """:func:`eta` for many (measurement, pose) pairs at once; returns shape (len(poses), N)."""
    pos = np.asarray(particles)[:, [0, 2]]
    P = np.array([[p.px, p.py, p.pz] for p in poses])
    dx = pos[None, :, 0] - P[:, 0, None]
    dy = pos[None, :, 1] - P[:, 1, None]
    dz = (1.0 - P[:, 2])[:, None]
    d = np.sqrt(dx**2 + dy**2 + dz**2)
    pd = p_d_of_distance(d, sensor)
    lam = sensor.clutter_rate
    paper = sensor.update_rule == "paper"
    has_z = np.array([z is not None for z in zs])
    out = (1.0 - pd) if paper else (1.0 - pd) * np.exp(-lam)
    if not has_z.any():
        return out
    Z = np.array([z if z is not None else (0.0, 0.0) for z in zs], dtype=float)[has_z]
    sig = sensor.noise_std(d[has_z])
    if sensor.kind == "range_bearing":
        e0 = wrap_angle(Z[:, 0, None] - np.arctan2(dy[has_z], dx[has_z])) / sig[..., 0]
        e1 = (Z[:, 1, None] - d[has_z]) / sig[..., 1]
    else:
        e0 = (Z[:, 0, None] - pos[None, :, 0]) / sig[..., 0]
        e1 = (Z[:, 1, None] - pos[None, :, 1]) / sig[..., 1]
    g = np.exp(-0.5 * (e0**2 + e1**2)) / (2 * np.pi * sig[..., 0] * sig[..., 1])
    pdz = pd[has_z]
    if paper:
        out[has_z] = pdz * g
    else:
        clutter = -np.expm1(-lam) * sensor.clutter_density if lam > 0 else 0.0
        out[has_z] = pdz * g + (1.0 - pdz) * clutter
    return out


def null_likelihood(z, sensor: SensorModel) -> float:
    """Likelihood of the measurement set given that the object does not exist."""
    lam = sensor.clutter_rate
    if sensor.update_rule == "paper" or z is None:
        return float(np.exp(-lam))
    if lam == 0:
        return 0.0
    return float(-np.expm1(-lam) * sensor.clutter_density)


def pims(
    tracks: Sequence[BernoulliTrack],
    plans: Sequence[ActionPlan],
    sensor: SensorModel,
    motion: CvModel,
) -> list[list[dict[str, Measurement]]]:
    """Predicted ideal measurement sets.

    Returns ``out[j][s]``: the noiseless measurements agent ``plans[s]`` would
    collect at horizon step j+1, one per track whose detection probability
    from the planned pose reaches ``sensor.pims_threshold``.
    """
    horizon = len(plans[0].poses) if plans else 0
    estimates = [estimate_state(t) for t in tracks]
    out = []
    for j in range(1, horizon + 1):
        Fj = motion.transition(j)
        step = [{} for _ in plans]
        for est in estimates:
            x = Fj @ est.as_array()
            pos = x[[0, 2]]
            for s, plan in enumerate(plans):
                pose = plan.poses[j - 1]
                if detection_probability(pose, pos, sensor) >= sensor.pims_threshold:
                    z = measurement_function(pos, pose, sensor)
                    step[s][est.label] = Measurement(pose.agent_id, est.label, z, "real")
        out.append(step)
    return out
