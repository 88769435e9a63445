"""Multi-sensor Bernoulli filter bank over uniquely identified objects."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.stats import multivariate_normal

from .core import AgentPose, BernoulliTrack, Measurement
from .motion import (
    CvModel,
    SensorModel,
    distance,
    eta,
    invert_measurement,
    null_likelihood,
    propagate,
)


@dataclass(frozen=True, eq=False)
class GaussianBirth:
    """Birth probability ``r_B`` with a Gaussian birth density N(mean, cov)."""

    r_B: float = 0.005
    mean: np.ndarray = field(default_factory=lambda: np.array([500.0, 0.0, 500.0, 0.0]))
    cov: np.ndarray = field(
        default_factory=lambda: np.diag([500.0**2, 10.0**2, 500.0**2, 10.0**2])
    )

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(4)
        cov = np.asarray(self.cov, dtype=float).reshape(4, 4)
        if not 0.0 < self.r_B < 1.0:
            raise ValueError("r_B must lie in (0, 1)")
        if np.any(np.linalg.eigvalsh(cov) <= 0):
            raise ValueError("birth covariance must be positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def sample(self, n: int, rng: np.random.Generator):
        pts = rng.multivariate_normal(self.mean, self.cov, size=n)
        return pts, np.full(n, 1.0 / n)

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        return multivariate_normal.logpdf(x, self.mean, self.cov)


@dataclass(frozen=True, eq=False)
class PointBirth:
    """Birth density supported on a fixed set of states (used for exact enumeration)."""

    r_B: float
    points: np.ndarray
    probs: np.ndarray

    def sample(self, n: int, rng=None):
        return np.asarray(self.points, dtype=float), np.asarray(self.probs, dtype=float)


@dataclass(frozen=True, eq=False)
class FilterBank:
    tracks: dict
    birth: GaussianBirth
    sensor: SensorModel
    motion: CvModel = field(default_factory=CvModel)
    p_S: float = 0.99
    n_particles: int = 1000
    prune_threshold: float = 1e-3

    def with_tracks(self, tracks: dict) -> "FilterBank":
        return replace(self, tracks=tracks)


def effective_sample_size(weights: np.ndarray) -> float:
    return 1.0 / float(np.sum(np.square(weights)))


def predict_track(
    track: BernoulliTrack,
    birth,
    p_S: float,
    motion: CvModel,
    rng: Optional[np.random.Generator] = None,
    with_noise: bool = True,
    n_birth: Optional[int] = None,
) -> BernoulliTrack:
    """Bernoulli prediction: survived particles plus a birth component."""
    r = track.r
    born = birth.r_B * (1.0 - r)
    survived = r * p_S
    r_pred = born + survived
    n = track.n_particles
    if n_birth is None:
        n_birth = max(1, int(round(n * born / r_pred))) if r_pred > 0 else n
    bpts, bw = birth.sample(n_birth, rng)
    if r_pred == 0:
        return BernoulliTrack(track.label, 0.0, bpts, bw / bw.sum())
    moved = propagate(track.particles, motion, rng, with_noise)
    particles = np.vstack([moved, bpts])
    weights = np.concatenate([track.weights * (survived / r_pred), bw * (born / r_pred)])
    return BernoulliTrack(track.label, r_pred, particles, weights / weights.sum())


def _bayes(track: BernoulliTrack, like: np.ndarray, null: float) -> BernoulliTrack:
    r = track.r
    L = float(like @ track.weights)
    denom = (1.0 - r) * null + r * L
    if L <= 0.0 or denom <= 0.0:
        n = track.n_particles
        return track.with_(r=0.0, weights=np.full(n, 1.0 / n))
    w = like * track.weights
    return track.with_(r=min(1.0, r * L / denom), weights=w / w.sum())


def update_track_one_agent(
    track: BernoulliTrack,
    meas: Optional[Measurement],
    sensor: SensorModel,
    agent: AgentPose,
) -> BernoulliTrack:
    z = None if meas is None else meas.value
    like = eta(z, track.particles, agent, sensor)
    return _bayes(track, like, null_likelihood(z, sensor))


def update_track_all_agents(
    track: BernoulliTrack,
    meas: Sequence[Optional[Measurement]],
    sensor: SensorModel,
    poses: Sequence[AgentPose],
) -> BernoulliTrack:
    """Sequential composition of the per-agent updates in the given agent order."""
    for m, pose in zip(meas, poses):
        track = update_track_one_agent(track, m, sensor, pose)
    return track


def resample(
    track: BernoulliTrack, rng: np.random.Generator, n: Optional[int] = None
) -> BernoulliTrack:
    """Systematic resampling to ``n`` particles when the cloud size differs or ESS < n/2."""
    n = n or track.n_particles
    if track.n_particles == n and effective_sample_size(track.weights) >= n / 2:
        return track
    cdf = np.cumsum(track.weights)
    cdf[-1] = 1.0
    u = (rng.random() + np.arange(n)) / n
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, track.n_particles - 1)
    return track.with_(particles=track.particles[idx], weights=np.full(n, 1.0 / n))


def spawn_track(
    label: str,
    meas: Sequence[Optional[Measurement]],
    poses: Sequence[AgentPose],
    birth: GaussianBirth,
    sensor: SensorModel,
    n: int,
    rng: np.random.Generator,
) -> Optional[BernoulliTrack]:
    """Initialize a track for a never-seen identity from its first measurement.

    Particles are drawn around the inverted measurement and importance weighted
    against the birth density, so the existence update uses an unbiased
    estimate of <eta, b>. Returns None when that estimate is zero.
    """
    first = next(i for i, m in enumerate(meas) if m is not None)
    pose, z = poses[first], meas[first].value
    centre = invert_measurement(z, pose, sensor)
    d = float(distance(centre, pose))
    sig = sensor.noise_std(d)
    if sensor.kind == "range_bearing":
        horiz = np.hypot(centre[0] - pose.px, centre[1] - pose.py)
        spread = 2.0 * max(sig[1], horiz * sig[0])
    else:
        spread = 2.0 * sig[0]
    vel_idx = [1, 3]
    vmean = birth.mean[vel_idx]
    vcov = birth.cov[np.ix_(vel_idx, vel_idx)]
    pos = centre + spread * rng.standard_normal((n, 2))
    vel = rng.multivariate_normal(vmean, vcov, size=n)
    particles = np.column_stack([pos[:, 0], vel[:, 0], pos[:, 1], vel[:, 1]])
    log_q = (
        -0.5 * np.sum(((pos - centre) / spread) ** 2, axis=1)
        - np.log(2 * np.pi * spread**2)
        + multivariate_normal.logpdf(vel, vmean, vcov)
    )
    ratio = np.exp(birth.logpdf(particles) - log_q)
    like = eta(z, particles, pose, sensor) * ratio
    L = float(np.mean(like))
    if not L > 0:
        return None
    null = null_likelihood(z, sensor)
    r = birth.r_B * L / ((1.0 - birth.r_B) * null + birth.r_B * L)
    track = BernoulliTrack(label, r, particles, like / like.sum())
    rest = [i for i in range(len(meas)) if i != first]
    return update_track_all_agents(
        track, [meas[i] for i in rest], sensor, [poses[i] for i in rest]
    )


def step_bank(
    bank: FilterBank,
    meas_sets: Sequence[dict],
    poses: Sequence[AgentPose],
    rng: np.random.Generator,
) -> FilterBank:
    """One filter cycle: predict and update known tracks, spawn new identities, prune, resample.

    ``meas_sets[s]`` maps identity -> Measurement for agent ``poses[s]``.
    """
    order = np.argsort([p.agent_id for p in poses], kind="stable")
    poses = [poses[i] for i in order]
    meas_sets = [meas_sets[i] for i in order]
    tracks = {}
    for label in sorted(bank.tracks):
        track = predict_track(bank.tracks[label], bank.birth, bank.p_S, bank.motion, rng)
        meas = [ms.get(label) for ms in meas_sets]
        tracks[label] = update_track_all_agents(track, meas, bank.sensor, poses)
    seen = set().union(*[ms.keys() for ms in meas_sets]) if meas_sets else set()
    for label in sorted(seen - set(bank.tracks)):
        meas = [ms.get(label) for ms in meas_sets]
        track = spawn_track(
            label, meas, poses, bank.birth, bank.sensor, bank.n_particles, rng
        )
        if track is not None:
            tracks[label] = track
    out = {}
    for label in sorted(tracks):
        track = tracks[label]
        if track.r < bank.prune_threshold:
            continue
        track = resample(track, rng, bank.n_particles)
        track.check()
        out[label] = track
    return bank.with_tracks(out)
