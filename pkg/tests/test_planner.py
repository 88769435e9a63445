import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from searchtrack.core import AgentPose, action_space
from searchtrack.grid import OccupancyGrid
from searchtrack.core import Bounds
from searchtrack.motion import CvModel, SensorModel
from searchtrack.planner import (
    GREEDY_BOUND,
    PlannerConfig,
    PlanningError,
    brute_force_plan,
    certify,
    certify_bound,
    greedy_plan,
    plan,
)
from searchtrack.rewards import JointValueModel


class TableModel:
    """Value model defined by explicit per-agent contributions and an optional coupling."""

    def __init__(self, n_agents, n_actions, v1_fn, v2_fn=None):
        self.n_agents = n_agents
        self.actions = list(range(n_actions))
        self.v1_fn, self.v2_fn = v1_fn, v2_fn or (lambda row: 0.0)
        self.n_evaluations = 0

    def evaluate(self, joint):
        joint = np.atleast_2d(joint)
        self.n_evaluations += len(joint)
        return (np.array([self.v1_fn(tuple(r)) for r in joint], dtype=float),
                np.array([self.v2_fn(tuple(r)) for r in joint], dtype=float))


def additive(values):
    values = np.asarray(values)
    return lambda row: float(sum(values[s, a] for s, a in enumerate(row) if a >= 0))


def test_single_agent_takes_argmax():
    m = TableModel(1, 4, additive([[0.1, 0.7, 0.3, 0.2]]))
    for alg in ("greedy", "brute_force"):
        assert plan(m, PlannerConfig(algorithm=alg, objective="v1")).actions == (1,)


def test_two_actions_picks_better():
    m = TableModel(1, 2, additive([[0.3, 0.9]]))
    assert plan(m, PlannerConfig()).actions == (1,)


def test_brute_force_matches_enumeration_oracle():
    rng = np.random.default_rng(3)
    v1 = rng.uniform(size=(3, 3))
    v2 = rng.uniform(size=(3, 3))
    m = TableModel(2, 3, lambda r: v1[r], lambda r: v2[r])
    res = brute_force_plan(m, PlannerConfig())
    assert res.n_evaluations == 9
    cands = list(itertools.product(range(3), repeat=2))
    a1 = np.array([v1[c] for c in cands])
    a2 = np.array([v2[c] for c in cands])
    norm = (a1 - a1.min()) / (a1.max() - a1.min()) + (a2 - a2.min()) / (a2.max() - a2.min())
    assert res.actions == cands[int(np.argmax(norm))]


@given(st.integers(1, 4), st.integers(2, 5), st.integers(0, 10_000), st.sampled_from(["v1", "v2"]))
def test_greedy_exact_on_additive_values(S, A, seed, objective):
    vals = np.random.default_rng(seed).uniform(size=(S, A))
    fn = additive(vals)
    m = TableModel(S, A, fn, fn)
    g = greedy_plan(m, PlannerConfig(objective=objective))
    b = brute_force_plan(m, PlannerConfig(objective=objective))
    assert fn(g.actions) == pytest.approx(fn(b.actions), abs=1e-12)


@given(st.integers(1, 5), st.integers(1, 9))
def test_greedy_evaluation_count(S, A):
    m = TableModel(S, A, lambda r: float(sum(a for a in r if a >= 0)))
    res = greedy_plan(m, PlannerConfig())
    assert res.n_evaluations == A * S * (S + 1) // 2 == m.n_evaluations


def test_greedy_single_agent_equals_brute_force():
    rng = np.random.default_rng(0)
    v = rng.uniform(size=(1, 9))
    m = TableModel(1, 9, additive(v), additive(v[:, ::-1]))
    assert greedy_plan(m, PlannerConfig()).actions == brute_force_plan(m, PlannerConfig()).actions


def test_certify_ratio_one_when_greedy_optimal():
    m = TableModel(2, 3, additive([[0, 1, 0], [2, 0, 0]]))
    assert certify_bound(m, PlannerConfig(objective="v1")) == 1.0


def test_certify_ratio_one_for_zero_optimum():
    m = TableModel(2, 3, lambda r: 0.0)
    assert certify_bound(m, PlannerConfig()) == 1.0


def test_brute_force_cap():
    m = TableModel(3, 9, lambda r: 0.0)
    with pytest.raises(PlanningError, match="cap"):
        brute_force_plan(m, PlannerConfig(max_joint=100))


def test_bound_check_attaches_ratio():
    m = TableModel(2, 3, additive([[0, 1, 0], [2, 0, 0]]))
    res = plan(m, PlannerConfig(objective="v1", bound_check=True))
    assert res.ratio == 1.0


def _real_model(seed, S=2):
    rng = np.random.default_rng(seed)
    poses = [AgentPose.at(*rng.uniform(300, 700, 2), s + 1) for s in range(S)]
    grid = OccupancyGrid(rng.uniform(0, 0.3, (20, 20)), Bounds(0, 1000, 0, 1000))
    return JointValueModel([], grid, poses, SensorModel(), CvModel(), action_space(10.0), 2)


def test_plans_are_deterministic():
    a = plan(_real_model(1, 3), PlannerConfig(horizon=2))
    b = plan(_real_model(1, 3), PlannerConfig(horizon=2))
    assert a == b


@pytest.mark.parametrize("seed", range(8))
def test_greedy_ratio_on_grid_instances(seed):
    assert certify_bound(_real_model(seed), PlannerConfig(horizon=2)) >= GREEDY_BOUND


def test_offset_ratio_can_fall_below_bound():
    # min-max offsets do not change the argmax but do shrink the normalized ratio
    cert = certify(_real_model(1), PlannerConfig(horizon=2))
    assert cert.offset_ratio < GREEDY_BOUND <= cert.ratio
    assert cert.ratio < 1.0


@given(st.integers(0, 10_000))
def test_offset_ratio_never_exceeds_ratio(seed):
    rng = np.random.default_rng(seed)
    v1, v2 = rng.uniform(size=(2, 3, 3))
    m = TableModel(2, 3, lambda r: v1[r], lambda r: v2[r])
    cert = certify(m, PlannerConfig())
    assert cert.offset_ratio <= cert.ratio + 1e-12
