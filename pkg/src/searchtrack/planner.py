"""Joint action selection: exhaustive search, sequential greedy, and the greedy bound check.

Planners work on any object exposing ``n_agents``, ``actions`` and
``evaluate(joint) -> (v1, v2)`` (see :class:`searchtrack.rewards.JointValueModel`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rewards import gcm_scores

GREEDY_BOUND = 1.0 - 1.0 / np.e
OBJECTIVES = ("vmo", "v1", "v2")
ALGORITHMS = ("greedy", "brute_force")


class PlanningError(RuntimeError):
    pass


@dataclass(frozen=True)
class PlannerConfig:
    horizon: int = 3
    algorithm: str = "greedy"
    objective: str = "vmo"
    bound_check: bool = False
    max_joint: int = 10**6

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")


@dataclass(frozen=True)
class PlanResult:
    actions: tuple
    v1: float
    v2: float
    v_mo: float
    n_evaluations: int
    ratio: Optional[float] = None


def score(v1, v2, objective: str) -> np.ndarray:
    """Scalarized value of each candidate, normalized over the candidate set."""
    if objective == "vmo":
        return gcm_scores(v1, v2)
    zero = np.zeros(len(v1))
    if objective == "v1":
        return gcm_scores(v1, zero)
    return gcm_scores(zero, v2)


def _all_joint(n_agents: int, n_actions: int) -> np.ndarray:
    return np.array(list(itertools.product(range(n_actions), repeat=n_agents)), dtype=int)


def brute_force_table(model, config: PlannerConfig):
    """Every joint action in lexicographic order with its raw and scalarized values."""
    S, A = model.n_agents, len(model.actions)
    if A**S > config.max_joint:
        raise PlanningError(
            f"brute force needs {A}^{S} = {A**S} evaluations, cap is {config.max_joint}"
        )
    joint = _all_joint(S, A)
    v1, v2 = model.evaluate(joint)
    return joint, v1, v2, score(v1, v2, config.objective)


def brute_force_plan(model, config: PlannerConfig) -> PlanResult:
    joint, v1, v2, vals = brute_force_table(model, config)
    best = int(np.argmax(vals))
    return PlanResult(tuple(int(a) for a in joint[best]), float(v1[best]), float(v2[best]),
                      float(vals[best]), len(joint))


def greedy_plan(model, config: PlannerConfig) -> PlanResult:
    """Commit agents one at a time, each round taking the agent whose best action scores highest.

    Scores are normalized over the candidates of the current round. Ties go to
    the lowest action index, then the lowest agent position.
    """
    S, A = model.n_agents, len(model.actions)
    committed = np.full(S, -1, dtype=int)
    unplanned = list(range(S))
    n_eval = 0
    v1 = v2 = vmo = 0.0
    while unplanned:
        joint = np.repeat(committed[None, :], len(unplanned) * A, axis=0)
        for i, s in enumerate(unplanned):
            joint[i * A : (i + 1) * A, s] = np.arange(A)
        c1, c2 = model.evaluate(joint)
        n_eval += len(joint)
        vals = score(c1, c2, config.objective).reshape(len(unplanned), A)
        best_a = np.argmax(vals, axis=1)
        best_i = int(np.argmax(vals[np.arange(len(unplanned)), best_a]))
        s_star = unplanned.pop(best_i)
        committed[s_star] = best_a[best_i]
        k = best_i * A + best_a[best_i]
        v1, v2, vmo = float(c1[k]), float(c2[k]), float(vals[best_i, best_a[best_i]])
    return PlanResult(tuple(int(a) for a in committed), v1, v2, vmo, n_eval)


@dataclass(frozen=True)
class Certificate:
    """Greedy against exhaustive search on one planning instance.

    ``ratio`` compares the GCM-weighted sum of the objectives without the
    min-offsets, the positive combination to which the greedy bound applies.
    ``offset_ratio`` compares the min-max normalized scores themselves; the
    constant offsets leave the argmax unchanged but can push this ratio below
    the bound.
    """

    ratio: float
    offset_ratio: float
    greedy: tuple
    optimal: tuple


def _gcm_weights(v1, v2, objective: str) -> tuple[float, float]:
    def w(v):
        span = float(np.max(v) - np.min(v))
        return 1.0 / span if span > 0 else 0.0

    return (w(v1) if objective != "v2" else 0.0, w(v2) if objective != "v1" else 0.0)


def _safe_ratio(num: float, den: float) -> float:
    return 1.0 if den <= 0.0 else float(num / den)


def certify(model, config: PlannerConfig) -> Certificate:
    joint, v1, v2, vals = brute_force_table(model, config)
    greedy = greedy_plan(model, config)
    A = len(model.actions)
    idx = int(np.ravel_multi_index(greedy.actions, (A,) * model.n_agents))
    w1, w2 = _gcm_weights(v1, v2, config.objective)
    combo = w1 * v1 + w2 * v2
    best = int(np.argmax(vals))
    return Certificate(
        ratio=_safe_ratio(combo[idx], float(np.max(combo))),
        offset_ratio=_safe_ratio(vals[idx], float(vals[best])),
        greedy=greedy.actions,
        optimal=tuple(int(a) for a in joint[best]),
    )


def certify_bound(model, config: PlannerConfig) -> float:
    """Greedy over optimal value of the GCM-weighted objectives; 1 when the optimum is 0."""
    return certify(model, config).ratio


def plan(model, config: PlannerConfig) -> PlanResult:
    if config.algorithm == "brute_force":
        result = brute_force_plan(model, config)
    else:
        result = greedy_plan(model, config)
    if config.bound_check:
        ratio = certify_bound(model, config)
        result = PlanResult(result.actions, result.v1, result.v2, result.v_mo,
                            result.n_evaluations, ratio)
    return result
