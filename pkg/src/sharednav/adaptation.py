"""Mutual adaptation: infer which corridor the operator favors, maintain a
belief over their adaptability, and pick the robot's corridor accordingly.

The operator model is bounded-memory: facing a robot committed to mode m_r,
an operator in mode m_h keeps m_h with probability 1 - alpha and switches to
m_r with probability alpha.  Adaptability alpha is hidden; the belief lives
on a fixed five-point grid and updates by exact Bayes whenever a new operator
mode is observed.  Mode selection maximizes expected discounted reward over a
short horizon, with the operator mode evolving under the model and alpha
marginalized over the belief; on ties the robot complies with the operator.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable

from shapely.geometry import LineString, Point

from sharednav.nav import Mode, ModeSet
from sharednav.sim import Pose2D, Twist2D

ALPHA_SUPPORT: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)

# Cumulative-approach margin (meters) one candidate must win by before the
# operator is credited with that mode, and the stick threshold that makes a
# sample count as actively driven.
APPROACH_MARGIN = 0.05
ACTIVITY_EPSILON = 0.05

_PROB_TOL = 1e-9


class UnknownMode(KeyError):
    """A mode id that is not part of the given mode set."""


@dataclass(frozen=True)
class HistorySample:
    """One tick of evidence: where the robot was and what the human commanded."""

    pose: Pose2D
    twist: Twist2D
    pull: float = 0.0


class HistoryWindow:
    """Ring buffer of the most recent k samples, oldest first."""

    def __init__(self, k: int = 20):
        if k < 1:
            raise ValueError("window size must be at least 1")
        self._k = k
        self._buf: deque[HistorySample] = deque(maxlen=k)

    @property
    def k(self) -> int:
        return self._k

    def append(self, sample: HistorySample) -> None:
        self._buf.append(sample)

    def clear(self) -> None:
        self._buf.clear()

    def samples(self) -> tuple[HistorySample, ...]:
        return tuple(self._buf)

    def __len__(self) -> int:
        return len(self._buf)

    def __iter__(self):
        return iter(self._buf)


@dataclass(frozen=True)
class AdaptationBelief:
    """Probabilities over ALPHA_SUPPORT plus the last observed operator mode
    (None while unobserved)."""

    alpha_probs: tuple[float, ...]
    current_m_h: int | None = None

    def __post_init__(self) -> None:
        if len(self.alpha_probs) != len(ALPHA_SUPPORT):
            raise ValueError("alpha_probs must match the support grid")
        if any(p < -_PROB_TOL for p in self.alpha_probs):
            raise ValueError("alpha_probs must be non-negative")
        if abs(sum(self.alpha_probs) - 1.0) > _PROB_TOL:
            raise ValueError("alpha_probs must sum to 1")

    @classmethod
    def uniform(cls, current_m_h: int | None = None) -> "AdaptationBelief":
        n = len(ALPHA_SUPPORT)
        return cls(tuple(1.0 / n for _ in ALPHA_SUPPORT), current_m_h)

    @classmethod
    def adaptable(cls, current_m_h: int | None = None) -> "AdaptationBelief":
        """Default prior: most mass on a fully adaptable operator, but enough
        spread that a couple of refusals flip the decision."""
        return cls((0.1, 0.1, 0.1, 0.1, 0.6), current_m_h)

    @classmethod
    def point_mass(cls, alpha: float, current_m_h: int | None = None) -> "AdaptationBelief":
        if alpha not in ALPHA_SUPPORT:
            raise ValueError(f"{alpha} not on the support grid")
        return cls(tuple(1.0 if a == alpha else 0.0 for a in ALPHA_SUPPORT), current_m_h)

    def expected_alpha(self) -> float:
        return sum(a * p for a, p in zip(ALPHA_SUPPORT, self.alpha_probs))

    def with_m_h(self, mode_id: int | None) -> "AdaptationBelief":
        return replace(self, current_m_h=mode_id)


@dataclass(frozen=True)
class RewardConfig:
    """Weights of the per-step reward.

    cost_scale overrides the normalizer for the path-cost term; by default
    costs are divided by the optimal mode's cost.
    """

    beta: float = 0.9
    w_disagree: float = 2.0
    goal_bonus: float = 10.0
    cost_scale: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie strictly between 0 and 1")
        if self.w_disagree < 0 or self.goal_bonus < 0:
            raise ValueError("reward weights must be non-negative")
        if self.cost_scale is not None and self.cost_scale <= 0:
            raise ValueError("cost_scale must be positive")


def _require_mode(modes: ModeSet, mode_id: int) -> Mode:
    try:
        return modes.by_id(mode_id)
    except KeyError:
        raise UnknownMode(mode_id) from None


def bam_transition(
    alpha: float, m_h: int, m_r: int, modes: ModeSet
) -> dict[int, float]:
    """Distribution of the operator's next mode given the commitment m_r.

    Mass alpha goes to the robot's mode, 1 - alpha to the operator's current
    mode, and zero everywhere else.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    _require_mode(modes, m_h)
    _require_mode(modes, m_r)
    probs = {mode.id: 0.0 for mode in modes}
    probs[m_r] += alpha
    probs[m_h] += 1.0 - alpha
    return probs


def update_belief(
    belief: AdaptationBelief,
    observed: int,
    m_h_prev: int,
    m_r_prev: int,
) -> AdaptationBelief:
    """Exact Bayes step on the alpha grid after observing the operator's mode.

    The likelihood of each alpha follows the operator model for the
    transition m_h_prev -> observed under commitment m_r_prev.  If the
    observation is impossible under the model (it matches neither prior
    mode), the alpha belief is left untouched and only the tracked operator
    mode moves.
    """
    to_robot = 1.0 if observed == m_r_prev else 0.0
    to_self = 1.0 if observed == m_h_prev else 0.0
    likelihoods = [a * to_robot + (1.0 - a) * to_self for a in ALPHA_SUPPORT]
    weighted = [p * l for p, l in zip(belief.alpha_probs, likelihoods)]
    total = sum(weighted)
    if total <= 0.0:
        return belief.with_m_h(observed)
    return AdaptationBelief(tuple(w / total for w in weighted), observed)


def reward(
    m_r: int,
    m_h: int,
    modes: ModeSet,
    at_goal: bool,
    config: RewardConfig,
) -> float:
    """Per-step reward: normalized path cost, disagreement penalty, goal bonus."""
    robot_mode = _require_mode(modes, m_r)
    _require_mode(modes, m_h)
    scale = config.cost_scale
    if scale is None:
        scale = modes.by_id(modes.optimal_id).path.cost
    ratio = robot_mode.path.cost / scale if scale > 0 else 1.0
    value = -ratio
    if m_r != m_h:
        value -= config.w_disagree
    if at_goal:
        value += config.goal_bonus
    return value


def plan_mode(
    belief: AdaptationBelief,
    modes: ModeSet,
    horizon: int,
    config: RewardConfig,
) -> int:
    """Pick the robot's corridor by exact expectation over the model.

    The robot holds one mode for the whole lookahead; the operator's mode
    starts at the last observation and evolves under the bounded-memory
    model, with adaptability marginalized over the belief grid.  Each step
    accrues the reward of the post-transition operator mode, discounted.
    Ties prefer the operator's current mode; with no observation yet the
    optimal mode is returned outright.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    ids = modes.ids()
    current = belief.current_m_h
    if current is None or current not in ids:
        return modes.optimal_id
    if len(ids) == 1:
        return ids[0]

    values: dict[int, float] = {}
    for m_r in ids:
        total = 0.0
        for alpha, p_alpha in zip(ALPHA_SUPPORT, belief.alpha_probs):
            dist = {current: 1.0}
            value = 0.0
            discount = 1.0
            for _ in range(horizon):
                nxt: dict[int, float] = {}
                for mh, p in dist.items():
                    for mh2, q in bam_transition(alpha, mh, m_r, modes).items():
                        if q:
                            nxt[mh2] = nxt.get(mh2, 0.0) + p * q
                dist = nxt
                step_reward = sum(
                    p * reward(m_r, mh, modes, False, config) for mh, p in dist.items()
                )
                value += discount * step_reward
                discount *= config.beta
            total += p_alpha * value
        values[m_r] = total

    best_value = max(values.values())
    winners = [m for m in ids if values[m] == best_value]
    if current in winners:
        return current
    return min(winners)


def _polyline_distance(waypoints: tuple[tuple[float, float], ...]):
    if len(waypoints) >= 2:
        line = LineString(waypoints)
        return lambda x, y: line.distance(Point(x, y))
    wx, wy = waypoints[0]
    return lambda x, y: math.hypot(x - wx, y - wy)


def infer_mode(
    history: HistoryWindow | Iterable[HistorySample],
    modes: ModeSet,
    margin: float = APPROACH_MARGIN,
    activity_epsilon: float = ACTIVITY_EPSILON,
) -> int | None:
    """Which candidate the operator is steering toward, from recent motion.

    For every actively driven sample the change of distance to each candidate
    route is accumulated; the winning mode must beat the runner-up by
    `margin` and at least half the window must be active, otherwise the
    operator mode is unknown (None).
    """
    samples = history.samples() if isinstance(history, HistoryWindow) else tuple(history)
    k = history.k if isinstance(history, HistoryWindow) else len(samples)
    if len(samples) < 2:
        return None
    active_count = sum(1 for s in samples if s.pull > activity_epsilon)
    if active_count < k / 2:
        return None

    distances = {m.id: _polyline_distance(m.path.waypoints) for m in modes}
    approach = {m.id: 0.0 for m in modes}
    for prev, cur in zip(samples, samples[1:]):
        if cur.pull <= activity_epsilon:
            continue
        for mode_id, dist in distances.items():
            approach[mode_id] += dist(prev.pose.x, prev.pose.y) - dist(
                cur.pose.x, cur.pose.y
            )

    ranked = sorted(approach.items(), key=lambda kv: -kv[1])
    best_id, best_gain = ranked[0]
    runner_up = ranked[1][1] if len(ranked) > 1 else 0.0
    if best_gain - runner_up > margin:
        return best_id
    return None


def synthetic_operator(
    alpha_true: float,
    preferred: int,
    robot_mode: int,
    rng: random.Random | int,
) -> int:
    """Sample the scripted operator's next mode under the operator model.

    Pass a random.Random to draw a sequence; an int seed gives one
    deterministic draw.
    """
    if not (0.0 <= alpha_true <= 1.0):
        raise ValueError("alpha_true must lie in [0, 1]")
    if isinstance(rng, int):
        rng = random.Random(rng)
    return robot_mode if rng.random() < alpha_true else preferred
