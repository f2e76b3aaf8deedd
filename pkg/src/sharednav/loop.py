"""Deterministic control loop: one tick consumes queued inbound messages,
arbitrates, plans when asked, advances the simulation, and queues outbound
publishes.

The loop is synchronous and wall-clock free.  Timestamps derive from the
tick counter, planning happens inline when a goal arrives or the override
window closes, and every tick exactly one command source drives the robot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from sharednav.adaptation import (
    AdaptationBelief,
    HistorySample,
    HistoryWindow,
    RewardConfig,
    infer_mode,
    plan_mode,
    update_belief,
)
from sharednav.control import (
    ApplyJoystick,
    ArbitrationState,
    Autonomous,
    CancelGoal,
    ControlEvent,
    FollowPlan,
    GoalClick,
    Idle,
    JoystickInput,
    JoystickMsg,
    Override,
    PlanReady,
    PlanRequest,
    PULL_EPSILON,
    RELEASE_TICKS,
    Republish,
    Teleop,
    Tick,
    Zero,
    adjust_speed,
    arbitrate,
    joystick_to_twist,
    twist_to_joystick,
)
from sharednav.nav import (
    GOAL_TOLERANCE,
    InvalidEndpoint,
    ModeSet,
    NoPath,
    candidate_modes,
    follow_path,
)
from sharednav.scenario import Scenario
from sharednav.sim import Pose2D, Twist2D, WorldState, step

# How often (in ticks) the operator-mode inference runs.
INFER_EVERY = 5

POSE_PERIOD_S = 0.1
MODE_STATE_PERIOD_S = 0.5


@dataclass(frozen=True)
class ServerConfig:
    """Everything needed to run one session: scenario, rates, and priors."""

    scenario: Scenario
    port: int = 8080
    host: str = "127.0.0.1"
    dt: float = 0.05
    log_path: str | None = None
    horizon: int = 3
    k: int = 20
    reward: RewardConfig = field(default_factory=RewardConfig)
    prior: AdaptationBelief = field(default_factory=AdaptationBelief.adaptable)
    epsilon: float = PULL_EPSILON
    n_release: int = RELEASE_TICKS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not (1 <= self.port <= 65535):
            raise ValueError("port must lie in 1..65535")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.n_release < 1:
            raise ValueError("n_release must be at least 1")


class ControlLoop:
    """Single-robot session state machine driven by tick()."""

    def __init__(self, config: ServerConfig):
        self.config = config
        self.scenario = config.scenario
        self.limits = config.scenario.speed_limits
        self.world = WorldState(pose=config.scenario.start)
        self.arb: ArbitrationState = Idle()
        self.held = JoystickInput(pull=0.0, bearing=0.0)
        self.history = HistoryWindow(config.k)
        self.belief = config.prior
        self.modes: ModeSet | None = None
        self.m_r: int | None = None
        self.total_ticks = 0
        self.goal_reached = False
        self.plan_error: str | None = None

        self.pipeline_count = 0
        self.republish_count = 0
        self.informative_updates = 0
        self.observations: list[tuple[int, int]] = []
        # Label of the committed mode the last time the planner saw a real
        # choice (two or more candidates).
        self.committed_label: str | None = None

        self._events: list[ControlEvent] = []
        self._speed_requests: list[tuple[str, str]] = []
        self._outbox: list[tuple[str, dict[str, Any]]] = []
        self._last_plan_json: str | None = None
        self.last_plan_payload: dict[str, Any] | None = None

        self._pose_every = max(1, round(POSE_PERIOD_S / config.dt))
        self._mode_every = max(1, round(MODE_STATE_PERIOD_S / config.dt))

    # --- inbound -------------------------------------------------

    def submit(self, topic: str, payload: dict[str, Any]) -> None:
        """Queue one already-validated inbound message for the next tick."""
        if topic == "/cmd_vel":
            if "pull" in payload and "bearing" in payload:
                stick = JoystickInput(pull=float(payload["pull"]), bearing=float(payload["bearing"]))
            else:
                twist = Twist2D(v=float(payload["v"]), omega=float(payload["omega"]))
                stick = twist_to_joystick(twist, self.limits)
            self._events.append(JoystickMsg(stick))
        elif topic == "/goal":
            pose = Pose2D(float(payload["x"]), float(payload["y"]), float(payload["theta"]))
            self._events.append(GoalClick(pose))
        elif topic == "/cancel_goal":
            self._events.append(CancelGoal())
        elif topic == "/set_speed":
            self._speed_requests.append((payload["target"], payload["direction"]))
        else:
            raise KeyError(f"not an inbound control topic: {topic}")

    # --- tick ---------------------------------------------------------------

    def tick(self) -> Twist2D:
        """Advance the session by one control period and return the command."""
        for target, direction in self._speed_requests:
            self.limits = adjust_speed(self.limits, target, direction)
        self._speed_requests.clear()

        events, self._events = self._events, []
        for event in events:
            if isinstance(event, JoystickMsg):
                self.held = event.stick
            self._dispatch(event)

        self.arb, directive = arbitrate(
            self.arb, Tick(pull=self.held.pull), self.config.epsilon, self.config.n_release
        )
        if isinstance(directive, Republish):
            self.republish_count += 1
            self._pipeline(directive.goal)
            directive = FollowPlan()

        human_drives = isinstance(directive, ApplyJoystick)
        command = self._command_for(directive)
        self.world = step(
            self.world, command, self.config.dt, self.scenario.grid, self.scenario.robot_radius
        )
        self.total_ticks += 1

        pull = self.held.pull if human_drives else 0.0
        self.history.append(HistorySample(pose=self.world.pose, twist=command, pull=pull))

        self._check_goal()
        if self.total_ticks % INFER_EVERY == 0:
            self._infer_and_adapt()

        if self.total_ticks % self._pose_every == 0:
            self._publish("/robot_pose", self.pose_payload())
        if self.total_ticks % self._mode_every == 0:
            self._publish("/mode_state", self.mode_state_payload())
        return command

    def _dispatch(self, event: ControlEvent) -> None:
        self.arb, directive = arbitrate(self.arb, event, self.config.epsilon, self.config.n_release)
        if isinstance(directive, PlanRequest):
            self._pipeline(directive.goal)

    def _command_for(self, directive) -> Twist2D:
        if isinstance(directive, ApplyJoystick):
            return joystick_to_twist(self.held, self.limits)
        if isinstance(directive, FollowPlan):
            if isinstance(self.arb, Autonomous) and self.arb.path is not None:
                return follow_path(self.world, self.arb.path, self.limits)
            return Twist2D()
        return Twist2D()

    # --- planning pipeline ----------------------------------------------

    def _pipeline(self, goal: Pose2D) -> None:
        """Plan candidate routes from the current pose and commit to one."""
        old_modes = self.modes
        try:
            modes = candidate_modes(
                self.scenario.grid,
                (self.world.pose.x, self.world.pose.y),
                (goal.x, goal.y),
                self.scenario.robot_radius,
            )
        except (NoPath, InvalidEndpoint) as exc:
            self.plan_error = str(exc)
            self.arb = Idle()
            return
        self.plan_error = None
        self.pipeline_count += 1

        # Candidate ids are frame-local; carry the operator mode across
        # replans by its corridor label.
        if self.belief.current_m_h is not None and old_modes is not None:
            try:
                label = old_modes.by_id(self.belief.current_m_h).label
                remapped = modes.by_label(label).id
            except KeyError:
                remapped = None
            self.belief = self.belief.with_m_h(remapped)

        self.modes = modes
        self.m_r = plan_mode(self.belief, modes, self.config.horizon, self.config.reward)

        # With no operator evidence yet, assume they favor the corridor the
        # robot did not take; the first observation then always discriminates.
        if self.belief.current_m_h is None and len(modes) >= 2:
            alternative = min(i for i in modes.ids() if i != self.m_r)
            self.belief = self.belief.with_m_h(alternative)

        if len(modes) >= 2:
            self.committed_label = modes.by_id(self.m_r).label

        self.arb, _ = arbitrate(
            self.arb, PlanReady(modes, self.m_r), self.config.epsilon, self.config.n_release
        )
        payload = self.plan_payload()
        plan_json = json.dumps(payload, sort_keys=True)
        if plan_json != self._last_plan_json:
            self._last_plan_json = plan_json
            self.last_plan_payload = payload
            self._publish("/plan", payload)

    # --- adaptation -----------------------------------------------------

    def _infer_and_adapt(self) -> None:
        if self.modes is None or len(self.modes) < 2:
            return
        observed = infer_mode(self.history, self.modes)
        if observed is None or observed == self.belief.current_m_h:
            return
        self.observations.append((self.total_ticks, observed))
        m_h_prev = self.belief.current_m_h
        if m_h_prev is None or self.m_r is None:
            self.belief = self.belief.with_m_h(observed)
            return
        informative = (observed == self.m_r) != (observed == m_h_prev)
        self.belief = update_belief(self.belief, observed, m_h_prev, self.m_r)
        if not informative:
            # The observation matched neither tracked mode, so it carries no
            # evidence about adaptability; re-anchor without re-committing.
            return
        self.informative_updates += 1
        goal = self._active_goal()
        if goal is not None:
            self._pipeline(goal)

    def _active_goal(self) -> Pose2D | None:
        if isinstance(self.arb, Autonomous):
            return self.arb.goal
        if isinstance(self.arb, Override):
            return self.arb.saved_goal
        return None

    def _check_goal(self) -> None:
        if not isinstance(self.arb, Autonomous) or self.arb.path is None:
            return
        gx, gy = self.arb.path.waypoints[-1]
        if self.world.pose.distance_to(Pose2D(gx, gy)) <= GOAL_TOLERANCE:
            self.goal_reached = True
            self.arb = Idle()

    # --- outbound ------------------------------------------------

    def _publish(self, topic: str, payload: dict[str, Any]) -> None:
        self._outbox.append((topic, payload))

    def take_outbox(self) -> list[tuple[str, dict[str, Any]]]:
        out, self._outbox = self._outbox, []
        return out

    @property
    def stamp_ms(self) -> int:
        return int(self.total_ticks * self.config.dt * 1000)

    def map_payload(self) -> dict[str, Any]:
        grid = self.scenario.grid
        return {
            "width": grid.width,
            "height": grid.height,
            "resolution": grid.resolution,
            "cells": "".join("1" if b else "0" for b in grid.cells),
        }

    def pose_payload(self) -> dict[str, Any]:
        pose = self.world.pose
        return {
            "x": pose.x,
            "y": pose.y,
            "theta": pose.theta,
            "tick": self.world.tick,
            "collided": self.world.collided,
        }

    def plan_payload(self) -> dict[str, Any]:
        modes = self.modes
        entries = []
        if modes is not None:
            for mode in modes:
                entries.append(
                    {
                        "id": mode.id,
                        "label": mode.label,
                        "cost": mode.path.cost,
                        "waypoints": [[x, y] for x, y in mode.path.waypoints],
                    }
                )
        return {"modes": entries, "chosen_id": self.m_r}

    def mode_state_payload(self) -> dict[str, Any]:
        return {
            "alpha_probs": list(self.belief.alpha_probs),
            "m_h": self.belief.current_m_h,
            "m_r": self.m_r,
            "state": type(self.arb).__name__.lower(),
            "limits": {"v_max": self.limits.v_max, "omega_max": self.limits.omega_max},
        }

    # --- episode control -------------------------------------------------

    def reset_for_episode(self) -> None:
        """Fresh world and arbitration for a new run, keeping what was learned."""
        self.world = WorldState(pose=self.scenario.start)
        self.arb = Idle()
        self.held = JoystickInput(pull=0.0, bearing=0.0)
        self.history.clear()
        self._events.clear()
        self._speed_requests.clear()
        self.goal_reached = False
        self.plan_error = None
        self.committed_label = None
