"""Command arbitration between the operator's joystick and the planner.

The arbiter is a pure state machine: `arbitrate` maps (state, event) to
(state', directive) and never touches the world.  Directives tell the owning
loop which single command source drives the current tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from sharednav.nav import ModeSet, Path
from sharednav.sim import (
    SPEED_CEILING,
    SPEED_FLOOR,
    Pose2D,
    SpeedLimits,
    Twist2D,
)

# A stick deflection at or below this fraction counts as released.
PULL_EPSILON = 0.05
# Quiet ticks in Override before the saved goal is republished.
RELEASE_TICKS = 20

SPEED_STEP_UP = 1.1
SPEED_STEP_DOWN = 0.9


@dataclass(frozen=True)
class JoystickInput:
    """Radial stick state: pull in [0, 1], bearing CCW from straight up."""

    pull: float
    bearing: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "pull", max(0.0, min(1.0, self.pull)))


def joystick_to_twist(stick: JoystickInput, limits: SpeedLimits) -> Twist2D:
    """Straight up maps to full forward speed, left deflection to positive
    (counterclockwise) turn rate."""
    return Twist2D(
        v=stick.pull * limits.v_max * math.cos(stick.bearing),
        omega=stick.pull * limits.omega_max * math.sin(stick.bearing),
    )


def twist_to_joystick(twist: Twist2D, limits: SpeedLimits) -> JoystickInput:
    """Best-effort inverse of joystick_to_twist; exact within the limits."""
    fv = twist.v / limits.v_max
    fw = twist.omega / limits.omega_max
    pull = min(1.0, math.hypot(fv, fw))
    bearing = math.atan2(fw, fv) if (fv or fw) else 0.0
    return JoystickInput(pull, bearing)


def adjust_speed(limits: SpeedLimits, target: str, direction: str) -> SpeedLimits:
    """One click of the speed buttons: +10% or -10% on one limit, clamped."""
    if target not in ("linear", "angular"):
        raise ValueError(f"unknown speed target {target!r}")
    if direction not in ("up", "down"):
        raise ValueError(f"unknown speed direction {direction!r}")
    factor = SPEED_STEP_UP if direction == "up" else SPEED_STEP_DOWN
    current = limits.v_max if target == "linear" else limits.omega_max
    value = max(SPEED_FLOOR, min(SPEED_CEILING, current * factor))
    if target == "linear":
        return replace(limits, v_max=value)
    return replace(limits, omega_max=value)


# --- arbitration states -----------------------------------------------------


@dataclass(frozen=True)
class Idle:
    pass


@dataclass(frozen=True)
class Teleop:
    pass


@dataclass(frozen=True)
class Autonomous:
    goal: Pose2D
    mode_id: int | None = None
    path: Path | None = None


@dataclass(frozen=True)
class Override:
    saved_goal: Pose2D
    quiet_ticks: int = 0


ArbitrationState = Idle | Teleop | Autonomous | Override


# --- events -------------------------------------------------------


@dataclass(frozen=True)
class JoystickMsg:
    stick: JoystickInput


@dataclass(frozen=True)
class GoalClick:
    pose: Pose2D


@dataclass(frozen=True)
class CancelGoal:
    pass


@dataclass(frozen=True)
class PlanReady:
    modes: ModeSet
    chosen_id: int


@dataclass(frozen=True)
class Tick:
    """Fixed-rate clock event carrying the currently held stick pull."""

    pull: float = 0.0


ControlEvent = JoystickMsg | GoalClick | CancelGoal | PlanReady | Tick


# --- directives --------------------------------------------------------------


@dataclass(frozen=True)
class ApplyJoystick:
    """Drive from the held joystick input this tick."""


@dataclass(frozen=True)
class FollowPlan:
    """Drive from the active path this tick."""


@dataclass(frozen=True)
class Zero:
    """Command a zero twist this tick."""


@dataclass(frozen=True)
class PlanRequest:
    goal: Pose2D


@dataclass(frozen=True)
class Republish:
    """Override released long enough; re-issue the saved goal."""

    goal: Pose2D


Directive = ApplyJoystick | FollowPlan | Zero | PlanRequest | Republish


def arbitrate(
    state: ArbitrationState,
    event: ControlEvent,
    epsilon: float = PULL_EPSILON,
    release_ticks: int = RELEASE_TICKS,
) -> tuple[ArbitrationState, Directive | None]:
    """Total transition function of the arbitration machine.

    Every (state, event) pair is defined.  A goal click always wins; a stick
    pull above epsilon during autonomy enters Override and saves the goal;
    release_ticks quiet ticks later the goal is republished and autonomy
    resumes with a fresh plan request.
    """
    if isinstance(event, GoalClick):
        return Autonomous(event.pose), PlanRequest(event.pose)
    if isinstance(event, CancelGoal):
        return Idle(), Zero()

    if isinstance(event, JoystickMsg):
        if isinstance(state, (Idle, Teleop)):
            return Teleop(), ApplyJoystick()
        if isinstance(state, Autonomous):
            if event.stick.pull > epsilon:
                return Override(saved_goal=state.goal), ApplyJoystick()
            return state, None
        if isinstance(state, Override):
            if event.stick.pull > epsilon:
                return replace(state, quiet_ticks=0), ApplyJoystick()
            return state, None

    if isinstance(event, PlanReady):
        if isinstance(state, Autonomous):
            chosen = event.modes.by_id(event.chosen_id)
            return replace(state, mode_id=chosen.id, path=chosen.path), None
        return state, None  # stale plan, goal is gone

    if isinstance(event, Tick):
        if isinstance(state, Idle):
            return state, Zero()
        if isinstance(state, Teleop):
            return state, ApplyJoystick()
        if isinstance(state, Autonomous):
            return state, FollowPlan()
        if isinstance(state, Override):
            if event.pull > epsilon:
                return replace(state, quiet_ticks=0), ApplyJoystick()
            quiet = state.quiet_ticks + 1
            if quiet >= release_ticks:
                return Autonomous(state.saved_goal), Republish(state.saved_goal)
            return replace(state, quiet_ticks=quiet), Zero()

    raise AssertionError(f"unhandled arbitration input {state!r}, {event!r}")
