"""Shared-control navigation: a differential-drive simulator, corridor-aware
planning, joystick/autonomy arbitration, and an operator-adaptability model
behind a websocket bridge."""

from sharednav.adaptation import (
    ALPHA_SUPPORT,
    AdaptationBelief,
    RewardConfig,
    bam_transition,
    infer_mode,
    plan_mode,
    update_belief,
)
from sharednav.control import JoystickInput, adjust_speed, arbitrate
from sharednav.loop import ControlLoop, ServerConfig
from sharednav.nav import Mode, ModeSet, Path, candidate_modes, follow_path, plan_shortest
from sharednav.scenario import Scenario, load_scenario, load_scenario_file
from sharednav.sim import OccupancyGrid, Pose2D, SpeedLimits, Twist2D, WorldState, step

__all__ = [
    "ALPHA_SUPPORT",
    "AdaptationBelief",
    "ControlLoop",
    "JoystickInput",
    "Mode",
    "ModeSet",
    "OccupancyGrid",
    "Path",
    "Pose2D",
    "RewardConfig",
    "Scenario",
    "ServerConfig",
    "SpeedLimits",
    "Twist2D",
    "WorldState",
    "adjust_speed",
    "arbitrate",
    "bam_transition",
    "candidate_modes",
    "follow_path",
    "infer_mode",
    "load_scenario",
    "load_scenario_file",
    "plan_mode",
    "plan_shortest",
    "step",
    "update_belief",
]
