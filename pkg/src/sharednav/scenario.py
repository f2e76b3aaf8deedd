"""Scenario files: a grid map plus a start pose, named goals, and limits.

Format (plain text)::

    grid W H RES
    <H rows of W characters, '#' occupied, '.' free; row 0 is the top>
    start X Y THETA
    goal NAME X Y THETA        (one or more)
    radius R                   (optional, default 0.15)
    vmax V                     (optional)
    wmax W                     (optional)

Directive lines after the grid block may appear in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

from sharednav.sim import (
    OccupancyGrid,
    Pose2D,
    SpeedLimits,
    check_collision,
)

DEFAULT_RADIUS = 0.15


class ParseError(ValueError):
    """The scenario text does not follow the file format."""


class InvalidScenario(ValueError):
    """The scenario parses but is not usable (bad poses, no goals, ...)."""


@dataclass(frozen=True)
class Goal:
    name: str
    pose: Pose2D


@dataclass(frozen=True)
class Scenario:
    grid: OccupancyGrid
    start: Pose2D
    goals: tuple[Goal, ...]
    robot_radius: float = DEFAULT_RADIUS
    speed_limits: SpeedLimits = SpeedLimits()

    def goal_named(self, name: str) -> Goal:
        for goal in self.goals:
            if goal.name == name:
                return goal
        raise KeyError(name)


def _parse_floats(tokens: list[str], line_no: int) -> list[float]:
    out = []
    for tok in tokens:
        try:
            out.append(float(tok))
        except ValueError:
            raise ParseError(f"line {line_no}: not a number: {tok!r}") from None
    return out


def load_scenario(document: str) -> Scenario:
    """Parse scenario text. Raises ParseError on malformed input and
    InvalidScenario when the described world is unusable."""
    lines = document.splitlines()
    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx >= len(lines):
        raise ParseError("empty scenario document")

    header = lines[idx].split()
    if len(header) != 4 or header[0] != "grid":
        raise ParseError(f"line {idx + 1}: expected 'grid W H RES'")
    try:
        width, height = int(header[1]), int(header[2])
        resolution = float(header[3])
    except ValueError:
        raise ParseError(f"line {idx + 1}: bad grid header values") from None
    if width <= 0 or height <= 0 or resolution <= 0:
        raise ParseError(f"line {idx + 1}: grid dimensions must be positive")
    idx += 1

    if idx + height > len(lines):
        raise ParseError(f"expected {height} grid rows, document ends early")
    cells = bytearray()
    for r in range(height):
        row = lines[idx + r]
        if len(row) != width:
            raise ParseError(
                f"line {idx + r + 1}: grid row has {len(row)} chars, expected {width}"
            )
        for ch in row:
            if ch == "#":
                cells.append(1)
            elif ch == ".":
                cells.append(0)
            else:
                raise ParseError(f"line {idx + r + 1}: bad grid char {ch!r}")
    grid = OccupancyGrid(width, height, resolution, bytes(cells))
    idx += height

    start: Pose2D | None = None
    goals: list[Goal] = []
    radius = DEFAULT_RADIUS
    limits = SpeedLimits()
    for off, raw in enumerate(lines[idx:], start=idx + 1):
        if not raw.strip():
            continue
        tokens = raw.split()
        keyword = tokens[0]
        if keyword == "start":
            if start is not None:
                raise ParseError(f"line {off}: duplicate start")
            if len(tokens) != 4:
                raise ParseError(f"line {off}: expected 'start X Y THETA'")
            x, y, theta = _parse_floats(tokens[1:], off)
            start = Pose2D(x, y, theta)
        elif keyword == "goal":
            if len(tokens) != 5:
                raise ParseError(f"line {off}: expected 'goal NAME X Y THETA'")
            x, y, theta = _parse_floats(tokens[2:], off)
            goals.append(Goal(tokens[1], Pose2D(x, y, theta)))
        elif keyword == "radius":
            if len(tokens) != 2:
                raise ParseError(f"line {off}: expected 'radius R'")
            (radius,) = _parse_floats(tokens[1:], off)
        elif keyword == "vmax":
            if len(tokens) != 2:
                raise ParseError(f"line {off}: expected 'vmax V'")
            (v,) = _parse_floats(tokens[1:], off)
            limits = _relimit(limits, off, v_max=v)
        elif keyword == "wmax":
            if len(tokens) != 2:
                raise ParseError(f"line {off}: expected 'wmax W'")
            (w,) = _parse_floats(tokens[1:], off)
            limits = _relimit(limits, off, omega_max=w)
        else:
            raise ParseError(f"line {off}: unknown directive {keyword!r}")

    if start is None:
        raise InvalidScenario("scenario declares no start")
    if not goals:
        raise InvalidScenario("scenario declares no goals")
    if radius < 0:
        raise InvalidScenario(f"negative robot radius {radius}")

    scenario = Scenario(grid, start, tuple(goals), radius, limits)
    _validate_poses(scenario)
    return scenario


def _relimit(limits: SpeedLimits, line_no: int, **kw: float) -> SpeedLimits:
    try:
        return replace(limits, **kw)
    except ValueError as exc:
        raise InvalidScenario(f"line {line_no}: {exc}") from None


def _validate_poses(scenario: Scenario) -> None:
    grid, radius = scenario.grid, scenario.robot_radius
    if check_collision(grid, scenario.start, radius):
        raise InvalidScenario(
            f"start ({scenario.start.x}, {scenario.start.y}) is not free "
            f"with clearance {radius}"
        )
    for goal in scenario.goals:
        if check_collision(grid, goal.pose, radius):
            raise InvalidScenario(
                f"goal {goal.name!r} ({goal.pose.x}, {goal.pose.y}) is not "
                f"free with clearance {radius}"
            )


def load_scenario_file(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidScenario(f"cannot read scenario file {path!r}: {exc}") from exc
    return load_scenario(text)


def bundled_scenario_path(name: str = "two_corridor") -> str:
    """Filesystem path of a scenario shipped with the package."""
    return str(resources.files("sharednav").joinpath(f"scenarios/{name}.scn"))
