"""Deterministic 2D world: occupancy grid, unicycle kinematics, disc collision.

World frame: x grows to the right, y grows upward, angles are radians
counterclockwise from +x.  Grid row 0 is the top row, so cell (row, col)
spans x in [col*res, (col+1)*res) and y in [(H-1-row)*res, (H-row)*res).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to the half-open interval [-pi, pi)."""
    return (theta + math.pi) % _TWO_PI - math.pi


@dataclass(frozen=True)
class Pose2D:
    """Planar pose; heading is normalized on construction."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def distance_to(self, other: "Pose2D") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass(frozen=True)
class Twist2D:
    """Body-frame velocity command: linear v (m/s), angular omega (rad/s)."""

    v: float = 0.0
    omega: float = 0.0


# Hard bounds every speed limit must respect, whatever the UI requests.
SPEED_FLOOR = 0.01
SPEED_CEILING = 5.0


@dataclass(frozen=True)
class SpeedLimits:
    v_max: float = 0.5
    omega_max: float = 1.0

    def __post_init__(self) -> None:
        for name, value in (("v_max", self.v_max), ("omega_max", self.omega_max)):
            if not (SPEED_FLOOR <= value <= SPEED_CEILING):
                raise ValueError(
                    f"{name}={value!r} outside [{SPEED_FLOOR}, {SPEED_CEILING}]"
                )


@dataclass(frozen=True)
class OccupancyGrid:
    """Row-major occupancy cells: 0 free, 1 occupied. Row 0 is the top row."""

    width: int
    height: int
    resolution: float
    cells: bytes

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("grid dimensions must be positive")
        if self.resolution <= 0:
            raise ValueError("grid resolution must be positive")
        if len(self.cells) != self.width * self.height:
            raise ValueError(
                f"expected {self.width * self.height} cells, got {len(self.cells)}"
            )
        if any(c not in (0, 1) for c in self.cells):
            raise ValueError("cells must be 0 or 1")

    def occupied(self, row: int, col: int) -> bool:
        return self.cells[row * self.width + col] != 0

    def in_bounds_cell(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def contains_point(self, x: float, y: float) -> bool:
        return (
            0.0 <= x < self.width * self.resolution
            and 0.0 <= y < self.height * self.resolution
        )

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """Grid cell containing the world point; may be out of bounds."""
        col = math.floor(x / self.resolution)
        row = self.height - 1 - math.floor(y / self.resolution)
        return row, col

    def center(self, row: int, col: int) -> tuple[float, float]:
        """World coordinates of a cell center."""
        res = self.resolution
        return (col + 0.5) * res, (self.height - 1 - row + 0.5) * res

    def occupied_centers(self) -> list[tuple[float, float]]:
        return [
            self.center(r, c)
            for r in range(self.height)
            for c in range(self.width)
            if self.occupied(r, c)
        ]


@dataclass(frozen=True)
class WorldState:
    """Authoritative robot state. `collided` reflects the most recent step."""

    pose: Pose2D
    tick: int = 0
    collided: bool = False


def check_collision(grid: OccupancyGrid, pose: Pose2D, radius: float) -> bool:
    """True iff the disc at (pose.x, pose.y) touches an occupied cell center
    or the point lies outside the grid bounds."""
    x, y = pose.x, pose.y
    if not grid.contains_point(x, y):
        return True
    r = max(radius, 0.0)
    res = grid.resolution
    c_lo = max(0, math.floor((x - r) / res))
    c_hi = min(grid.width - 1, math.floor((x + r) / res))
    r_lo = max(0, grid.height - 1 - math.floor((y + r) / res))
    r_hi = min(grid.height - 1, grid.height - 1 - math.floor((y - r) / res))
    rr = r * r
    for row in range(r_lo, r_hi + 1):
        for col in range(c_lo, c_hi + 1):
            if grid.occupied(row, col):
                cx, cy = grid.center(row, col)
                if (cx - x) ** 2 + (cy - y) ** 2 <= rr:
                    return True
    return False


def step(
    state: WorldState,
    cmd: Twist2D,
    dt: float,
    grid: OccupancyGrid,
    radius: float,
) -> WorldState:
    """One explicit-Euler unicycle step.

    Position updates use the pre-step heading.  If the new position collides,
    the position reverts while the heading update is kept and the collided
    flag is raised for this step.  The tick counter always advances.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    p = state.pose
    nx = p.x + cmd.v * math.cos(p.theta) * dt
    ny = p.y + cmd.v * math.sin(p.theta) * dt
    ntheta = wrap_angle(p.theta + cmd.omega * dt)
    candidate = Pose2D(nx, ny, ntheta)
    if check_collision(grid, candidate, radius):
        return WorldState(Pose2D(p.x, p.y, ntheta), state.tick + 1, True)
    return WorldState(candidate, state.tick + 1, False)
