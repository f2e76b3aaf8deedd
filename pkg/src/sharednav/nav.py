"""Grid planning and path following.

Dijkstra over the radius-inflated occupancy grid, 8-connected by default
(straight moves cost 1 cell, diagonals sqrt(2); diagonal moves may not cut
corners past an occupied cell).  A second candidate route is produced by
re-planning with the first route's interior blocked; it is kept only when it
is genuinely a different corridor, i.e. the two routes enclose at least one
obstacle between them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from matplotlib.path import Path as _MplPath

from sharednav.sim import OccupancyGrid, Pose2D, SpeedLimits, Twist2D, WorldState, wrap_angle

_SQRT2 = math.sqrt(2.0)

# Candidate-mode tuning: generosity of the alternate-route cost cutoff and
# how many cells around the endpoints stay unblocked during re-planning.
COST_RATIO_LIMIT = 3.0
ENDPOINT_MARGIN_CELLS = 2

# Path-following gains.
LOOKAHEAD = 0.3
HEADING_GAIN = 2.0
GOAL_TOLERANCE = 0.1


class NoPath(RuntimeError):
    """Start and goal are not connected on the inflated grid."""


class InvalidEndpoint(ValueError):
    """Start or goal lies out of bounds or inside the inflated obstacle set."""


@dataclass(frozen=True)
class Path:
    """A planned route: grid cells, their world-frame centers, and cost.

    Cost is measured in cells: straight steps count 1, diagonals sqrt(2).
    """

    cells: tuple[tuple[int, int], ...]
    waypoints: tuple[tuple[float, float], ...]
    cost: float

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class Mode:
    """One candidate route, labelled by which side of the direct line it favors."""

    id: int
    path: Path
    label: str


@dataclass(frozen=True)
class ModeSet:
    modes: tuple[Mode, ...]
    optimal_id: int

    def __post_init__(self) -> None:
        if not self.modes:
            raise ValueError("mode set must not be empty")
        ids = [m.id for m in self.modes]
        if len(set(ids)) != len(ids):
            raise ValueError("mode ids must be unique")
        if self.optimal_id not in ids:
            raise ValueError("optimal_id not among modes")

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def by_id(self, mode_id: int) -> Mode:
        for mode in self.modes:
            if mode.id == mode_id:
                return mode
        raise KeyError(mode_id)

    def by_label(self, label: str) -> Mode:
        for mode in self.modes:
            if mode.label == label:
                return mode
        raise KeyError(label)

    def ids(self) -> tuple[int, ...]:
        return tuple(m.id for m in self.modes)


def inflate_grid(grid: OccupancyGrid, radius: float) -> bytes:
    """Blocked mask after disc inflation.

    A cell is blocked iff its center is within `radius` of an occupied cell
    center, which keeps planning consistent with check_collision along cell
    centers.
    """
    res = grid.resolution
    r = max(radius, 0.0)
    reach = math.floor(r / res)
    offsets = [
        (dr, dc)
        for dr in range(-reach, reach + 1)
        for dc in range(-reach, reach + 1)
        if (dr * res) ** 2 + (dc * res) ** 2 <= r * r
    ]
    blocked = bytearray(grid.cells)
    for row in range(grid.height):
        base = row * grid.width
        for col in range(grid.width):
            if grid.cells[base + col]:
                for dr, dc in offsets:
                    rr, cc = row + dr, col + dc
                    if 0 <= rr < grid.height and 0 <= cc < grid.width:
                        blocked[rr * grid.width + cc] = 1
    return bytes(blocked)


_STEPS_8 = (
    (-1, -1, 1), (-1, 0, 0), (-1, 1, 1),
    (0, -1, 0), (0, 1, 0),
    (1, -1, 1), (1, 0, 0), (1, 1, 1),
)
_STEPS_4 = ((-1, 0, 0), (0, -1, 0), (0, 1, 0), (1, 0, 0))


def _search(
    grid: OccupancyGrid,
    blocked: bytes,
    start_cell: tuple[int, int],
    goal_cell: tuple[int, int],
    connectivity: int,
) -> Path:
    width, height = grid.width, grid.height
    steps = _STEPS_8 if connectivity == 8 else _STEPS_4

    def is_blocked(row: int, col: int) -> bool:
        return blocked[row * width + col] != 0

    for name, (row, col) in (("start", start_cell), ("goal", goal_cell)):
        if not grid.in_bounds_cell(row, col):
            raise InvalidEndpoint(f"{name} cell {row, col} out of bounds")
        if is_blocked(row, col):
            raise InvalidEndpoint(f"{name} cell {row, col} is not free")

    # Cost carried as (straights, diagonals); the float key is always
    # re-derived canonically so equal-cost routes compare bit-identical.
    best: dict[tuple[int, int], float] = {start_cell: 0.0}
    counts: dict[tuple[int, int], tuple[int, int]] = {start_cell: (0, 0)}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    done: set[tuple[int, int]] = set()
    heap: list[tuple[float, int, int]] = [(0.0, start_cell[0], start_cell[1])]
    while heap:
        g, row, col = heapq.heappop(heap)
        node = (row, col)
        if node in done:
            continue
        done.add(node)
        if node == goal_cell:
            break
        s, d = counts[node]
        for dr, dc, diag in steps:
            nr, nc = row + dr, col + dc
            if not (0 <= nr < height and 0 <= nc < width) or is_blocked(nr, nc):
                continue
            if diag and (is_blocked(row, nc) or is_blocked(nr, col)):
                continue  # no corner cutting past obstacles
            ns, nd = (s, d + 1) if diag else (s + 1, d)
            ng = ns + nd * _SQRT2
            nb = (nr, nc)
            if nb not in best or ng < best[nb]:
                best[nb] = ng
                counts[nb] = (ns, nd)
                parent[nb] = node
                heapq.heappush(heap, (ng, nr, nc))
    if goal_cell not in done:
        raise NoPath(f"no route from {start_cell} to {goal_cell}")

    cells = [goal_cell]
    while cells[-1] != start_cell:
        cells.append(parent[cells[-1]])
    cells.reverse()
    waypoints = tuple(grid.center(r, c) for r, c in cells)
    return Path(tuple(cells), waypoints, best[goal_cell])


def plan_shortest(
    grid: OccupancyGrid,
    start: tuple[float, float],
    goal: tuple[float, float],
    radius: float,
    connectivity: int = 8,
) -> Path:
    """Minimal-cost route between the cells containing start and goal.

    Ties in the priority queue resolve by (row, col), making the returned
    route deterministic for identical inputs.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    blocked = inflate_grid(grid, radius)
    return _search(grid, blocked, grid.cell_of(start[0], start[1]),
                   grid.cell_of(goal[0], goal[1]), connectivity)


def _side_score(path: Path) -> float:
    """Net lateral offset of the route from the straight start-goal chord.

    Positive means the route runs to the left of the direction of travel.
    """
    (sx, sy), (gx, gy) = path.waypoints[0], path.waypoints[-1]
    dx, dy = gx - sx, gy - sy
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return 0.0
    ux, uy = dx / norm, dy / norm
    return sum(ux * (py - sy) - uy * (px - sx) for px, py in path.waypoints)


def _label_for(score: float) -> str:
    if score > 1e-9:
        return "left"
    if score < -1e-9:
        return "right"
    return "center"


def _encloses_obstacle(a: Path, b: Path, grid: OccupancyGrid) -> bool:
    """True when the loop (a forward, b backward) traps an occupied center.

    Routes that merely sidestep each other enclose nothing; genuinely
    different corridors wrap around the wall that separates them.
    """
    centers = grid.occupied_centers()
    if not centers:
        return False
    ring = list(a.waypoints) + list(reversed(b.waypoints))
    if len(ring) < 3:
        return False
    return bool(_MplPath(ring).contains_points(centers).any())


def candidate_modes(
    grid: OccupancyGrid,
    start: tuple[float, float],
    goal: tuple[float, float],
    radius: float,
) -> ModeSet:
    """Up to two corridor choices toward the goal.

    Mode 0 is the shortest route.  Mode 1 comes from re-planning with mode
    0's cells blocked, excluding cells within ENDPOINT_MARGIN_CELLS of either
    endpoint; it is kept only when its cost stays within COST_RATIO_LIMIT of
    mode 0 and the two routes enclose an obstacle (distinct corridors).
    """
    first = plan_shortest(grid, start, goal, radius)
    start_cell = grid.cell_of(start[0], start[1])
    goal_cell = grid.cell_of(goal[0], goal[1])

    def near_endpoint(cell: tuple[int, int]) -> bool:
        return any(
            max(abs(cell[0] - ref[0]), abs(cell[1] - ref[1])) <= ENDPOINT_MARGIN_CELLS
            for ref in (start_cell, goal_cell)
        )

    to_block = [cell for cell in first.cells if not near_endpoint(cell)]
    second: Path | None = None
    if to_block:
        cells = bytearray(grid.cells)
        for row, col in to_block:
            cells[row * grid.width + col] = 1
        masked = OccupancyGrid(grid.width, grid.height, grid.resolution, bytes(cells))
        try:
            alt = plan_shortest(masked, start, goal, radius)
        except (NoPath, InvalidEndpoint):
            alt = None
        if (
            alt is not None
            and alt.cells != first.cells
            and alt.cost <= COST_RATIO_LIMIT * first.cost
            and _encloses_obstacle(first, alt, grid)
        ):
            second = alt

    modes = [Mode(0, first, _label_for(_side_score(first)))]
    if second is not None:
        modes.append(Mode(1, second, _label_for(_side_score(second))))
    return ModeSet(tuple(modes), optimal_id=0)


def follow_path(
    state: WorldState,
    path: Path,
    limits: SpeedLimits,
    lookahead: float = LOOKAHEAD,
    heading_gain: float = HEADING_GAIN,
    goal_tolerance: float = GOAL_TOLERANCE,
) -> Twist2D:
    """Carrot chase toward the first waypoint beyond the lookahead radius.

    Linear speed scales with the cosine of the heading error (never negative),
    angular speed is proportional to the error and clamped.  Returns a zero
    twist once within goal_tolerance of the final waypoint.
    """
    pose = state.pose
    gx, gy = path.waypoints[-1]
    if math.hypot(gx - pose.x, gy - pose.y) <= goal_tolerance:
        return Twist2D(0.0, 0.0)
    # the carrot lies strictly past the closest waypoint, never behind
    nearest = min(
        range(len(path.waypoints)),
        key=lambda i: math.hypot(
            path.waypoints[i][0] - pose.x, path.waypoints[i][1] - pose.y
        ),
    )
    target = path.waypoints[-1]
    for wx, wy in path.waypoints[nearest + 1:]:
        if math.hypot(wx - pose.x, wy - pose.y) > lookahead:
            target = (wx, wy)
            break
    error = wrap_angle(math.atan2(target[1] - pose.y, target[0] - pose.x) - pose.theta)
    omega = max(-limits.omega_max, min(limits.omega_max, heading_gain * error))
    v = limits.v_max * max(0.0, math.cos(error))
    return Twist2D(v, omega)
