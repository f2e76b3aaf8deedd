"""Scripted operator sessions without a UI or network.

Each episode the robot is sent to the scenario's goal, a synthetic operator
pushes the joystick toward the corridor it currently wants, and the run
records which corridor the robot finally committed to.  The first episode
the operator only reacts to the robot's announced choice; later episodes it
first expresses its own preference, waits for the robot to re-commit, then
reacts again.  Results stream as JSON lines, one per episode plus a final
aggregate, optionally alongside a CSV table and rendered figures.
"""

from __future__ import annotations

import csv
import json
import math
import random
import sys
from pathlib import Path
from typing import IO, Any

from sharednav.adaptation import synthetic_operator
from sharednav.loop import ControlLoop, ServerConfig
from sharednav.nav import Path as NavPath
from sharednav.scenario import InvalidScenario
from sharednav.sim import wrap_angle

# Stick pushes arrive every other tick during a stint; a stint lasts two
# inference windows so the operator's corridor is always observable.
PUBLISH_EVERY = 2
EPISODE_BUDGET = 3000

OPERATOR_LOOKAHEAD = 0.45


def _target_path(loop: ControlLoop, label: str) -> NavPath:
    modes = loop.modes
    assert modes is not None
    try:
        return modes.by_label(label).path
    except KeyError:
        return modes.by_id(modes.optimal_id).path


def _bearing_to_carrot(loop: ControlLoop, path: NavPath) -> float:
    pose = loop.world.pose
    nearest = min(
        range(len(path.waypoints)),
        key=lambda i: math.hypot(path.waypoints[i][0] - pose.x, path.waypoints[i][1] - pose.y),
    )
    carrot = path.waypoints[-1]
    for wx, wy in path.waypoints[nearest + 1:]:
        if math.hypot(wx - pose.x, wy - pose.y) > OPERATOR_LOOKAHEAD:
            carrot = (wx, wy)
            break
    return wrap_angle(math.atan2(carrot[1] - pose.y, carrot[0] - pose.x) - pose.theta)


def _stint(
    loop: ControlLoop, target_label: str, ticks: int, trace: list, release: bool = True
) -> None:
    """Drive the stick toward the labeled corridor, optionally letting go."""
    for i in range(ticks):
        if i % PUBLISH_EVERY == 0:
            bearing = _bearing_to_carrot(loop, _target_path(loop, target_label))
            loop.submit("/cmd_vel", {"pull": 1.0, "bearing": bearing})
        loop.tick()
        loop.take_outbox()
        trace.append((loop.world.pose.x, loop.world.pose.y))
    if release:
        loop.submit("/cmd_vel", {"pull": 0.0, "bearing": 0.0})


def _run_until(loop: ControlLoop, predicate, budget: int, trace: list) -> int:
    used = 0
    while used < budget and not predicate():
        loop.tick()
        loop.take_outbox()
        trace.append((loop.world.pose.x, loop.world.pose.y))
        used += 1
    return used


def run_headless(
    config: ServerConfig,
    alpha_true: float,
    preferred: str = "left",
    episodes: int = 10,
    report_dir: str | Path | None = None,
    out: IO[str] | None = None,
) -> dict[str, Any]:
    """Run scripted episodes and return the aggregate record.

    Raises InvalidScenario when the scenario offers fewer than two routes,
    since adaptation is then unobservable.
    """
    if out is None:
        out = sys.stdout
    if not (0.0 <= alpha_true <= 1.0):
        raise ValueError("alpha_true must lie in [0, 1]")
    if episodes < 0:
        raise ValueError("episodes must be non-negative")

    loop = ControlLoop(config)
    rng = random.Random(config.seed)
    goal = config.scenario.goals[0].pose
    goal_payload = {"x": goal.x, "y": goal.y, "theta": goal.theta}

    records: list[dict[str, Any]] = []
    traces: list[list[tuple[float, float]]] = []
    belief_history: list[tuple[float, ...]] = []
    optimal_label: str | None = None

    for episode in range(episodes):
        loop.reset_for_episode()
        start_informative = loop.informative_updates
        trace: list[tuple[float, float]] = [(loop.world.pose.x, loop.world.pose.y)]
        ticks_used = 0

        loop.submit("/goal", goal_payload)
        loop.tick()
        loop.take_outbox()
        ticks_used += 1

        modes = loop.modes
        if modes is None or len(modes) < 2:
            raise InvalidScenario("scenario offers fewer than two routes to the goal")
        if optimal_label is None:
            optimal_label = modes.by_id(modes.optimal_id).label
        try:
            preferred_id = modes.by_label(preferred).id
        except KeyError:
            raise InvalidScenario(f"no route labeled {preferred!r}") from None

        stint_ticks = 2 * config.k
        if episode > 0:
            # First show the robot the operator's own preference; the robot
            # re-anchors its operator-mode estimate without re-committing.
            _stint(loop, preferred, stint_ticks, trace, release=False)
            ticks_used += stint_ticks
            try:
                preferred_id = loop.modes.by_label(preferred).id
            except KeyError:
                pass  # replanned to a single route; keep the earlier id

        # React to the robot's announced choice per the operator model.
        assert loop.modes is not None and loop.m_r is not None
        react_id = synthetic_operator(alpha_true, preferred_id, loop.m_r, rng)
        react_label = loop.modes.by_id(react_id).label
        _stint(loop, react_label, stint_ticks, trace)
        ticks_used += stint_ticks

        ticks_used += _run_until(
            loop, lambda: loop.goal_reached, EPISODE_BUDGET - ticks_used, trace
        )

        m_r_label = loop.committed_label
        record = {
            "episode": episode,
            "operator_mode": react_label,
            "m_r": m_r_label,
            "reached": loop.goal_reached,
            "steps": ticks_used,
            "agreement": m_r_label == react_label,
            "alpha_probs": list(loop.belief.alpha_probs),
            "m_h": _label_of(loop, loop.belief.current_m_h),
            "informative_updates": loop.informative_updates - start_informative,
        }
        records.append(record)
        traces.append(trace)
        belief_history.append(loop.belief.alpha_probs)
        out.write(json.dumps(record, sort_keys=True) + "\n")

    compliance = _rate(records, preferred)
    optimal = _rate(records, optimal_label) if optimal_label else 0.0
    aggregate = {
        "aggregate": True,
        "episodes": episodes,
        "compliance_rate": compliance,
        "optimal_rate": optimal,
        "informative_updates": loop.informative_updates,
        "alpha_probs": list(loop.belief.alpha_probs),
    }
    out.write(json.dumps(aggregate, sort_keys=True) + "\n")

    if report_dir is not None:
        _write_report(Path(report_dir), config, records, traces, belief_history)
    return aggregate


def _label_of(loop: ControlLoop, mode_id: int | None) -> str | None:
    if mode_id is None or loop.modes is None:
        return None
    try:
        return loop.modes.by_id(mode_id).label
    except KeyError:
        return None


def _rate(records: list[dict[str, Any]], label: str | None) -> float:
    if not records:
        return 0.0
    return sum(1 for r in records if r["m_r"] == label) / len(records)


def _write_report(
    directory: Path,
    config: ServerConfig,
    records: list[dict[str, Any]],
    traces: list[list[tuple[float, float]]],
    belief_history: list[tuple[float, ...]],
) -> None:
    """Write episodes.csv plus rendered figures into the report directory."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from sharednav.adaptation import ALPHA_SUPPORT

    directory.mkdir(parents=True, exist_ok=True)

    with (directory / "episodes.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["episode", "operator_mode", "m_r", "reached", "steps", "agreement", "informative_updates"]
            + [f"p_alpha_{a}" for a in ALPHA_SUPPORT]
        )
        for record in records:
            writer.writerow(
                [
                    record["episode"],
                    record["operator_mode"],
                    record["m_r"],
                    record["reached"],
                    record["steps"],
                    record["agreement"],
                    record["informative_updates"],
                ]
                + record["alpha_probs"]
            )

    if belief_history:
        fig, ax = plt.subplots(figsize=(6, 4))
        xs = range(len(belief_history))
        for idx, alpha in enumerate(ALPHA_SUPPORT):
            ax.plot(xs, [b[idx] for b in belief_history], marker="o", label=f"alpha={alpha}")
        ax.set_xlabel("episode")
        ax.set_ylabel("probability")
        ax.set_ylim(-0.05, 1.05)
        ax.legend(fontsize=8)
        ax.set_title("adaptability belief by episode")
        fig.tight_layout()
        fig.savefig(directory / "belief.png", dpi=120)
        plt.close(fig)

    grid = config.scenario.grid
    fig, ax = plt.subplots(figsize=(6, 5))
    for r in range(grid.height):
        for c in range(grid.width):
            if grid.occupied(r, c):
                x = c * grid.resolution
                y = (grid.height - 1 - r) * grid.resolution
                ax.add_patch(
                    plt.Rectangle((x, y), grid.resolution, grid.resolution, color="0.3")
                )
    for idx, trace in enumerate(traces):
        if trace:
            ax.plot([p[0] for p in trace], [p[1] for p in trace], alpha=0.7, label=f"ep {idx}")
    ax.set_xlim(0, grid.width * grid.resolution)
    ax.set_ylim(0, grid.height * grid.resolution)
    ax.set_aspect("equal")
    if traces:
        ax.legend(fontsize=7, ncol=2)
    ax.set_title("trajectories")
    fig.tight_layout()
    fig.savefig(directory / "trajectories.png", dpi=120)
    plt.close(fig)

    if records:
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.bar(
            [r["episode"] for r in records],
            [1 if r["agreement"] else 0 for r in records],
            color=["tab:green" if r["agreement"] else "tab:red" for r in records],
        )
        ax.set_xlabel("episode")
        ax.set_ylabel("agreement")
        ax.set_yticks([0, 1])
        ax.set_title("operator and robot on the same route")
        fig.tight_layout()
        fig.savefig(directory / "outcomes.png", dpi=120)
        plt.close(fig)
