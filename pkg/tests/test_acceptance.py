"""Acceptance gate: one test per shipped guarantee.

Each test states the guarantee, pins its tolerance, and checks it against an
independently coded oracle or an end-to-end run.  Run with -v for one
pass/fail line per guarantee.
"""

import io
import json
import math
import random
import time

import pytest
from fastapi.testclient import TestClient
from hypothesis import given, settings, strategies as st

from sharednav.adaptation import (
    ALPHA_SUPPORT,
    AdaptationBelief,
    RewardConfig,
    bam_transition,
    plan_mode,
    update_belief,
)
from sharednav.bridge import BridgeMessage, decode_message, encode_message
from sharednav.control import (
    ApplyJoystick,
    Autonomous,
    CancelGoal,
    FollowPlan,
    GoalClick,
    Idle,
    JoystickInput,
    JoystickMsg,
    Override,
    PlanReady,
    PlanRequest,
    Republish,
    Teleop,
    Tick,
    Zero,
    adjust_speed,
    arbitrate,
)
from sharednav.headless import run_headless
from sharednav.loop import ControlLoop, ServerConfig
from sharednav.nav import NoPath, candidate_modes, plan_shortest
from sharednav.scenario import bundled_scenario_path, load_scenario_file
from sharednav.server import build_app
from sharednav.sim import OccupancyGrid, Pose2D, SpeedLimits

from test_adaptation import oracle_plan, ratio_set

SQRT2 = math.sqrt(2.0)


def fixture_config(**overrides):
    scenario = load_scenario_file(bundled_scenario_path())
    return ServerConfig(scenario=scenario, **overrides)


def fixture_modes():
    sc = load_scenario_file(bundled_scenario_path())
    return candidate_modes(
        sc.grid,
        (sc.start.x, sc.start.y),
        (sc.goals[0].pose.x, sc.goals[0].pose.y),
        sc.robot_radius,
    )


# --- shortest paths against a brute-force reference --------------------------


def edge_list(grid):
    """Explicit legal moves: (from, to, straights, diagonals) per edge."""
    edges = {}
    occ = grid.occupied
    for r in range(grid.height):
        for c in range(grid.width):
            if occ(r, c):
                continue
            out = []
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == dc == 0:
                        continue
                    nr, nc = r + dr, c + dc
                    if not grid.in_bounds_cell(nr, nc) or occ(nr, nc):
                        continue
                    diag = dr != 0 and dc != 0
                    if diag and (occ(r, nc) or occ(nr, c)):
                        continue
                    out.append(((nr, nc), 0 if diag else 1, 1 if diag else 0))
            edges[(r, c)] = out
    return edges


def brute_force_moves(grid, start, goal):
    """Heapless Dijkstra over the explicit edge list; exact move counts."""
    edges = edge_list(grid)
    if start not in edges or goal not in edges:
        return None
    dist = {start: (0, 0)}
    done = set()
    while True:
        node = None
        node_cost = math.inf
        for cand, (s, d) in dist.items():
            cost = s + d * SQRT2
            if cand not in done and cost < node_cost:
                node, node_cost = cand, cost
        if node is None:
            return None
        if node == goal:
            return dist[goal]
        done.add(node)
        s, d = dist[node]
        for nxt, ds, dd in edges[node]:
            ns, nd = s + ds, d + dd
            old = dist.get(nxt)
            if old is None or ns + nd * SQRT2 < old[0] + old[1] * SQRT2:
                dist[nxt] = (ns, nd)


def bfs_hops(grid, start, goal):
    frontier = [start]
    hops = {start: 0}
    while frontier:
        nxt = []
        for r, c in frontier:
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                nb = (r + dr, c + dc)
                if (
                    grid.in_bounds_cell(*nb)
                    and not grid.occupied(*nb)
                    and nb not in hops
                ):
                    hops[nb] = hops[r, c] + 1
                    nxt.append(nb)
        frontier = nxt
    return hops.get(goal)


def path_moves(path):
    straights = diagonals = 0
    for (r0, c0), (r1, c1) in zip(path.cells, path.cells[1:]):
        if r0 != r1 and c0 != c1:
            diagonals += 1
        else:
            straights += 1
    return straights, diagonals


def test_shortest_paths_match_brute_force_search():
    """200 random grids: 8-connected equals an explicit-edge-list Dijkstra
    exactly (integer move counts); 4-connected equals BFS. Under 5 s."""
    rng = random.Random(2024)
    started = time.monotonic()
    reachable = 0
    for _ in range(200):
        cells = bytes(1 if rng.random() < 0.25 else 0 for _ in range(100))
        grid = OccupancyGrid(10, 10, 0.5, cells)
        free = [
            (r, c)
            for r in range(10)
            for c in range(10)
            if not grid.occupied(r, c)
        ]
        if len(free) < 2:
            continue
        start, goal = rng.sample(free, 2)
        start_xy = grid.center(*start)
        goal_xy = grid.center(*goal)

        want = brute_force_moves(grid, start, goal)
        try:
            path = plan_shortest(grid, start_xy, goal_xy, radius=0.0)
        except NoPath:
            assert want is None
        else:
            assert want is not None
            assert path_moves(path) == want
            reachable += 1

        want_hops = bfs_hops(grid, start, goal)
        try:
            path4 = plan_shortest(grid, start_xy, goal_xy, radius=0.0, connectivity=4)
        except NoPath:
            assert want_hops is None
        else:
            assert len(path4.cells) - 1 == want_hops
            assert path4.cost == float(want_hops)

    elapsed = time.monotonic() - started
    assert reachable >= 50
    assert elapsed < 5.0
    print(f"PASS shortest paths exact on 200 grids in {elapsed:.2f}s")


# --- operator mode-switch model -----------------------------------------------


def test_mode_switch_distributions_are_exact():
    """For every adaptability level in {0, 0.1, ..., 1} and every mode pair,
    the switch distribution puts alpha on the robot's mode, the rest on the
    operator's, and sums to 1 within 1e-12."""
    sets = [
        ratio_set(1.5),
        fixture_modes(),
    ]
    for modes in sets:
        for i in range(11):
            alpha = i / 10
            for m_h in modes.ids():
                for m_r in modes.ids():
                    probs = bam_transition(alpha, m_h, m_r, modes)
                    assert abs(sum(probs.values()) - 1.0) <= 1e-12
                    for mode_id, p in probs.items():
                        want = 0.0
                        if mode_id == m_r:
                            want += alpha
                        if mode_id == m_h:
                            want += 1.0 - alpha
                        assert p == pytest.approx(want, abs=1e-12)
    print("PASS mode-switch distributions exact over full sweep")


def test_posterior_chains_match_hand_computation():
    """Uniform prior: seeing the operator adopt the robot's mode yields
    (0, .1, .2, .3, .4); seeing them stay on their own yields the reverse.
    Tolerance 1e-9."""
    belief = AdaptationBelief.uniform(current_m_h=1)
    adopted = update_belief(belief, observed=0, m_h_prev=1, m_r_prev=0)
    for got, want in zip(adopted.alpha_probs, (0.0, 0.1, 0.2, 0.3, 0.4)):
        assert got == pytest.approx(want, abs=1e-9)
    stayed = update_belief(belief, observed=1, m_h_prev=1, m_r_prev=0)
    for got, want in zip(stayed.alpha_probs, (0.4, 0.3, 0.2, 0.1, 0.0)):
        assert got == pytest.approx(want, abs=1e-9)
    print("PASS posterior chains match hand computation")


def test_mode_planner_matches_exhaustive_enumeration():
    """Two-route sets, horizons 1..4, all point-mass beliefs plus uniform:
    the planner's choice equals brute-force expectimax enumeration."""
    config = RewardConfig()
    sets = [ratio_set(1.2071), ratio_set(SQRT2), ratio_set(2.5), fixture_modes()]
    checked = 0
    for modes in sets:
        beliefs = [AdaptationBelief.uniform] + [
            lambda m_h, a=alpha: AdaptationBelief.point_mass(a, m_h)
            for alpha in ALPHA_SUPPORT
        ]
        for horizon in (1, 2, 3, 4):
            for make in beliefs:
                for m_h in modes.ids():
                    belief = (
                        AdaptationBelief.uniform(current_m_h=m_h)
                        if make is AdaptationBelief.uniform
                        else make(m_h)
                    )
                    assert plan_mode(belief, modes, horizon, config) == oracle_plan(
                        belief, modes, horizon, config
                    )
                    checked += 1
    assert checked == 4 * 4 * 6 * 2
    print(f"PASS planner equals enumeration on {checked} cases")


# --- closed-loop comply / insist ------------------------------------------


def test_comply_and_insist_end_to_end():
    """A known-stubborn operator pulls the robot onto their corridor in at
    least 8 of 10 episodes; a known-adaptable one lets it keep the shorter
    corridor in at least 9 of 10. Both runs finish under 30 s."""
    modes = fixture_modes()
    left = modes.by_label("left").id
    right = modes.by_label("right").id
    config = RewardConfig()
    assert plan_mode(AdaptationBelief.point_mass(0.0, left), modes, 3, config) == left
    assert plan_mode(AdaptationBelief.point_mass(1.0, left), modes, 3, config) == right

    started = time.monotonic()
    stubborn = run_headless(
        fixture_config(prior=AdaptationBelief.point_mass(0.0)),
        alpha_true=0.0,
        episodes=10,
        out=io.StringIO(),
    )
    adaptable = run_headless(
        fixture_config(prior=AdaptationBelief.point_mass(1.0)),
        alpha_true=1.0,
        episodes=10,
        out=io.StringIO(),
    )
    elapsed = time.monotonic() - started
    assert stubborn["compliance_rate"] >= 0.8
    assert adaptable["optimal_rate"] >= 0.9
    assert elapsed < 30.0
    print(
        f"PASS comply {stubborn['compliance_rate']:.0%}, "
        f"insist {adaptable['optimal_rate']:.0%} in {elapsed:.1f}s"
    )


def test_belief_converges_within_two_mode_observations():
    """Facing a fully adaptable operator, posterior mass on the two highest
    adaptability levels reaches 0.8 from the uniform prior within two
    informative mode observations."""
    aggregate = run_headless(
        fixture_config(prior=AdaptationBelief.uniform()),
        alpha_true=1.0,
        episodes=2,
        out=io.StringIO(),
    )
    assert aggregate["informative_updates"] <= 2
    probs = aggregate["alpha_probs"]
    assert probs[3] + probs[4] >= 0.8
    print(
        f"PASS mass {probs[3] + probs[4]:.3f} on adaptable levels "
        f"after {aggregate['informative_updates']} observations"
    )


# --- arbitration contract under fuzz ----------------------------------------


def test_arbitration_contract_under_fuzz():
    """100k random event sequences against a flat reference model: totality,
    goal preservation, one command source per tick, override entry within the
    same event, republish after exactly the configured quiet window."""
    modes = fixture_modes()
    epsilon, release = 0.05, 4
    rng = random.Random(7)
    poses = [Pose2D(float(i), float(-i), 0.1 * i) for i in range(8)]
    overrides = republishes = 0

    for _ in range(100_000):
        state = Idle()
        # flat reference model: (kind, goal, quiet)
        kind, goal, quiet = "idle", None, 0
        for _ in range(12):
            roll = rng.random()
            if roll < 0.55:
                pull = 0.0 if rng.random() < 0.6 else rng.random()
                event = Tick(pull=pull)
            elif roll < 0.75:
                event = JoystickMsg(JoystickInput(rng.random(), rng.uniform(-3, 3)))
            elif roll < 0.85:
                event = GoalClick(rng.choice(poses))
            elif roll < 0.92:
                event = CancelGoal()
            else:
                event = PlanReady(modes, rng.choice(modes.ids()))

            prev_kind = kind
            state, directive = arbitrate(state, event, epsilon, release)

            if isinstance(event, GoalClick):
                kind, goal, quiet = "auto", event.pose, 0
                want = PlanRequest(event.pose)
            elif isinstance(event, CancelGoal):
                kind, goal, quiet = "idle", None, 0
                want = Zero()
            elif isinstance(event, JoystickMsg):
                strong = event.stick.pull > epsilon
                if kind in ("idle", "teleop"):
                    kind, want = "teleop", ApplyJoystick()
                elif kind == "auto":
                    if strong:
                        kind, quiet, want = "override", 0, ApplyJoystick()
                    else:
                        want = None
                else:
                    if strong:
                        quiet, want = 0, ApplyJoystick()
                    else:
                        want = None
            elif isinstance(event, PlanReady):
                want = None
            else:
                if kind == "idle":
                    want = Zero()
                elif kind == "teleop":
                    want = ApplyJoystick()
                elif kind == "auto":
                    want = FollowPlan()
                elif event.pull > epsilon:
                    quiet, want = 0, ApplyJoystick()
                else:
                    quiet += 1
                    if quiet >= release:
                        kind, quiet, want = "auto", 0, Republish(goal)
                    else:
                        want = Zero()

            assert directive == want
            expected_type = {
                "idle": Idle,
                "teleop": Teleop,
                "auto": Autonomous,
                "override": Override,
            }[kind]
            assert type(state) is expected_type
            if kind == "auto":
                assert state.goal == goal
            elif kind == "override":
                assert state.saved_goal == goal
                assert state.quiet_ticks == quiet
            if isinstance(event, Tick):
                assert directive is not None  # exactly one command per tick
            if kind == "override" and prev_kind == "auto":
                overrides += 1
            if isinstance(directive, Republish):
                republishes += 1
                assert directive.goal == goal

    assert overrides > 1_000
    assert republishes > 500
    print(f"PASS fuzz: {overrides} overrides, {republishes} republishes")


# --- wire protocol -----------------------------------------------------------


def random_envelope(rng):
    def num():
        return round(rng.uniform(-10, 10), 6)

    topic_payloads = {
        "/cmd_vel": lambda: {
            "v": num(),
            "omega": num(),
            **({"pull": rng.random(), "bearing": num()} if rng.random() < 0.5 else {}),
        },
        "/goal": lambda: {"x": num(), "y": num(), "theta": num()},
        "/cancel_goal": dict,
        "/set_speed": lambda: {
            "target": rng.choice(["linear", "angular"]),
            "direction": rng.choice(["up", "down"]),
        },
        "/map": lambda: (
            lambda w, h: {
                "width": w,
                "height": h,
                "resolution": rng.choice([0.25, 0.5, 1.0]),
                "cells": "".join(rng.choice("01") for _ in range(w * h)),
            }
        )(rng.randint(1, 6), rng.randint(1, 6)),
        "/robot_pose": lambda: {
            "x": num(),
            "y": num(),
            "theta": num(),
            "tick": rng.randint(0, 10_000),
            "collided": rng.random() < 0.5,
        },
        "/plan": lambda: (
            lambda ids: {
                "modes": [
                    {
                        "id": i,
                        "label": rng.choice(["left", "right", "center"]),
                        "cost": abs(num()),
                        "waypoints": [
                            [num(), num()] for _ in range(rng.randint(1, 4))
                        ],
                    }
                    for i in ids
                ],
                "chosen_id": rng.choice([None] + ids),
            }
        )(list(range(rng.randint(1, 3)))),
        "/mode_state": lambda: (
            lambda raw: {
                "alpha_probs": [x / sum(raw) for x in raw],
                "m_h": rng.choice([None, 0, 1]),
                "m_r": rng.choice([None, 0, 1]),
                "state": rng.choice(["idle", "teleop", "autonomous", "override"]),
                "limits": {"v_max": abs(num()) + 0.1, "omega_max": abs(num()) + 0.1},
            }
        )([rng.random() + 0.01 for _ in range(5)]),
        "/chat": lambda: {"seq": rng.randint(0, 99), "note": "x" * rng.randint(0, 9)},
    }

    op = rng.choice(["publish", "publish", "publish", "subscribe", "unsubscribe", "advertise"])
    topic = rng.choice(list(topic_payloads))
    msg = topic_payloads[topic]() if op == "publish" else None
    msg_id = f"m{rng.randint(0, 999)}" if rng.random() < 0.3 else None
    return BridgeMessage(op=op, topic=topic, msg=msg, id=msg_id)


def test_wire_protocol_roundtrip_fifo_and_log():
    """10k random envelopes survive encode/decode unchanged; a scripted
    3-client session delivers in FIFO order and logs every handled message."""
    rng = random.Random(99)
    for _ in range(10_000):
        message = random_envelope(rng)
        assert decode_message(encode_message(message)) == message

    sent = 10
    config = fixture_config(dt=5.0, log_path=None)
    app = build_app(config)
    log = app.state.bridge.log
    with TestClient(app) as client:
        with client.websocket_connect("/ws") as a, client.websocket_connect(
            "/ws"
        ) as b, client.websocket_connect("/ws") as c:
            for ws in (a, b, c):
                ws.send_text(json.dumps({"op": "subscribe", "topic": "/fuzz"}))
            for i in range(sent):
                a.send_text(
                    json.dumps({"op": "publish", "topic": "/fuzz", "msg": {"seq": i}})
                )
            for ws in (a, b, c):
                seqs = [
                    json.loads(ws.receive_text())["msg"]["seq"] for _ in range(sent)
                ]
                assert seqs == list(range(sent))
    handled = 3 + sent + 3 * sent  # subscribes + publishes in, deliveries out
    assert log.records_written == handled
    print(f"PASS protocol roundtrip 10k, FIFO x3 clients, {handled} log records")


# --- speed adjustment ---------------------------------------------------------


@settings(max_examples=200)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["linear", "angular"]), st.sampled_from(["up", "down"])
        ),
        max_size=60,
    )
)
def test_speed_adjustment_properties(ops):
    """Every click scales one limit by exactly 1.1 or 0.9, clamped to
    [0.01, 5.0], and never touches the other limit."""
    limits = SpeedLimits(0.5, 1.0)
    v, w = 0.5, 1.0
    for target, direction in ops:
        factor = 1.1 if direction == "up" else 0.9
        if target == "linear":
            v = max(0.01, min(5.0, v * factor))
        else:
            w = max(0.01, min(5.0, w * factor))
        limits = adjust_speed(limits, target, direction)
        assert limits.v_max == v
        assert limits.omega_max == w
        assert 0.01 <= limits.v_max <= 5.0
        assert 0.01 <= limits.omega_max <= 5.0

    only_linear = [op for op in ops if op[0] == "linear"]
    replay = SpeedLimits(0.5, 1.0)
    for target, direction in only_linear:
        replay = adjust_speed(replay, target, direction)
    assert replay.v_max == limits.v_max
