import math

import pytest

from sharednav.adaptation import AdaptationBelief
from sharednav.control import Autonomous, Idle, JoystickInput, Override, joystick_to_twist
from sharednav.loop import INFER_EVERY, ControlLoop, ServerConfig
from sharednav.scenario import bundled_scenario_path, load_scenario_file
from sharednav.sim import Twist2D


def make_config(**overrides):
    scenario = load_scenario_file(bundled_scenario_path())
    return ServerConfig(scenario=scenario, **overrides)


def goal_payload(config):
    goal = config.scenario.goals[0].pose
    return {"x": goal.x, "y": goal.y, "theta": goal.theta}


def start_autonomy(loop, config):
    loop.submit("/goal", goal_payload(config))
    loop.tick()


class TestConfig:
    def test_validation(self):
        scenario = load_scenario_file(bundled_scenario_path())
        with pytest.raises(ValueError):
            ServerConfig(scenario=scenario, dt=0.0)
        with pytest.raises(ValueError):
            ServerConfig(scenario=scenario, port=0)
        with pytest.raises(ValueError):
            ServerConfig(scenario=scenario, horizon=0)
        with pytest.raises(ValueError):
            ServerConfig(scenario=scenario, k=0)
        with pytest.raises(ValueError):
            ServerConfig(scenario=scenario, n_release=0)


class TestGoalFlow:
    def test_goal_starts_autonomy(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        assert isinstance(loop.arb, Autonomous)
        assert loop.arb.path is not None
        assert loop.plan_error is None
        assert loop.modes is not None and len(loop.modes) == 2

    def test_drives_to_goal(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        for _ in range(600):
            if loop.goal_reached:
                break
            loop.tick()
        assert loop.goal_reached
        assert isinstance(loop.arb, Idle)
        goal = config.scenario.goals[0].pose
        assert loop.world.pose.distance_to(goal) <= 0.2
        assert not loop.world.collided

    def test_unreachable_goal_reports_error(self):
        config = make_config()
        loop = ControlLoop(config)
        loop.submit("/goal", {"x": -5.0, "y": -5.0, "theta": 0.0})
        loop.tick()
        assert loop.plan_error is not None
        assert isinstance(loop.arb, Idle)

    def test_cancel_goal(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        loop.submit("/cancel_goal", {})
        loop.tick()
        assert isinstance(loop.arb, Idle)

    def test_unknown_topic_rejected(self):
        loop = ControlLoop(make_config())
        with pytest.raises(KeyError):
            loop.submit("/chat", {})


class TestDeterminism:
    def run_script(self):
        config = make_config()
        loop = ControlLoop(config)
        trace = []
        for t in range(200):
            if t == 0:
                loop.submit("/goal", goal_payload(config))
            if t == 30:
                loop.submit("/cmd_vel", {"v": 0.0, "omega": 0.0, "pull": 1.0, "bearing": 0.4})
            if t == 55:
                loop.submit("/cmd_vel", {"v": 0.0, "omega": 0.0, "pull": 0.0, "bearing": 0.0})
            loop.tick()
            trace.append((loop.world.pose, type(loop.arb).__name__))
        return trace, loop

    def test_identical_runs(self):
        trace_a, loop_a = self.run_script()
        trace_b, loop_b = self.run_script()
        assert trace_a == trace_b
        assert loop_a.belief == loop_b.belief
        assert loop_a.mode_state_payload() == loop_b.mode_state_payload()


class TestOverride:
    def test_joystick_takes_over_within_one_tick(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        for _ in range(3):
            loop.tick()
        loop.submit("/cmd_vel", {"v": 0.0, "omega": 0.0, "pull": 1.0, "bearing": 0.7})
        command = loop.tick()
        assert isinstance(loop.arb, Override)
        expected = joystick_to_twist(JoystickInput(1.0, 0.7), loop.limits)
        assert command == expected

    def test_weak_pull_does_not_interrupt(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        loop.submit("/cmd_vel", {"v": 0.0, "omega": 0.0, "pull": 0.03, "bearing": 0.7})
        loop.tick()
        assert isinstance(loop.arb, Autonomous)
        # sub-threshold stick input never counts as human driving
        assert loop.history.samples()[-1].pull == 0.0

    def test_release_republishes_after_exact_quiet_window(self):
        config = make_config(n_release=5)
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        loop.submit("/cmd_vel", {"v": 0.0, "omega": 0.0, "pull": 1.0, "bearing": 0.7})
        loop.tick()
        assert isinstance(loop.arb, Override)
        saved = loop.arb.saved_goal

        loop.submit("/cmd_vel", {"v": 0.0, "omega": 0.0, "pull": 0.0, "bearing": 0.0})
        quiet_ticks = 0
        while loop.republish_count == 0:
            command = loop.tick()
            quiet_ticks += 1
            if loop.republish_count == 0 and quiet_ticks < 5:
                assert isinstance(loop.arb, Override)
                assert command == Twist2D()
            assert quiet_ticks <= 20
        assert quiet_ticks == 5
        assert isinstance(loop.arb, Autonomous)
        assert loop.arb.goal == saved

    def test_override_records_active_pull(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        loop.submit("/cmd_vel", {"v": 0.0, "omega": 0.0, "pull": 0.9, "bearing": 0.0})
        loop.tick()
        assert loop.history.samples()[-1].pull == 0.9

    def test_plain_twist_maps_to_stick(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        loop.submit("/cmd_vel", {"v": 0.25, "omega": 0.0})
        loop.tick()
        assert isinstance(loop.arb, Override)
        assert loop.held.pull == pytest.approx(0.5)


class TestSpeedRequests:
    def test_applied_on_next_tick(self):
        loop = ControlLoop(make_config())
        loop.submit("/set_speed", {"target": "linear", "direction": "up"})
        loop.tick()
        assert loop.limits.v_max == pytest.approx(0.5 * 1.1)
        assert loop.limits.omega_max == pytest.approx(1.0)

    def test_angular_down(self):
        loop = ControlLoop(make_config())
        loop.submit("/set_speed", {"target": "angular", "direction": "down"})
        loop.tick()
        assert loop.limits.omega_max == pytest.approx(0.9)


class TestPublishing:
    def test_pose_and_mode_state_cadence(self):
        config = make_config()  # dt=0.05: pose every 2 ticks, mode state every 10
        loop = ControlLoop(config)
        for _ in range(10):
            loop.tick()
        topics = [topic for topic, _ in loop.take_outbox()]
        assert topics.count("/robot_pose") == 5
        assert topics.count("/mode_state") == 1

    def test_plan_published_once_per_commitment(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        plans = [p for t, p in loop.take_outbox() if t == "/plan"]
        assert len(plans) == 1
        assert plans[0] == loop.last_plan_payload
        assert {m["label"] for m in plans[0]["modes"]} == {"left", "right"}
        assert plans[0]["chosen_id"] == loop.m_r
        for _ in range(4):
            loop.tick()
        assert not any(t == "/plan" for t, _ in loop.take_outbox())

    def test_stamp_tracks_sim_time(self):
        loop = ControlLoop(make_config())
        for _ in range(10):
            loop.tick()
        assert loop.stamp_ms == 500

    def test_map_payload_matches_grid(self):
        config = make_config()
        loop = ControlLoop(config)
        payload = loop.map_payload()
        assert payload["width"] == 11
        assert payload["height"] == 9
        assert payload["resolution"] == 0.5
        assert len(payload["cells"]) == 99
        assert set(payload["cells"]) == {"0", "1"}

    def test_mode_state_names_arbitration(self):
        config = make_config()
        loop = ControlLoop(config)
        assert loop.mode_state_payload()["state"] == "idle"
        start_autonomy(loop, config)
        assert loop.mode_state_payload()["state"] == "autonomous"
        probs = loop.mode_state_payload()["alpha_probs"]
        assert sum(probs) == pytest.approx(1.0)


class TestModeTracking:
    def test_conservative_operator_init(self):
        config = make_config()
        loop = ControlLoop(config)
        assert loop.belief.current_m_h is None
        start_autonomy(loop, config)
        assert loop.m_r == loop.modes.optimal_id
        others = [i for i in loop.modes.ids() if i != loop.m_r]
        assert loop.belief.current_m_h == min(others)
        assert loop.committed_label == loop.modes.by_id(loop.m_r).label

    def test_operator_mode_survives_replan_by_label(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        label_before = loop.modes.by_id(loop.belief.current_m_h).label
        for _ in range(40):
            loop.tick()
        loop.submit("/goal", goal_payload(config))
        loop.tick()
        assert loop.modes.by_id(loop.belief.current_m_h).label == label_before

    def test_inference_cadence(self):
        config = make_config()
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        before = len(loop.observations)
        for _ in range(INFER_EVERY * 4):
            loop.tick()
        # pure autonomy leaves no active operator samples to infer from
        assert len(loop.observations) == before


class TestEpisodeReset:
    def test_keeps_learning_resets_world(self):
        config = make_config(prior=AdaptationBelief.uniform())
        loop = ControlLoop(config)
        start_autonomy(loop, config)
        for _ in range(600):
            if loop.goal_reached:
                break
            loop.tick()
        assert loop.goal_reached
        belief = loop.belief
        modes = loop.modes
        ticks = loop.total_ticks

        loop.reset_for_episode()
        assert loop.world.tick == 0
        assert not loop.goal_reached
        assert isinstance(loop.arb, Idle)
        assert len(loop.history) == 0
        assert loop.committed_label is None
        assert loop.belief == belief
        assert loop.modes is modes
        assert loop.total_ticks == ticks
