/**
 * Console assembly: wires the connection's topic snapshots into the map
 * view, joystick, speed buttons, and status panel.
 *
 * The app keeps no robot state of its own.  Its only client-side memory is
 * the last goal it published, shown in the panel until it is cancelled.
 */
import { JoystickPublisher, JoystickWidget } from "./joystick.js";
import { MapView } from "./mapview.js";
import { isMapMsg, isModeStateMsg, isPlanMsg, isPoseMsg, } from "./protocol.js";
import { SpeedButtons, StatusPanel, statusView } from "./status.js";
export class App {
    constructor(root, connection) {
        this.connection = connection;
        this.lastGoal = null;
        this.lastMapText = null;
        this.joystickPublisher = new JoystickPublisher((msg) => connection.publish("/cmd_vel", { ...msg }));
        this.joystick = new JoystickWidget(this.joystickPublisher);
        this.mapView = new MapView((goal) => {
            const id = connection.publish("/goal", { ...goal });
            if (id !== null)
                this.lastGoal = goal;
        });
        this.speedButtons = new SpeedButtons((msg) => connection.publish("/set_speed", { ...msg }));
        this.statusPanel = new StatusPanel();
        const cancel = document.createElement("button");
        cancel.textContent = "cancel goal";
        cancel.className = "cancel-goal";
        cancel.addEventListener("click", () => {
            const id = connection.publish("/cancel_goal", {});
            if (id !== null)
                this.lastGoal = null;
        });
        const mapPane = document.createElement("div");
        mapPane.className = "map-pane";
        mapPane.appendChild(this.mapView.element);
        const sidePane = document.createElement("div");
        sidePane.className = "side-pane";
        sidePane.appendChild(this.statusPanel.element);
        sidePane.appendChild(this.speedButtons.element);
        sidePane.appendChild(cancel);
        sidePane.appendChild(this.joystick.element);
        root.appendChild(mapPane);
        root.appendChild(sidePane);
        connection.onChange(() => this.onUpdate());
        this.onUpdate();
        const frame = (nowMs) => {
            this.render(nowMs);
            requestAnimationFrame(frame);
        };
        requestAnimationFrame(frame);
    }
    topic(topic, guard) {
        const snap = this.connection.snapshot(topic);
        if (snap === undefined)
            return null;
        const msg = snap.msg;
        if (typeof msg !== "object" || msg === null)
            return null;
        const record = msg;
        return guard(record) ? record : null;
    }
    onUpdate() {
        const connected = this.connection.state === "connected";
        this.joystick.setEnabled(connected);
        this.speedButtons.setEnabled(connected);
        const map = this.topic("/map", isMapMsg);
        // rebuild the transform only when the grid itself changes
        const mapText = map === null ? null : JSON.stringify(map);
        if (mapText !== this.lastMapText) {
            this.lastMapText = mapText;
            this.mapView.setMap(map);
        }
        const limits = this.topic("/mode_state", isModeStateMsg)?.limits;
        if (limits !== undefined)
            this.joystickPublisher.setLimits(limits);
    }
    render(nowMs) {
        const pose = this.topic("/robot_pose", isPoseMsg);
        const plan = this.topic("/plan", isPlanMsg);
        const modeState = this.topic("/mode_state", isModeStateMsg);
        const statusSnap = this.connection.snapshot("/status");
        this.mapView.render({
            map: this.topic("/map", isMapMsg),
            pose,
            plan,
            draft: this.mapView.controller.goalDraft,
            goal: this.lastGoal,
        }, nowMs);
        this.statusPanel.render(statusView({
            connection: this.connection.state,
            modeState,
            modeStateAtMs: this.connection.snapshot("/mode_state")?.receivedAtMs ?? null,
            plan,
            goal: this.lastGoal,
            status: statusSnap?.msg ?? null,
            nowMs: Date.now(),
        }));
    }
}
