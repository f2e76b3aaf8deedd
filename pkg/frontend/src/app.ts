/**
 * Console assembly: wires the connection's topic snapshots into the map
 * view, joystick, speed buttons, and status panel.
 *
 * The app keeps no robot state of its own.  Its only client-side memory is
 * the last goal it published, shown in the panel until it is cancelled.
 */

import { Connection } from "./connection.js";
import { JoystickPublisher, JoystickWidget } from "./joystick.js";
import { MapView } from "./mapview.js";
import {
  GoalMsg,
  MapMsg,
  ModeStateMsg,
  PlanMsg,
  PoseMsg,
  StatusMsg,
  isMapMsg,
  isModeStateMsg,
  isPlanMsg,
  isPoseMsg,
} from "./protocol.js";
import { SpeedButtons, StatusPanel, statusView } from "./status.js";

export class App {
  private readonly mapView: MapView;
  private readonly joystick: JoystickWidget;
  private readonly speedButtons: SpeedButtons;
  private readonly statusPanel: StatusPanel;
  private readonly joystickPublisher: JoystickPublisher;
  private lastGoal: GoalMsg | null = null;
  private lastMapText: string | null = null;

  constructor(
    root: HTMLElement,
    private readonly connection: Connection,
  ) {
    this.joystickPublisher = new JoystickPublisher((msg) =>
      connection.publish("/cmd_vel", { ...msg }),
    );
    this.joystick = new JoystickWidget(this.joystickPublisher);
    this.mapView = new MapView((goal) => {
      const id = connection.publish("/goal", { ...goal });
      if (id !== null) this.lastGoal = goal;
    });
    this.speedButtons = new SpeedButtons((msg) => connection.publish("/set_speed", { ...msg }));
    this.statusPanel = new StatusPanel();

    const cancel = document.createElement("button");
    cancel.textContent = "cancel goal";
    cancel.className = "cancel-goal";
    cancel.addEventListener("click", () => {
      const id = connection.publish("/cancel_goal", {});
      if (id !== null) this.lastGoal = null;
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

    const frame = (nowMs: number) => {
      this.render(nowMs);
      requestAnimationFrame(frame);
    };
    requestAnimationFrame(frame);
  }

  private topic<T>(topic: string, guard: (msg: Record<string, unknown>) => msg is Record<string, unknown> & T): T | null {
    const snap = this.connection.snapshot(topic);
    if (snap === undefined) return null;
    const msg = snap.msg;
    if (typeof msg !== "object" || msg === null) return null;
    const record = msg as Record<string, unknown>;
    return guard(record) ? record : null;
  }

  private onUpdate(): void {
    const connected = this.connection.state === "connected";
    this.joystick.setEnabled(connected);
    this.speedButtons.setEnabled(connected);

    const map = this.topic<MapMsg>("/map", isMapMsg);
    // rebuild the transform only when the grid itself changes
    const mapText = map === null ? null : JSON.stringify(map);
    if (mapText !== this.lastMapText) {
      this.lastMapText = mapText;
      this.mapView.setMap(map);
    }

    const limits = this.topic<ModeStateMsg>("/mode_state", isModeStateMsg)?.limits;
    if (limits !== undefined) this.joystickPublisher.setLimits(limits);
  }

  private render(nowMs: number): void {
    const pose = this.topic<PoseMsg>("/robot_pose", isPoseMsg);
    const plan = this.topic<PlanMsg>("/plan", isPlanMsg);
    const modeState = this.topic<ModeStateMsg>("/mode_state", isModeStateMsg);
    const statusSnap = this.connection.snapshot("/status");

    this.mapView.render(
      {
        map: this.topic<MapMsg>("/map", isMapMsg),
        pose,
        plan,
        draft: this.mapView.controller.goalDraft,
        goal: this.lastGoal,
      },
      nowMs,
    );

    this.statusPanel.render(
      statusView({
        connection: this.connection.state,
        modeState,
        modeStateAtMs: this.connection.snapshot("/mode_state")?.receivedAtMs ?? null,
        plan,
        goal: this.lastGoal,
        status: (statusSnap?.msg as StatusMsg | undefined) ?? null,
        nowMs: Date.now(),
      }),
    );
  }
}
