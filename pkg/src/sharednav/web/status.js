/**
 * Status panel view model and speed controls.
 *
 * Everything displayed is derived from the latest server messages; the
 * panel never invents values.  Speed limits in particular come only from
 * /mode_state, so a /set_speed click shows its effect when the server's
 * next periodic update arrives, not before.
 */
export const STALE_AFTER_MS = 2000;
export const ALPHA_SUPPORT = [0.0, 0.25, 0.5, 0.75, 1.0];
function labelFor(plan, id) {
    if (id === null)
        return "none";
    const mode = plan?.modes.find((m) => m.id === id);
    return mode !== undefined ? `${mode.label} (#${id})` : `#${id}`;
}
/** Fold the latest snapshots into the strings and bars the panel shows. */
export function statusView(inputs) {
    const { connection, modeState, modeStateAtMs, plan, goal, status, nowMs } = inputs;
    const stale = connection !== "connected" ||
        modeStateAtMs === null ||
        nowMs - modeStateAtMs > STALE_AFTER_MS;
    if (modeState === null) {
        return {
            connection,
            badge: "WAITING",
            goalText: "none",
            modeHumanText: "unknown",
            modeRobotText: "unknown",
            alphaBars: ALPHA_SUPPORT.map((alpha) => ({ alpha, prob: 0 })),
            limitsText: "awaiting server",
            stale,
            fault: status === null ? null : `${status.kind}: ${status.error}`,
        };
    }
    return {
        connection,
        badge: modeState.state.toUpperCase(),
        goalText: goal === null ? "none" : `(${goal.x.toFixed(2)}, ${goal.y.toFixed(2)})`,
        modeHumanText: labelFor(plan, modeState.m_h),
        modeRobotText: labelFor(plan, modeState.m_r),
        alphaBars: ALPHA_SUPPORT.map((alpha, i) => ({
            alpha,
            prob: modeState.alpha_probs[i] ?? 0,
        })),
        limitsText: `v ≤ ${modeState.limits.v_max.toFixed(2)} m/s, ω ≤ ${modeState.limits.omega_max.toFixed(2)} rad/s`,
        stale,
        fault: status === null ? null : `${status.kind}: ${status.error}`,
    };
}
/** The four speed adjustment requests, one per button. */
export const SPEED_REQUESTS = [
    { target: "linear", direction: "up" },
    { target: "linear", direction: "down" },
    { target: "angular", direction: "up" },
    { target: "angular", direction: "down" },
];
function requestCaption(msg) {
    const arrow = msg.direction === "up" ? "+" : "−";
    return msg.target === "linear" ? `v ${arrow}` : `ω ${arrow}`;
}
/** Row of buttons that publish /set_speed requests. */
export class SpeedButtons {
    constructor(sink) {
        this.buttons = [];
        this.element = document.createElement("div");
        this.element.className = "speed-buttons";
        for (const request of SPEED_REQUESTS) {
            const button = document.createElement("button");
            button.textContent = requestCaption(request);
            // each click is its own request; the server clamps and answers
            button.addEventListener("click", () => sink({ ...request }));
            this.buttons.push(button);
            this.element.appendChild(button);
        }
    }
    setEnabled(enabled) {
        for (const button of this.buttons)
            button.disabled = !enabled;
    }
}
/** DOM panel rendering a StatusView. */
export class StatusPanel {
    constructor() {
        this.bars = [];
        this.element = document.createElement("div");
        this.element.className = "status-panel";
        this.badge = document.createElement("span");
        this.badge.className = "badge";
        const header = document.createElement("div");
        header.className = "status-header";
        header.appendChild(this.badge);
        this.connectionField = document.createElement("span");
        this.connectionField.className = "connection";
        header.appendChild(this.connectionField);
        this.element.appendChild(header);
        const rows = document.createElement("dl");
        this.goalField = this.addRow(rows, "goal");
        this.humanField = this.addRow(rows, "operator mode");
        this.robotField = this.addRow(rows, "robot mode");
        this.limitsField = this.addRow(rows, "limits");
        this.element.appendChild(rows);
        const histogram = document.createElement("div");
        histogram.className = "alpha-histogram";
        for (const alpha of ALPHA_SUPPORT) {
            const column = document.createElement("div");
            column.className = "alpha-column";
            const bar = document.createElement("div");
            bar.className = "alpha-bar";
            const tick = document.createElement("span");
            tick.textContent = alpha.toFixed(2);
            column.appendChild(bar);
            column.appendChild(tick);
            histogram.appendChild(column);
            this.bars.push(bar);
        }
        this.element.appendChild(histogram);
        this.faultField = document.createElement("div");
        this.faultField.className = "fault";
        this.element.appendChild(this.faultField);
    }
    addRow(rows, caption) {
        const dt = document.createElement("dt");
        dt.textContent = caption;
        const dd = document.createElement("dd");
        const value = document.createElement("span");
        dd.appendChild(value);
        rows.appendChild(dt);
        rows.appendChild(dd);
        return value;
    }
    render(view) {
        this.badge.textContent = view.badge;
        this.badge.classList.toggle("stale", view.stale);
        this.connectionField.textContent = view.connection;
        this.goalField.textContent = view.goalText;
        this.humanField.textContent = view.modeHumanText;
        this.robotField.textContent = view.modeRobotText;
        this.limitsField.textContent = view.limitsText;
        for (let i = 0; i < this.bars.length; i++) {
            const bar = this.bars[i];
            if (bar === undefined)
                continue;
            bar.style.height = `${Math.round((view.alphaBars[i]?.prob ?? 0) * 100)}%`;
        }
        this.faultField.textContent = view.fault ?? "";
        this.faultField.classList.toggle("hidden", view.fault === null);
    }
}
