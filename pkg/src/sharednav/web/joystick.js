/**
 * Touch joystick: radial pull plus bearing, published as /cmd_vel.
 *
 * The pointer's offset from the pad center maps to pull (fraction of the pad
 * radius, clamped at 1) and bearing (counterclockwise from straight up, so
 * a leftward deflection turns the robot left).  While engaged, publishes are
 * throttled to one per 100 ms; releasing always sends a final zero command.
 */
export const PUBLISH_INTERVAL_MS = 100;
export const DEFAULT_LIMITS = { v_max: 0.5, omega_max: 1.0 };
/** Map a pixel offset from the pad center to pull and bearing. */
export function stickFromOffset(dx, dy, radius) {
    const pull = Math.min(1, Math.hypot(dx, dy) / radius);
    // canvas y grows downward; up is (0, -radius); left deflection is positive
    const bearing = pull === 0 ? 0 : Math.atan2(-dx, -dy);
    return { pull, bearing };
}
/** Velocity command for a stick state under the current speed limits. */
export function cmdVelFromStick(stick, limits) {
    return {
        v: stick.pull * limits.v_max * Math.cos(stick.bearing),
        omega: stick.pull * limits.omega_max * Math.sin(stick.bearing),
        pull: stick.pull,
        bearing: stick.bearing,
    };
}
/**
 * Throttling core of the widget, free of DOM concerns so it can be driven
 * directly by tests and by pointer handlers alike.
 */
export class JoystickPublisher {
    constructor(sink, now = () => Date.now()) {
        this.sink = sink;
        this.now = now;
        this.engaged = false;
        this.lastSentMs = -Infinity;
        this.limits = DEFAULT_LIMITS;
    }
    /** Speed limits are server-authoritative; track the latest /mode_state. */
    setLimits(limits) {
        this.limits = limits;
    }
    get isEngaged() {
        return this.engaged;
    }
    engage(stick) {
        this.engaged = true;
        this.send(stick);
    }
    move(stick) {
        if (!this.engaged)
            return;
        if (this.now() - this.lastSentMs < PUBLISH_INTERVAL_MS)
            return;
        this.send(stick);
    }
    release() {
        if (!this.engaged)
            return;
        this.engaged = false;
        // the stop command must never be throttled away
        this.sink(cmdVelFromStick({ pull: 0, bearing: 0 }, this.limits));
        this.lastSentMs = this.now();
    }
    send(stick) {
        this.sink(cmdVelFromStick(stick, this.limits));
        this.lastSentMs = this.now();
    }
}
/** DOM shell: a round pad with a knob, wired to a JoystickPublisher. */
export class JoystickWidget {
    constructor(publisher) {
        this.publisher = publisher;
        this.pointerId = null;
        this.enabled = false;
        this.element = document.createElement("div");
        this.element.className = "joystick-pad";
        this.knob = document.createElement("div");
        this.knob.className = "joystick-knob";
        this.element.appendChild(this.knob);
        this.element.addEventListener("pointerdown", (e) => this.onDown(e));
        this.element.addEventListener("pointermove", (e) => this.onMove(e));
        this.element.addEventListener("pointerup", (e) => this.onUp(e));
        this.element.addEventListener("pointercancel", (e) => this.onUp(e));
        this.setEnabled(false);
    }
    /** Gray the pad out while the websocket is down. */
    setEnabled(enabled) {
        this.enabled = enabled;
        this.element.classList.toggle("disabled", !enabled);
        if (!enabled && this.pointerId !== null) {
            this.pointerId = null;
            this.publisher.release();
            this.moveKnob(0, 0);
        }
    }
    offset(e) {
        const rect = this.element.getBoundingClientRect();
        return {
            dx: e.clientX - (rect.left + rect.width / 2),
            dy: e.clientY - (rect.top + rect.height / 2),
            radius: rect.width / 2,
        };
    }
    onDown(e) {
        if (!this.enabled || this.pointerId !== null)
            return;
        this.pointerId = e.pointerId;
        this.element.setPointerCapture(e.pointerId);
        const { dx, dy, radius } = this.offset(e);
        this.publisher.engage(stickFromOffset(dx, dy, radius));
        this.moveKnob(dx, dy);
    }
    onMove(e) {
        if (e.pointerId !== this.pointerId)
            return;
        const { dx, dy, radius } = this.offset(e);
        this.publisher.move(stickFromOffset(dx, dy, radius));
        const clamp = Math.min(1, radius / Math.max(1e-9, Math.hypot(dx, dy)));
        this.moveKnob(dx * clamp, dy * clamp);
    }
    onUp(e) {
        if (e.pointerId !== this.pointerId)
            return;
        this.pointerId = null;
        this.publisher.release();
        this.moveKnob(0, 0);
    }
    moveKnob(dx, dy) {
        this.knob.style.transform = `translate(calc(-50% + ${dx}px), calc(-50% + ${dy}px))`;
    }
}
