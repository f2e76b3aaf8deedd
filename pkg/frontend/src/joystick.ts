/**
 * Touch joystick: radial pull plus bearing, published as /cmd_vel.
 *
 * The pointer's offset from the pad center maps to pull (fraction of the pad
 * radius, clamped at 1) and bearing (counterclockwise from straight up, so
 * a leftward deflection turns the robot left).  While engaged, publishes are
 * throttled to one per 100 ms; releasing always sends a final zero command.
 */

import { CmdVelMsg, SpeedLimitsMsg } from "./protocol.js";

export const PUBLISH_INTERVAL_MS = 100;

export const DEFAULT_LIMITS: SpeedLimitsMsg = { v_max: 0.5, omega_max: 1.0 };

export interface Stick {
  pull: number;
  bearing: number;
}

/** Map a pixel offset from the pad center to pull and bearing. */
export function stickFromOffset(dx: number, dy: number, radius: number): Stick {
  const pull = Math.min(1, Math.hypot(dx, dy) / radius);
  // canvas y grows downward; up is (0, -radius); left deflection is positive
  const bearing = pull === 0 ? 0 : Math.atan2(-dx, -dy);
  return { pull, bearing };
}

/** Velocity command for a stick state under the current speed limits. */
export function cmdVelFromStick(stick: Stick, limits: SpeedLimitsMsg): CmdVelMsg {
  return {
    v: stick.pull * limits.v_max * Math.cos(stick.bearing),
    omega: stick.pull * limits.omega_max * Math.sin(stick.bearing),
    pull: stick.pull,
    bearing: stick.bearing,
  };
}

export type CmdVelSink = (msg: CmdVelMsg) => void;

/**
 * Throttling core of the widget, free of DOM concerns so it can be driven
 * directly by tests and by pointer handlers alike.
 */
export class JoystickPublisher {
  private engaged = false;
  private lastSentMs = -Infinity;
  private limits: SpeedLimitsMsg = DEFAULT_LIMITS;

  constructor(
    private readonly sink: CmdVelSink,
    private readonly now: () => number = () => Date.now(),
  ) {}

  /** Speed limits are server-authoritative; track the latest /mode_state. */
  setLimits(limits: SpeedLimitsMsg): void {
    this.limits = limits;
  }

  get isEngaged(): boolean {
    return this.engaged;
  }

  engage(stick: Stick): void {
    this.engaged = true;
    this.send(stick);
  }

  move(stick: Stick): void {
    if (!this.engaged) return;
    if (this.now() - this.lastSentMs < PUBLISH_INTERVAL_MS) return;
    this.send(stick);
  }

  release(): void {
    if (!this.engaged) return;
    this.engaged = false;
    // the stop command must never be throttled away
    this.sink(cmdVelFromStick({ pull: 0, bearing: 0 }, this.limits));
    this.lastSentMs = this.now();
  }

  private send(stick: Stick): void {
    this.sink(cmdVelFromStick(stick, this.limits));
    this.lastSentMs = this.now();
  }
}

/** DOM shell: a round pad with a knob, wired to a JoystickPublisher. */
export class JoystickWidget {
  readonly element: HTMLDivElement;
  private readonly knob: HTMLDivElement;
  private pointerId: number | null = null;
  private enabled = false;

  constructor(private readonly publisher: JoystickPublisher) {
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
  setEnabled(enabled: boolean): void {
    this.enabled = enabled;
    this.element.classList.toggle("disabled", !enabled);
    if (!enabled && this.pointerId !== null) {
      this.pointerId = null;
      this.publisher.release();
      this.moveKnob(0, 0);
    }
  }

  private offset(e: PointerEvent): { dx: number; dy: number; radius: number } {
    const rect = this.element.getBoundingClientRect();
    return {
      dx: e.clientX - (rect.left + rect.width / 2),
      dy: e.clientY - (rect.top + rect.height / 2),
      radius: rect.width / 2,
    };
  }

  private onDown(e: PointerEvent): void {
    if (!this.enabled || this.pointerId !== null) return;
    this.pointerId = e.pointerId;
    this.element.setPointerCapture(e.pointerId);
    const { dx, dy, radius } = this.offset(e);
    this.publisher.engage(stickFromOffset(dx, dy, radius));
    this.moveKnob(dx, dy);
  }

  private onMove(e: PointerEvent): void {
    if (e.pointerId !== this.pointerId) return;
    const { dx, dy, radius } = this.offset(e);
    this.publisher.move(stickFromOffset(dx, dy, radius));
    const clamp = Math.min(1, radius / Math.max(1e-9, Math.hypot(dx, dy)));
    this.moveKnob(dx * clamp, dy * clamp);
  }

  private onUp(e: PointerEvent): void {
    if (e.pointerId !== this.pointerId) return;
    this.pointerId = null;
    this.publisher.release();
    this.moveKnob(0, 0);
  }

  private moveKnob(dx: number, dy: number): void {
    this.knob.style.transform = `translate(calc(-50% + ${dx}px), calc(-50% + ${dy}px))`;
  }
}
