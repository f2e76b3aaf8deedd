/**
 * Wire protocol types and envelope helpers.
 *
 * Mirrors the server's JSON schema: envelopes carry an op (advertise,
 * subscribe, unsubscribe, publish), a /topic, and for publishes a payload.
 * The UI publishes only on the four inbound control topics and renders only
 * what arrives on the outbound ones; nothing here simulates the robot.
 */

export const INBOUND_TOPICS = ["/cmd_vel", "/goal", "/cancel_goal", "/set_speed"] as const;

// Everything the console renders, including server-side fault notices.
export const SUBSCRIBED_TOPICS = ["/map", "/robot_pose", "/plan", "/mode_state", "/status"] as const;

export type Op = "advertise" | "subscribe" | "unsubscribe" | "publish";

export interface Envelope {
  op: Op;
  topic: string;
  msg?: Record<string, unknown>;
  id?: string;
}

export interface MapMsg {
  width: number;
  height: number;
  resolution: number;
  cells: string;
}

export interface PoseMsg {
  x: number;
  y: number;
  theta: number;
  tick: number;
  collided: boolean;
}

export interface PlanMode {
  id: number;
  label: string;
  cost: number;
  waypoints: [number, number][];
}

export interface PlanMsg {
  modes: PlanMode[];
  chosen_id: number | null;
}

export interface SpeedLimitsMsg {
  v_max: number;
  omega_max: number;
}

export interface ModeStateMsg {
  alpha_probs: [number, number, number, number, number];
  m_h: number | null;
  m_r: number | null;
  state: string;
  limits: SpeedLimitsMsg;
}

export interface StatusMsg {
  error: string;
  kind: string;
}

export interface CmdVelMsg {
  v: number;
  omega: number;
  pull: number;
  bearing: number;
}

export interface GoalMsg {
  x: number;
  y: number;
  theta: number;
}

export interface SetSpeedMsg {
  target: "linear" | "angular";
  direction: "up" | "down";
}

export function encodeEnvelope(envelope: Envelope): string {
  return JSON.stringify(envelope);
}

/** Parse one wire frame; null for anything that is not a valid envelope. */
export function decodeEnvelope(text: string): Envelope | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) return null;
  const candidate = raw as Record<string, unknown>;
  const { op, topic } = candidate;
  if (op !== "advertise" && op !== "subscribe" && op !== "unsubscribe" && op !== "publish") {
    return null;
  }
  if (typeof topic !== "string" || !topic.startsWith("/")) return null;
  const envelope: Envelope = { op, topic };
  if (candidate.msg !== undefined) {
    if (typeof candidate.msg !== "object" || candidate.msg === null) return null;
    envelope.msg = candidate.msg as Record<string, unknown>;
  }
  if (candidate.id !== undefined) {
    if (typeof candidate.id !== "string") return null;
    envelope.id = candidate.id;
  }
  return envelope;
}

export function isMapMsg(msg: Record<string, unknown>): msg is Record<string, unknown> & MapMsg {
  return (
    typeof msg.width === "number" &&
    typeof msg.height === "number" &&
    typeof msg.resolution === "number" &&
    typeof msg.cells === "string" &&
    msg.cells.length === msg.width * msg.height
  );
}

export function isPoseMsg(msg: Record<string, unknown>): msg is Record<string, unknown> & PoseMsg {
  return (
    typeof msg.x === "number" &&
    typeof msg.y === "number" &&
    typeof msg.theta === "number" &&
    typeof msg.tick === "number" &&
    typeof msg.collided === "boolean"
  );
}

export function isPlanMsg(msg: Record<string, unknown>): msg is Record<string, unknown> & PlanMsg {
  return Array.isArray(msg.modes) && (msg.chosen_id === null || typeof msg.chosen_id === "number");
}

export function isModeStateMsg(
  msg: Record<string, unknown>,
): msg is Record<string, unknown> & ModeStateMsg {
  return (
    Array.isArray(msg.alpha_probs) &&
    msg.alpha_probs.length === 5 &&
    typeof msg.state === "string" &&
    typeof msg.limits === "object" &&
    msg.limits !== null
  );
}
