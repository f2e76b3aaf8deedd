/**
 * Wire protocol types and envelope helpers.
 *
 * Mirrors the server's JSON schema: envelopes carry an op (advertise,
 * subscribe, unsubscribe, publish), a /topic, and for publishes a payload.
 * The UI publishes only on the four inbound control topics and renders only
 * what arrives on the outbound ones; nothing here simulates the robot.
 */
export const INBOUND_TOPICS = ["/cmd_vel", "/goal", "/cancel_goal", "/set_speed"];
// Everything the console renders, including server-side fault notices.
export const SUBSCRIBED_TOPICS = ["/map", "/robot_pose", "/plan", "/mode_state", "/status"];
export function encodeEnvelope(envelope) {
    return JSON.stringify(envelope);
}
/** Parse one wire frame; null for anything that is not a valid envelope. */
export function decodeEnvelope(text) {
    let raw;
    try {
        raw = JSON.parse(text);
    }
    catch {
        return null;
    }
    if (typeof raw !== "object" || raw === null || Array.isArray(raw))
        return null;
    const candidate = raw;
    const { op, topic } = candidate;
    if (op !== "advertise" && op !== "subscribe" && op !== "unsubscribe" && op !== "publish") {
        return null;
    }
    if (typeof topic !== "string" || !topic.startsWith("/"))
        return null;
    const envelope = { op, topic };
    if (candidate.msg !== undefined) {
        if (typeof candidate.msg !== "object" || candidate.msg === null)
            return null;
        envelope.msg = candidate.msg;
    }
    if (candidate.id !== undefined) {
        if (typeof candidate.id !== "string")
            return null;
        envelope.id = candidate.id;
    }
    return envelope;
}
export function isMapMsg(msg) {
    return (typeof msg.width === "number" &&
        typeof msg.height === "number" &&
        typeof msg.resolution === "number" &&
        typeof msg.cells === "string" &&
        msg.cells.length === msg.width * msg.height);
}
export function isPoseMsg(msg) {
    return (typeof msg.x === "number" &&
        typeof msg.y === "number" &&
        typeof msg.theta === "number" &&
        typeof msg.tick === "number" &&
        typeof msg.collided === "boolean");
}
export function isPlanMsg(msg) {
    return Array.isArray(msg.modes) && (msg.chosen_id === null || typeof msg.chosen_id === "number");
}
export function isModeStateMsg(msg) {
    return (Array.isArray(msg.alpha_probs) &&
        msg.alpha_probs.length === 5 &&
        typeof msg.state === "string" &&
        typeof msg.limits === "object" &&
        msg.limits !== null);
}
