/**
 * Websocket session management: subscribe on open, keep the latest message
 * per topic, and reconnect with exponential backoff when the link drops.
 *
 * The server re-sends latched topics on subscribe and publishes pose and
 * mode state periodically, so a fresh subscription rebuilds the whole UI
 * state without any client-side caching across connections.
 */
import { SUBSCRIBED_TOPICS, decodeEnvelope, encodeEnvelope } from "./protocol.js";
export const BACKOFF_INITIAL_MS = 500;
export const BACKOFF_CAP_MS = 8000;
const realTimer = {
    setTimeout: (fn, ms) => setTimeout(fn, ms),
    clearTimeout: (handle) => clearTimeout(handle),
};
export class Connection {
    constructor(url, factory = (u) => new WebSocket(u), now = () => Date.now(), timer = realTimer) {
        this.url = url;
        this.factory = factory;
        this.now = now;
        this.timer = timer;
        this.socket = null;
        this.stateValue = "disconnected";
        this.backoffMs = BACKOFF_INITIAL_MS;
        this.reconnectHandle = null;
        this.latest = new Map();
        this.listeners = [];
        this.nextId = 1;
        this.stopped = false;
    }
    get state() {
        return this.stateValue;
    }
    /** Latest message seen on a topic this connection or a previous one. */
    snapshot(topic) {
        return this.latest.get(topic);
    }
    onChange(listener) {
        this.listeners.push(listener);
    }
    start() {
        this.stopped = false;
        this.open();
    }
    stop() {
        this.stopped = true;
        if (this.reconnectHandle !== null) {
            this.timer.clearTimeout(this.reconnectHandle);
            this.reconnectHandle = null;
        }
        if (this.socket !== null) {
            const sock = this.socket;
            this.socket = null;
            sock.onclose = null;
            sock.close();
        }
        this.setState("disconnected");
    }
    /**
     * Publish on a command topic, returning the envelope id, or null when the
     * link is down (commands are never queued: a stale command is worse than
     * a dropped one).
     */
    publish(topic, msg) {
        if (this.stateValue !== "connected" || this.socket === null)
            return null;
        const id = `c${this.nextId++}`;
        const envelope = { op: "publish", topic, msg, id };
        this.socket.send(encodeEnvelope(envelope));
        return id;
    }
    open() {
        this.setState("connecting");
        const sock = this.factory(this.url);
        this.socket = sock;
        sock.onopen = () => {
            if (this.socket !== sock)
                return;
            this.backoffMs = BACKOFF_INITIAL_MS;
            for (const topic of SUBSCRIBED_TOPICS) {
                sock.send(encodeEnvelope({ op: "subscribe", topic }));
            }
            this.setState("connected");
        };
        sock.onmessage = (event) => {
            if (this.socket !== sock)
                return;
            if (typeof event.data !== "string")
                return;
            const envelope = decodeEnvelope(event.data);
            if (envelope === null || envelope.op !== "publish")
                return;
            this.latest.set(envelope.topic, { msg: envelope.msg, receivedAtMs: this.now() });
            this.notify();
        };
        sock.onerror = () => {
            // the close handler owns reconnect scheduling
        };
        sock.onclose = () => {
            if (this.socket !== sock)
                return;
            this.socket = null;
            this.setState("disconnected");
            this.scheduleReconnect();
        };
    }
    scheduleReconnect() {
        if (this.stopped || this.reconnectHandle !== null)
            return;
        const delay = this.backoffMs;
        this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_CAP_MS);
        this.reconnectHandle = this.timer.setTimeout(() => {
            this.reconnectHandle = null;
            if (!this.stopped)
                this.open();
        }, delay);
    }
    setState(state) {
        if (this.stateValue === state)
            return;
        this.stateValue = state;
        this.notify();
    }
    notify() {
        for (const listener of this.listeners)
            listener();
    }
}
