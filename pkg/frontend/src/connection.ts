/**
 * Websocket session management: subscribe on open, keep the latest message
 * per topic, and reconnect with exponential backoff when the link drops.
 *
 * The server re-sends latched topics on subscribe and publishes pose and
 * mode state periodically, so a fresh subscription rebuilds the whole UI
 * state without any client-side caching across connections.
 */

import { Envelope, SUBSCRIBED_TOPICS, decodeEnvelope, encodeEnvelope } from "./protocol.js";

export const BACKOFF_INITIAL_MS = 500;
export const BACKOFF_CAP_MS = 8000;

export type ConnectionState = "disconnected" | "connecting" | "connected";

/** The slice of the WebSocket API the connection actually uses. */
export interface SocketLike {
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface TopicSnapshot {
  msg: unknown;
  receivedAtMs: number;
}

export type ConnectionListener = () => void;

interface Timer {
  setTimeout(fn: () => void, ms: number): unknown;
  clearTimeout(handle: unknown): void;
}

const realTimer: Timer = {
  setTimeout: (fn, ms) => setTimeout(fn, ms),
  clearTimeout: (handle) => clearTimeout(handle as Parameters<typeof clearTimeout>[0]),
};

export class Connection {
  private socket: SocketLike | null = null;
  private stateValue: ConnectionState = "disconnected";
  private backoffMs = BACKOFF_INITIAL_MS;
  private reconnectHandle: unknown = null;
  private readonly latest = new Map<string, TopicSnapshot>();
  private readonly listeners: ConnectionListener[] = [];
  private nextId = 1;
  private stopped = false;

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory = (u) =>
      new WebSocket(u) as unknown as SocketLike,
    private readonly now: () => number = () => Date.now(),
    private readonly timer: Timer = realTimer,
  ) {}

  get state(): ConnectionState {
    return this.stateValue;
  }

  /** Latest message seen on a topic this connection or a previous one. */
  snapshot(topic: string): TopicSnapshot | undefined {
    return this.latest.get(topic);
  }

  onChange(listener: ConnectionListener): void {
    this.listeners.push(listener);
  }

  start(): void {
    this.stopped = false;
    this.open();
  }

  stop(): void {
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
  publish(topic: string, msg: Record<string, unknown>): string | null {
    if (this.stateValue !== "connected" || this.socket === null) return null;
    const id = `c${this.nextId++}`;
    const envelope: Envelope = { op: "publish", topic, msg, id };
    this.socket.send(encodeEnvelope(envelope));
    return id;
  }

  private open(): void {
    this.setState("connecting");
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onopen = () => {
      if (this.socket !== sock) return;
      this.backoffMs = BACKOFF_INITIAL_MS;
      for (const topic of SUBSCRIBED_TOPICS) {
        sock.send(encodeEnvelope({ op: "subscribe", topic }));
      }
      this.setState("connected");
    };
    sock.onmessage = (event) => {
      if (this.socket !== sock) return;
      if (typeof event.data !== "string") return;
      const envelope = decodeEnvelope(event.data);
      if (envelope === null || envelope.op !== "publish") return;
      this.latest.set(envelope.topic, { msg: envelope.msg, receivedAtMs: this.now() });
      this.notify();
    };
    sock.onerror = () => {
      // the close handler owns reconnect scheduling
    };
    sock.onclose = () => {
      if (this.socket !== sock) return;
      this.socket = null;
      this.setState("disconnected");
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.reconnectHandle !== null) return;
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_CAP_MS);
    this.reconnectHandle = this.timer.setTimeout(() => {
      this.reconnectHandle = null;
      if (!this.stopped) this.open();
    }, delay);
  }

  private setState(state: ConnectionState): void {
    if (this.stateValue === state) return;
    this.stateValue = state;
    this.notify();
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }
}
