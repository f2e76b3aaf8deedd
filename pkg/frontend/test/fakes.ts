/**
 * Test doubles: a scriptable websocket and server fixtures matching the
 * payloads the bridge actually emits.
 */

import { Envelope, MapMsg, ModeStateMsg, PlanMsg, PoseMsg } from "../src/protocol.js";
import { SocketLike } from "../src/connection.js";

export class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  onmessage: ((event: { data: unknown }) => void) | null = null;
  readonly sent: string[] = [];
  closed = false;

  constructor(readonly url: string) {}

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.();
  }

  receive(envelope: Envelope): void {
    this.onmessage?.({ data: JSON.stringify(envelope) });
  }

  drop(): void {
    this.onclose?.();
  }

  sentEnvelopes(): Envelope[] {
    return this.sent.map((text) => JSON.parse(text) as Envelope);
  }
}

export class FakeSocketFactory {
  readonly sockets: FakeSocket[] = [];

  readonly create = (url: string): SocketLike => {
    const socket = new FakeSocket(url);
    this.sockets.push(socket);
    return socket;
  };

  get last(): FakeSocket {
    const socket = this.sockets[this.sockets.length - 1];
    if (socket === undefined) throw new Error("no socket created yet");
    return socket;
  }
}

// Two-corridor test map as the server serializes it: 11x9 cells at 0.5 m,
// border walls plus a center divider, row 0 on top.
export const FIXTURE_MAP: MapMsg = {
  width: 11,
  height: 9,
  resolution: 0.5,
  cells:
    "11111111111" +
    "10000000001" +
    "10000000001" +
    "10000000001" +
    "10111111011" +
    "10000000001" +
    "10000000001" +
    "10000000001" +
    "11111111111",
};

export const FIXTURE_POSE: PoseMsg = {
  x: 0.75,
  y: 2.25,
  theta: 0.0,
  tick: 40,
  collided: false,
};

export const FIXTURE_PLAN: PlanMsg = {
  modes: [
    {
      id: 0,
      label: "right",
      cost: 9.657,
      waypoints: [
        [0.75, 2.25],
        [2.25, 0.75],
        [3.75, 0.75],
        [4.75, 2.25],
      ],
    },
    {
      id: 1,
      label: "left",
      cost: 11.657,
      waypoints: [
        [0.75, 2.25],
        [2.25, 3.75],
        [3.75, 3.75],
        [4.75, 2.25],
      ],
    },
  ],
  chosen_id: 0,
};

export const FIXTURE_MODE_STATE: ModeStateMsg = {
  alpha_probs: [0.0, 0.1, 0.2, 0.3, 0.4],
  m_h: 1,
  m_r: 0,
  state: "autonomous",
  limits: { v_max: 0.5, omega_max: 1.0 },
};
