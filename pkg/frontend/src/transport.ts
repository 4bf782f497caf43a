/**
 * Message transports: live WebSocket to the gateway, or recorded-fixture
 * playback for offline demos and tests. Both deliver validated messages.
 */

import { decode, encode, hello, type Message, type Role } from "./protocol.js";

export interface Transport {
  send(msg: Message): void;
  close(): void;
}

export interface TransportEvents {
  onMessage(msg: Message): void;
  onClose(): void;
}

export class WsTransport implements Transport {
  private ws: WebSocket;

  constructor(url: string, role: Role, private events: TransportEvents) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => {
      this.ws.send(encode(hello(role)));
    };
    this.ws.onmessage = (ev) => {
      try {
        this.events.onMessage(decode(String(ev.data)));
      } catch {
        // Invalid frames are dropped; the server also replies with errors.
      }
    };
    this.ws.onclose = () => this.events.onClose();
  }

  send(msg: Message): void {
    this.ws.send(encode(msg));
  }

  close(): void {
    this.ws.close();
  }
}

/**
 * Replays a recorded telemetry fixture (one JSON message per line) on the
 * frame cadence. send() is a no-op sink that records outgoing commands.
 */
export class FixtureTransport implements Transport {
  sent: Message[] = [];
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    fixtureLines: string[],
    private events: TransportEvents,
    intervalMs = 100,
    role: Role = "control",
  ) {
    const frames = fixtureLines
      .map((line) => line.trim())
      .filter((line) => line.length > 0)
      .map((line) => decode(line));
    this.events.onMessage(hello(role, "fixture-gateway"));
    let idx = 0;
    this.timer = setInterval(() => {
      if (idx >= frames.length) {
        this.close();
        return;
      }
      this.events.onMessage(frames[idx]);
      idx += 1;
    }, intervalMs);
  }

  /** Deliver every remaining frame synchronously (test helper). */
  drain(frames: Message[]): void {
    for (const frame of frames) this.events.onMessage(frame);
  }

  send(msg: Message): void {
    this.sent.push(msg);
  }

  close(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
      this.events.onClose();
    }
  }
}
