/**
 * WebSocket wrapper: turns socket lifecycle and inbound traffic into
 * UiEvents, retries dropped connections, and refuses to send while
 * closed. The constructor is injectable so tests can supply the `ws`
 * package's client (the browser build uses the native one).
 */

import { parseServerMessage } from './protocol.js';
import type { UiEvent } from './state.js';

export interface WsLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  readyState: number;
  send(data: string): void;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;

const OPEN = 1;
const RETRY_MS = 2000;

export class TrainerSocket {
  private ws: WsLike | null = null;
  private closedByUser = false;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private onEvent: (ev: UiEvent) => void,
    private makeWs: WsFactory =
      (u) => new (globalThis as { WebSocket: new (url: string) => WsLike }).WebSocket(u),
  ) {}

  connect(): void {
    this.closedByUser = false;
    this.open();
  }

  private open(): void {
    this.onEvent({ kind: 'connecting' });
    const ws = this.makeWs(this.url);
    this.ws = ws;
    ws.onopen = () => this.onEvent({ kind: 'connected' });
    ws.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      this.onEvent(msg === null ? { kind: 'malformed' } : { kind: 'server', msg });
    };
    ws.onerror = () => {
      // onclose follows; nothing to do here but keep the handler bound
      // so runtimes do not log unhandled error events.
    };
    ws.onclose = () => {
      this.ws = null;
      this.onEvent({ kind: 'disconnected' });
      if (!this.closedByUser && this.retryTimer === null) {
        this.retryTimer = setTimeout(() => {
          this.retryTimer = null;
          this.open();
        }, RETRY_MS);
      }
    };
  }

  /** Send if open; returns whether the message actually left. */
  send(msg: object): boolean {
    if (this.ws === null || this.ws.readyState !== OPEN) return false;
    this.ws.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closedByUser = true;
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer);
      this.retryTimer = null;
    }
    this.ws?.close();
  }
}
