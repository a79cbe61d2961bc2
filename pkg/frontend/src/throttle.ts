/**
 * Latest-value coalescing sender.
 *
 * Inputs may change faster than the wire should carry them; this keeps
 * only the newest value and emits at most once per interval (50 Hz by
 * default). With no updates it emits nothing at all, which is what keeps
 * idle outbound traffic empty.
 */

export interface ThrottleOptions<T> {
  send: (value: T) => void;
  intervalMs?: number;
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

export class LatestValueSender<T> {
  private readonly send: (value: T) => void;
  private readonly intervalMs: number;
  private readonly now: () => number;
  private readonly schedule: (fn: () => void, ms: number) => unknown;
  private readonly cancel: (handle: unknown) => void;

  private pending: { value: T } | null = null;
  private lastSent = -Infinity;
  private timer: unknown = null;

  constructor(opts: ThrottleOptions<T>) {
    this.send = opts.send;
    this.intervalMs = opts.intervalMs ?? 20;
    this.now = opts.now ?? (() => Date.now());
    this.schedule = opts.schedule ??
      ((fn, ms) => setTimeout(fn, ms));
    this.cancel = opts.cancel ??
      ((handle) => clearTimeout(handle as ReturnType<typeof setTimeout>));
  }

  /** Record the newest value; flush immediately if the interval allows. */
  update(value: T): void {
    this.pending = { value };
    const wait = this.lastSent + this.intervalMs - this.now();
    if (wait <= 0) {
      this.flush();
    } else if (this.timer === null) {
      this.timer = this.schedule(() => this.flush(), wait);
    }
  }

  private flush(): void {
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
    if (this.pending === null) return;
    const { value } = this.pending;
    this.pending = null;
    this.lastSent = this.now();
    this.send(value);
  }

  stop(): void {
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
    this.pending = null;
  }
}
