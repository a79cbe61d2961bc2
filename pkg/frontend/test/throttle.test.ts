import { describe, expect, it } from 'vitest';

import { LatestValueSender } from '../src/throttle.js';

/** Deterministic clock plus manually fired timers. */
function harness() {
  let t = 0;
  const sent: Array<{ at: number; value: number[] }> = [];
  const timers: Array<{ fn: () => void; due: number } | null> = [];
  const sender = new LatestValueSender<number[]>({
    send: (value) => sent.push({ at: t, value }),
    intervalMs: 20,
    now: () => t,
    schedule: (fn, ms) => {
      timers.push({ fn, due: t + ms });
      return timers.length - 1;
    },
    cancel: (handle) => {
      timers[handle as number] = null;
    },
  });
  const advance = (ms: number) => {
    t += ms;
    for (let i = 0; i < timers.length; i++) {
      const timer = timers[i];
      if (timer && timer.due <= t) {
        timers[i] = null;
        timer.fn();
      }
    }
  };
  return { sender, sent, advance };
}

describe('LatestValueSender', () => {
  it('sends the first update immediately', () => {
    const { sender, sent } = harness();
    sender.update([1, 0, 0]);
    expect(sent).toEqual([{ at: 0, value: [1, 0, 0] }]);
  });

  it('coalesces a burst to the latest value at the interval edge', () => {
    const { sender, sent, advance } = harness();
    sender.update([0.1, 0, 0]);
    advance(5);
    sender.update([0.2, 0, 0]);
    advance(5);
    sender.update([0.3, 0, 0]);
    expect(sent).toHaveLength(1);
    advance(10); // interval boundary at t=20
    expect(sent).toHaveLength(2);
    expect(sent[1]).toEqual({ at: 20, value: [0.3, 0, 0] });
  });

  it('never exceeds the rate over a dense stream', () => {
    const { sender, sent, advance } = harness();
    for (let i = 0; i < 200; i++) {
      sender.update([i, 0, 0]);
      advance(1);
    }
    advance(20);
    for (let i = 1; i < sent.length; i++) {
      expect(sent[i]!.at - sent[i - 1]!.at).toBeGreaterThanOrEqual(20);
    }
    // 200 ms of input at 20 ms spacing: at most 11 sends, ending on the latest
    expect(sent.length).toBeLessThanOrEqual(11);
    expect(sent[sent.length - 1]!.value[0]).toBe(199);
  });

  it('emits nothing while idle', () => {
    const { sent, advance } = harness();
    advance(500);
    expect(sent).toHaveLength(0);
  });

  it('stop drops the pending value', () => {
    const { sender, sent, advance } = harness();
    sender.update([1, 0, 0]);
    sender.update([2, 0, 0]); // pending
    sender.stop();
    advance(100);
    expect(sent).toHaveLength(1);
  });
});
