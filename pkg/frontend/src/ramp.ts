/**
 * Hold-to-ramp key input: while a key is held the bound action's
 * activation ramps at 1.0 per second (down with the reverse modifier),
 * giving the feel of a sustained contraction without dragging a slider.
 * Releasing keeps the reached level; the slider shows where it landed.
 */

export const RAMP_RATE = 1.0;

interface Hold {
  start: number;
  base: number;
  direction: 1 | -1;
}

const clamp01 = (x: number) => Math.min(1, Math.max(0, x));

export class HoldRamp {
  private held = new Map<number, Hold>();

  constructor(private now: () => number = () => Date.now()) {}

  /** Key down: start ramping `action` from its current level. */
  press(action: number, current: number, direction: 1 | -1 = 1): void {
    if (!this.held.has(action)) {
      this.held.set(action, {
        start: this.now(),
        base: clamp01(current),
        direction,
      });
    }
  }

  /** Current level of a held action, or null if it is not held. */
  value(action: number): number | null {
    const hold = this.held.get(action);
    if (hold === undefined) return null;
    const elapsed = (this.now() - hold.start) / 1000;
    return clamp01(hold.base + hold.direction * RAMP_RATE * elapsed);
  }

  /** Key up: stop ramping and return the final level. */
  release(action: number): number | null {
    const final = this.value(action);
    this.held.delete(action);
    return final;
  }

  /** Actions currently being ramped. */
  active(): number[] {
    return [...this.held.keys()];
  }
}
