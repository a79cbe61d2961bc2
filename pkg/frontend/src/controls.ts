/**
 * Activation inputs: one slider per action plus hold-to-ramp keys.
 *
 * Keys 1/2/3 ramp the matching action up at 1.0/s while held (with Shift:
 * down); 0 drops everything to zero. Sliders and keys write to the same
 * activation vector, and every change is pushed through the caller's
 * throttled sender, so the wire sees at most 50 Hz of latest values.
 */

import { ACTIONS } from './protocol.js';
import { HoldRamp } from './ramp.js';

const ACTION_LABELS = ['I · power grip', 'II · wrist', 'III · tripod'];
const ACTION_KEYS: Record<string, number> = { '1': 0, '2': 1, '3': 2 };

export class Controls {
  readonly activation: number[] = new Array(ACTIONS).fill(0);

  private sliders: HTMLInputElement[] = [];
  private readouts: HTMLElement[] = [];
  private ramp = new HoldRamp(() => performance.now());
  private ticking = false;
  private enabled = false;

  constructor(
    private doc: Document,
    private onActivation: (values: number[]) => void,
  ) {}

  mount(container: HTMLElement): void {
    for (let i = 0; i < ACTIONS; i++) {
      const row = this.doc.createElement('div');
      row.className = 'slider-row';

      const label = this.doc.createElement('label');
      label.textContent = ACTION_LABELS[i] ?? `action ${i}`;

      const slider = this.doc.createElement('input');
      slider.type = 'range';
      slider.min = '0';
      slider.max = '1';
      slider.step = '0.01';
      slider.value = '0';
      slider.disabled = true;
      slider.addEventListener('input', () => {
        this.setAction(i, Number(slider.value));
      });

      const readout = this.doc.createElement('span');
      readout.className = 'readout';
      readout.textContent = '0.00';

      row.append(label, slider, readout);
      container.append(row);
      this.sliders.push(slider);
      this.readouts.push(readout);
    }

    this.doc.addEventListener('keydown', (ev) => this.onKeyDown(ev));
    this.doc.addEventListener('keyup', (ev) => this.onKeyUp(ev));
  }

  setEnabled(on: boolean): void {
    if (on === this.enabled) return;
    this.enabled = on;
    for (const slider of this.sliders) slider.disabled = !on;
    if (!on) {
      for (const action of this.ramp.active()) this.ramp.release(action);
    }
  }

  private onKeyDown(ev: KeyboardEvent): void {
    if (!this.enabled || ev.repeat) return;
    if (ev.key === '0') {
      for (let i = 0; i < ACTIONS; i++) this.setAction(i, 0);
      return;
    }
    const action = ACTION_KEYS[ev.key];
    if (action === undefined) return;
    this.ramp.press(action, this.activation[action] ?? 0, ev.shiftKey ? -1 : 1);
    this.startTicking();
  }

  private onKeyUp(ev: KeyboardEvent): void {
    const action = ACTION_KEYS[ev.key];
    if (action === undefined) return;
    const final = this.ramp.release(action);
    if (final !== null) this.setAction(action, final);
  }

  private startTicking(): void {
    if (this.ticking) return;
    this.ticking = true;
    const tick = () => {
      const held = this.ramp.active();
      if (held.length === 0 || !this.enabled) {
        this.ticking = false;
        return;
      }
      for (const action of held) {
        const level = this.ramp.value(action);
        if (level !== null) this.setAction(action, level);
      }
      requestAnimationFrame(tick);
    };
    requestAnimationFrame(tick);
  }

  private setAction(i: number, value: number): void {
    this.activation[i] = value;
    const slider = this.sliders[i];
    if (slider) slider.value = value.toFixed(2);
    const readout = this.readouts[i];
    if (readout) readout.textContent = value.toFixed(2);
    this.onActivation([...this.activation]);
  }
}
