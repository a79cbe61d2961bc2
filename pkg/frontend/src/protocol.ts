/**
 * Wire protocol for the trainer: message shapes plus structural validation.
 *
 * The engine streams `frame` messages at the control rate and `task`
 * messages around matching trials; the client sends `activation`, `mode`,
 * and `start_task`. Anything that does not validate is dropped by the
 * caller (and counted), never rendered.
 */

export const MOTORS = 6;
export const FINGERS = 5;
export const ACTIONS = 3;

export type ControlMode = 'discrete' | 'continuous';
export type TaskKind = 'position' | 'force';

export interface Feedback {
  tangential: number[];
  normal: number[];
  vibration: number[];
}

export interface Frame {
  type: 'frame';
  t: number;
  motors: number[];
  torques: number[];
  weights: number[];
  command: number[];
  feedback: Feedback;
}

export interface TaskMsg {
  type: 'task';
  kind: TaskKind;
  dofs: string[];
  target: Record<string, number>;
  trial: number;
  trials: number;
  score: number | null;
}

export interface ErrorMsg {
  type: 'error';
  detail: string;
}

export type ServerMessage = Frame | TaskMsg | ErrorMsg;

function finiteArray(x: unknown, n: number): x is number[] {
  return Array.isArray(x) && x.length === n &&
    x.every((v) => typeof v === 'number' && Number.isFinite(v));
}

function isFeedback(x: unknown): x is Feedback {
  if (typeof x !== 'object' || x === null) return false;
  const f = x as Record<string, unknown>;
  return finiteArray(f.tangential, FINGERS) &&
    finiteArray(f.normal, FINGERS) &&
    finiteArray(f.vibration, FINGERS);
}

function isFrame(x: Record<string, unknown>): x is Frame & Record<string, unknown> {
  return typeof x.t === 'number' && Number.isFinite(x.t) &&
    finiteArray(x.motors, MOTORS) &&
    finiteArray(x.torques, MOTORS) &&
    Array.isArray(x.weights) && x.weights.length > 0 &&
    x.weights.every((v) => typeof v === 'number' && Number.isFinite(v)) &&
    finiteArray(x.command, MOTORS) &&
    isFeedback(x.feedback);
}

function isTask(x: Record<string, unknown>): x is TaskMsg & Record<string, unknown> {
  if (x.kind !== 'position' && x.kind !== 'force') return false;
  if (!Array.isArray(x.dofs) || x.dofs.length === 0 ||
      !x.dofs.every((d) => typeof d === 'string')) return false;
  if (typeof x.target !== 'object' || x.target === null) return false;
  const targets = Object.values(x.target as Record<string, unknown>);
  if (!targets.every((v) => typeof v === 'number' && Number.isFinite(v))) {
    return false;
  }
  const trialsOk = Number.isInteger(x.trial) && Number.isInteger(x.trials) &&
    (x.trial as number) >= 0 && (x.trials as number) > 0;
  const scoreOk = x.score === null ||
    (typeof x.score === 'number' && Number.isFinite(x.score) && x.score >= 0);
  return trialsOk && scoreOk;
}

/** Parse one inbound message; null means malformed (drop and count). */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== 'object' || data === null) return null;
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case 'frame':
      return isFrame(msg) ? (msg as Frame) : null;
    case 'task':
      return isTask(msg) ? (msg as TaskMsg) : null;
    case 'error':
      return typeof msg.detail === 'string'
        ? { type: 'error', detail: msg.detail }
        : null;
    default:
      return null;
  }
}

// Outbound builders. The engine drops activations whose timestamp is not
// newer than the last applied one, so always stamp with a monotonic clock.

export function activationMessage(values: number[], t: number) {
  return { type: 'activation', values, t };
}

export function modeMessage(mode: ControlMode, feedback: boolean) {
  return { type: 'mode', value: mode, feedback };
}

export function startTaskMessage(
  kind: TaskKind, dofs: string[], trials: number, duration: number,
) {
  return { type: 'start_task', kind, dofs, trials, duration };
}
