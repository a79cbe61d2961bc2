/**
 * Session state and its reducer.
 *
 * The state only ever holds what the server said (frames, task progress,
 * errors) plus connection and mode bookkeeping; there is no client-side
 * simulation of the hand. Every transition is a pure function so the
 * whole task flow is unit-testable without a socket.
 */

import type { ControlMode, Frame, ServerMessage, TaskKind, TaskMsg } from './protocol.js';

export type Connection = 'connecting' | 'open' | 'closed';

export interface ScoreRow {
  kind: TaskKind;
  dofs: string[];
  target: Record<string, number>;
  trial: number;
  trials: number;
  score: number;
}

export interface UiSessionState {
  connection: Connection;
  mode: ControlMode;
  feedbackOn: boolean;
  frame: Frame | null;
  task: TaskMsg | null;
  scores: ScoreRow[];
  dropped: number;
  lastError: string | null;
}

export type UiEvent =
  | { kind: 'connecting' }
  | { kind: 'connected' }
  | { kind: 'disconnected' }
  | { kind: 'server'; msg: ServerMessage }
  | { kind: 'malformed' }
  | { kind: 'modeSet'; mode: ControlMode; feedback: boolean };

export function initialState(): UiSessionState {
  return {
    connection: 'closed',
    mode: 'continuous',
    feedbackOn: true,
    frame: null,
    task: null,
    scores: [],
    dropped: 0,
    lastError: null,
  };
}

function applyTask(state: UiSessionState, msg: TaskMsg): UiSessionState {
  if (msg.score === null) {
    // A trial is starting; this is now the active task.
    return { ...state, task: msg };
  }
  const row: ScoreRow = {
    kind: msg.kind,
    dofs: msg.dofs,
    target: msg.target,
    trial: msg.trial,
    trials: msg.trials,
    score: msg.score,
  };
  const finished = msg.trial + 1 >= msg.trials;
  return {
    ...state,
    scores: [...state.scores, row],
    task: finished ? null : state.task,
  };
}

export function reduce(state: UiSessionState, event: UiEvent): UiSessionState {
  switch (event.kind) {
    case 'connecting':
      return { ...state, connection: 'connecting' };
    case 'connected':
      return { ...state, connection: 'open' };
    case 'disconnected':
      return { ...state, connection: 'closed' };
    case 'malformed':
      return { ...state, dropped: state.dropped + 1 };
    case 'modeSet':
      return { ...state, mode: event.mode, feedbackOn: event.feedback };
    case 'server':
      switch (event.msg.type) {
        case 'frame':
          return { ...state, frame: event.msg };
        case 'task':
          return applyTask(state, event.msg);
        case 'error':
          return { ...state, lastError: event.msg.detail };
      }
  }
}
