/**
 * Pure view model: everything the renderer needs, derived from session
 * state plus the local slider levels. Keeping this a plain function makes
 * the readout-hiding and blanking rules testable without a DOM.
 */

import { FINGERS } from './protocol.js';
import type { Frame, TaskKind } from './protocol.js';
import type { ScoreRow, UiSessionState } from './state.js';

/** One armband module: tangential marker, normal bar, vibration pulse. */
export interface ModuleView {
  marker: number;
  bar: number;
  pulse: number;
}

export interface TaskView {
  kind: TaskKind;
  dofs: string[];
  target: Record<string, number>;
  trial: number;
  trials: number;
}

export interface ViewModel {
  banner: string | null;
  inputsEnabled: boolean;
  showMotors: boolean;
  frame: Frame | null;
  armband: ModuleView[] | null;
  antagonistClash: boolean;
  task: TaskView | null;
  scores: ScoreRow[];
  dropped: number;
  lastError: string | null;
}

const RAISED = 0.05;

export function deriveView(
  state: UiSessionState, activation: number[],
): ViewModel {
  const connected = state.connection === 'open';
  const banner = connected
    ? null
    : state.connection === 'connecting'
      ? 'connecting to engine'
      : 'disconnected, inputs disabled';

  // During a testing task the motor readout (bars + hand sketch) is
  // hidden; the armband strip is all the feedback the operator gets.
  const showMotors = state.task === null;

  let armband: ModuleView[] | null = null;
  if (state.feedbackOn && state.frame !== null) {
    const fb = state.frame.feedback;
    armband = Array.from({ length: FINGERS }, (_, i) => ({
      marker: fb.tangential[i] ?? 0,
      bar: fb.normal[i] ?? 0,
      pulse: fb.vibration[i] ?? 0,
    }));
  }

  // Actions 0 and 2 share the grasp motors; raising both is a conflict
  // the controller will resolve winner-take-all, so flag it.
  const antagonistClash =
    (activation[0] ?? 0) > RAISED && (activation[2] ?? 0) > RAISED;

  return {
    banner,
    inputsEnabled: connected,
    showMotors,
    frame: state.frame,
    armband,
    antagonistClash,
    task: state.task === null
      ? null
      : {
          kind: state.task.kind,
          dofs: state.task.dofs,
          target: state.task.target,
          trial: state.task.trial,
          trials: state.task.trials,
        },
    scores: state.scores,
    dropped: state.dropped,
    lastError: state.lastError,
  };
}
