/**
 * Entry point: wires socket, state, controls, and renderer together.
 * The browser is a dumb terminal here; every hand movement on screen is
 * a server frame, and every input leaves as a protocol message.
 */

import { Controls } from './controls.js';
import {
  activationMessage,
  modeMessage,
  startTaskMessage,
} from './protocol.js';
import type { ControlMode, TaskKind } from './protocol.js';
import { initialState, reduce } from './state.js';
import type { UiEvent } from './state.js';
import { TrainerSocket } from './socket.js';
import { LatestValueSender } from './throttle.js';
import { deriveView } from './view.js';
import { initRender } from './render.js';

const params = new URLSearchParams(location.search);
const url = params.get('ws') ?? 'ws://127.0.0.1:8765';

let state = initialState();
const render = initRender(document);

let renderQueued = false;
function scheduleRender(): void {
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    const view = deriveView(state, controls.activation);
    controls.setEnabled(view.inputsEnabled);
    render(view);
  });
}

function dispatch(ev: UiEvent): void {
  state = reduce(state, ev);
  scheduleRender();
}

const socket = new TrainerSocket(url, dispatch);

const sender = new LatestValueSender<number[]>({
  send: (values) => socket.send(activationMessage(values, performance.now())),
  now: () => performance.now(),
});

const controls = new Controls(document, (values) => {
  sender.update(values);
  scheduleRender(); // clash flag reacts to local sliders immediately
});
controls.mount(document.getElementById('sliders') as HTMLElement);

const modeSelect = document.getElementById('mode') as HTMLSelectElement;
const feedbackBox = document.getElementById('feedback') as HTMLInputElement;

function pushMode(): void {
  const mode = modeSelect.value as ControlMode;
  const feedback = feedbackBox.checked;
  socket.send(modeMessage(mode, feedback));
  dispatch({ kind: 'modeSet', mode, feedback });
}
modeSelect.addEventListener('change', pushMode);
feedbackBox.addEventListener('change', pushMode);

const taskForm = document.getElementById('task-form') as HTMLFormElement;
taskForm.addEventListener('submit', (ev) => {
  ev.preventDefault();
  const kind = (document.getElementById('task-kind') as HTMLSelectElement)
    .value as TaskKind;
  const dof = (document.getElementById('task-dof') as HTMLSelectElement).value;
  const trials = Number(
    (document.getElementById('task-trials') as HTMLInputElement).value);
  const duration = Number(
    (document.getElementById('task-duration') as HTMLInputElement).value);
  socket.send(startTaskMessage(kind, [dof], trials, duration));
});

socket.connect();
scheduleRender();
