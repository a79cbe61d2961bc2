/**
 * DOM renderer: applies a ViewModel to the static skeleton in index.html.
 * All decisions live in deriveView; this file only moves styles and text.
 */

import { FINGERS, MOTORS } from './protocol.js';
import type { ViewModel } from './view.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

interface MotorBar {
  fill: HTMLElement;
  ghost: HTMLElement;
  label: HTMLElement;
}

interface ArmbandModule {
  root: HTMLElement;
  marker: HTMLElement;
  bar: HTMLElement;
  pulse: HTMLElement;
}

function el(doc: Document, tag: string, className: string): HTMLElement {
  const node = doc.createElement(tag);
  node.className = className;
  return node;
}

function buildMotorBars(doc: Document, host: HTMLElement): MotorBar[] {
  const names = ['thumb', 'index', 'middle', 'ring', 'pinky', 'wrist'];
  const bars: MotorBar[] = [];
  for (let i = 0; i < MOTORS; i++) {
    const col = el(doc, 'div', 'motor-col');
    const track = el(doc, 'div', 'motor-track');
    const fill = el(doc, 'div', 'motor-fill');
    const ghost = el(doc, 'div', 'motor-ghost');
    const label = el(doc, 'div', 'motor-label');
    label.textContent = names[i] ?? `m${i}`;
    track.append(fill, ghost);
    col.append(track, label);
    host.append(col);
    bars.push({ fill, ghost, label });
  }
  return bars;
}

function buildHand(doc: Document, svg: SVGSVGElement): SVGElement[] {
  // Five finger segments hinged on a palm arc plus a wrist needle.
  const parts: SVGElement[] = [];
  for (let i = 0; i < FINGERS; i++) {
    const finger = doc.createElementNS(SVG_NS, 'rect');
    finger.setAttribute('x', String(22 + i * 22));
    finger.setAttribute('y', '10');
    finger.setAttribute('width', '10');
    finger.setAttribute('height', '44');
    finger.setAttribute('rx', '5');
    finger.setAttribute('class', 'hand-finger');
    svg.append(finger);
    parts.push(finger);
  }
  const palm = doc.createElementNS(SVG_NS, 'rect');
  palm.setAttribute('x', '16');
  palm.setAttribute('y', '56');
  palm.setAttribute('width', '118');
  palm.setAttribute('height', '40');
  palm.setAttribute('rx', '10');
  palm.setAttribute('class', 'hand-palm');
  svg.append(palm);

  const wrist = doc.createElementNS(SVG_NS, 'line');
  wrist.setAttribute('x1', '75');
  wrist.setAttribute('y1', '118');
  wrist.setAttribute('x2', '75');
  wrist.setAttribute('y2', '100');
  wrist.setAttribute('class', 'hand-wrist');
  svg.append(wrist);
  parts.push(wrist);
  return parts;
}

function buildArmband(doc: Document, host: HTMLElement): ArmbandModule[] {
  const modules: ArmbandModule[] = [];
  for (let i = 0; i < FINGERS; i++) {
    const root = el(doc, 'div', 'module');
    const track = el(doc, 'div', 'module-track');
    const marker = el(doc, 'div', 'module-marker');
    const barTrack = el(doc, 'div', 'module-bar-track');
    const bar = el(doc, 'div', 'module-bar-fill');
    const pulse = el(doc, 'div', 'module-pulse');
    track.append(marker);
    barTrack.append(bar);
    root.append(pulse, track, barTrack);
    host.append(root);
    modules.push({ root, marker, bar, pulse });
  }
  return modules;
}

export function initRender(doc: Document): (view: ViewModel) => void {
  const byId = (id: string) => {
    const node = doc.getElementById(id);
    if (node === null) throw new Error(`missing #${id}`);
    return node;
  };

  const banner = byId('banner');
  const clash = byId('clash');
  const motorsPanel = byId('motors-panel');
  const motorBars = buildMotorBars(doc, byId('motor-bars'));
  const handParts = buildHand(
    doc, byId('hand') as unknown as SVGSVGElement);
  const armbandHost = byId('armband');
  const armband = buildArmband(doc, armbandHost);
  const taskStatus = byId('task-status');
  const scoreBody = byId('score-rows');
  const dropped = byId('dropped');
  const lastError = byId('last-error');

  let renderedScores = 0;

  return (view: ViewModel) => {
    banner.hidden = view.banner === null;
    banner.textContent = view.banner ?? '';
    clash.hidden = !view.antagonistClash;

    motorsPanel.classList.toggle('hidden', !view.showMotors);
    if (view.frame !== null && view.showMotors) {
      const { motors, command } = view.frame;
      for (let i = 0; i < MOTORS; i++) {
        const bar = motorBars[i];
        if (!bar) continue;
        const pos = motors[i] ?? 0;
        bar.fill.style.height = `${(pos * 100).toFixed(1)}%`;
        bar.ghost.style.bottom = `${((command[i] ?? 0) * 100).toFixed(1)}%`;
      }
      for (let i = 0; i < FINGERS; i++) {
        // Fingers curl toward the palm as they close.
        const part = handParts[i];
        const pos = motors[i] ?? 0;
        part?.setAttribute(
          'transform',
          `translate(0 ${(pos * 40).toFixed(1)}) scale(1 ${(1 - 0.55 * pos).toFixed(3)})`);
      }
      const wristPart = handParts[FINGERS];
      const angle = ((motors[5] ?? 0) - 0.5) * 160;
      wristPart?.setAttribute('transform', `rotate(${angle.toFixed(1)} 75 118)`);
    }

    armbandHost.classList.toggle('blanked', view.armband === null);
    if (view.armband !== null) {
      for (let i = 0; i < armband.length; i++) {
        const mod = armband[i];
        const data = view.armband[i];
        if (!mod || !data) continue;
        mod.marker.style.left = `${(data.marker * 100).toFixed(1)}%`;
        mod.bar.style.height = `${(data.bar * 100).toFixed(1)}%`;
        mod.pulse.style.opacity = data.pulse.toFixed(3);
      }
    }

    if (view.task === null) {
      taskStatus.textContent = 'no active task';
    } else {
      const targets = Object.entries(view.task.target)
        .map(([dof, v]) => `${dof}=${v.toFixed(2)}`).join(', ');
      taskStatus.textContent =
        `${view.task.kind} ${view.task.dofs.join('+')}, trial ` +
        `${view.task.trial + 1}/${view.task.trials}, target ${targets}`;
    }

    for (; renderedScores < view.scores.length; renderedScores++) {
      const row = view.scores[renderedScores];
      if (!row) continue;
      const tr = doc.createElement('tr');
      const targets = Object.entries(row.target)
        .map(([dof, v]) => `${dof}=${v.toFixed(2)}`).join(', ');
      for (const text of [String(row.trial + 1), row.kind,
                          row.dofs.join('+'), targets,
                          `${row.score.toFixed(1)}%`]) {
        const td = doc.createElement('td');
        td.textContent = text;
        tr.append(td);
      }
      scoreBody.append(tr);
    }

    dropped.textContent = String(view.dropped);
    lastError.textContent = view.lastError === null
      ? ''
      : `engine: ${view.lastError}`;
  };
}
