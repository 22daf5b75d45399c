/** Stick-figure player: orthographic canvas rendering with a rotatable view,
 * play/pause/scrub at the document's own frame rate. */

import { animationExtent, projectVertex } from './geometry.js';
import {
  PlaybackState,
  durationSeconds,
  frameAt,
  newPlayback,
  pause,
  play,
  scrubEnabled,
  scrubTo,
} from './playback.js';
import { SYNTHETIC_EDGES } from './skeleton.js';
import { AnimationDoc, DocError, parseAnimationDoc } from './types.js';

export class StickFigurePlayer {
  private doc: AnimationDoc | null = null;
  private state: PlaybackState = newPlayback(0, 35);
  private yaw = 0.6;
  private pitch = 0.25;
  private canvas: HTMLCanvasElement;
  private slider: HTMLInputElement;
  private playButton: HTMLButtonElement;
  private status: HTMLElement;
  private errorCard: HTMLElement;
  private raf = 0;

  constructor(root: HTMLElement) {
    root.innerHTML = `
      <canvas class="player-canvas" width="420" height="420"></canvas>
      <div class="player-error hidden"></div>
      <div class="player-controls">
        <button class="play">play</button>
        <input type="range" class="scrub" min="0" max="0" value="0">
        <span class="status"></span>
      </div>`;
    this.canvas = root.querySelector('.player-canvas') as HTMLCanvasElement;
    this.slider = root.querySelector('.scrub') as HTMLInputElement;
    this.playButton = root.querySelector('.play') as HTMLButtonElement;
    this.status = root.querySelector('.status') as HTMLElement;
    this.errorCard = root.querySelector('.player-error') as HTMLElement;

    this.playButton.addEventListener('click', () => this.toggle());
    this.slider.addEventListener('input', () => {
      this.state = scrubTo(this.state, Number(this.slider.value));
      this.render();
    });

    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    this.canvas.addEventListener('pointerdown', (ev) => {
      dragging = true;
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.canvas.setPointerCapture(ev.pointerId);
    });
    this.canvas.addEventListener('pointermove', (ev) => {
      if (!dragging) return;
      this.yaw += (ev.clientX - lastX) * 0.01;
      this.pitch = Math.max(-1.4, Math.min(1.4, this.pitch + (ev.clientY - lastY) * 0.01));
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.render();
    });
    this.canvas.addEventListener('pointerup', () => {
      dragging = false;
    });
    this.loop = this.loop.bind(this);
  }

  /** Load a document; a malformed one shows an error card and keeps the
   * current animation and playback state untouched. */
  load(doc: unknown): void {
    let parsed: AnimationDoc;
    try {
      parsed = parseAnimationDoc(doc);
    } catch (err) {
      this.errorCard.textContent =
        err instanceof DocError ? `invalid animation: ${err.message}` : String(err);
      this.errorCard.classList.remove('hidden');
      return;
    }
    this.errorCard.classList.add('hidden');
    this.doc = parsed;
    this.state = newPlayback(parsed.frames.length, parsed.fps);
    this.slider.max = String(Math.max(0, parsed.frames.length - 1));
    this.slider.value = '0';
    this.slider.disabled = !scrubEnabled(this.state);
    this.playButton.disabled = parsed.frames.length <= 1;
    cancelAnimationFrame(this.raf);
    this.render();
  }

  private toggle(): void {
    if (!this.doc) return;
    const now = performance.now();
    if (this.state.playing) {
      this.state = pause(this.state, now);
      this.playButton.textContent = 'play';
    } else {
      this.state = play(this.state, now);
      this.playButton.textContent = 'pause';
      this.raf = requestAnimationFrame(this.loop);
    }
  }

  private loop(now: number): void {
    if (!this.state.playing) return;
    const frame = frameAt(this.state, now);
    if (frame !== this.state.frameIndex) {
      this.state = { ...this.state, frameIndex: frame };
      this.slider.value = String(frame);
      this.render();
    }
    this.raf = requestAnimationFrame(this.loop);
  }

  render(): void {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    if (!this.doc || this.doc.frames.length === 0) {
      this.status.textContent = 'no animation';
      return;
    }
    const frame = this.doc.frames[this.state.frameIndex];
    // projectVertex already emits canvas-oriented (x right, y down) coords
    const ext = animationExtent(this.doc.frames, this.yaw, this.pitch);
    const span = Math.max(ext.maxX - ext.minX, ext.maxY - ext.minY) || 1;
    const pts = frame.map((v) => {
      const [px, py] = projectVertex(v, this.yaw, this.pitch);
      return [((px - ext.minX) / span) * width, ((py - ext.minY) / span) * height];
    });
    ctx.strokeStyle = '#5a7d9a';
    ctx.lineWidth = 1.5;
    for (const [a, b] of SYNTHETIC_EDGES) {
      ctx.beginPath();
      ctx.moveTo(pts[a][0], pts[a][1]);
      ctx.lineTo(pts[b][0], pts[b][1]);
      ctx.stroke();
    }
    ctx.fillStyle = '#1d3557';
    for (const [x, y] of pts) {
      ctx.beginPath();
      ctx.arc(x, y, 2.2, 0, 2 * Math.PI);
      ctx.fill();
    }
    this.status.textContent =
      `frame ${this.state.frameIndex + 1}/${this.doc.frames.length} ` +
      `@ ${this.doc.fps} fps (${durationSeconds(this.state).toFixed(2)} s)`;
  }
}
