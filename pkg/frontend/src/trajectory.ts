/** Latent drawing canvas: strokes over the projected training-data extent
 * become control points for server-side trajectory decoding. */

import { decodeTrajectory, projectFrames, datasetFrames, ApiError } from './api.js';
import {
  Extent,
  canvasToLatent,
  downsampleStroke,
  extentOf,
  latentToCanvas,
} from './geometry.js';
import { SessionHistory } from './history.js';
import { StickFigurePlayer } from './player.js';

export class TrajectoryPanel {
  private canvas: HTMLCanvasElement;
  private errorBox: HTMLElement;
  private extent: Extent = { minX: -1, maxX: 1, minY: -1, maxY: 1 };
  private background: number[][] = [];
  private stroke: number[][] = []; // latent coordinates
  private drawing = false;
  private inflight: AbortController | null = null;

  constructor(
    root: HTMLElement,
    private modelName: string,
    private datasetName: string,
    private player: StickFigurePlayer,
    private history: SessionHistory,
  ) {
    root.innerHTML = `
      <canvas class="latent-canvas" width="420" height="420"></canvas>
      <div class="row">
        <label>interpolation
          <select class="interp">
            <option value="catmull-rom">catmull-rom</option>
            <option value="linear">linear</option>
          </select>
        </label>
        <label>samples/segment <input class="sps" type="number" value="4" min="1" max="32"></label>
        <button class="clear">clear</button>
      </div>
      <div class="error hidden"></div>`;
    this.canvas = root.querySelector('.latent-canvas') as HTMLCanvasElement;
    this.errorBox = root.querySelector('.error') as HTMLElement;
    const interp = root.querySelector('.interp') as HTMLSelectElement;
    const sps = root.querySelector('.sps') as HTMLInputElement;
    (root.querySelector('.clear') as HTMLButtonElement).addEventListener('click', () => {
      this.stroke = [];
      this.render();
    });

    this.canvas.addEventListener('pointerdown', (ev) => {
      this.drawing = true;
      this.stroke = [];
      this.addPoint(ev);
      this.canvas.setPointerCapture(ev.pointerId);
    });
    this.canvas.addEventListener('pointermove', (ev) => {
      if (this.drawing) this.addPoint(ev);
    });
    this.canvas.addEventListener('pointerup', () => {
      this.drawing = false;
      void this.submit(interp.value as 'linear' | 'catmull-rom', Number(sps.value));
    });
  }

  /** Calibrate axes to the projected extent of the training data. */
  async calibrate(frameCount = 256): Promise<void> {
    const doc = await datasetFrames(this.datasetName, 0, frameCount);
    const traj = await projectFrames(this.modelName, doc.frames);
    this.background = traj.points;
    this.extent = extentOf(traj.points, 0.15);
    this.render();
  }

  private addPoint(ev: PointerEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const px = ((ev.clientX - rect.left) / rect.width) * this.canvas.width;
    const py = ((ev.clientY - rect.top) / rect.height) * this.canvas.height;
    this.stroke.push(
      Array.from(canvasToLatent(px, py, this.canvas.width, this.canvas.height, this.extent)),
    );
    this.render();
  }

  private async submit(interpolation: 'linear' | 'catmull-rom', sps: number): Promise<void> {
    if (this.stroke.length === 0) return;
    const points = downsampleStroke(this.stroke);
    const request = {
      model: this.modelName,
      points,
      interpolation,
      samples_per_segment: Math.max(1, sps || 1),
    };
    this.inflight?.abort();
    this.inflight = new AbortController();
    try {
      const doc = await decodeTrajectory(request);
      this.errorBox.classList.add('hidden');
      this.history.record('trajectory', request, `drawn path (${points.length} pts)`);
      this.player.load(doc);
    } catch (err) {
      // surface the failure but keep the drawn path for editing
      this.errorBox.textContent = err instanceof ApiError ? err.message : String(err);
      this.errorBox.classList.remove('hidden');
    }
  }

  render(): void {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = '#c9d6df';
    for (const [x, y] of this.background) {
      const [px, py] = latentToCanvas(x, y, width, height, this.extent);
      ctx.fillRect(px - 1, py - 1, 2, 2);
    }
    if (this.stroke.length > 0) {
      ctx.strokeStyle = '#e63946';
      ctx.lineWidth = 2;
      ctx.beginPath();
      this.stroke.forEach(([x, y], i) => {
        const [px, py] = latentToCanvas(x, y, width, height, this.extent);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }
  }
}
