/** Variation panel: pick a base phrase, tune the noise scale, browse a
 * seeded gallery, and feed any result back in as the next base. */

import { ApiError, datasetFrames, vary } from './api.js';
import { SessionHistory, clampSigma } from './history.js';
import { StickFigurePlayer } from './player.js';
import { AnimationDoc } from './types.js';

export class VariationPanel {
  private base: number[][][] | null = null;
  private baseLabel = '';
  private baseHistoryId: number | null = null;
  private gallery: HTMLElement;
  private errorBox: HTMLElement;
  private notice: HTMLElement;
  private sigmaInput: HTMLInputElement;
  private sigmaValue: HTMLElement;
  private countInput: HTMLInputElement;
  private seedInput: HTMLInputElement;
  private startInput: HTMLInputElement;

  constructor(
    root: HTMLElement,
    private modelName: string,
    private datasetName: string,
    private seqLen: number,
    private fps: number,
    private player: StickFigurePlayer,
    private history: SessionHistory,
  ) {
    root.innerHTML = `
      <div class="row">
        <label>base frame offset <input class="start" type="number" value="0" min="0"></label>
        <button class="pick">pick base from dataset</button>
      </div>
      <div class="row">
        <label>noise sigma
          <input class="sigma" type="range" min="0" max="6" step="0.1" value="0.5">
          <span class="sigma-value">0.5</span>
        </label>
        <label>count <input class="count" type="number" value="4" min="1" max="16"></label>
        <label>seed <input class="seed" type="number" value="0"></label>
        <button class="go" disabled>generate variations</button>
      </div>
      <div class="notice hidden"></div>
      <div class="error hidden"></div>
      <div class="gallery"></div>`;
    this.gallery = root.querySelector('.gallery') as HTMLElement;
    this.errorBox = root.querySelector('.error') as HTMLElement;
    this.notice = root.querySelector('.notice') as HTMLElement;
    this.sigmaInput = root.querySelector('.sigma') as HTMLInputElement;
    this.sigmaValue = root.querySelector('.sigma-value') as HTMLElement;
    this.countInput = root.querySelector('.count') as HTMLInputElement;
    this.seedInput = root.querySelector('.seed') as HTMLInputElement;
    this.startInput = root.querySelector('.start') as HTMLInputElement;
    const go = root.querySelector('.go') as HTMLButtonElement;

    this.sigmaInput.addEventListener('input', () => {
      this.sigmaValue.textContent = this.sigmaInput.value;
    });
    (root.querySelector('.pick') as HTMLButtonElement).addEventListener('click', async () => {
      try {
        const start = Number(this.startInput.value) || 0;
        const doc = await datasetFrames(this.datasetName, start, this.seqLen);
        if (doc.frames.length < this.seqLen) {
          throw new ApiError(422, `dataset slice has ${doc.frames.length} frames, need ${this.seqLen}`);
        }
        this.setBase(doc.frames, `dataset[${start}..${start + this.seqLen})`, null);
        go.disabled = false;
        this.errorBox.classList.add('hidden');
      } catch (err) {
        this.showError(err);
      }
    });
    go.addEventListener('click', () => void this.generate());
  }

  setBase(frames: number[][][], label: string, parentHistoryId: number | null): void {
    this.base = frames;
    this.baseLabel = label;
    this.baseHistoryId = parentHistoryId;
    this.player.load({
      version: 1, fps: this.fps, vertex_count: 53, frames,
    });
  }

  private showError(err: unknown): void {
    this.errorBox.textContent = err instanceof Error ? err.message : String(err);
    this.errorBox.classList.remove('hidden');
  }

  private async generate(): Promise<void> {
    if (!this.base) return;
    const { value: sigma, clamped } = clampSigma(Number(this.sigmaInput.value));
    this.notice.classList.toggle('hidden', !clamped);
    if (clamped) {
      this.notice.textContent = `sigma clamped to ${sigma}`;
      this.sigmaInput.value = String(sigma);
      this.sigmaValue.textContent = String(sigma);
    }
    const request = {
      model: this.modelName,
      frames: this.base,
      sigma,
      count: Math.max(1, Number(this.countInput.value) || 1),
      seed: Number(this.seedInput.value) || 0,
    };
    try {
      const resp = await vary(request);
      this.errorBox.classList.add('hidden');
      const entry = this.history.record(
        'vary', request, `${this.baseLabel} @ sigma=${sigma}`, this.baseHistoryId);
      this.renderGallery(resp.reconstruction, resp.animations, resp.deviations, entry.id);
    } catch (err) {
      this.showError(err);
    }
  }

  private renderGallery(recon: AnimationDoc, variations: AnimationDoc[],
                        deviations: number[], historyId: number): void {
    this.gallery.innerHTML = '';
    const cards: Array<{ title: string; doc: AnimationDoc; deviation: number | null }> = [
      { title: 'base (reconstruction)', doc: recon, deviation: null },
      ...variations.map((doc, i) => ({
        title: `variation ${i + 1}`, doc, deviation: deviations[i],
      })),
    ];
    for (const card of cards) {
      const el = document.createElement('div');
      el.className = 'card';
      const dev = card.deviation === null ? '' :
        `<span class="deviation">deviation ${card.deviation.toFixed(5)}</span>`;
      el.innerHTML = `
        <h4>${card.title}</h4>${dev}
        <button class="replay">play</button>
        <button class="rebase">use as new base</button>`;
      (el.querySelector('.replay') as HTMLButtonElement).addEventListener('click', () => {
        this.player.load(card.doc);
      });
      (el.querySelector('.rebase') as HTMLButtonElement).addEventListener('click', () => {
        this.setBase(card.doc.frames, card.title, historyId);
      });
      this.gallery.appendChild(el);
    }
  }
}
