/** Explorer entry point: discover models, wire the panels together. */

import { listModels } from './api.js';
import { SessionHistory } from './history.js';
import { StickFigurePlayer } from './player.js';
import { TrajectoryPanel } from './trajectory.js';
import { VariationPanel } from './variation.js';

const DATASET = 'demo';

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function boot(): Promise<void> {
  const history = new SessionHistory();
  const player = new StickFigurePlayer(el('player'));

  const { models } = await listModels();
  const pose2d = models.find((m) => m.kind === 'pose_ae' && m.latent_dim === 2);
  const vae = models.find((m) => m.kind === 'seq_vae');

  if (pose2d) {
    const panel = new TrajectoryPanel(el('trajectory-panel'), pose2d.name, DATASET,
                                      player, history);
    try {
      await panel.calibrate();
    } catch (err) {
      el('trajectory-panel').prepend(
        Object.assign(document.createElement('div'),
                      { className: 'error', textContent: String(err) }));
    }
  } else {
    el('trajectory-panel').textContent = 'no 2-d pose model registered';
  }

  if (vae && vae.seq_len) {
    new VariationPanel(el('variation-panel'), vae.name, DATASET, vae.seq_len,
                       vae.fps, player, history);
  } else {
    el('variation-panel').textContent = 'no sequence VAE registered';
  }

  const historyList = el('history');
  setInterval(() => {
    historyList.innerHTML = history.all().map((e) => {
      const chain = history.chain(e.id).reverse().join(' > ');
      return `<li>#${e.id} [${e.kind}] ${e.label} <small>chain ${chain}</small></li>`;
    }).join('');
  }, 1000);
}

void boot().catch((err) => {
  document.body.prepend(Object.assign(document.createElement('div'),
                                      { className: 'error', textContent: String(err) }));
});
