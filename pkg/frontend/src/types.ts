/** Wire formats shared with the HTTP service. */

export interface AnimationDoc {
  version: 1;
  fps: number;
  vertex_count: 53;
  frames: number[][][]; // [frame][vertex][x,y,z]
}

export interface TrajectoryDoc {
  version: 1;
  latent_dim: number;
  points: number[][];
  fps?: number;
}

export interface ModelInfo {
  name: string;
  kind: 'pose_ae' | 'seq_vae' | 'seq_rnn';
  fps: number;
  latent_dim?: number;
  seq_len?: number;
  prompt_len?: number;
  predict_len?: number;
}

export interface VaryResponse {
  reconstruction: AnimationDoc;
  animations: AnimationDoc[];
  deviations: number[];
}

export class DocError extends Error {}

/** Validate an animation document; malformed input raises, never renders. */
export function parseAnimationDoc(doc: unknown): AnimationDoc {
  if (typeof doc !== 'object' || doc === null) {
    throw new DocError('animation document must be an object');
  }
  const d = doc as Record<string, unknown>;
  if (d.version !== 1) throw new DocError(`unsupported version ${String(d.version)}`);
  if (d.vertex_count !== 53) {
    throw new DocError(`vertex_count must be 53, got ${String(d.vertex_count)}`);
  }
  if (typeof d.fps !== 'number' || !(d.fps > 0)) {
    throw new DocError(`fps must be positive, got ${String(d.fps)}`);
  }
  if (!Array.isArray(d.frames)) throw new DocError('frames must be an array');
  for (const frame of d.frames) {
    if (!Array.isArray(frame) || frame.length !== 53) {
      throw new DocError('every frame needs exactly 53 vertices');
    }
    for (const v of frame) {
      if (!Array.isArray(v) || v.length !== 3 || v.some((c) => typeof c !== 'number' || !isFinite(c))) {
        throw new DocError('vertices must be finite [x, y, z] triples');
      }
    }
  }
  return doc as AnimationDoc;
}
