/** Typed client for the model service; all generation goes through here. */

import type { AnimationDoc, ModelInfo, TrajectoryDoc, VaryResponse } from './types.js';

export interface DecodeTrajectoryRequest {
  model: string;
  points: number[][];
  interpolation: 'linear' | 'catmull-rom';
  samples_per_segment: number;
}

export interface VaryRequest {
  model: string;
  frames: number[][][];
  sigma: number;
  count: number;
  seed: number;
}

export interface GenerateRequest {
  model: string;
  prompt_frames: number[][][];
  steps: number;
  temperature: number;
  seed: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(path, init);
  if (!res.ok) {
    let detail = `HTTP ${res.status}`;
    try {
      const body = await res.json();
      if (typeof body.detail === 'string') detail = body.detail;
      else if (Array.isArray(body.detail)) {
        detail = body.detail
          .map((d: { field?: string; message?: string }) => `${d.field}: ${d.message}`)
          .join('; ');
      }
    } catch {
      // keep the status-only message
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

function post<T>(path: string, body: unknown): Promise<T> {
  return request<T>(path, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
  });
}

export function listModels(): Promise<{ models: ModelInfo[] }> {
  return request('/api/models');
}

export function datasetFrames(name: string, from: number, count: number): Promise<AnimationDoc> {
  return request(`/api/dataset/${encodeURIComponent(name)}/frames?from=${from}&count=${count}`);
}

export function decodeTrajectory(req: DecodeTrajectoryRequest): Promise<AnimationDoc> {
  return post('/api/pose/decode-trajectory', req);
}

export function projectFrames(model: string, frames: number[][][]): Promise<TrajectoryDoc> {
  return post('/api/pose/project', { model, frames });
}

export function vary(req: VaryRequest): Promise<VaryResponse> {
  return post('/api/vae/vary', req);
}

export function sample(model: string, count: number, radius: number, seed: number):
    Promise<{ animations: AnimationDoc[] }> {
  return post('/api/vae/sample', { model, count, radius, seed });
}

export function generate(req: GenerateRequest): Promise<AnimationDoc> {
  return post('/api/rnn/generate', req);
}
