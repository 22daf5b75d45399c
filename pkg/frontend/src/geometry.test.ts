import { describe, expect, it } from 'vitest';

import {
  animationExtent,
  canvasToLatent,
  downsampleStroke,
  extentOf,
  latentToCanvas,
  projectVertex,
} from './geometry.js';

describe('downsampleStroke', () => {
  it('keeps short strokes intact', () => {
    const pts = [[0, 0], [1, 1], [2, 2]];
    expect(downsampleStroke(pts)).toEqual(pts);
  });

  it('caps long strokes at the control-point limit, keeping endpoints', () => {
    const pts = Array.from({ length: 1000 }, (_, i) => [i, 1000 - i]);
    const out = downsampleStroke(pts);
    expect(out.length).toBe(200);
    expect(out[0]).toEqual([0, 1000]);
    expect(out[out.length - 1]).toEqual([999, 1]);
  });

  it('preserves ordering', () => {
    const pts = Array.from({ length: 500 }, (_, i) => [i, 0]);
    const out = downsampleStroke(pts);
    for (let i = 1; i < out.length; i++) {
      expect(out[i][0]).toBeGreaterThan(out[i - 1][0]);
    }
  });
});

describe('extent and coordinate mapping', () => {
  it('computes padded extents', () => {
    const e = extentOf([[0, 0], [10, 20]], 0.1);
    expect(e.minX).toBeCloseTo(-1);
    expect(e.maxX).toBeCloseTo(11);
    expect(e.minY).toBeCloseTo(-2);
    expect(e.maxY).toBeCloseTo(22);
  });

  it('falls back to a unit extent for empty input', () => {
    expect(extentOf([])).toEqual({ minX: -1, maxX: 1, minY: -1, maxY: 1 });
  });

  it('canvas/latent round trip is the identity', () => {
    const ext = extentOf([[-3, 2], [5, 9]]);
    for (const [x, y] of [[-1, 3], [0, 5], [4.5, 8.2]]) {
      const [px, py] = latentToCanvas(x, y, 420, 420, ext);
      const [bx, by] = canvasToLatent(px, py, 420, 420, ext);
      expect(bx).toBeCloseTo(x, 10);
      expect(by).toBeCloseTo(y, 10);
    }
  });

  it('canvas y axis points down', () => {
    const ext = { minX: 0, maxX: 1, minY: 0, maxY: 1 };
    const [, pyLow] = latentToCanvas(0.5, 0.0, 100, 100, ext);
    const [, pyHigh] = latentToCanvas(0.5, 1.0, 100, 100, ext);
    expect(pyHigh).toBeLessThan(pyLow);
  });
});

describe('projection', () => {
  it('yaw of zero maps x to screen x and height to up', () => {
    const [sx, sy] = projectVertex([1, 0, 2], 0, 0);
    expect(sx).toBeCloseTo(1);
    expect(sy).toBeCloseTo(-2); // screen y grows down
  });

  it('rotation preserves vertex count and frame extents stay finite', () => {
    const frames = [
      [[0, 0, 0], [1, 1, 1], [0.5, -0.2, 0.7]],
      [[0.1, 0, 0], [1, 0.9, 1.1], [0.4, -0.1, 0.8]],
    ];
    for (const yaw of [0, 0.5, 2.0]) {
      const ext = animationExtent(frames, yaw, 0.3);
      expect(isFinite(ext.minX) && isFinite(ext.maxY)).toBe(true);
      expect(ext.maxX - ext.minX).toBeCloseTo(ext.maxY - ext.minY, 10); // square
    }
  });
});
