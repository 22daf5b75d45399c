/** Pure geometry helpers: stroke downsampling, extents, view projection. */

export interface Extent {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
}

export const MAX_CONTROL_POINTS = 200;

/** Uniformly thin a stroke to at most `limit` points, keeping both ends. */
export function downsampleStroke(points: number[][], limit = MAX_CONTROL_POINTS): number[][] {
  if (points.length <= limit) return points.slice();
  const out: number[][] = [];
  for (let i = 0; i < limit; i++) {
    const idx = Math.round((i * (points.length - 1)) / (limit - 1));
    out.push(points[idx]);
  }
  return out;
}

export function extentOf(points: number[][], pad = 0.05): Extent {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x);
    maxX = Math.max(maxX, x);
    minY = Math.min(minY, y);
    maxY = Math.max(maxY, y);
  }
  if (!isFinite(minX)) return { minX: -1, maxX: 1, minY: -1, maxY: 1 };
  const w = (maxX - minX) || 1;
  const h = (maxY - minY) || 1;
  return {
    minX: minX - pad * w,
    maxX: maxX + pad * w,
    minY: minY - pad * h,
    maxY: maxY + pad * h,
  };
}

/** Canvas pixel to latent coordinates under an extent calibration. */
export function canvasToLatent(px: number, py: number, width: number, height: number,
                               ext: Extent): [number, number] {
  const x = ext.minX + (px / width) * (ext.maxX - ext.minX);
  const y = ext.maxY - (py / height) * (ext.maxY - ext.minY); // canvas y grows down
  return [x, y];
}

export function latentToCanvas(x: number, y: number, width: number, height: number,
                               ext: Extent): [number, number] {
  const px = ((x - ext.minX) / (ext.maxX - ext.minX)) * width;
  const py = ((ext.maxY - y) / (ext.maxY - ext.minY)) * height;
  return [px, py];
}

/**
 * Orthographic projection of a vertex under yaw/pitch view rotation
 * (z vertical in data; screen y grows down).
 */
export function projectVertex(v: number[], yaw: number, pitch: number): [number, number] {
  const [x, y, z] = v;
  const cy = Math.cos(yaw);
  const sy = Math.sin(yaw);
  const x1 = cy * x + sy * y;
  const y1 = -sy * x + cy * y;
  const cp = Math.cos(pitch);
  const sp = Math.sin(pitch);
  const depthY = cp * y1 - sp * z;
  const upZ = sp * y1 + cp * z;
  void depthY;
  return [x1, -upZ];
}

/** Bounding square of all projected frames, for a stable auto-fit view. */
export function animationExtent(frames: number[][][], yaw: number, pitch: number): Extent {
  const pts: number[][] = [];
  for (const frame of frames) {
    for (const v of frame) {
      const [px, py] = projectVertex(v, yaw, pitch);
      pts.push([px, py]);
    }
  }
  const e = extentOf(pts, 0.1);
  const spanX = e.maxX - e.minX;
  const spanY = e.maxY - e.minY;
  const span = Math.max(spanX, spanY);
  const cx = (e.minX + e.maxX) / 2;
  const cy = (e.minY + e.maxY) / 2;
  return { minX: cx - span / 2, maxX: cx + span / 2, minY: cy - span / 2, maxY: cy + span / 2 };
}
