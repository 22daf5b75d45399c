/** Frame scheduling for fps-accurate playback; pure and testable. */

export interface PlaybackState {
  frameCount: number;
  fps: number;
  playing: boolean;
  frameIndex: number;
  startedAt: number | null; // ms timestamp when play began
  startFrame: number;
}

export function newPlayback(frameCount: number, fps: number): PlaybackState {
  return { frameCount, fps, playing: false, frameIndex: 0, startedAt: null, startFrame: 0 };
}

export function durationSeconds(state: PlaybackState): number {
  return state.frameCount / state.fps;
}

/** Frame index at wall-clock `nowMs` while playing; loops at the end. */
export function frameAt(state: PlaybackState, nowMs: number): number {
  if (!state.playing || state.startedAt === null || state.frameCount === 0) {
    return state.frameIndex;
  }
  const elapsed = (nowMs - state.startedAt) / 1000;
  const advanced = Math.floor(elapsed * state.fps);
  return (state.startFrame + advanced) % state.frameCount;
}

export function play(state: PlaybackState, nowMs: number): PlaybackState {
  if (state.frameCount <= 1) return state; // single pose: nothing to play
  return { ...state, playing: true, startedAt: nowMs, startFrame: state.frameIndex };
}

export function pause(state: PlaybackState, nowMs: number): PlaybackState {
  return { ...state, playing: false, frameIndex: frameAt(state, nowMs), startedAt: null };
}

export function scrubTo(state: PlaybackState, frame: number): PlaybackState {
  const clamped = Math.max(0, Math.min(state.frameCount - 1, Math.round(frame)));
  return { ...state, playing: false, startedAt: null, frameIndex: clamped };
}

export function scrubEnabled(state: PlaybackState): boolean {
  return state.frameCount > 1;
}
