import { describe, expect, it } from 'vitest';

import {
  durationSeconds,
  frameAt,
  newPlayback,
  pause,
  play,
  scrubEnabled,
  scrubTo,
} from './playback.js';

describe('playback timing', () => {
  it('honors the document frame rate: 128 frames at 35 fps lasts ~3.66 s', () => {
    const state = newPlayback(128, 35);
    expect(durationSeconds(state)).toBeCloseTo(3.657, 3);
    const playing = play(state, 1000);
    // the last frame shows right at the nominal duration, then playback wraps
    expect(frameAt(playing, 1000 + 3657)).toBe(127);
    expect(frameAt(playing, 1000 + 3677)).toBe(0);
  });

  it('advances floor(elapsed * fps) frames', () => {
    const playing = play(newPlayback(100, 35), 0);
    expect(frameAt(playing, 0)).toBe(0);
    expect(frameAt(playing, 1000)).toBe(35);
    expect(frameAt(playing, 2000)).toBe(70);
  });

  it('pause freezes the current frame', () => {
    const playing = play(newPlayback(50, 10), 0);
    const paused = pause(playing, 2500);
    expect(paused.playing).toBe(false);
    expect(paused.frameIndex).toBe(25);
    expect(frameAt(paused, 99999)).toBe(25);
  });

  it('scrubbing clamps to the frame range and stops playback', () => {
    const state = play(newPlayback(10, 35), 0);
    expect(scrubTo(state, -5).frameIndex).toBe(0);
    expect(scrubTo(state, 42).frameIndex).toBe(9);
    expect(scrubTo(state, 4).playing).toBe(false);
  });

  it('single-frame documents disable scrubbing and never start playing', () => {
    const state = newPlayback(1, 35);
    expect(scrubEnabled(state)).toBe(false);
    expect(play(state, 0).playing).toBe(false);
  });
});
