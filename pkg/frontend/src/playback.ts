/** Frame clock for 25 fps playback with play/pause/scrub. Pure logic —
 * rendering and requestAnimationFrame wiring live in main.ts. */

export const FPS = 25;

export interface ClockState {
  playing: boolean;
  /** Playback position in seconds within [0, duration). */
  position: number;
  /** Wall-clock ms of the last update (only meaningful while playing). */
  lastTimestamp: number;
}

export function newClock(): ClockState {
  return { playing: false, position: 0, lastTimestamp: 0 };
}

export function durationSeconds(nFrames: number): number {
  return nFrames / FPS;
}

/** Frame index shown at a given position; clamped to the last frame. */
export function frameAt(position: number, nFrames: number): number {
  const idx = Math.floor(position * FPS);
  return Math.min(Math.max(idx, 0), nFrames - 1);
}

export function play(clock: ClockState, timestamp: number): ClockState {
  return { ...clock, playing: true, lastTimestamp: timestamp };
}

export function pause(clock: ClockState): ClockState {
  return { ...clock, playing: false };
}

/** Jump to an exact frame (scrubbing). */
export function scrubToFrame(clock: ClockState, frame: number, nFrames: number): ClockState {
  const clamped = Math.min(Math.max(frame, 0), nFrames - 1);
  return { ...clock, position: clamped / FPS };
}

/** Advance by wall-clock time; loops at the clip end. */
export function tick(clock: ClockState, timestamp: number, nFrames: number): ClockState {
  if (!clock.playing) return clock;
  const dt = (timestamp - clock.lastTimestamp) / 1000;
  const duration = durationSeconds(nFrames);
  let position = clock.position + dt;
  if (position >= duration) position -= duration * Math.floor(position / duration);
  return { ...clock, position, lastTimestamp: timestamp };
}

/** Frames elapsed when playing for `seconds` from the start (no looping);
 * 125 frames therefore take exactly 5.0 s. */
export function framesPlayed(seconds: number): number {
  return Math.floor(seconds * FPS + 1e-9);
}
