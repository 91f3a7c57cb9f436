/**
 * Hand-pose input synthesis.
 *
 * Mouse mode: a draggable 6-DoF gizmo per hand plus an s_a slider; every
 * gizmo change emits a hand_pose message immediately (rate-limited to the
 * stream period). While idle, a heartbeat repeats the last pose at a
 * reduced rate so the server's stale-hold policy never engages.
 *
 * Gamepad mode: stick deflections are integrated client-side into the same
 * gizmo state, so both modes share one emission path.
 */
import { Quaternion } from "three";

import { handPoseMessage, type HandPoseOut, type HandSide } from "./protocol";

export interface GizmoState {
  position: [number, number, number];
  /** (w, x, y, z), kept normalized */
  orientation: [number, number, number, number];
  sA: number;
}

export interface InputTimings {
  /** active streaming period, ms (>= 30 Hz) */
  streamMs: number;
  /** idle heartbeat period, ms; must stay below the server staleness window */
  heartbeatMs: number;
}

export const DEFAULT_TIMINGS: InputTimings = { streamMs: 33, heartbeatMs: 100 };

export class HandInputSynthesizer {
  private gizmo: GizmoState = {
    position: [0, 0, 0.5],
    orientation: [1, 0, 0, 0],
    sA: 0,
  };
  private dirty = true;
  private lastSentAt = -Infinity;
  private seq = 0;

  constructor(
    readonly hand: HandSide,
    private readonly timings: InputTimings = DEFAULT_TIMINGS,
  ) {}

  state(): GizmoState {
    return {
      position: [...this.gizmo.position],
      orientation: [...this.gizmo.orientation],
      sA: this.gizmo.sA,
    };
  }

  setPosition(position: [number, number, number]): void {
    this.gizmo.position = [...position];
    this.dirty = true;
  }

  translate(delta: [number, number, number]): void {
    this.gizmo.position = [
      this.gizmo.position[0] + delta[0],
      this.gizmo.position[1] + delta[1],
      this.gizmo.position[2] + delta[2],
    ];
    this.dirty = true;
  }

  rotate(axis: [number, number, number], angle: number): void {
    const [w, x, y, z] = this.gizmo.orientation;
    const q = new Quaternion()
      .setFromAxisAngle({ x: axis[0], y: axis[1], z: axis[2] } as never, angle)
      .multiply(new Quaternion(x, y, z, w))
      .normalize();
    this.gizmo.orientation = [q.w, q.x, q.y, q.z];
    this.dirty = true;
  }

  setStiffnessIndex(sA: number): void {
    this.gizmo.sA = Math.min(1, Math.max(0, sA));
    this.dirty = true;
  }

  /** Integrate gamepad rates (m/s, rad/s) into the gizmo. */
  applyRates(
    linear: [number, number, number],
    angular: [number, number, number],
    dtSeconds: number,
  ): void {
    this.translate([
      linear[0] * dtSeconds,
      linear[1] * dtSeconds,
      linear[2] * dtSeconds,
    ]);
    const mag = Math.hypot(...angular);
    if (mag > 1e-12) {
      this.rotate(
        [angular[0] / mag, angular[1] / mag, angular[2] / mag],
        mag * dtSeconds,
      );
    }
  }

  /**
   * Poll from the event loop; returns the message to send now, or null.
   * Changed state streams at the full rate; unchanged state repeats at the
   * heartbeat rate.
   */
  poll(nowMs: number): HandPoseOut | null {
    const since = nowMs - this.lastSentAt;
    const due = this.dirty
      ? since >= this.timings.streamMs
      : since >= this.timings.heartbeatMs;
    if (!due) return null;
    this.lastSentAt = nowMs;
    this.dirty = false;
    this.seq += 1;
    return handPoseMessage(
      this.seq,
      nowMs / 1000,
      this.hand,
      [...this.gizmo.position],
      [...this.gizmo.orientation],
      this.gizmo.sA,
    );
  }
}
