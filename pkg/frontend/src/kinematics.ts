/**
 * Forward kinematics for the served arm descriptions.
 *
 * The server's handshake carries each arm's modified-DH rows, flange and
 * base transforms; the scene rebuilds every link frame from the streamed
 * joint vector so the cockpit never hardcodes a robot.
 */
import { Matrix4, Quaternion, Vector3 } from "three";

import type { Hello, WirePose } from "./protocol";

export interface DhRow {
  a: number;
  d: number;
  alpha: number;
  theta0: number;
}

export interface ArmDescription {
  id: number;
  dh: DhRow[];
  base: Matrix4;
  flange: Matrix4;
  q0: number[];
}

export function matrixFromXyzQuat(
  xyz: [number, number, number],
  quatWxyz: [number, number, number, number],
): Matrix4 {
  const [w, x, y, z] = quatWxyz;
  return new Matrix4().compose(
    new Vector3(...xyz),
    new Quaternion(x, y, z, w),
    new Vector3(1, 1, 1),
  );
}

export function matrixFromWirePose(pose: WirePose): Matrix4 {
  const [w, x, y, z] = pose.quat;
  return new Matrix4().compose(
    new Vector3(...pose.pos),
    new Quaternion(x, y, z, w),
    new Vector3(1, 1, 1),
  );
}

export function armsFromHello(hello: Hello): ArmDescription[] {
  return hello.arms.map((arm) => ({
    id: arm.id,
    dh: arm.dh.map((r) => ({ ...r })),
    base: matrixFromXyzQuat(arm.base.xyz, arm.base.quat),
    flange: matrixFromXyzQuat(arm.flange.xyz, arm.flange.quat),
    q0: [...arm.q0],
  }));
}

/** Modified DH step: RotX(alpha) * TransX(a) * RotZ(theta) * TransZ(d). */
export function dhTransform(row: DhRow, q: number): Matrix4 {
  const theta = q + row.theta0;
  const ct = Math.cos(theta);
  const st = Math.sin(theta);
  const ca = Math.cos(row.alpha);
  const sa = Math.sin(row.alpha);
  const m = new Matrix4();
  // prettier-ignore
  m.set(
    ct,       -st,      0,   row.a,
    st * ca,  ct * ca,  -sa, -sa * row.d,
    st * sa,  ct * sa,  ca,  ca * row.d,
    0,        0,        0,   1,
  );
  return m;
}

/** Every joint frame plus the end-effector frame, in the arm base frame. */
export function jointFrames(arm: ArmDescription, q: number[]): Matrix4[] {
  if (q.length !== arm.dh.length) {
    throw new Error(
      `arm ${arm.id}: expected ${arm.dh.length} joints, got ${q.length}`,
    );
  }
  const frames: Matrix4[] = [];
  const t = new Matrix4();
  arm.dh.forEach((row, i) => {
    t.multiply(dhTransform(row, q[i]));
    frames.push(t.clone());
  });
  frames.push(t.clone().multiply(arm.flange));
  return frames;
}

/** End-effector pose in the world frame. */
export function forwardKinematicsWorld(
  arm: ArmDescription,
  q: number[],
): Matrix4 {
  const frames = jointFrames(arm, q);
  return arm.base.clone().multiply(frames[frames.length - 1]);
}
