/**
 * 3D scene: arms rebuilt from the served DH chains, desired-pose ghosts,
 * virtual-frame markers and carried objects.
 *
 * Only scene-graph math lives here (renderer-agnostic, so tests can run
 * headless); index.ts attaches a WebGLRenderer in the browser.
 */
import {
  AxesHelper,
  BoxGeometry,
  CylinderGeometry,
  Group,
  Matrix4,
  Mesh,
  MeshLambertMaterial,
  Object3D,
  Scene,
  SphereGeometry,
  Vector3,
} from "three";

import {
  jointFrames,
  matrixFromWirePose,
  type ArmDescription,
} from "./kinematics";
import type { Snapshot } from "./protocol";

const LINK_RADIUS = 0.02;

interface ArmView {
  arm: ArmDescription;
  root: Group;
  joints: Object3D[];
  links: Mesh[];
  eeMarker: Object3D;
  desiredGhost: Object3D;
  vframeMarker: Object3D;
}

export class CockpitScene {
  readonly scene = new Scene();
  private arms = new Map<number, ArmView>();
  private objects = new Map<string, Mesh>();

  buildArms(arms: ArmDescription[]): void {
    for (const view of this.arms.values()) this.scene.remove(view.root);
    this.arms.clear();
    for (const arm of arms) {
      const root = new Group();
      root.matrixAutoUpdate = false;
      root.matrix.copy(arm.base);
      const joints: Object3D[] = [];
      const links: Mesh[] = [];
      const n = arm.dh.length + 1; // joint frames plus the EE frame
      for (let i = 0; i < n; i++) {
        const joint = new Object3D();
        joint.matrixAutoUpdate = false;
        root.add(joint);
        joints.push(joint);
        if (i > 0) {
          const link = new Mesh(
            new CylinderGeometry(LINK_RADIUS, LINK_RADIUS, 1, 8),
            new MeshLambertMaterial({ color: 0x4488cc }),
          );
          link.matrixAutoUpdate = false;
          root.add(link);
          links.push(link);
        }
      }
      const eeMarker = new AxesHelper(0.08);
      eeMarker.matrixAutoUpdate = false;
      root.add(eeMarker);
      const desiredGhost = new Mesh(
        new SphereGeometry(0.015, 12, 12),
        new MeshLambertMaterial({ color: 0x44cc66, transparent: true, opacity: 0.6 }),
      );
      desiredGhost.matrixAutoUpdate = false;
      this.scene.add(desiredGhost); // ghosts live in world space
      const vframeMarker = new AxesHelper(0.12);
      vframeMarker.matrixAutoUpdate = false;
      vframeMarker.visible = false;
      this.scene.add(vframeMarker);
      this.scene.add(root);
      this.arms.set(arm.id, {
        arm,
        root,
        joints,
        links,
        eeMarker,
        desiredGhost,
        vframeMarker,
      });
    }
  }

  applySnapshot(snapshot: Snapshot): void {
    for (const robot of snapshot.robots) {
      const view = this.arms.get(robot.id);
      if (!view) continue;
      const frames = jointFrames(view.arm, robot.q);
      frames.forEach((frame, i) => view.joints[i].matrix.copy(frame));
      view.eeMarker.matrix.copy(frames[frames.length - 1]);
      this.layoutLinks(view, frames);
      view.desiredGhost.matrix.copy(matrixFromWirePose(robot.desired));
      if (robot.vframe) {
        view.vframeMarker.visible = true;
        view.vframeMarker.matrix.copy(matrixFromWirePose(robot.vframe));
      } else {
        view.vframeMarker.visible = false;
      }
    }
    for (const obj of snapshot.objects) {
      let mesh = this.objects.get(obj.id);
      if (!mesh) {
        mesh = new Mesh(
          new BoxGeometry(0.15, 0.15, 0.05),
          new MeshLambertMaterial({ color: 0xcc8844 }),
        );
        mesh.matrixAutoUpdate = false;
        this.scene.add(mesh);
        this.objects.set(obj.id, mesh);
      }
      mesh.matrix.copy(matrixFromWirePose(obj.pose));
      (mesh.material as MeshLambertMaterial).color.setHex(
        obj.attached ? 0x44cc44 : 0xcc8844,
      );
    }
  }

  /** World position of an arm's rendered end effector (tests/tooltips). */
  endEffectorWorld(robotId: number): Vector3 | null {
    const view = this.arms.get(robotId);
    if (!view) return null;
    const world = new Matrix4()
      .copy(view.root.matrix)
      .multiply(view.eeMarker.matrix);
    return new Vector3().setFromMatrixPosition(world);
  }

  private layoutLinks(view: ArmView, frames: Matrix4[]): void {
    for (let i = 1; i < frames.length; i++) {
      const a = new Vector3().setFromMatrixPosition(frames[i - 1]);
      const b = new Vector3().setFromMatrixPosition(frames[i]);
      const link = view.links[i - 1];
      const length = a.distanceTo(b);
      if (length < 1e-6) {
        link.visible = false;
        continue;
      }
      link.visible = true;
      const mid = a.clone().add(b).multiplyScalar(0.5);
      const dir = b.clone().sub(a).normalize();
      const up = new Vector3(0, 1, 0); // cylinder's own axis
      const m = new Matrix4();
      const obj = new Object3D();
      obj.position.copy(mid);
      obj.quaternion.setFromUnitVectors(up, dir);
      obj.scale.set(1, length, 1);
      obj.updateMatrix();
      m.copy(obj.matrix);
      link.matrix.copy(m);
    }
  }
}
