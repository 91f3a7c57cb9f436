"""Single-threaded control loop tying everything together.

Tick ordering is fixed: ingest commands (between ticks) -> rebind groups ->
closure integration -> desired pose / stiffness update -> impedance
controllers -> plant step -> object constraints -> telemetry. Identical
input sequences therefore produce identical telemetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import modalities as mo
from .impedance import (DynamicsTerms, StiffnessCommand, build_gains,
                        compute_torque, map_stiffness)
from .kinematics import fk
from .modalities import (CcBinding, ClosureCommand, FreezeSnapshot, Hand,
                         HandFrame, IcBinding)
from .plant import ArmPlant
from .scenario import ObjectConfig, Scenario
from .se3 import Pose
from .session import (Button, ButtonEvent, Edge, Effect, Modality,
                      SessionState)


@dataclass
class RobotRuntime:
    robot_id: int
    plant: ArmPlant
    desired: Pose  # reference pose in the arm base frame; always defined
    stiffness: StiffnessCommand
    q_rest: np.ndarray = field(default_factory=lambda: np.zeros(7))
    gripper_closed: bool = False
    saturated: bool = False
    last_error: np.ndarray = field(default_factory=lambda: np.zeros(6))
    last_tau: np.ndarray | None = None

    @property
    def model(self):
        return self.plant.model


@dataclass
class ObjectRuntime:
    config: ObjectConfig
    pose: Pose
    attached: bool = False
    grasp_ids: tuple[int, ...] = ()
    grasp_offset: Pose = field(default_factory=Pose.identity)
    ref_distances: dict = field(default_factory=dict)


# wire button names handled by the session state machine
_SESSION_BUTTONS = {"s": Button.S, "f": Button.F, "trigger": Button.TRIGGER}


class TeleopEngine:
    """Deterministic co-simulation of session, modalities, controllers, plant."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.session = SessionState(scenario.arm_ids())
        self.robots: dict[int, RobotRuntime] = {}
        min_stiffness = map_stiffness(0.0, scenario.stiffness_bounds)
        for arm in scenario.arms:
            inertia = scenario.inertia
            if np.isscalar(inertia):
                inertia = np.full(arm.model.joint_count, float(inertia))
            elif inertia.shape[0] != arm.model.joint_count:
                raise ValueError("inertia length does not match joint count")
            idx = len(self.robots)
            plant = ArmPlant(
                arm.model, arm.q0,
                inertia_diag=inertia,
                gravity_torque=lambda q, i=idx: scenario.gravity_torque(i, q),
                dt=scenario.dt)
            self.robots[arm.robot_id] = RobotRuntime(
                robot_id=arm.robot_id,
                plant=plant,
                desired=fk(arm.model, arm.q0),
                stiffness=min_stiffness,
                q_rest=np.asarray(arm.q0, dtype=float).copy())
        self.objects = [ObjectRuntime(config=o, pose=Pose(translation=o.position))
                        for o in scenario.objects]
        self.hands: dict[Hand, HandFrame | None] = {Hand.LEFT: None, Hand.RIGHT: None}
        self.closure: dict[Hand, ClosureCommand] = {
            Hand.LEFT: ClosureCommand.NEUTRAL, Hand.RIGHT: ClosureCommand.NEUTRAL}
        self.bindings: dict[int, list[IcBinding] | CcBinding] = {}
        self.freeze_snapshots: dict[int, FreezeSnapshot] = {}
        self._pending_rebind: list[int] = []
        self.tick_index = 0
        self.time = 0.0
        self.warnings: list[str] = []
        self._stale_warned: set[Hand] = set()

    # -- command ingestion (call between ticks) ---------------------------

    def ingest_hand(self, hand: Hand, pose: Pose, s_a: float,
                    timestamp: float | None = None):
        t = self.time if timestamp is None else float(timestamp)
        scale = self.scenario.workspace_scale
        if scale != 1.0:
            pose = Pose(pose.rotation, pose.translation * scale)
        self.hands[hand] = HandFrame(hand=hand, pose=pose, s_a=s_a, timestamp=t)
        self._stale_warned.discard(hand)

    def ingest_button(self, hand: Hand, button: str, edge: str, robot: int | None = None):
        button = button.lower()
        e = Edge(edge)
        if button in ("close_inc", "close_dec"):
            cmd = ClosureCommand.INCREASE if button == "close_inc" else ClosureCommand.DECREASE
            if e is Edge.PRESS:
                self.closure[hand] = cmd
            elif self.closure[hand] is cmd:
                self.closure[hand] = ClosureCommand.NEUTRAL
            return
        if button.startswith("rb"):
            rid = robot if robot is not None else int(button[2:])
            ev = ButtonEvent(hand=hand, button=Button.RB, edge=e, robot=rid)
        elif button in _SESSION_BUTTONS:
            ev = ButtonEvent(hand=hand, button=_SESSION_BUTTONS[button], edge=e)
        else:
            self.warnings.append(f"unknown button {button!r}")
            return
        self._handle_effects(self.session.apply_event(ev))

    def _handle_effects(self, effects: list[Effect]):
        for eff in effects:
            if eff.kind == "warn":
                self.warnings.append(eff.message)
            elif eff.kind == "rebind":
                if eff.gid not in self._pending_rebind:
                    self._pending_rebind.append(eff.gid)
            elif eff.kind == "freeze":
                self._freeze(eff.gid)
            elif eff.kind == "unfreeze":
                pass  # the paired rebind restores the snapshot
            elif eff.kind == "gripper_toggle":
                for rid in eff.robots:
                    self.robots[rid].gripper_closed = not self.robots[rid].gripper_closed

    # -- freeze bookkeeping -----------------------------------------------

    def _freeze(self, gid: int):
        group = self.session.groups.get(gid)
        if group is None:
            return
        binding = self.bindings.get(gid)
        alpha = binding.alpha if isinstance(binding, CcBinding) else 1.0
        self.freeze_snapshots[gid] = FreezeSnapshot(
            desired={rid: self.robots[rid].desired for rid in group.members},
            stiffness={rid: self.robots[rid].stiffness for rid in group.members},
            members=tuple(group.members),
            owner=group.owner,
            prior_modality=group.modality.value,
            prior_alpha=alpha)

    # -- binding (step-1 initialization) ----------------------------------

    def desired_world(self, rid: int) -> Pose:
        r = self.robots[rid]
        return r.model.base_pose @ r.desired

    def _fresh_hand(self, hand: Hand) -> HandFrame | None:
        hf = self.hands[hand]
        if hf is None:
            return None
        if self.time - hf.timestamp > self.scenario.staleness:
            return None
        return hf

    def _rebind(self):
        still_pending = []
        for gid in self._pending_rebind:
            group = self.session.groups.get(gid)
            if group is None:
                self.freeze_snapshots.pop(gid, None)
                continue
            if group.frozen:
                continue
            hf = self._fresh_hand(group.owner)
            if hf is None:
                still_pending.append(gid)  # bind when the hand stream is live
                continue
            snapshot = self.freeze_snapshots.pop(gid, None)
            old = self.bindings.get(gid)
            if (snapshot is not None and isinstance(old, CcBinding)
                    and set(snapshot.members) == set(group.members)
                    and group.modality is Modality.CC):
                self.bindings[gid] = self._cc_resume(old, hf)
            elif group.modality is Modality.CC and len(group.members) >= 2:
                self.bindings[gid] = mo.cc_init(
                    hf, [(rid, self.desired_world(rid)) for rid in group.members],
                    l_min=self.scenario.l_min, l_max=self.scenario.l_max)
            else:
                self.bindings[gid] = mo.ic_init(
                    hf, [(self.robots[rid].model.base_pose, self.robots[rid].desired)
                         for rid in group.members])
        self._pending_rebind = still_pending
        # drop bindings of deleted groups
        for gid in list(self.bindings):
            if gid not in self.session.groups:
                del self.bindings[gid]
                self.freeze_snapshots.pop(gid, None)

    def _cc_resume(self, old: CcBinding, hf: HandFrame) -> CcBinding:
        """Remap the hand to the frozen virtual frame, keeping member offsets
        and the closure state so the group resumes exactly where it stopped."""
        rid = next(iter(old.member_rot_v_ee))
        rel = Pose(old.member_rot_v_ee[rid], old.member_l_v_ee[rid])
        v_pose = self.desired_world(rid) @ rel.inverse()
        out = old.copy()
        out.rot_hand_v = hf.pose.rotation.inverse() @ v_pose.rotation
        out.offset_world = v_pose.translation - hf.pose.translation
        return out

    # -- main loop ---------------------------------------------------------

    def tick(self):
        self._rebind()
        self._update_references()
        self._step_plants()
        self._update_objects()
        self.tick_index += 1
        self.time = self.tick_index * self.scenario.dt

    def _update_references(self):
        for gid, group in self.session.groups.items():
            if group.frozen:
                continue
            binding = self.bindings.get(gid)
            if binding is None:
                continue
            hf = self._fresh_hand(group.owner)
            if hf is None:
                if group.owner not in self._stale_warned and self.hands[group.owner]:
                    self.warnings.append(
                        f"hand {group.owner.value} stale; holding group {gid}")
                    self._stale_warned.add(group.owner)
                continue
            cmd = map_stiffness(hf.s_a, self.scenario.stiffness_bounds)
            if isinstance(binding, CcBinding):
                binding = mo.cc_closure_step(
                    binding, self.closure[group.owner],
                    self.scenario.dt, self.scenario.epsilon)
                self.bindings[gid] = binding
                bases = {rid: self.robots[rid].model.base_pose for rid in group.members}
                desired = mo.cc_update(binding, hf, bases)
                for rid, pose in desired.items():
                    self.robots[rid].desired = pose
                    self.robots[rid].stiffness = cmd
            else:
                for rid, b in zip(group.members, binding):
                    r = self.robots[rid]
                    r.desired = mo.ic_update(b, hf, r.model.base_pose)
                    r.stiffness = cmd

    def _active_wrench(self, rid: int) -> np.ndarray | None:
        total = None
        for ev in self.scenario.wrenches:
            if ev.arm == rid and ev.start <= self.time < ev.end:
                total = ev.wrench if total is None else total + ev.wrench
        if total is None:
            return None
        # schedule is world frame; the plant wants the arm base frame
        rot = self.robots[rid].model.base_pose.rotation.inverse().as_matrix()
        return np.concatenate([rot @ total[:3], rot @ total[3:]])

    def _step_plants(self):
        sc = self.scenario
        for rid, r in self.robots.items():
            n = r.model.joint_count
            cmd = r.stiffness
            gains = build_gains(cmd, xi=sc.xi, joint_count=n, kq=sc.kq,
                                q_d=r.q_rest)
            q = r.plant.state.q
            dyn = DynamicsTerms(
                M=np.diag(r.plant.inertia),
                C_qdot=np.zeros(n),
                g=r.plant.gravity_torque(q))
            result = compute_torque(
                r.model, q, r.plant.state.qd, r.desired, gains, dyn,
                damping=sc.pinv_damping)
            r.saturated = result.saturated
            r.last_error = result.error
            r.last_tau = result.tau
            r.plant.step(result.tau, self._active_wrench(rid))

    # -- carried-object kinematic constraint ------------------------------

    def _grasp_frame(self, ids: tuple[int, ...]) -> Pose:
        poses = [self.desired_world(rid) for rid in ids]
        centroid = np.mean([p.translation for p in poses], axis=0)
        return Pose(poses[0].rotation, centroid)

    def _update_objects(self):
        for obj in self.objects:
            if not obj.attached:
                grasping = tuple(
                    rid for rid, r in self.robots.items()
                    if r.gripper_closed and np.linalg.norm(
                        self.desired_world(rid).translation - obj.pose.translation)
                    <= obj.config.grasp_radius)
                if len(grasping) >= obj.config.min_grasping:
                    obj.attached = True
                    obj.grasp_ids = grasping
                    frame = self._grasp_frame(grasping)
                    obj.grasp_offset = frame.inverse() @ obj.pose
                    obj.ref_distances = self._pairwise(grasping)
                continue
            if any(not self.robots[rid].gripper_closed for rid in obj.grasp_ids):
                self._detach(obj)
                continue
            dists = self._pairwise(obj.grasp_ids)
            if any(abs(dists[k] - obj.ref_distances[k]) > obj.config.slack
                   for k in dists):
                self._detach(obj)  # grasp geometry broke; the object drops
                continue
            obj.pose = self._grasp_frame(obj.grasp_ids) @ obj.grasp_offset

    def _pairwise(self, ids: tuple[int, ...]) -> dict:
        pos = {rid: self.desired_world(rid).translation for rid in ids}
        return {(a, b): float(np.linalg.norm(pos[a] - pos[b]))
                for i, a in enumerate(ids) for b in ids[i + 1:]}

    def _detach(self, obj: ObjectRuntime):
        obj.attached = False
        obj.grasp_ids = ()
        obj.ref_distances = {}

    # -- observation -------------------------------------------------------

    def group_info(self, rid: int):
        g = self.session.group_of(rid)
        if g is None:
            return None
        binding = self.bindings.get(g.gid)
        alpha = binding.alpha if isinstance(binding, CcBinding) else 1.0
        vframe = None
        if isinstance(binding, CcBinding) and not g.frozen:
            hf = self._fresh_hand(g.owner)
            if hf is not None:
                vframe = mo.cc_virtual_frame(binding, hf)
        return g, alpha, vframe

    def telemetry_records(self) -> list[dict]:
        """One record per arm (plus one per object) for the current tick."""
        records = []
        for rid, r in self.robots.items():
            ee = r.model.base_pose @ fk(r.model, r.plant.state.q)
            des = self.desired_world(rid)
            info = self.group_info(rid)
            rec = {
                "type": "arm",
                "tick": self.tick_index,
                "time": round(self.time, 9),
                "arm": rid,
                "q": [float(v) for v in r.plant.state.q],
                "qd": [float(v) for v in r.plant.state.qd],
                "tau": None if r.last_tau is None else [float(v) for v in r.last_tau],
                "saturated": r.saturated,
                "err": [float(v) for v in r.last_error],
                "ee": _pose_fields(ee),
                "desired": _pose_fields(des),
                "k_l": r.stiffness.k_l,
                "k_w": r.stiffness.k_w,
                "gripper": r.gripper_closed,
                "modality": None,
                "owner": None,
                "frozen": False,
                "alpha": 1.0,
                "vframe": None,
            }
            if info is not None:
                g, alpha, vframe = info
                rec["modality"] = g.modality.value
                rec["owner"] = g.owner.value
                rec["frozen"] = g.frozen
                rec["alpha"] = alpha
                rec["vframe"] = None if vframe is None else _pose_fields(vframe)
            records.append(rec)
        for obj in self.objects:
            records.append({
                "type": "object",
                "tick": self.tick_index,
                "time": round(self.time, 9),
                "object": obj.config.object_id,
                "pose": _pose_fields(obj.pose),
                "attached": obj.attached,
                "grasp_ids": list(obj.grasp_ids),
            })
        return records

    def snapshot(self) -> dict:
        """Wire-level state snapshot for UI clients."""
        robots = []
        for rid, r in self.robots.items():
            ee = r.model.base_pose @ fk(r.model, r.plant.state.q)
            info = self.group_info(rid)
            entry = {
                "id": rid,
                "q": [float(v) for v in r.plant.state.q],
                "ee": _pose_fields(ee),
                "desired": _pose_fields(self.desired_world(rid)),
                "k_l": r.stiffness.k_l,
                "k_w": r.stiffness.k_w,
                "gripper": r.gripper_closed,
                "modality": None, "owner": None, "frozen": False,
                "alpha": 1.0, "vframe": None,
            }
            if info is not None:
                g, alpha, vframe = info
                entry.update(modality=g.modality.value, owner=g.owner.value,
                             frozen=g.frozen, alpha=alpha,
                             vframe=None if vframe is None else _pose_fields(vframe))
            robots.append(entry)
        return {
            "tick": self.tick_index,
            "time": round(self.time, 9),
            "robots": robots,
            "session": self.session.gui_projection().to_dict(),
            "objects": [{"id": o.config.object_id, "pose": _pose_fields(o.pose),
                         "attached": o.attached} for o in self.objects],
        }


def _pose_fields(p: Pose) -> dict:
    w, x, y, z = p.rotation.quat
    return {"pos": [float(v) for v in p.translation],
            "quat": [float(w), float(x), float(y), float(z)]}
