"""Control modalities: Independent, Coordinated, and Freeze.

Every modality follows the same two-step pattern: at activation the relative
offsets between the commanding hand and the commanded frames are captured
(the activation snapshot), and afterwards the hand's motion is replayed
through those fixed offsets. Because the snapshot is taken against the
robots' current reference poses, activation and every later regrouping are
jump-free by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .impedance import StiffnessCommand
from .se3 import Pose, Rotation


class Hand(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class ClosureCommand(str, Enum):
    INCREASE = "increase"
    DECREASE = "decrease"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class HandFrame:
    """One sample of an operator hand stream: world pose, stiffness index, time."""

    hand: Hand
    pose: Pose
    s_a: float
    timestamp: float

    def __post_init__(self):
        object.__setattr__(self, "s_a", min(max(float(self.s_a), 0.0), 1.0))


class StaleHandError(RuntimeError):
    """Hand stream too old to initialize a modality against."""


def _require_fresh(hand: HandFrame, now: float | None, staleness: float):
    if now is not None and now - hand.timestamp > staleness:
        raise StaleHandError(
            f"hand sample is {now - hand.timestamp:.3f} s old (limit {staleness:.3f} s)")


# -- Independent Control ---------------------------------------------------

@dataclass(frozen=True)
class IcBinding:
    """Per-robot activation snapshot for Independent Control.

    ``rot_hand_ee`` is the hand-to-EE rotation at activation; ``offset_base``
    is the hand-to-EE translation expressed in the robot base frame (so a pure
    hand rotation does not move the commanded position).
    """

    rot_hand_ee: Rotation
    offset_base: np.ndarray


def hand_in_base(hand_pose_world: Pose, base_pose: Pose) -> Pose:
    return base_pose.inverse() @ hand_pose_world


def ic_init(hand: HandFrame, robots: list[tuple[Pose, Pose]], *,
            now: float | None = None, staleness: float = 0.2) -> list[IcBinding]:
    """Capture per-robot offsets between the hand and each EE reference pose.

    ``robots`` holds (base pose in world, EE reference pose in base frame)
    pairs. Immediately after init, ic_update reproduces each EE reference
    pose exactly.
    """
    if not robots:
        raise ValueError("independent control needs at least one robot")
    _require_fresh(hand, now, staleness)
    bindings = []
    for base_pose, ee_pose in robots:
        h = hand_in_base(hand.pose, base_pose)
        bindings.append(IcBinding(
            rot_hand_ee=h.rotation.inverse() @ ee_pose.rotation,
            offset_base=ee_pose.translation - h.translation,
        ))
    return bindings


def ic_update(binding: IcBinding, hand: HandFrame, base_pose: Pose) -> Pose:
    """Desired EE pose (base frame) for the current hand sample."""
    h = hand_in_base(hand.pose, base_pose)
    return Pose(h.rotation @ binding.rot_hand_ee,
                h.translation + binding.offset_base)


# -- Coordinated Control ---------------------------------------------------

@dataclass
class CcBinding:
    """Group activation snapshot for Coordinated Control.

    The virtual frame starts at the centroid of the member EEs, oriented as
    the hand. Members keep their activation-time rotation relative to the
    virtual frame; their translational offsets scale with ``alpha`` (the
    virtual prismatic joint), saturated in norm to [l_min, l_max].
    """

    rot_hand_v: Rotation
    offset_world: np.ndarray
    member_rot_v_ee: dict[int, Rotation]
    member_l_v_ee_ts: dict[int, np.ndarray]
    member_l_v_ee: dict[int, np.ndarray]
    alpha: float = 1.0
    l_min: float = 0.05
    l_max: float = 1.0

    def copy(self) -> "CcBinding":
        return CcBinding(
            rot_hand_v=self.rot_hand_v,
            offset_world=self.offset_world.copy(),
            member_rot_v_ee=dict(self.member_rot_v_ee),
            member_l_v_ee_ts={k: v.copy() for k, v in self.member_l_v_ee_ts.items()},
            member_l_v_ee={k: v.copy() for k, v in self.member_l_v_ee.items()},
            alpha=self.alpha,
            l_min=self.l_min,
            l_max=self.l_max,
        )


def cc_init(hand: HandFrame, robots: list[tuple[int, Pose]], *,
            l_min: float = 0.05, l_max: float = 1.0,
            now: float | None = None, staleness: float = 0.2) -> CcBinding:
    """Create the virtual frame and capture every member's offset from it.

    ``robots`` holds (robot id, EE reference pose in world frame) pairs;
    at least two members are required (a single robot is independent
    control by definition).
    """
    if len(robots) < 2:
        raise ValueError("coordinated control needs at least two robots")
    _require_fresh(hand, now, staleness)
    centroid = np.mean([p.translation for _, p in robots], axis=0)
    v_pose = Pose(hand.pose.rotation, centroid)
    v_inv = v_pose.inverse()
    rot_v_ee, l_ts, l_cur = {}, {}, {}
    for rid, ee in robots:
        rel = v_inv @ ee
        rot_v_ee[rid] = rel.rotation
        l_ts[rid] = rel.translation.copy()
        l_cur[rid] = rel.translation.copy()
    return CcBinding(
        rot_hand_v=hand.pose.rotation.inverse() @ v_pose.rotation,
        offset_world=v_pose.translation - hand.pose.translation,
        member_rot_v_ee=rot_v_ee,
        member_l_v_ee_ts=l_ts,
        member_l_v_ee=l_cur,
        l_min=l_min, l_max=l_max,
    )


def cc_closure_step(binding: CcBinding, command: ClosureCommand, dt: float,
                    epsilon: float = 0.2) -> CcBinding:
    """Integrate the virtual prismatic joint one tick.

    The whole group commits or holds together: if any member's scaled offset
    norm would leave [l_min, l_max], every offset holds at its previous value
    and alpha rolls back, preserving the grasp polygon's shape.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = {ClosureCommand.INCREASE: epsilon,
            ClosureCommand.DECREASE: -epsilon,
            ClosureCommand.NEUTRAL: 0.0}[command]
    if rate == 0.0:
        return binding
    alpha = binding.alpha + rate * dt
    candidates = {rid: l_ts * alpha for rid, l_ts in binding.member_l_v_ee_ts.items()}
    for cand in candidates.values():
        norm = float(np.linalg.norm(cand))
        if norm < binding.l_min or norm > binding.l_max:
            return binding  # hold at previous values, alpha rolled back
    out = binding.copy()
    out.alpha = alpha
    out.member_l_v_ee = candidates
    return out


def cc_virtual_frame(binding: CcBinding, hand: HandFrame) -> Pose:
    """Current virtual frame pose in the world frame."""
    return Pose(hand.pose.rotation @ binding.rot_hand_v,
                hand.pose.translation + binding.offset_world)


def cc_update(binding: CcBinding, hand: HandFrame,
              robot_bases: dict[int, Pose]) -> dict[int, Pose]:
    """Desired EE pose per member, each in its own base frame."""
    v_pose = cc_virtual_frame(binding, hand)
    out = {}
    for rid in binding.member_rot_v_ee:
        if rid not in robot_bases:
            raise KeyError(f"unknown robot id {rid}")
        rel = Pose(binding.member_rot_v_ee[rid], binding.member_l_v_ee[rid])
        out[rid] = robot_bases[rid].inverse() @ v_pose @ rel
    return out


# -- Freeze ----------------------------------------------------------------

@dataclass(frozen=True)
class FreezeSnapshot:
    """Held references plus everything needed to resume the prior modality."""

    desired: dict[int, Pose]
    stiffness: dict[int, StiffnessCommand]
    members: tuple[int, ...]
    owner: Hand
    prior_modality: str
    prior_alpha: float = 1.0
