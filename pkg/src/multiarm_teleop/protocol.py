"""Wire protocol: JSON messages with a versioned envelope.

Every message carries ``{"v": 1, "type": ..., "seq": ..., "t": ...}`` plus a
type-specific payload. Inbound types are ``hand_pose`` and ``button``;
outbound types are ``snapshot``, ``hello``, ``ack`` and ``error``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .modalities import Hand
from .se3 import Pose, Rotation

PROTOCOL_VERSION = 1

BUTTON_NAMES = {"s", "f", "trigger", "close_inc", "close_dec"}

QUAT_WARN_TOL = 1e-3
QUAT_REJECT_TOL = 1e-1


class ProtocolError(ValueError):
    """Malformed wire message; reported per message, connection survives."""


@dataclass
class HandPoseMsg:
    seq: int
    t: float
    hand: Hand
    pose: Pose
    s_a: float
    renormalized: bool = False


@dataclass
class ButtonMsg:
    seq: int
    t: float
    hand: Hand
    button: str
    edge: str
    robot: int | None = None


def parse_message(raw: str | bytes | dict) -> HandPoseMsg | ButtonMsg:
    if isinstance(raw, (str, bytes)):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"invalid JSON: {exc}") from exc
    else:
        data = raw
    if not isinstance(data, dict):
        raise ProtocolError("message must be a JSON object")
    if data.get("v") != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {data.get('v')!r}")
    mtype = data.get("type")
    try:
        seq = int(data["seq"])
        t = float(data["t"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError("envelope needs integer 'seq' and numeric 't'") from exc
    if mtype == "hand_pose":
        return _parse_hand_pose(data, seq, t)
    if mtype == "button":
        return _parse_button(data, seq, t)
    raise ProtocolError(f"unknown message type {mtype!r}")


def _parse_hand(data: dict) -> Hand:
    try:
        return Hand(data["hand"])
    except (KeyError, ValueError) as exc:
        raise ProtocolError("'hand' must be 'left' or 'right'") from exc


def _parse_hand_pose(data: dict, seq: int, t: float) -> HandPoseMsg:
    hand = _parse_hand(data)
    pos = data.get("position")
    quat = data.get("orientation")
    s_a = data.get("s_a", 0.0)
    if not (isinstance(pos, list) and len(pos) == 3):
        raise ProtocolError("'position' must be a 3-element list")
    if not (isinstance(quat, list) and len(quat) == 4):
        raise ProtocolError("'orientation' must be a 4-element (w,x,y,z) list")
    try:
        pos = [float(v) for v in pos]
        quat = [float(v) for v in quat]
        s_a = float(s_a)
    except (TypeError, ValueError) as exc:
        raise ProtocolError("non-numeric pose fields") from exc
    if not all(math.isfinite(v) for v in pos + quat + [s_a]):
        raise ProtocolError("non-finite pose fields")
    norm = math.sqrt(sum(v * v for v in quat))
    if abs(norm - 1.0) > QUAT_REJECT_TOL or norm == 0.0:
        raise ProtocolError(f"quaternion norm {norm:.4f} out of range")
    renormalized = abs(norm - 1.0) > QUAT_WARN_TOL
    pose = Pose(Rotation(quat), pos)
    return HandPoseMsg(seq=seq, t=t, hand=hand, pose=pose, s_a=s_a,
                       renormalized=renormalized)


def _parse_button(data: dict, seq: int, t: float) -> ButtonMsg:
    hand = _parse_hand(data)
    button = str(data.get("button", "")).lower()
    robot = data.get("robot")
    if button.startswith("rb"):
        if robot is None:
            suffix = button[2:]
            if not suffix.isdigit():
                raise ProtocolError("RB button needs a robot id")
            robot = int(suffix)
        button = "rb"
    elif button not in BUTTON_NAMES:
        raise ProtocolError(f"unknown button {button!r}")
    edge = data.get("edge")
    if edge not in ("press", "release"):
        raise ProtocolError("'edge' must be 'press' or 'release'")
    return ButtonMsg(seq=seq, t=t, hand=hand, button=button, edge=edge,
                     robot=None if robot is None else int(robot))


def hand_pose_dict(seq: int, t: float, hand: Hand, pose: Pose, s_a: float) -> dict:
    w, x, y, z = pose.rotation.quat
    return {
        "v": PROTOCOL_VERSION, "type": "hand_pose", "seq": seq, "t": t,
        "hand": hand.value,
        "position": [float(v) for v in pose.translation],
        "orientation": [float(w), float(x), float(y), float(z)],
        "s_a": float(s_a),
    }


def button_dict(seq: int, t: float, hand: Hand, button: str, edge: str,
                robot: int | None = None) -> dict:
    msg: dict[str, Any] = {
        "v": PROTOCOL_VERSION, "type": "button", "seq": seq, "t": t,
        "hand": hand.value, "button": button, "edge": edge,
    }
    if robot is not None:
        msg["robot"] = robot
    return msg


def envelope(mtype: str, seq: int, t: float, payload: dict) -> dict:
    return {"v": PROTOCOL_VERSION, "type": mtype, "seq": seq, "t": t, **payload}


def dumps(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":"), sort_keys=True)
