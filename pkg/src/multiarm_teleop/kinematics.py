"""Serial-chain kinematics: forward kinematics, geometric Jacobian,
damped pseudo-inverse and null-space projector.

Chains are described with modified (Craig) DH rows plus an optional flange
transform, all loaded from the scenario file; nothing robot-specific is
hard-coded here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .se3 import Pose, Rotation

DEFAULT_DAMPING = 1e-3


class DimensionError(ValueError):
    """Joint vector length does not match the arm model."""


@dataclass(frozen=True)
class DhRow:
    """One modified-DH row: link offset a [m], joint offset d [m],
    twist alpha [rad], joint angle offset theta0 [rad]."""

    a: float = 0.0
    d: float = 0.0
    alpha: float = 0.0
    theta0: float = 0.0


@dataclass(frozen=True)
class ArmModel:
    """Kinematic description of one serial arm.

    ``flange`` is the fixed transform from the last joint frame to the
    end-effector frame (modified DH leaves the last link length outside
    the joint rows).
    """

    name: str
    dh: tuple[DhRow, ...]
    q_lower: np.ndarray
    q_upper: np.ndarray
    tau_limit: np.ndarray
    base_pose: Pose = field(default_factory=Pose.identity)
    flange: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        n = len(self.dh)
        if n < 1:
            raise ValueError("arm needs at least one joint")
        object.__setattr__(self, "q_lower", np.asarray(self.q_lower, dtype=float).reshape(n))
        object.__setattr__(self, "q_upper", np.asarray(self.q_upper, dtype=float).reshape(n))
        object.__setattr__(self, "tau_limit", np.asarray(self.tau_limit, dtype=float).reshape(n))
        if np.any(self.q_lower >= self.q_upper):
            raise ValueError("joint limits must satisfy lower < upper")

    @property
    def joint_count(self) -> int:
        return len(self.dh)

    def check_joint_vector(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape[0] != self.joint_count:
            raise DimensionError(
                f"{self.name}: expected {self.joint_count} joints, got {q.shape[0]}")
        return q

    def reach(self) -> float:
        """Conservative reach bound: sum of all link length parameters."""
        total = sum(abs(r.a) + abs(r.d) for r in self.dh)
        total += float(np.linalg.norm(self.flange.translation))
        return total


def _dh_transform(row: DhRow, theta: float) -> np.ndarray:
    """Modified DH: frame i-1 -> i is RotX(alpha)*TransX(a)*RotZ(th)*TransZ(d)."""
    ct, st = math.cos(theta + row.theta0), math.sin(theta + row.theta0)
    ca, sa = math.cos(row.alpha), math.sin(row.alpha)
    return np.array([
        [ct, -st, 0.0, row.a],
        [st * ca, ct * ca, -sa, -sa * row.d],
        [st * sa, ct * sa, ca, ca * row.d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def joint_frames(model: ArmModel, q) -> list[np.ndarray]:
    """4x4 transforms of every joint frame plus the EE frame, in the base frame."""
    q = model.check_joint_vector(q)
    frames = []
    t = np.eye(4)
    for row, qi in zip(model.dh, q):
        t = t @ _dh_transform(row, qi)
        frames.append(t.copy())
    frames.append(t @ model.flange.as_matrix())
    return frames


def fk(model: ArmModel, q) -> Pose:
    """End-effector pose in the arm base frame."""
    return Pose.from_matrix(joint_frames(model, q)[-1])


def jacobian_from_frames(frames: list[np.ndarray]) -> np.ndarray:
    p_ee = frames[-1][:3, 3]
    jac = np.zeros((6, len(frames) - 1))
    for i, frame in enumerate(frames[:-1]):
        z = frame[:3, 2]
        p = frame[:3, 3]
        jac[:3, i] = np.cross(z, p_ee - p)
        jac[3:, i] = z
    return jac


def jacobian(model: ArmModel, q) -> np.ndarray:
    """Geometric Jacobian (6 x n) mapping qdot to the EE twist in the base frame."""
    return jacobian_from_frames(joint_frames(model, q))


def pinv(jac: np.ndarray, damping: float = DEFAULT_DAMPING) -> np.ndarray:
    """Damped least-squares pseudo-inverse J^T (J J^T + lambda^2 I)^-1.

    At damping 0 this falls back to the exact Moore-Penrose inverse.
    """
    if damping < 0:
        raise ValueError("damping must be >= 0")
    jac = np.asarray(jac, dtype=float)
    if damping == 0.0:
        return np.linalg.pinv(jac)
    m = jac.shape[0]
    return jac.T @ np.linalg.inv(jac @ jac.T + damping ** 2 * np.eye(m))


def nullspace_projector(jac: np.ndarray, damping: float = DEFAULT_DAMPING) -> np.ndarray:
    """N = I - J^T (J^dagger)^T; torques through N exert no EE wrench."""
    jac = np.asarray(jac, dtype=float)
    n = jac.shape[1]
    return np.eye(n) - jac.T @ pinv(jac, damping).T


# -- stock chains ----------------------------------------------------------

def planar_arm(lengths, name: str = "planar") -> ArmModel:
    """Planar chain in the xy-plane, one revolute z-joint per link length.

    Used as a hand-checkable oracle model in tests.
    """
    lengths = [float(v) for v in lengths]
    rows = [DhRow()] + [DhRow(a=l) for l in lengths[:-1]]
    n = len(lengths)
    return ArmModel(
        name=name,
        dh=tuple(rows),
        q_lower=-np.full(n, 2 * math.pi),
        q_upper=np.full(n, 2 * math.pi),
        tau_limit=np.full(n, 100.0),
        flange=Pose.from_translation(lengths[-1], 0.0, 0.0),
    )


def default_arm(name: str = "arm", base_pose: Pose | None = None) -> ArmModel:
    """Stand-in 7-DoF chain (reach about 0.85 m).

    Generic anthropomorphic layout: shoulder sphere, elbow, wrist sphere.
    Not calibrated against any commercial arm.
    """
    rows = (
        DhRow(d=0.30),
        DhRow(alpha=-math.pi / 2),
        DhRow(d=0.25, alpha=math.pi / 2),
        DhRow(alpha=math.pi / 2),
        DhRow(d=0.20, alpha=-math.pi / 2),
        DhRow(alpha=math.pi / 2),
        DhRow(alpha=math.pi / 2),
    )
    return ArmModel(
        name=name,
        dh=rows,
        q_lower=np.array([-2.9, -1.8, -2.9, -3.0, -2.9, -1.8, -2.9]),
        q_upper=np.array([2.9, 1.8, 2.9, 3.0, 2.9, 1.8, 2.9]),
        tau_limit=np.array([87.0, 87.0, 87.0, 87.0, 12.0, 12.0, 12.0]),
        base_pose=base_pose if base_pose is not None else Pose.identity(),
        flange=Pose.from_translation(0.0, 0.0, 0.10),
    )
