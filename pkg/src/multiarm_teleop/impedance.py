"""Variable Cartesian impedance torque law with null-space impedance,
plus the operator stiffness-index mapping.

The Cartesian stiffness is block-diagonal (linear / rotational scalars on
the diagonal) and damping is per-axis critical: D = 2*xi*sqrt(K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import (ArmModel, jacobian_from_frames, joint_frames,
                         nullspace_projector)
from .se3 import Pose, pose_error


class ControllerFault(RuntimeError):
    """Non-finite value reached the torque computation."""


@dataclass(frozen=True)
class StiffnessBounds:
    """Saturation range for the commanded stiffness pair."""

    k_l_min: float = 100.0
    k_l_max: float = 600.0
    k_w_min: float = 10.0
    k_w_max: float = 60.0


@dataclass(frozen=True)
class StiffnessCommand:
    """Linear [N/m] and rotational [Nm/rad] stiffness scalars."""

    k_l: float
    k_w: float


def map_stiffness(s_a: float, bounds: StiffnessBounds = StiffnessBounds()) -> StiffnessCommand:
    """Affine map from the normalized operator stiffness index to (k_l, k_w).

    s_a outside [0, 1] is clamped; the output therefore never leaves the
    saturation bounds.
    """
    if not math.isfinite(s_a):
        raise ValueError("stiffness index must be finite")
    s = min(max(float(s_a), 0.0), 1.0)
    k_l = bounds.k_l_min + (bounds.k_l_max - bounds.k_l_min) * s
    k_w = bounds.k_w_min + (bounds.k_w_max - bounds.k_w_min) * s
    k_l = min(max(k_l, bounds.k_l_min), bounds.k_l_max)
    k_w = min(max(k_w, bounds.k_w_min), bounds.k_w_max)
    return StiffnessCommand(k_l, k_w)


@dataclass
class ImpedanceGains:
    """Full gain set for one arm: Cartesian K/D, joint-space Kq/Dq, null-space target."""

    K: np.ndarray
    D: np.ndarray
    Kq: np.ndarray
    Dq: np.ndarray
    q_d: np.ndarray


def build_gains(cmd: StiffnessCommand, xi: float = 1.0, joint_count: int = 7,
                kq: float = 5.0, q_d=None) -> ImpedanceGains:
    """Assemble the 6x6 Cartesian gain matrices and the joint-space pair.

    K = blockdiag(k_l*I3, k_w*I3); D = 2*xi*sqrt(K) per axis; Kq = kq*I with
    matching critical damping. The null-space target defaults to zero to keep
    joints away from their limits.
    """
    if xi < 0:
        raise ValueError("damping factor must be >= 0")
    k_diag = np.array([cmd.k_l] * 3 + [cmd.k_w] * 3, dtype=float)
    kq_diag = np.full(joint_count, float(kq))
    if q_d is None:
        q_d = np.zeros(joint_count)
    return ImpedanceGains(
        K=np.diag(k_diag),
        D=np.diag(2.0 * xi * np.sqrt(k_diag)),
        Kq=np.diag(kq_diag),
        Dq=np.diag(2.0 * xi * np.sqrt(kq_diag)),
        q_d=np.asarray(q_d, dtype=float).reshape(joint_count),
    )


@dataclass
class DynamicsTerms:
    """Model-based feedforward terms: inertia, Coriolis torque, gravity torque."""

    M: np.ndarray
    C_qdot: np.ndarray
    g: np.ndarray


@dataclass
class TorqueResult:
    tau: np.ndarray
    saturated: bool
    error: np.ndarray  # 6-vector pose error used by the law


def compute_torque(model: ArmModel, q, qdot, desired: Pose, gains: ImpedanceGains,
                   dyn: DynamicsTerms, qddot_ref=None,
                   damping: float = 1e-3) -> TorqueResult:
    """Impedance torque for one arm.

    tau = J^T (K x_err + D xdot_err) + N (Kq (q_d - q) - Dq qdot)
          + M qddot_ref + C qdot + g
    with xdot_err = -J qdot (no desired-velocity feedforward). The output is
    clamped to the per-joint torque limits; clamping is reported, not raised.
    """
    q = model.check_joint_vector(q)
    qdot = model.check_joint_vector(qdot)
    n = model.joint_count
    if qddot_ref is None:
        qddot_ref = np.zeros(n)
    qddot_ref = model.check_joint_vector(qddot_ref)

    frames = joint_frames(model, q)
    jac = jacobian_from_frames(frames)
    x_err = pose_error(desired, Pose.from_matrix(frames[-1])).as_vector()
    xdot_err = -jac @ qdot

    tau_task = jac.T @ (gains.K @ x_err + gains.D @ xdot_err)
    proj = nullspace_projector(jac, damping)
    tau_null = proj @ (gains.Kq @ (gains.q_d - q) - gains.Dq @ qdot)
    tau = tau_task + tau_null + dyn.M @ qddot_ref + np.asarray(dyn.C_qdot, dtype=float).reshape(n) \
        + np.asarray(dyn.g, dtype=float).reshape(n)

    if not np.all(np.isfinite(tau)):
        raise ControllerFault(f"{model.name}: non-finite torque")

    clamped = np.clip(tau, -model.tau_limit, model.tau_limit)
    saturated = bool(np.any(clamped != tau))
    return TorqueResult(tau=clamped, saturated=saturated, error=x_err)
