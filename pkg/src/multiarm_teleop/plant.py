"""Fixed-timestep torque-level plant: semi-implicit Euler joint dynamics
with diagonal constant inertia, optional gravity model, external wrenches
applied at the end-effector, and hard joint limits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import ArmModel, jacobian


class SimulationFault(RuntimeError):
    """Non-finite input reached the integrator; state kept for post-mortem."""


@dataclass
class ArmPlantState:
    q: np.ndarray
    qd: np.ndarray


class ArmPlant:
    """One arm's joint dynamics. C is zero; gravity torque comes from a
    caller-supplied provider so the controller can compensate it exactly."""

    def __init__(self, model: ArmModel, q0, inertia_diag=None,
                 gravity_torque=None, dt: float = 1e-3):
        self.model = model
        n = model.joint_count
        self.dt = float(dt)
        self.state = ArmPlantState(q=model.check_joint_vector(q0).copy(),
                                   qd=np.zeros(n))
        if inertia_diag is None:
            inertia_diag = np.ones(n)
        self.inertia = np.asarray(inertia_diag, dtype=float).reshape(n)
        if np.any(self.inertia <= 0):
            raise ValueError("inertia must be positive definite")
        self.gravity_torque = gravity_torque or (lambda q: np.zeros(n))

    def step(self, tau, ext_wrench=None) -> ArmPlantState:
        """Advance one timestep. ``ext_wrench`` is a 6-vector force/torque
        applied at the EE, expressed in the arm base frame."""
        tau = np.asarray(tau, dtype=float).reshape(self.model.joint_count)
        if not np.all(np.isfinite(tau)):
            raise SimulationFault(f"{self.model.name}: non-finite torque input")
        q, qd = self.state.q, self.state.qd
        rhs = tau - self.gravity_torque(q)
        if ext_wrench is not None:
            jac = jacobian(self.model, q)
            rhs = rhs + jac.T @ np.asarray(ext_wrench, dtype=float).reshape(6)
        qdd = rhs / self.inertia
        qd = qd + qdd * self.dt
        q = q + qd * self.dt
        # joint-limit contact: clamp and kill velocity into the limit
        low, high = self.model.q_lower, self.model.q_upper
        hit_low = q < low
        hit_high = q > high
        q = np.clip(q, low, high)
        qd = np.where(hit_low & (qd < 0), 0.0, qd)
        qd = np.where(hit_high & (qd > 0), 0.0, qd)
        self.state = ArmPlantState(q=q, qd=qd)
        return self.state
