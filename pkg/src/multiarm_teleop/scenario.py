"""Scenario configuration: arms, bases, gains, bounds, objects, wrench
schedules. Loaded from YAML and validated before anything starts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .impedance import StiffnessBounds
from .kinematics import ArmModel, DhRow, default_arm
from .se3 import Pose, Rotation


class ConfigError(ValueError):
    """Scenario file violates the schema."""


def _pose_from_dict(d: dict | None) -> Pose:
    if not d:
        return Pose.identity()
    xyz = d.get("xyz", [0.0, 0.0, 0.0])
    rpy = d.get("rpy", [0.0, 0.0, 0.0])
    if len(xyz) != 3 or len(rpy) != 3:
        raise ConfigError("pose needs 3-element xyz and rpy")
    rot = Rotation.rot_z(rpy[2]) @ Rotation.rot_y(rpy[1]) @ Rotation.rot_x(rpy[0])
    return Pose(rot, xyz)


def _pose_to_dict(p: Pose) -> dict:
    # rpy round-trip is not needed; store quaternion for fidelity
    w, x, y, z = p.rotation.quat
    return {"xyz": [float(v) for v in p.translation], "quat": [w, x, y, z]}


@dataclass
class ArmConfig:
    robot_id: int
    model: ArmModel
    q0: np.ndarray


@dataclass
class WrenchEvent:
    arm: int
    start: float
    end: float
    wrench: np.ndarray  # force (N) then torque (Nm), world frame at the EE


@dataclass
class ObjectConfig:
    object_id: str
    position: np.ndarray
    grasp_radius: float = 0.3
    slack: float = 0.05
    min_grasping: int = 2


@dataclass
class Scenario:
    name: str
    arms: list[ArmConfig]
    dt: float = 1e-3
    xi: float = 1.0
    kq: float = 5.0
    pinv_damping: float = 1e-3
    stiffness_bounds: StiffnessBounds = field(default_factory=StiffnessBounds)
    epsilon: float = 0.2
    l_min: float = 0.05
    l_max: float = 1.0
    staleness: float = 0.2
    workspace_scale: float = 1.0
    # diagonal joint inertia shared by all arms; the default keeps the
    # task-space inertia near unit scale so critical Cartesian damping
    # behaves critically in closed loop
    inertia: np.ndarray | float = 0.1
    gravity_model: str = "none"  # none | sinusoidal
    gravity_amp: np.ndarray | None = None
    wrenches: list[WrenchEvent] = field(default_factory=list)
    objects: list[ObjectConfig] = field(default_factory=list)

    def arm_ids(self) -> list[int]:
        return [a.robot_id for a in self.arms]

    def gravity_torque(self, arm_index: int, q: np.ndarray) -> np.ndarray:
        """Model gravity torque shared by plant and controller."""
        if self.gravity_model == "none":
            return np.zeros_like(q)
        if self.gravity_model == "sinusoidal":
            amp = self.gravity_amp
            if amp is None:
                amp = np.full(q.shape[0], 2.0)
            return amp[: q.shape[0]] * np.sin(q)
        raise ConfigError(f"unknown gravity model {self.gravity_model!r}")


def _arm_model_from_dict(d: dict, robot_id: int) -> ArmModel:
    base = _pose_from_dict(d.get("base"))
    kind = d.get("model", "default")
    name = d.get("name", f"arm{robot_id}")
    if kind == "default":
        return default_arm(name=name, base_pose=base)
    if kind != "dh":
        raise ConfigError(f"arm model must be 'default' or 'dh', got {kind!r}")
    rows = d.get("dh")
    if not rows:
        raise ConfigError("dh arm model needs a 'dh' row list")
    dh = tuple(DhRow(a=float(r.get("a", 0.0)), d=float(r.get("d", 0.0)),
                     alpha=float(r.get("alpha", 0.0)),
                     theta0=float(r.get("theta0", 0.0))) for r in rows)
    n = len(dh)
    q_lower = np.asarray(d.get("q_lower", [-2.9] * n), dtype=float)
    q_upper = np.asarray(d.get("q_upper", [2.9] * n), dtype=float)
    tau_limit = np.asarray(d.get("tau_limit", [87.0] * n), dtype=float)
    flange = _pose_from_dict(d.get("flange"))
    return ArmModel(name=name, dh=dh, q_lower=q_lower, q_upper=q_upper,
                    tau_limit=tau_limit, base_pose=base, flange=flange)


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ConfigError("scenario root must be a mapping")
    arms_raw = data.get("arms")
    if not arms_raw:
        raise ConfigError("scenario needs at least one arm")
    arms = []
    seen = set()
    for d in arms_raw:
        rid = int(d.get("id", len(arms) + 1))
        if rid in seen:
            raise ConfigError(f"duplicate robot id {rid}")
        seen.add(rid)
        model = _arm_model_from_dict(d, rid)
        q0 = np.asarray(d.get("q0", [0.0] * model.joint_count), dtype=float)
        if q0.shape[0] != model.joint_count:
            raise ConfigError(f"arm {rid}: q0 length {q0.shape[0]} != {model.joint_count}")
        arms.append(ArmConfig(robot_id=rid, model=model, q0=q0))

    ctrl = data.get("controller", {})
    mod = data.get("modality", {})
    sim = data.get("sim", {})
    sb = ctrl.get("stiffness", {})
    bounds = StiffnessBounds(
        k_l_min=float(sb.get("k_l_min", 100.0)), k_l_max=float(sb.get("k_l_max", 600.0)),
        k_w_min=float(sb.get("k_w_min", 10.0)), k_w_max=float(sb.get("k_w_max", 60.0)))
    if bounds.k_l_min >= bounds.k_l_max or bounds.k_w_min >= bounds.k_w_max:
        raise ConfigError("stiffness bounds must satisfy min < max")

    dt = float(sim.get("dt", 1e-3))
    if dt <= 0:
        raise ConfigError("dt must be positive")

    inertia = sim.get("inertia", 0.1)
    inertia = float(inertia) if np.isscalar(inertia) else np.asarray(inertia, dtype=float)
    if np.any(np.asarray(inertia) <= 0):
        raise ConfigError("inertia entries must be positive")

    wrenches = []
    for w in data.get("external_wrenches", []):
        vec = np.asarray(w.get("wrench", [0.0] * 6), dtype=float)
        if vec.shape[0] != 6:
            raise ConfigError("wrench needs 6 components")
        wrenches.append(WrenchEvent(arm=int(w["arm"]), start=float(w.get("start", 0.0)),
                                    end=float(w.get("end", math.inf)), wrench=vec))

    objects = []
    for o in data.get("objects", []):
        objects.append(ObjectConfig(
            object_id=str(o.get("id", f"object{len(objects)}")),
            position=np.asarray(o.get("position", [0.0, 0.0, 0.0]), dtype=float),
            grasp_radius=float(o.get("grasp_radius", 0.3)),
            slack=float(o.get("slack", 0.05)),
            min_grasping=int(o.get("min_grasping", 2))))

    amp = sim.get("gravity_amp")
    return Scenario(
        name=str(data.get("name", "scenario")),
        arms=arms,
        dt=dt,
        xi=float(ctrl.get("xi", 1.0)),
        kq=float(ctrl.get("kq", 5.0)),
        pinv_damping=float(ctrl.get("damping", 1e-3)),
        stiffness_bounds=bounds,
        epsilon=float(mod.get("epsilon", 0.2)),
        l_min=float(mod.get("l_min", 0.05)),
        l_max=float(mod.get("l_max", 1.0)),
        staleness=float(mod.get("staleness", 0.2)),
        workspace_scale=float(mod.get("workspace_scale", 1.0)),
        inertia=inertia,  # type: ignore[arg-type]
        gravity_model=str(sim.get("gravity_model", "none")),
        gravity_amp=None if amp is None else np.asarray(amp, dtype=float),
        wrenches=wrenches,
        objects=objects,
    )


def load_scenario(path: str | Path) -> Scenario:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return scenario_from_dict(data)


def default_scenario_dict() -> dict:
    """Four arms on the corners of a 0.8 x 1.9 m rectangle, facing inward."""
    half_x, half_y = 0.95, 0.40
    corners = [
        (1, (-half_x, half_y), -math.pi / 2),
        (2, (half_x, half_y), -math.pi / 2),
        (3, (-half_x, -half_y), math.pi / 2),
        (4, (half_x, -half_y), math.pi / 2),
    ]
    bent = [0.0, 0.7, 0.0, 1.4, 0.0, 0.7, 0.0]
    return {
        "name": "four-arm-rectangle",
        "arms": [
            {"id": rid, "model": "default",
             "base": {"xyz": [x, y, 0.0], "rpy": [0.0, 0.0, yaw]},
             "q0": bent}
            for rid, (x, y), yaw in corners
        ],
        "controller": {"xi": 1.0, "kq": 5.0},
        "modality": {"epsilon": 0.2, "l_min": 0.05, "l_max": 1.0},
        "sim": {"dt": 1e-3},
    }


def default_scenario() -> Scenario:
    return scenario_from_dict(default_scenario_dict())
