"""Reconfigurable multi-arm telemanipulation engine.

Maps one or two operator hand streams onto any number of simulated 7-DoF
arms through independent, coordinated, and freeze control modalities, each
arm driven by a variable Cartesian impedance controller with null-space
impedance. Regrouping and ownership changes are jump-free by construction.
"""

from .engine import TeleopEngine
from .impedance import (StiffnessBounds, StiffnessCommand, build_gains,
                        compute_torque, map_stiffness)
from .kinematics import (ArmModel, DhRow, default_arm, fk, jacobian,
                         nullspace_projector, pinv, planar_arm)
from .modalities import (CcBinding, ClosureCommand, Hand, HandFrame,
                         IcBinding, cc_closure_step, cc_init, cc_update,
                         ic_init, ic_update)
from .scenario import Scenario, default_scenario, load_scenario
from .se3 import Pose, Rotation, Twist, compose, pose_error
from .session import (Button, ButtonEvent, ControlGroup, Edge, Modality,
                      SessionState)

__version__ = "0.1.0"

__all__ = [
    "ArmModel", "Button", "ButtonEvent", "CcBinding", "ClosureCommand",
    "ControlGroup", "DhRow", "Edge", "Hand", "HandFrame", "IcBinding",
    "Modality", "Pose", "Rotation", "Scenario", "SessionState",
    "StiffnessBounds", "StiffnessCommand", "TeleopEngine", "Twist",
    "build_gains", "cc_closure_step", "cc_init", "cc_update", "compose",
    "compute_torque", "default_arm", "default_scenario", "fk", "ic_init",
    "ic_update", "jacobian", "load_scenario", "map_stiffness",
    "nullspace_projector", "pinv", "planar_arm", "pose_error",
]
