import numpy as np
import pytest

from multiarm_teleop.engine import TeleopEngine
from multiarm_teleop.modalities import Hand
from multiarm_teleop.scenario import scenario_from_dict
from multiarm_teleop.se3 import Pose, Rotation

BENT = [0.0, 0.7, 0.0, 1.4, 0.0, 0.7, 0.0]


def small_scenario(n_arms=2, **sim_overrides):
    sim = {"dt": 1e-3}
    sim.update(sim_overrides)
    return scenario_from_dict({
        "name": "test",
        "arms": [
            {"id": i + 1, "model": "default",
             "base": {"xyz": [0.0, 0.7 * i, 0.0]},
             "q0": BENT}
            for i in range(n_arms)
        ],
        "sim": sim,
    })


def click(engine, hand, button, robot=None):
    engine.ingest_button(hand, button, "press", robot)
    engine.ingest_button(hand, button, "release", robot)


def select(engine, hand, robots):
    engine.ingest_button(hand, "s", "press")
    for rid in robots:
        click(engine, hand, f"rb{rid}")
    engine.ingest_button(hand, "s", "release")


def wavy_hand_pose(t, offset=(0.0, 0.3, 0.5)):
    """Smooth 6-DoF trajectory for continuity checks."""
    pos = np.array(offset) + 0.05 * np.array([
        np.sin(1.3 * t), np.cos(0.9 * t), np.sin(0.7 * t + 0.4)])
    rot = (Rotation.rot_z(0.4 * np.sin(0.8 * t))
           @ Rotation.rot_y(0.3 * np.sin(1.1 * t + 0.2)))
    return Pose(rot, pos)


@pytest.fixture
def engine2():
    eng = TeleopEngine(small_scenario(2))
    eng.ingest_hand(Hand.LEFT, wavy_hand_pose(0.0), 0.5)
    eng.ingest_hand(Hand.RIGHT, wavy_hand_pose(0.0, offset=(0.3, 0.4, 0.5)), 0.5)
    return eng
