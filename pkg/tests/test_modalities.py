import math

import numpy as np
import pytest

from multiarm_teleop.modalities import (CcBinding, ClosureCommand, Hand,
                                        HandFrame, StaleHandError,
                                        cc_closure_step, cc_init, cc_update,
                                        cc_virtual_frame, ic_init, ic_update)
from multiarm_teleop.se3 import Pose, Rotation


def hf(pose, s_a=0.5, t=0.0, hand=Hand.LEFT):
    return HandFrame(hand=hand, pose=pose, s_a=s_a, timestamp=t)


IDENT = Pose.identity()


class TestIcInit:
    def test_hand_equals_ee(self):
        hand = hf(Pose.from_translation(0.2, 0.1, 0.3))
        [b] = ic_init(hand, [(IDENT, hand.pose)])
        assert b.rot_hand_ee.allclose(Rotation.identity())
        assert np.allclose(b.offset_base, 0, atol=1e-12)

    def test_unrotated_offset(self):
        hand = hf(IDENT)
        [b] = ic_init(hand, [(IDENT, Pose.from_translation(0.5, 0, 0.2))])
        assert np.allclose(b.offset_base, [0.5, 0, 0.2])

    def test_rotated_hand_oracle(self):
        # hand rotated +90deg about z, EE unrotated at (0.5, 0, 0)
        hand = hf(Pose(Rotation.rot_z(math.pi / 2)))
        [b] = ic_init(hand, [(IDENT, Pose.from_translation(0.5, 0, 0))])
        assert b.rot_hand_ee.allclose(Rotation.rot_z(-math.pi / 2))
        # offset expressed in base frame stays the plain difference
        assert np.allclose(b.offset_base, [0.5, 0, 0])

    def test_empty_refused(self):
        with pytest.raises(ValueError):
            ic_init(hf(IDENT), [])

    def test_stale_refused(self):
        with pytest.raises(StaleHandError):
            ic_init(hf(IDENT, t=0.0), [(IDENT, IDENT)], now=1.0, staleness=0.2)


class TestIcUpdate:
    def test_continuity_at_activation(self):
        hand = hf(Pose(Rotation.rot_y(0.3), (0.1, 0.2, 0.3)))
        ee = Pose(Rotation.rot_x(0.5), (0.4, -0.1, 0.6))
        [b] = ic_init(hand, [(IDENT, ee)])
        assert ic_update(b, hand, IDENT).allclose(ee, atol=1e-12)

    def test_translation_transfers_exactly(self):
        hand0 = hf(IDENT)
        ee = Pose.from_translation(0.5, 0, 0.2)
        [b] = ic_init(hand0, [(IDENT, ee)])
        hand1 = hf(Pose.from_translation(0, 0.1, 0))
        out = ic_update(b, hand1, IDENT)
        assert np.allclose(out.translation - ee.translation, [0, 0.1, 0],
                           atol=1e-12)

    def test_rotation_in_place_keeps_position(self):
        hand0 = hf(Pose(Rotation.rot_x(0.2), (0.1, 0.0, 0.0)))
        ee = Pose(Rotation.rot_z(0.7), (0.5, 0.1, 0.3))
        [b] = ic_init(hand0, [(IDENT, ee)])
        hand1 = hf(Pose(Rotation.rot_z(math.pi / 4) @ hand0.pose.rotation,
                        hand0.pose.translation))
        out = ic_update(b, hand1, IDENT)
        assert np.allclose(out.translation, ee.translation, atol=1e-12)
        expected_rot = Rotation.rot_z(math.pi / 4) @ ee.rotation
        assert out.rotation.allclose(expected_rot)

    def test_nonidentity_base(self):
        base = Pose(Rotation.rot_z(0.5), (1.0, -0.5, 0.2))
        ee_base = Pose(Rotation.rot_y(0.3), (0.4, 0.1, 0.5))
        hand0 = hf(Pose.from_translation(0.0, 0.0, 0.5))
        [b] = ic_init(hand0, [(base, ee_base)])
        assert ic_update(b, hand0, base).allclose(ee_base, atol=1e-12)
        # world-frame hand translation d moves the world EE target by d
        d = np.array([0.02, -0.01, 0.04])
        hand1 = hf(Pose.from_translation(*(hand0.pose.translation + d)))
        out_world = base @ ic_update(b, hand1, base)
        ref_world = base @ ee_base
        assert np.allclose(out_world.translation - ref_world.translation, d,
                           atol=1e-12)

    def test_rigidity_invariant(self):
        rng = np.random.default_rng(0)
        hand0 = hf(Pose(Rotation.rot_x(0.1), (0.0, 0.0, 0.4)))
        ee = Pose(Rotation.rot_y(-0.4), (0.5, 0.2, 0.1))
        [b] = ic_init(hand0, [(IDENT, ee)])
        for _ in range(100):
            v = rng.normal(size=4)
            pose = Pose(Rotation(v / np.linalg.norm(v)), rng.uniform(-1, 1, 3))
            out = ic_update(b, hf(pose), IDENT)
            rel = pose.rotation.inverse() @ out.rotation
            assert rel.allclose(b.rot_hand_ee, atol=1e-9)


def two_robot_setup():
    return [(1, Pose.from_translation(1, 0, 0)), (2, Pose.from_translation(0, 1, 0))]


class TestCcInit:
    def test_midpoint(self):
        b = cc_init(hf(IDENT), two_robot_setup())
        frame = cc_virtual_frame(b, hf(IDENT))
        assert np.allclose(frame.translation, [0.5, 0.5, 0])
        assert frame.rotation.allclose(Rotation.identity())

    def test_three_robot_centroid(self):
        robots = [(1, Pose.from_translation(1, 0, 0)),
                  (2, Pose.from_translation(0, 1, 0)),
                  (3, Pose.from_translation(0, 0, 1))]
        b = cc_init(hf(IDENT), robots)
        frame = cc_virtual_frame(b, hf(IDENT))
        assert np.allclose(frame.translation, [1 / 3] * 3)

    def test_oriented_as_hand(self):
        hand = hf(Pose(Rotation.rot_x(math.pi / 6), (0.2, 0.0, 0.5)))
        robots = [(1, Pose(Rotation.rot_y(math.pi / 2), (0.5, 0, 0))),
                  (2, Pose(Rotation.rot_y(-math.pi / 2), (-0.5, 0, 0)))]
        b = cc_init(hand, robots)
        frame = cc_virtual_frame(b, hand)
        assert frame.rotation.allclose(Rotation.rot_x(math.pi / 6))
        # per-robot offsets reproduce the activation poses through the frame
        for rid, ee in robots:
            rebuilt = frame @ Pose(b.member_rot_v_ee[rid], b.member_l_v_ee[rid])
            assert rebuilt.allclose(ee, atol=1e-12)

    def test_single_robot_refused(self):
        with pytest.raises(ValueError):
            cc_init(hf(IDENT), [(1, IDENT)])


class TestClosure:
    def _binding(self, l_min=0.05, l_max=1.0):
        return cc_init(hf(IDENT), two_robot_setup(), l_min=l_min, l_max=l_max)

    def test_neutral_unchanged(self):
        b = self._binding()
        out = cc_closure_step(b, ClosureCommand.NEUTRAL, 0.5)
        assert out.alpha == pytest.approx(1.0)

    def test_increase_integrates(self):
        b = self._binding()
        for _ in range(100):
            b = cc_closure_step(b, ClosureCommand.INCREASE, 0.01, epsilon=0.2)
        assert b.alpha == pytest.approx(1.2)
        for rid in (1, 2):
            assert np.allclose(b.member_l_v_ee[rid],
                               b.member_l_v_ee_ts[rid] * 1.2)

    def test_saturation_holds_previous(self):
        # offsets have norm sqrt(0.5); cap max slightly above that
        b = self._binding(l_max=0.75)
        last_ok = None
        for _ in range(500):
            nxt = cc_closure_step(b, ClosureCommand.INCREASE, 0.01, epsilon=0.2)
            if nxt.alpha == b.alpha:
                last_ok = b
                break
            b = nxt
        assert last_ok is not None
        norms = [np.linalg.norm(v) for v in last_ok.member_l_v_ee.values()]
        assert all(n <= 0.75 + 1e-12 for n in norms)
        # oracle: step-by-step bound alpha* = l_max / ||l_ts||
        assert last_ok.alpha <= 0.75 / math.sqrt(0.5) + 1e-9

    def test_group_wide_hold(self):
        robots = [(1, Pose.from_translation(0.2, 0, 0)),
                  (2, Pose.from_translation(-0.9, 0, 0))]
        b = cc_init(hf(IDENT), robots, l_min=0.05, l_max=1.0)
        # robot 2 saturates first (norm 0.55 vs 0.35 after centroid shift)
        for _ in range(2000):
            b = cc_closure_step(b, ClosureCommand.INCREASE, 0.01, epsilon=0.2)
        r1 = np.linalg.norm(b.member_l_v_ee[1])
        r2 = np.linalg.norm(b.member_l_v_ee[2])
        # both stop at the same alpha; relative geometry preserved
        assert r1 / np.linalg.norm(b.member_l_v_ee_ts[1]) == pytest.approx(
            r2 / np.linalg.norm(b.member_l_v_ee_ts[2]))

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            cc_closure_step(self._binding(), ClosureCommand.NEUTRAL, 0.0)


class TestCcUpdate:
    BASES = {1: IDENT, 2: IDENT}

    def test_continuity_at_activation(self):
        hand = hf(Pose(Rotation.rot_z(0.3), (0.2, 0.1, 0.5)))
        robots = two_robot_setup()
        b = cc_init(hand, robots)
        out = cc_update(b, hand, self.BASES)
        for rid, ee in robots:
            assert out[rid].allclose(ee, atol=1e-12)

    def test_rigid_translation(self):
        hand0 = hf(IDENT)
        b = cc_init(hand0, two_robot_setup())
        d = np.array([0.1, -0.05, 0.2])
        out = cc_update(b, hf(Pose.from_translation(*d)), self.BASES)
        assert np.allclose(out[1].translation, [1, 0, 0] + d, atol=1e-12)
        assert np.allclose(out[2].translation, [0, 1, 0] + d, atol=1e-12)
        centroid = (out[1].translation + out[2].translation) / 2
        assert np.allclose(centroid, [0.5, 0.5, 0] + d, atol=1e-12)

    def test_rotation_isometry(self):
        hand0 = hf(IDENT)
        b = cc_init(hand0, two_robot_setup())
        theta = 0.8
        out = cc_update(b, hf(Pose(Rotation.rot_z(theta))), self.BASES)
        d0 = math.sqrt(2)  # initial separation
        d1 = np.linalg.norm(out[1].translation - out[2].translation)
        assert d1 == pytest.approx(d0, abs=1e-12)
        # positions rotate about the virtual frame origin
        expected1 = Rotation.rot_z(theta).apply([0.5, -0.5, 0]) + [0.5, 0.5, 0]
        assert np.allclose(out[1].translation, expected1, atol=1e-12)

    def test_relative_orientation_preserved(self):
        rng = np.random.default_rng(1)
        robots = [(1, Pose(Rotation.rot_y(math.pi / 2), (0.5, 0, 0))),
                  (2, Pose(Rotation.rot_y(-math.pi / 2), (-0.5, 0, 0)))]
        b = cc_init(hf(IDENT), robots)
        rel0 = robots[0][1].rotation.inverse() @ robots[1][1].rotation
        for _ in range(50):
            v = rng.normal(size=4)
            pose = Pose(Rotation(v / np.linalg.norm(v)), rng.uniform(-1, 1, 3))
            out = cc_update(b, hf(pose), self.BASES)
            rel = out[1].rotation.inverse() @ out[2].rotation
            assert rel.allclose(rel0, atol=1e-9)

    def test_unknown_robot_base(self):
        b = cc_init(hf(IDENT), two_robot_setup())
        with pytest.raises(KeyError):
            cc_update(b, hf(IDENT), {1: IDENT})

    def test_distance_scales_with_alpha_not_rotation(self):
        b = cc_init(hf(IDENT), two_robot_setup())
        for _ in range(50):
            b = cc_closure_step(b, ClosureCommand.DECREASE, 0.01, epsilon=0.2)
        out = cc_update(b, hf(Pose(Rotation.rot_z(1.1))), self.BASES)
        d = np.linalg.norm(out[1].translation - out[2].translation)
        assert d == pytest.approx(math.sqrt(2) * b.alpha, abs=1e-12)
