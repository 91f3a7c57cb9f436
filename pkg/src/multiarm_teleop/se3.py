"""Rigid-body transform algebra: rotations, poses, pose errors.

Rotations are stored as unit quaternions (w, x, y, z) and renormalized on
every construction, so long composition chains (1 kHz control loops) do not
accumulate orthonormality drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-12


def _normalize_quat(q: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(q)
    if n < _EPS:
        raise ValueError("zero-norm quaternion")
    q = q / n
    # canonical sign: w >= 0 keeps serialization deterministic
    if q[0] < 0.0:
        q = -q
    return q


class Rotation:
    """3D rotation, quaternion-backed with a lossless matrix view."""

    __slots__ = ("_q",)

    def __init__(self, quat):
        self._q = _normalize_quat(np.asarray(quat, dtype=float).reshape(4))

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls) -> "Rotation":
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def from_quat(cls, w: float, x: float, y: float, z: float) -> "Rotation":
        return cls((w, x, y, z))

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Rotation":
        axis = np.asarray(axis, dtype=float).reshape(3)
        n = np.linalg.norm(axis)
        if n < _EPS:
            if abs(angle) < _EPS:
                return cls.identity()
            raise ValueError("zero axis with nonzero angle")
        axis = axis / n
        half = 0.5 * angle
        s = math.sin(half)
        return cls((math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s))

    @classmethod
    def from_rotvec(cls, vec) -> "Rotation":
        vec = np.asarray(vec, dtype=float).reshape(3)
        angle = np.linalg.norm(vec)
        if angle < _EPS:
            return cls.identity()
        return cls.from_axis_angle(vec / angle, angle)

    @classmethod
    def rot_x(cls, angle: float) -> "Rotation":
        return cls.from_axis_angle((1.0, 0.0, 0.0), angle)

    @classmethod
    def rot_y(cls, angle: float) -> "Rotation":
        return cls.from_axis_angle((0.0, 1.0, 0.0), angle)

    @classmethod
    def rot_z(cls, angle: float) -> "Rotation":
        return cls.from_axis_angle((0.0, 0.0, 1.0), angle)

    @classmethod
    def from_matrix(cls, m) -> "Rotation":
        m = np.asarray(m, dtype=float).reshape(3, 3)
        # Shepperd's method: pick the largest diagonal combination
        tr = m[0, 0] + m[1, 1] + m[2, 2]
        if tr > 0.0:
            s = math.sqrt(tr + 1.0) * 2.0
            q = ((0.25 * s),
                 (m[2, 1] - m[1, 2]) / s,
                 (m[0, 2] - m[2, 0]) / s,
                 (m[1, 0] - m[0, 1]) / s)
        elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            q = ((m[2, 1] - m[1, 2]) / s,
                 0.25 * s,
                 (m[0, 1] + m[1, 0]) / s,
                 (m[0, 2] + m[2, 0]) / s)
        elif m[1, 1] >= m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            q = ((m[0, 2] - m[2, 0]) / s,
                 (m[0, 1] + m[1, 0]) / s,
                 0.25 * s,
                 (m[1, 2] + m[2, 1]) / s)
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
            q = ((m[1, 0] - m[0, 1]) / s,
                 (m[0, 2] + m[2, 0]) / s,
                 (m[1, 2] + m[2, 1]) / s,
                 0.25 * s)
        return cls(q)

    # -- views -------------------------------------------------------------

    @property
    def quat(self) -> np.ndarray:
        """Unit quaternion (w, x, y, z), copy."""
        return self._q.copy()

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self._q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    # -- algebra -----------------------------------------------------------

    def __matmul__(self, other):
        if isinstance(other, Rotation):
            w1, x1, y1, z1 = self._q
            w2, x2, y2, z2 = other._q
            return Rotation((
                w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
            ))
        return self.apply(other)

    def apply(self, vec) -> np.ndarray:
        return self.as_matrix() @ np.asarray(vec, dtype=float).reshape(3)

    def inverse(self) -> "Rotation":
        w, x, y, z = self._q
        return Rotation((w, -x, -y, -z))

    def as_rotvec(self) -> np.ndarray:
        """Axis-angle vector (axis * angle), angle in [0, pi].

        At exactly pi the axis sign is ambiguous; the axis component of
        largest magnitude is forced positive so the branch is deterministic.
        """
        w, x, y, z = self._q
        v = np.array([x, y, z])
        s = np.linalg.norm(v)
        if s < _EPS:
            return np.zeros(3)
        angle = 2.0 * math.atan2(s, w)
        axis = v / s
        if abs(angle - math.pi) < 1e-12:
            k = int(np.argmax(np.abs(axis)))
            if axis[k] < 0.0:
                axis = -axis
        return axis * angle

    def angle_to(self, other: "Rotation") -> float:
        return float(np.linalg.norm((self @ other.inverse()).as_rotvec()))

    def allclose(self, other: "Rotation", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.as_matrix(), other.as_matrix(), atol=atol))

    def __repr__(self) -> str:
        w, x, y, z = self._q
        return f"Rotation(w={w:.6f}, x={x:.6f}, y={y:.6f}, z={z:.6f})"


class Pose:
    """Rigid transform: rotation plus translation (meters)."""

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation: Rotation | None = None, translation=None):
        self.rotation = rotation if rotation is not None else Rotation.identity()
        t = np.zeros(3) if translation is None else np.asarray(translation, dtype=float).reshape(3)
        if not np.all(np.isfinite(t)):
            raise ValueError("non-finite translation")
        self.translation = t.copy()

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_translation(cls, x: float, y: float, z: float) -> "Pose":
        return cls(Rotation.identity(), (x, y, z))

    @classmethod
    def from_matrix(cls, m) -> "Pose":
        m = np.asarray(m, dtype=float).reshape(4, 4)
        return cls(Rotation.from_matrix(m[:3, :3]), m[:3, 3])

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation.as_matrix()
        m[:3, 3] = self.translation
        return m

    def __matmul__(self, other):
        if isinstance(other, Pose):
            return Pose(
                self.rotation @ other.rotation,
                self.rotation.apply(other.translation) + self.translation,
            )
        return self.rotation.apply(other) + self.translation

    def inverse(self) -> "Pose":
        rinv = self.rotation.inverse()
        return Pose(rinv, -rinv.apply(self.translation))

    def allclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        return (np.allclose(self.translation, other.translation, atol=atol)
                and self.rotation.allclose(other.rotation, atol=atol))

    def __repr__(self) -> str:
        t = self.translation
        return f"Pose(t=({t[0]:.4f}, {t[1]:.4f}, {t[2]:.4f}), {self.rotation!r})"


def compose(a: Pose, b: Pose) -> Pose:
    return a @ b


@dataclass
class Twist:
    """6D velocity or displacement: linear (m, m/s) and angular (rad, rad/s)."""

    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float).reshape(3)
        self.angular = np.asarray(self.angular, dtype=float).reshape(3)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])

    @classmethod
    def from_vector(cls, v) -> "Twist":
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3:])


def pose_error(desired: Pose, actual: Pose) -> Twist:
    """Position/orientation error from actual toward desired, in the base frame.

    Linear part is the plain translation difference; angular part is the
    axis-angle vector of R_des * R_act^T (also a base-frame quantity).
    """
    rel = desired.rotation @ actual.rotation.inverse()
    return Twist(desired.translation - actual.translation, rel.as_rotvec())
