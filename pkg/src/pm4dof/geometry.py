"""Constant geometry of the 3UPS+RPU manipulator.

Frames
------
The fixed frame has its origin at the central R joint, Z pointing up and the
platform translating in the X-Z (sagittal) plane. Leg 1 is attached at
``(-r, 0, 0)`` on the base and ``(-r_m, 0, 0)`` on the platform; legs 2 and 3
sit at ``+beta`` and ``-beta`` around the +X side.

Platform orientation is ``Rz(psi) @ Ry(theta)``: pitch about the fixed Y
axis, then yaw about the fixed Z axis.

Every limb base frame shares the rotation ``Rx(pi/2)`` so that the first
joint axis (z0) is parallel to the Y axis, like the central R joint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class GeometricParams:
    r: float = 0.40
    r_m: float = 0.20
    beta_FD: float = math.radians(50.0)
    beta_FI: float = math.radians(40.0)
    beta_MD: float = math.radians(40.0)
    beta_MI: float = math.radians(30.0)

    def __post_init__(self):
        if not self.r > 0 or not self.r_m > 0:
            raise ValueError(f"radii must be positive, got r={self.r}, r_m={self.r_m}")
        for name in ("beta_FD", "beta_FI", "beta_MD", "beta_MI"):
            value = getattr(self, name)
            if not 0.0 < value < math.pi / 2:
                raise ValueError(f"{name} must lie in (0, pi/2) rad, got {value}")

    @classmethod
    def from_degrees(cls, r=0.40, r_m=0.20, beta_FD=50.0, beta_FI=40.0, beta_MD=40.0, beta_MI=30.0):
        return cls(r, r_m, *(math.radians(b) for b in (beta_FD, beta_FI, beta_MD, beta_MI)))


@dataclass(frozen=True)
class Pose:
    """Platform pose. ``y_m`` is identically zero and therefore not stored."""

    x: float
    z: float
    theta: float = 0.0
    psi: float = 0.0

    @property
    def y(self) -> float:
        return 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.z, self.theta, self.psi])

    @classmethod
    def from_array(cls, values) -> "Pose":
        x, z, theta, psi = (float(v) for v in values)
        return cls(x, z, theta, psi)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, 0.0, self.z])


HOME = Pose(0.0, 0.635, 0.0, 0.0)


class Variable(str, Enum):
    NONE = "none"
    D = "d"
    THETA = "theta"


@dataclass(frozen=True)
class DHRow:
    alpha: float
    a: float
    d: float
    theta: float
    variable: Variable = Variable.NONE

    def substitute(self, q: float | None) -> tuple[float, float, float, float]:
        """(alpha, a, d, theta) with ``q`` in the variable slot (added to any offset)."""
        if self.variable is Variable.D:
            return self.alpha, self.a, self.d + q, self.theta
        if self.variable is Variable.THETA:
            return self.alpha, self.a, self.d, self.theta + q
        return self.alpha, self.a, self.d, self.theta


_H = math.pi / 2

# UPS limbs, rows j = 1..6
UPS_DH = (
    DHRow(-_H, 0.0, 0.0, 0.0, Variable.THETA),
    DHRow(_H, 0.0, 0.0, 0.0, Variable.THETA),
    DHRow(0.0, 0.0, 0.0, 0.0, Variable.D),
    DHRow(_H, 0.0, 0.0, 0.0, Variable.THETA),
    DHRow(_H, 0.0, 0.0, 0.0, Variable.THETA),
    DHRow(_H, 0.0, 0.0, 0.0, Variable.THETA),
)

# central RPU limb, rows j = 1..4; row 2 carries a constant theta = pi
RPU_DH = (
    DHRow(-_H, 0.0, 0.0, 0.0, Variable.THETA),
    DHRow(_H, 0.0, 0.0, math.pi, Variable.D),
    DHRow(_H, 0.0, 0.0, 0.0, Variable.THETA),
    DHRow(0.0, 0.0, 0.0, 0.0, Variable.THETA),
)


@dataclass(frozen=True)
class HomogeneousTransform:
    rotation: np.ndarray
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __matmul__(self, other: "HomogeneousTransform") -> "HomogeneousTransform":
        return HomogeneousTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    @classmethod
    def identity(cls) -> "HomogeneousTransform":
        return cls(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        h = np.eye(4)
        h[:3, :3] = self.rotation
        h[:3, 3] = self.translation
        return h


def dh_transform(row: DHRow, q: float | None = None) -> HomogeneousTransform:
    """Standard (Paul) D-H link transform Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    alpha, a, d, theta = row.substitute(q)
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    rotation = np.array([
        [ct, -ca * st, sa * st],
        [st, ca * ct, -sa * ct],
        [0.0, sa, ca],
    ])
    return HomogeneousTransform(rotation, np.array([a * ct, a * st, d]))


def chain(rows, qs, base: HomogeneousTransform | None = None) -> HomogeneousTransform:
    out = base if base is not None else HomogeneousTransform.identity()
    for row, q in zip(rows, qs):
        out = out @ dh_transform(row, q)
    return out


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def platform_rotation(theta: float, psi: float) -> np.ndarray:
    return rot_z(psi) @ rot_y(theta)


def platform_rotation_derivatives(theta: float, psi: float) -> tuple[np.ndarray, np.ndarray]:
    """(dR/dtheta, dR/dpsi) of :func:`platform_rotation`."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    d_ry = np.array([[-st, 0.0, ct], [0.0, 0.0, 0.0], [-ct, 0.0, -st]])
    d_rz = np.array([[-sp, -cp, 0.0], [cp, -sp, 0.0], [0.0, 0.0, 0.0]])
    return rot_z(psi) @ d_ry, d_rz @ rot_y(theta)


# rotation of every limb base frame relative to the fixed frame
BASE_ROTATION = rot_x(math.pi / 2)


def base_points(params: GeometricParams) -> np.ndarray:
    """Rows A0, B0, C0 (base joints of limbs 1..3) in the fixed frame."""
    r = params.r
    return np.array([
        [-r, 0.0, 0.0],
        [r * math.cos(params.beta_FD), r * math.sin(params.beta_FD), 0.0],
        [r * math.cos(params.beta_FI), -r * math.sin(params.beta_FI), 0.0],
    ])


def platform_offsets(params: GeometricParams) -> np.ndarray:
    """Rows A, B, C expressed in the platform frame."""
    rm = params.r_m
    return np.array([
        [-rm, 0.0, 0.0],
        [rm * math.cos(params.beta_MD), rm * math.sin(params.beta_MD), 0.0],
        [rm * math.cos(params.beta_MI), -rm * math.sin(params.beta_MI), 0.0],
    ])


def limb_base_transform(params: GeometricParams, limb: int) -> HomogeneousTransform:
    """Fixed transform from the fixed frame to the base frame of ``limb`` (1..4)."""
    if limb == 4:
        return HomogeneousTransform(BASE_ROTATION, np.zeros(3))
    return HomogeneousTransform(BASE_ROTATION, base_points(params)[limb - 1].copy())


class AttachmentPoints(NamedTuple):
    fixed: np.ndarray  # rows A0, B0, C0, O_f
    mobile: np.ndarray  # rows A, B, C, O_m


def attachment_points(params: GeometricParams, pose: Pose) -> AttachmentPoints:
    rotation = platform_rotation(pose.theta, pose.psi)
    p = pose.position
    mobile = p + platform_offsets(params) @ rotation.T
    return AttachmentPoints(
        np.vstack([base_points(params), np.zeros(3)]),
        np.vstack([mobile, p]),
    )


def mobility(n_links: int, joint_freedoms) -> int:
    """Grubler-Kutzbach mobility of a spatial mechanism.

    ``n_links`` counts the base; ``joint_freedoms`` lists the DoF of each joint.
    """
    freedoms = list(joint_freedoms)
    return 6 * (n_links - 1 - len(freedoms)) + sum(freedoms)


# nine mobile links plus the base; 4 P + 1 R, 4 U, 3 S
MECHANISM_LINKS = 10
MECHANISM_JOINTS = (1,) * 5 + (2,) * 4 + (3,) * 3
