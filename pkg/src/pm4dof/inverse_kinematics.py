"""Closed-form inverse kinematics: pose -> all active and passive joint values.

Branch conventions (kept fixed so FK/IK round trips stay on one branch):

* prismatic lengths take the positive root;
* U-joint polar angle ``q_i2`` lies in [0, pi], azimuth ``q_i1`` from atan2;
* S-joint middle angle ``q_i5`` lies in [-pi, 0].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePose, UJointSingular, UnreachablePose
from .geometry import (
    BASE_ROTATION,
    RPU_DH,
    UPS_DH,
    GeometricParams,
    Pose,
    attachment_points,
    chain,
    limb_base_transform,
    platform_rotation,
    rot_x,
    rot_y,
)

# squared lengths below this (m^2) count as a collapsed leg
LENGTH_SQ_TOL = 1e-12
# sin of the U polar angle (or S middle angle) below this is singular
SINGULAR_TOL = 1e-9

_RX90 = rot_x(math.pi / 2)
_RY180 = rot_y(math.pi)


@dataclass(frozen=True)
class FullConfiguration:
    """All generalized coordinates of the four limbs.

    ``active`` is ``(q13, q23, q33, q42)``. ``u_angles[i-1]`` holds
    ``(q_i1, q_i2)``, ``s_angles[i-1]`` holds ``(q_i4, q_i5, q_i6)`` and
    ``central`` holds ``(q41, q43, q44)``.
    """

    active: np.ndarray
    u_angles: np.ndarray
    s_angles: np.ndarray
    central: np.ndarray
    gimbal_lock: tuple[bool, bool, bool] = (False, False, False)
    central_orientation_defect: float = 0.0

    def q(self, limb: int, joint: int) -> float:
        """Joint ``joint`` on limb ``limb``, 1-based as in the D-H tables."""
        if limb == 4:
            return float({1: self.central[0], 2: self.active[3], 3: self.central[1], 4: self.central[2]}[joint])
        if joint == 3:
            return float(self.active[limb - 1])
        if joint in (1, 2):
            return float(self.u_angles[limb - 1, joint - 1])
        return float(self.s_angles[limb - 1, joint - 4])

    def limb_values(self, limb: int) -> list[float]:
        n = 4 if limb == 4 else 6
        return [self.q(limb, j) for j in range(1, n + 1)]


def ik_central(pose: Pose) -> tuple[float, float]:
    """(q41, q42) of the central RPU limb."""
    sq = pose.x * pose.x + pose.z * pose.z
    if sq <= LENGTH_SQ_TOL:
        raise DegeneratePose(f"degenerate pose: central limb length is zero at x={pose.x}, z={pose.z}")
    return math.atan2(-pose.x, pose.z), math.sqrt(sq)


def _leg_vector(pose: Pose, params: GeometricParams, limb: int) -> np.ndarray:
    if limb not in (1, 2, 3):
        raise ValueError(f"external limb index must be 1, 2 or 3, got {limb}")
    fixed, mobile = attachment_points(params, pose)
    return mobile[limb - 1] - fixed[limb - 1]


def ik_limb_active(pose: Pose, params: GeometricParams, limb: int) -> float:
    u = _leg_vector(pose, params, limb)
    sq = float(u @ u)
    if sq <= LENGTH_SQ_TOL:
        raise UnreachablePose(f"leg {limb} collapses to zero length")
    return math.sqrt(sq)


def ik_active(pose: Pose, params: GeometricParams) -> np.ndarray:
    """Actuator lengths ``(q13, q23, q33, q42)`` only."""
    _, q42 = ik_central(pose)
    fixed, mobile = attachment_points(params, pose)
    sq = np.einsum("ij,ij->i", mobile[:3] - fixed[:3], mobile[:3] - fixed[:3])
    bad = np.flatnonzero(sq <= LENGTH_SQ_TOL)
    if bad.size:
        raise UnreachablePose(f"leg {bad[0] + 1} collapses to zero length")
    return np.append(np.sqrt(sq), q42)


def limb1_closed_form(pose: Pose, params: GeometricParams) -> tuple[float, float]:
    """The expanded polynomials ``(a, b)`` for leg 1: ``q13 = sqrt(a)``.

    ``-b`` equals the squared projection of the leg onto the X-Z plane.
    """
    x, z, th, ps = pose.x, pose.z, pose.theta, pose.psi
    r, rm = params.r, params.r_m
    ct, st, cp, sp = math.cos(th), math.sin(th), math.cos(ps), math.sin(ps)
    a = (x * x + z * z + r * r + rm * rm + 2 * r * x + 2 * rm * z * st
         - 2 * rm * x * ct * cp - 2 * r * rm * ct * cp)
    b = (-x * x - z * z - r * r - rm * rm - 2 * r * x - 2 * rm * z * st
         + 2 * r * rm * ct * cp + 2 * rm * x * ct * cp + rm * rm * ct * ct * sp * sp)
    return a, b


def squared_lengths_closed_form(pose: Pose, params: GeometricParams) -> np.ndarray:
    """Expanded trigonometric polynomials for the three squared leg lengths."""
    x, z, th, ps = pose.x, pose.z, pose.theta, pose.psi
    r, rm = params.r, params.r_m
    c, s = math.cos, math.sin
    bfd, bfi, bmd, bmi = params.beta_FD, params.beta_FI, params.beta_MD, params.beta_MI
    a1, _ = limb1_closed_form(pose, params)
    a2 = (r * r + x * x + rm * rm + z * z
          - 2 * r * rm * s(bfd) * c(bmd) * s(ps) * c(th)
          - 2 * r * rm * s(bfd) * s(bmd) * c(ps)
          - 2 * r * x * c(bfd)
          - 2 * r * rm * c(bfd) * c(bmd) * c(ps) * c(th)
          + 2 * r * rm * c(bfd) * s(bmd) * s(ps)
          + 2 * x * rm * c(bmd) * c(ps) * c(th)
          - 2 * x * rm * s(bmd) * s(ps)
          - 2 * z * rm * c(bmd) * s(th))
    a3 = (r * r + rm * rm + x * x + z * z
          - 2 * r * rm * c(bfi) * c(bmi) * c(ps) * c(th)
          - 2 * z * rm * c(bmi) * s(th)
          - 2 * r * x * c(bfi)
          + 2 * x * rm * s(bmi) * s(ps)
          + 2 * r * rm * s(bfi) * c(bmi) * s(ps) * c(th)
          - 2 * r * rm * c(bfi) * s(bmi) * s(ps)
          + 2 * x * rm * c(bmi) * c(ps) * c(th)
          - 2 * r * rm * s(bfi) * s(bmi) * c(ps))
    return np.array([a1, a2, a3])


def ik_limb_u_angles(pose: Pose, params: GeometricParams, limb: int) -> tuple[float, float]:
    """Base U-joint angles ``(q_i1, q_i2)``.

    In the limb base frame the leg points along
    ``(sin q2 cos q1, sin q2 sin q1, cos q2)``.
    """
    u = _leg_vector(pose, params, limb)
    if float(u @ u) <= LENGTH_SQ_TOL:
        raise UnreachablePose(f"leg {limb} collapses to zero length")
    local = BASE_ROTATION.T @ u
    rho = math.hypot(local[0], local[1])
    if rho <= SINGULAR_TOL * math.sqrt(float(u @ u)):
        raise UJointSingular(f"leg {limb} is aligned with its first U-joint axis")
    return math.atan2(local[1], local[0]), math.atan2(rho, local[2])


def _zyz(g: np.ndarray) -> tuple[float, float, float, bool]:
    """Rz(a) Ry(b) Rz(c) = g with b in [0, pi]."""
    sb = math.hypot(g[0, 2], g[1, 2])
    b = math.atan2(sb, g[2, 2])
    if sb > SINGULAR_TOL:
        return math.atan2(g[1, 2], g[0, 2]), b, math.atan2(g[2, 1], -g[2, 0]), False
    # a and c are coupled; pin a = 0
    if g[2, 2] > 0:
        return 0.0, b, math.atan2(g[1, 0], g[0, 0]), True
    h = g @ _RY180.T
    return 0.0, b, -math.atan2(h[1, 0], h[0, 0]), True


def spherical_from_relative(relative: np.ndarray) -> tuple[tuple[float, float, float], bool]:
    """S-joint angles from the relative rotation ``R3^T Rm``.

    Rows 4..6 compose to ``Rz(q4) Ry(-q5) Rz(-q6) Rx(3pi/2)``, so the angles
    come out of a ZYZ split of ``relative @ Rx(pi/2)``.
    """
    a, b, c, locked = _zyz(relative @ _RX90)
    return (a, -b, -c), locked


def ik_spherical_angles(pose: Pose, u_and_length, params: GeometricParams, limb: int):
    """``((q_i4, q_i5, q_i6), gimbal_lock)`` closing the orientation of limb ``limb``."""
    q1, q2, q3 = u_and_length
    r3 = chain(UPS_DH[:3], (q1, q2, q3), limb_base_transform(params, limb)).rotation
    return spherical_from_relative(r3.T @ platform_rotation(pose.theta, pose.psi))


def central_passive_angles(pose: Pose, q41: float, q42: float) -> tuple[float, float, float]:
    """``(q43, q44, defect)`` for the central U joint.

    Frame 4 of the central chain is aligned with ``Rm @ Ry(pi)`` at the home
    configuration. The U joint only spans ``Ry(.) Rz(.)`` orientations, so for
    poses with both pitch and yaw nonzero the match is approximate; ``defect``
    is the Frobenius norm of the remaining orientation mismatch.
    """
    r2 = chain(RPU_DH[:2], (q41, q42), limb_base_transform(None, 4)).rotation
    target = platform_rotation(pose.theta, pose.psi) @ _RY180
    k = r2.T @ target
    q43 = math.atan2(k[0, 2], -k[1, 2])
    q44 = math.atan2(k[2, 0], k[2, 1])
    r4 = chain(RPU_DH, (q41, q42, q43, q44), limb_base_transform(None, 4)).rotation
    return q43, q44, float(np.linalg.norm(r4 - target))


def ik_full(pose: Pose, params: GeometricParams | None = None) -> FullConfiguration:
    params = params or GeometricParams()
    q41, q42 = ik_central(pose)
    active = np.empty(4)
    u_angles = np.empty((3, 2))
    s_angles = np.empty((3, 3))
    locks = []
    for limb in (1, 2, 3):
        q3 = ik_limb_active(pose, params, limb)
        q1, q2 = ik_limb_u_angles(pose, params, limb)
        s, locked = ik_spherical_angles(pose, (q1, q2, q3), params, limb)
        active[limb - 1] = q3
        u_angles[limb - 1] = q1, q2
        s_angles[limb - 1] = s
        locks.append(locked)
    active[3] = q42
    q43, q44, defect = central_passive_angles(pose, q41, q42)
    return FullConfiguration(
        active=active,
        u_angles=u_angles,
        s_angles=s_angles,
        central=np.array([q41, q43, q44]),
        gimbal_lock=tuple(locks),
        central_orientation_defect=defect,
    )
