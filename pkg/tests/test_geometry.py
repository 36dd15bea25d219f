import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import poses
from pm4dof.geometry import (
    HOME,
    MECHANISM_JOINTS,
    MECHANISM_LINKS,
    UPS_DH,
    DHRow,
    GeometricParams,
    Pose,
    Variable,
    attachment_points,
    chain,
    dh_transform,
    limb_base_transform,
    mobility,
    platform_rotation,
    platform_rotation_derivatives,
)
from pm4dof.inverse_kinematics import ik_full, limb1_closed_form

angles = st.floats(-2 * math.pi, 2 * math.pi)
lengths = st.floats(-1.0, 1.0)


def test_dh_zero_row_is_identity():
    h = dh_transform(DHRow(0.0, 0.0, 0.0, 0.0))
    np.testing.assert_array_equal(h.matrix(), np.eye(4))


def test_dh_minus_quarter_twist():
    h = dh_transform(DHRow(-math.pi / 2, 0.0, 0.0, 0.0))
    np.testing.assert_allclose(h.rotation, [[1, 0, 0], [0, 0, 1], [0, -1, 0]], atol=1e-15)
    np.testing.assert_array_equal(h.translation, 0.0)


def test_dh_prismatic_row():
    h = dh_transform(UPS_DH[2], 0.635)
    np.testing.assert_array_equal(h.rotation, np.eye(3))
    np.testing.assert_allclose(h.translation, [0, 0, 0.635])


@given(angles, lengths, lengths, angles)
def test_dh_rotation_is_proper(alpha, a, d, theta):
    r = dh_transform(DHRow(alpha, a, d, theta)).rotation
    np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)


def test_variable_slot_adds_to_offset():
    row = DHRow(0.0, 0.0, 0.0, math.pi, Variable.D)
    assert row.substitute(0.5) == (0.0, 0.0, 0.5, math.pi)
    assert DHRow(0.0, 0.0, 0.0, 0.1, Variable.THETA).substitute(0.2)[3] == pytest.approx(0.3)


def test_platform_rotation_examples():
    np.testing.assert_array_equal(platform_rotation(0.0, 0.0), np.eye(3))
    np.testing.assert_allclose(platform_rotation(math.pi / 2, 0.0)[:, 0], [0, 0, -1], atol=1e-15)


@given(angles, angles)
def test_platform_rotation_orthonormal(theta, psi):
    r = platform_rotation(theta, psi)
    np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_rotation_derivatives_match_differences(theta, psi):
    h = 1e-6
    d_theta, d_psi = platform_rotation_derivatives(theta, psi)
    fd_theta = (platform_rotation(theta + h, psi) - platform_rotation(theta - h, psi)) / (2 * h)
    fd_psi = (platform_rotation(theta, psi + h) - platform_rotation(theta, psi - h)) / (2 * h)
    np.testing.assert_allclose(d_theta, fd_theta, atol=1e-9)
    np.testing.assert_allclose(d_psi, fd_psi, atol=1e-9)


@given(poses)
def test_orientation_convention_reproduces_limb1_polynomial(pose):
    # the Rz(psi) Ry(theta) order is the one whose squared distance expands to
    # the printed limb-1 polynomial; Ry Rz would not
    params = GeometricParams()
    fixed, mobile = attachment_points(params, pose)
    d2 = float(np.sum((mobile[0] - fixed[0]) ** 2))
    a, _ = limb1_closed_form(pose, params)
    assert abs(d2 - a) < 1e-12


def test_convention_is_not_symmetric_in_order():
    params = GeometricParams()
    pose = Pose(0.02, 0.7, 0.1, 0.2)
    a, _ = limb1_closed_form(pose, params)
    from pm4dof.geometry import rot_y, rot_z
    swapped = rot_y(pose.theta) @ rot_z(pose.psi)
    mobile = pose.position + swapped @ np.array([-params.r_m, 0, 0])
    d2 = float(np.sum((mobile - np.array([-params.r, 0, 0])) ** 2))
    assert abs(d2 - a) > 1e-6


def test_home_attachment_points(params):
    fixed, mobile = attachment_points(params, HOME)
    np.testing.assert_allclose(mobile[0], [-0.2, 0.0, 0.635], atol=1e-15)
    np.testing.assert_allclose(mobile[3], [0.0, 0.0, 0.635])
    np.testing.assert_array_equal(fixed[3], 0.0)
    d = np.linalg.norm(mobile[:3] - fixed[:3], axis=1)
    assert d[0] == pytest.approx(0.665751, abs=1e-6)
    assert d[1] == pytest.approx(0.667574, abs=1e-6)
    assert d[2] == pytest.approx(0.667574, abs=1e-6)
    assert d[1] == pytest.approx(d[2], abs=1e-15)


@given(poses)
def test_chain_endpoint_matches_attachment_point(pose):
    params = GeometricParams()
    full = ik_full(pose, params)
    _, mobile = attachment_points(params, pose)
    for limb in (1, 2, 3):
        end = chain(UPS_DH[:3], full.limb_values(limb)[:3], limb_base_transform(params, limb))
        np.testing.assert_allclose(end.translation, mobile[limb - 1], atol=1e-10)
        r = end.rotation
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)


def test_mobility_census():
    assert len(MECHANISM_JOINTS) == 12
    assert sum(MECHANISM_JOINTS) == 22
    assert mobility(MECHANISM_LINKS, MECHANISM_JOINTS) == 4


def test_mobility_small_cases():
    assert mobility(2, [1]) == 1
    # two revolutes in parallel between the same pair of links: 6(2-1-2) + 2
    assert mobility(2, [1, 1]) == -4


def test_params_validation():
    with pytest.raises(ValueError):
        GeometricParams(r=0.0)
    with pytest.raises(ValueError):
        GeometricParams.from_degrees(beta_FD=95.0)
    p = GeometricParams.from_degrees()
    assert p == GeometricParams()


def test_pose_array_round_trip():
    pose = Pose(0.01, 0.7, 0.1, -0.2)
    assert Pose.from_array(pose.as_array()) == pose
    assert pose.y == 0.0
