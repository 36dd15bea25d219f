"""Forward displacement: actuator lengths -> platform pose.

Two Newton-Raphson formulations are provided. :func:`fk_reduced` works on the
four scalar closure residuals in which every passive joint has been
eliminated; :func:`fk_full_11` keeps the U-joint and central R angles as
unknowns and solves the 11 position-closure equations. The second one is the
independent check on the first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import KinematicsError, NonConvergence, SingularJacobian
from .geometry import (
    BASE_ROTATION,
    HOME,
    GeometricParams,
    Pose,
    attachment_points,
    base_points,
    platform_offsets,
    platform_rotation,
    platform_rotation_derivatives,
)
from .inverse_kinematics import ik_central, ik_limb_u_angles


@dataclass(frozen=True)
class SolverSettings:
    max_iterations: int = 50
    residual_tolerance: float = 1e-10
    step_tolerance: float = 1e-14
    initial_guess: Pose = HOME
    max_halvings: int = 8
    max_condition: float = 1e12

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.residual_tolerance > 0 and self.step_tolerance > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class FKResult:
    pose: Pose
    iterations: int
    residual: float
    passive: dict = field(default_factory=dict)


def residual_phi(pose: Pose, active, params: GeometricParams) -> np.ndarray:
    """``q^2 - |leg|^2`` for legs 1..3 and ``q42^2 - x^2 - z^2``."""
    active = np.asarray(active, dtype=float)
    fixed, mobile = attachment_points(params, pose)
    legs = mobile[:3] - fixed[:3]
    out = np.empty(4)
    out[:3] = active[:3] ** 2 - np.einsum("ij,ij->i", legs, legs)
    out[3] = active[3] ** 2 - pose.x ** 2 - pose.z ** 2
    return out


def jacobian_phi(pose: Pose, active=None, params: GeometricParams | None = None) -> np.ndarray:
    """d(residual_phi)/d(x, z, theta, psi). Independent of ``active``."""
    params = params or GeometricParams()
    fixed, mobile = attachment_points(params, pose)
    legs = mobile[:3] - fixed[:3]
    d_theta, d_psi = platform_rotation_derivatives(pose.theta, pose.psi)
    offsets = platform_offsets(params)
    jac = np.zeros((4, 4))
    jac[:3, 0] = -2.0 * legs[:, 0]
    jac[:3, 1] = -2.0 * legs[:, 2]
    jac[:3, 2] = -2.0 * np.einsum("ij,ij->i", legs, offsets @ d_theta.T)
    jac[:3, 3] = -2.0 * np.einsum("ij,ij->i", legs, offsets @ d_psi.T)
    jac[3, 0] = -2.0 * pose.x
    jac[3, 1] = -2.0 * pose.z
    return jac


POLISH_STEPS = 2


def _polish(fun, jac, y, f, norm):
    # a few extra full steps once inside tolerance: the pose error is roughly
    # cond(J) * residual, so stopping at the tolerance alone leaves ~1e-7
    for _ in range(POLISH_STEPS):
        try:
            step = np.linalg.solve(jac(y), -f)
        except np.linalg.LinAlgError:
            break
        trial = y + step
        f_trial = fun(trial)
        norm_trial = float(np.max(np.abs(f_trial)))
        if not norm_trial <= norm:
            break
        y, f, norm = trial, f_trial, norm_trial
    return y, norm


def _newton(fun, jac, y0, settings: SolverSettings):
    y = np.array(y0, dtype=float)
    f = fun(y)
    norm = float(np.max(np.abs(f)))
    for it in range(settings.max_iterations):
        if norm < settings.residual_tolerance:
            y, norm = _polish(fun, jac, y, f, norm)
            return y, it, norm
        j = jac(y)
        cond = np.linalg.cond(j)
        if not cond < settings.max_condition:
            raise SingularJacobian(
                f"Jacobian condition {cond:.3g} exceeds {settings.max_condition:.3g}",
                iterations=it, residual=norm,
            )
        step = np.linalg.solve(j, -f)
        if float(np.max(np.abs(step))) < settings.step_tolerance:
            raise NonConvergence(f"no convergence: stalled at residual {norm:.3g}", iterations=it, residual=norm)
        scale = 1.0
        for _ in range(settings.max_halvings + 1):
            trial = y + scale * step
            f_trial = fun(trial)
            norm_trial = float(np.max(np.abs(f_trial)))
            if norm_trial < norm:
                break
            scale *= 0.5
        y, f, norm = trial, f_trial, norm_trial
    if norm < settings.residual_tolerance:
        y, norm = _polish(fun, jac, y, f, norm)
        return y, settings.max_iterations, norm
    raise NonConvergence(
        f"no convergence after {settings.max_iterations} iterations (residual {norm:.3g})",
        iterations=settings.max_iterations, residual=norm,
    )


def fk_reduced(active, params: GeometricParams | None = None, settings: SolverSettings | None = None,
               *, full_output: bool = False):
    """Pose from the four actuator lengths via Newton on the reduced system."""
    params = params or GeometricParams()
    settings = settings or SolverSettings()
    active = np.asarray(active, dtype=float)
    if active.shape != (4,) or np.any(active <= 0):
        raise ValueError(f"need four positive actuator lengths, got {active}")

    y, iterations, norm = _newton(
        lambda y: residual_phi(Pose.from_array(y), active, params),
        lambda y: jacobian_phi(Pose.from_array(y), active, params),
        settings.initial_guess.as_array(),
        settings,
    )
    pose = Pose.from_array(y)
    if full_output:
        return FKResult(pose, iterations, norm)
    return pose


def _leg_direction(q1: float, q2: float) -> np.ndarray:
    s2 = math.sin(q2)
    return np.array([s2 * math.cos(q1), s2 * math.sin(q1), math.cos(q2)])


def closure_residual_11(y, active, params: GeometricParams) -> np.ndarray:
    """Position closure of every limb.

    ``y = (x, z, theta, psi, q11, q12, q21, q22, q31, q32, q41)``. Rows 0..8
    are the leg endpoints minus the platform attachment points, rows 9..10
    the central limb's X and Z closure.
    """
    pose = Pose.from_array(y[:4])
    _, mobile = attachment_points(params, pose)
    bases = base_points(params)
    out = np.empty(11)
    for i in range(3):
        q1, q2 = y[4 + 2 * i], y[5 + 2 * i]
        tip = bases[i] + BASE_ROTATION @ (active[i] * _leg_direction(q1, q2))
        out[3 * i:3 * i + 3] = tip - mobile[i]
    q41 = y[10]
    out[9] = -math.sin(q41) * active[3] - pose.x
    out[10] = math.cos(q41) * active[3] - pose.z
    return out


def closure_jacobian_11(y, active, params: GeometricParams) -> np.ndarray:
    pose = Pose.from_array(y[:4])
    d_theta, d_psi = platform_rotation_derivatives(pose.theta, pose.psi)
    offsets = platform_offsets(params)
    jac = np.zeros((11, 11))
    for i in range(3):
        rows = slice(3 * i, 3 * i + 3)
        jac[rows, 0] = (-1.0, 0.0, 0.0)
        jac[rows, 1] = (0.0, 0.0, -1.0)
        jac[rows, 2] = -(d_theta @ offsets[i])
        jac[rows, 3] = -(d_psi @ offsets[i])
        q1, q2 = y[4 + 2 * i], y[5 + 2 * i]
        c1, s1, c2, s2 = math.cos(q1), math.sin(q1), math.cos(q2), math.sin(q2)
        jac[rows, 4 + 2 * i] = active[i] * (BASE_ROTATION @ np.array([-s2 * s1, s2 * c1, 0.0]))
        jac[rows, 5 + 2 * i] = active[i] * (BASE_ROTATION @ np.array([c2 * c1, c2 * s1, -s2]))
    q41 = y[10]
    jac[9, 0] = -1.0
    jac[9, 10] = -math.cos(q41) * active[3]
    jac[10, 1] = -1.0
    jac[10, 10] = -math.sin(q41) * active[3]
    return jac


def fk_full_11(active, params: GeometricParams | None = None, settings: SolverSettings | None = None) -> FKResult:
    """Pose and passive joints from the full 11-unknown closure system.

    Passive unknowns start from the inverse kinematics of the initial guess.
    """
    params = params or GeometricParams()
    settings = settings or SolverSettings()
    active = np.asarray(active, dtype=float)
    if active.shape != (4,) or np.any(active <= 0):
        raise ValueError(f"need four positive actuator lengths, got {active}")

    guess = settings.initial_guess
    y0 = np.empty(11)
    y0[:4] = guess.as_array()
    try:
        for i in range(3):
            y0[4 + 2 * i:6 + 2 * i] = ik_limb_u_angles(guess, params, i + 1)
        y0[10] = ik_central(guess)[0]
    except KinematicsError as exc:
        raise NonConvergence(f"no convergence: initial guess is not assemblable ({exc})") from exc

    y, iterations, norm = _newton(
        lambda y: closure_residual_11(y, active, params),
        lambda y: closure_jacobian_11(y, active, params),
        y0,
        settings,
    )
    passive = {
        "u_angles": y[4:10].reshape(3, 2),
        "q41": float(y[10]),
    }
    return FKResult(Pose.from_array(y[:4]), iterations, norm, passive)


def singularity_proximity(pose: Pose, params: GeometricParams | None = None) -> float:
    """2-norm condition number of :func:`jacobian_phi` at ``pose``."""
    return float(np.linalg.cond(jacobian_phi(pose, None, params or GeometricParams())))
