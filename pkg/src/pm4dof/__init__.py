"""Kinematics and joint-space control simulation of a 3UPS+RPU 4-DoF parallel manipulator."""
from .control import ControllerState, FilterParams, Gains, controller_step, velocity_estimate
from .errors import (
    ConfigError,
    DegeneratePose,
    DegenerateSignal,
    EmptyLog,
    KinematicsError,
    NonConvergence,
    SingularJacobian,
    UnreachablePose,
    UnreachableReference,
)
from .forward_kinematics import (
    FKResult,
    SolverSettings,
    fk_full_11,
    fk_reduced,
    jacobian_phi,
    residual_phi,
    singularity_proximity,
)
from .geometry import HOME, GeometricParams, Pose, attachment_points, mobility
from .inverse_kinematics import FullConfiguration, ik_active, ik_full
from .simulation import (
    PlantParams,
    SimLog,
    TrajectorySpec,
    mean_error,
    mean_errors,
    phase_offset,
    phase_offsets,
    run_closed_loop,
)

__version__ = "0.1.0"
