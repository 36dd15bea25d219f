"""Sectioned ``key = value`` run configuration.

Lengths are in metres and angles in degrees; everything is converted to
radians on load. Per-joint quantities take either one value (applied to all
four actuators) or four comma-separated values in the order q13, q23, q33,
q42. ``none`` disables an optional limit. Unknown sections or keys are
errors. See ``docs/config.md`` for the full schema.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .control import FilterParams, Gains
from .errors import ConfigError
from .forward_kinematics import SolverSettings
from .geometry import GeometricParams, Pose
from .simulation import PlantParams, TrajectorySpec

# section -> key -> default (strings as they would appear in a file)
SCHEMA = {
    "geometry": {
        "r": "0.40",
        "r_m": "0.20",
        "beta_fd": "50",
        "beta_fi": "40",
        "beta_md": "40",
        "beta_mi": "30",
    },
    "solver": {
        "max_iterations": "50",
        "residual_tolerance": "1e-10",
        "step_tolerance": "1e-14",
        "max_halvings": "8",
        "guess_x": "0",
        "guess_z": "0.635",
        "guess_theta": "0",
        "guess_psi": "0",
    },
    "control": {
        "dt": "0.001",
        "kp": "8000",
        "kd": "60",
        "ki": "20",
        "filter_a": "100",
        "filter_b": "100",
        "integral_limit": "10",
        "tau_max": "400",
    },
    "plant": {
        "m_eff": "2",
        "c": "50",
        "k_u": "1",
        "encoder_resolution": "none",
    },
    "trajectory": {
        "duration": "30",
        "frequency": "0.2",
        "x0": "0",
        "z0": "0.635",
        "theta0": "0",
        "psi0": "0",
        "amp_z": "0.05",
        "amp_psi": "10",
        "ellipse_ax": "0.05",
        "ellipse_az": "0.06",
        "approach_d1": "2",
        "approach_d2": "2",
    },
}

_GEOMETRY_ARGS = {"r": "r", "r_m": "r_m", "beta_fd": "beta_FD", "beta_fi": "beta_FI",
                  "beta_md": "beta_MD", "beta_mi": "beta_MI"}


@dataclass(frozen=True)
class ControlConfig:
    gains: Gains = field(default_factory=Gains)
    filter: FilterParams = field(default_factory=FilterParams)
    dt: float = 1e-3
    integral_limit: float | None = 10.0
    tau_max: float | None = 400.0


@dataclass(frozen=True)
class TrajectoryConfig:
    duration: float = 30.0
    frequency: float = 0.2
    base: Pose = Pose(0.0, 0.635, 0.0, 0.0)
    amp_z: float = 0.05
    amp_psi: float = math.radians(10.0)
    ellipse_ax: float = 0.05
    ellipse_az: float = 0.06
    approach_d1: float = 2.0
    approach_d2: float = 2.0

    def spec(self, kind: str) -> TrajectorySpec:
        if kind == "sinusoidal":
            return TrajectorySpec.sinusoidal(base=self.base, amp_z=self.amp_z, amp_psi=self.amp_psi,
                                             frequency=self.frequency, duration=self.duration)
        if kind == "elliptic":
            return TrajectorySpec.elliptic(d1=self.approach_d1, d2=self.approach_d2, base=self.base,
                                           frequency=self.frequency, ellipse_ax=self.ellipse_ax,
                                           ellipse_az=self.ellipse_az, duration=self.duration)
        if kind == "hold":
            return TrajectorySpec.hold(self.base, self.duration)
        raise ConfigError(f"unknown trajectory {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    geometry: GeometricParams = field(default_factory=GeometricParams)
    solver: SolverSettings = field(default_factory=SolverSettings)
    control: ControlConfig = field(default_factory=ControlConfig)
    plant: PlantParams = field(default_factory=PlantParams)
    encoder_resolution: float | None = None
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)


def _float(section, key, text) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key}: value must be finite")
    return value


def _optional(section, key, text) -> float | None:
    if text.strip().lower() in ("none", "off", ""):
        return None
    return _float(section, key, text)


def _per_joint(section, key, text) -> np.ndarray:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) not in (1, 4):
        raise ConfigError(f"[{section}] {key}: give one value or four comma-separated values")
    return np.broadcast_to(np.array([_float(section, key, p) for p in parts]), (4,)).copy()


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    values = {section: dict(keys) for section, keys in SCHEMA.items()}
    for section in parser.sections():
        name = section.strip().lower()
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in SCHEMA[name]:
                raise ConfigError(f"[{section}] unknown key {key!r}")
            values[name][key] = value

    g, s, c, p, t = (values[k] for k in ("geometry", "solver", "control", "plant", "trajectory"))
    try:
        geometry = GeometricParams.from_degrees(
            **{_GEOMETRY_ARGS[k]: _float("geometry", k, v) for k, v in g.items()}
        )
        solver = SolverSettings(
            max_iterations=int(_float("solver", "max_iterations", s["max_iterations"])),
            residual_tolerance=_float("solver", "residual_tolerance", s["residual_tolerance"]),
            step_tolerance=_float("solver", "step_tolerance", s["step_tolerance"]),
            max_halvings=int(_float("solver", "max_halvings", s["max_halvings"])),
            initial_guess=Pose(
                _float("solver", "guess_x", s["guess_x"]),
                _float("solver", "guess_z", s["guess_z"]),
                math.radians(_float("solver", "guess_theta", s["guess_theta"])),
                math.radians(_float("solver", "guess_psi", s["guess_psi"])),
            ),
        )
        control = ControlConfig(
            gains=Gains(
                Kp=_per_joint("control", "kp", c["kp"]),
                Kd=_per_joint("control", "kd", c["kd"]),
                Ki=_per_joint("control", "ki", c["ki"]),
            ),
            filter=FilterParams(
                a=_per_joint("control", "filter_a", c["filter_a"]),
                b=_per_joint("control", "filter_b", c["filter_b"]),
            ),
            dt=_float("control", "dt", c["dt"]),
            integral_limit=_optional("control", "integral_limit", c["integral_limit"]),
            tau_max=_optional("control", "tau_max", c["tau_max"]),
        )
        if not control.dt > 0:
            raise ConfigError("[control] dt must be positive")
        plant = PlantParams(
            m_eff=_per_joint("plant", "m_eff", p["m_eff"]),
            c=_per_joint("plant", "c", p["c"]),
            k_u=_per_joint("plant", "k_u", p["k_u"]),
        )
        encoder = _optional("plant", "encoder_resolution", p["encoder_resolution"])
        if encoder is not None and not encoder > 0:
            raise ConfigError("[plant] encoder_resolution must be positive or none")
        trajectory = TrajectoryConfig(
            duration=_float("trajectory", "duration", t["duration"]),
            frequency=_float("trajectory", "frequency", t["frequency"]),
            base=Pose(
                _float("trajectory", "x0", t["x0"]),
                _float("trajectory", "z0", t["z0"]),
                math.radians(_float("trajectory", "theta0", t["theta0"])),
                math.radians(_float("trajectory", "psi0", t["psi0"])),
            ),
            amp_z=_float("trajectory", "amp_z", t["amp_z"]),
            amp_psi=math.radians(_float("trajectory", "amp_psi", t["amp_psi"])),
            ellipse_ax=_float("trajectory", "ellipse_ax", t["ellipse_ax"]),
            ellipse_az=_float("trajectory", "ellipse_az", t["ellipse_az"]),
            approach_d1=_float("trajectory", "approach_d1", t["approach_d1"]),
            approach_d2=_float("trajectory", "approach_d2", t["approach_d2"]),
        )
        if not trajectory.duration > 0 or not trajectory.frequency > 0:
            raise ConfigError("[trajectory] duration and frequency must be positive")
        if not (trajectory.approach_d1 > 0 and trajectory.approach_d2 > 0):
            raise ConfigError("[trajectory] approach durations must be positive")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(geometry, solver, control, plant, encoder, trajectory)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def default_config_text() -> str:
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in keys.items())
        lines.append("")
    return "\n".join(lines)
