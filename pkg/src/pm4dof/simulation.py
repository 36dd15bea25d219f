"""Fixed-step closed-loop simulation in joint space.

Per tick: Cartesian reference -> inverse kinematics -> PID -> per-joint plant.
The plant is a decoupled second-order model ``m q'' = k_u u - c q'``.
"""
from __future__ import annotations

import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import signal

from .control import ControllerState, FilterParams, Gains, controller_step
from .errors import DegenerateSignal, EmptyLog, KinematicsError, UnreachableReference
from .geometry import HOME, GeometricParams, Pose
from .inverse_kinematics import ik_active

JOINT_NAMES = ("q13", "q23", "q33", "q42")
TRAJECTORY_KINDS = ("sinusoidal", "elliptic", "hold")


@dataclass(frozen=True)
class TrajectorySpec:
    """Reference trajectory parameters. Lengths in m, angles in rad, times in s.

    ``approach`` is a list of ``(target pose, duration)`` segments driven
    linearly from ``base``; the periodic part of an elliptic trajectory starts
    at the end of the last segment.
    """

    kind: str = "sinusoidal"
    base: Pose = HOME
    amp_z: float = 0.05
    amp_psi: float = math.radians(10.0)
    frequency: float = 0.2
    ellipse_ax: float = 0.05
    ellipse_az: float = 0.06
    approach: tuple = ()
    duration: float = 30.0

    def __post_init__(self):
        if self.kind not in TRAJECTORY_KINDS:
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.kind != "hold" and not self.frequency > 0:
            raise ValueError("frequency must be positive for periodic trajectories")
        for _, seg in self.approach:
            if not seg > 0:
                raise ValueError("approach segment durations must be positive")

    @classmethod
    def sinusoidal(cls, **kwargs) -> "TrajectorySpec":
        return cls(kind="sinusoidal", **kwargs)

    @classmethod
    def elliptic(cls, d1: float = 2.0, d2: float = 2.0, **kwargs) -> "TrajectorySpec":
        kwargs.setdefault("approach", (
            (Pose(0.05, 0.69, 0.0, 0.0), d1),
            (Pose(0.05, 0.75, 0.0, 0.0), d2),
        ))
        kwargs.setdefault("base", HOME)
        return cls(kind="elliptic", **kwargs)

    @classmethod
    def hold(cls, pose: Pose = HOME, duration: float = 30.0) -> "TrajectorySpec":
        return cls(kind="hold", base=pose, duration=duration)

    def describe(self) -> dict:
        out = asdict(self)
        out["base"] = asdict(self.base)
        out["approach"] = [(asdict(p), d) for p, d in self.approach]
        return out


def trajectory_sinusoidal(spec: TrajectorySpec, t: float) -> Pose:
    s = math.sin(2 * math.pi * spec.frequency * t)
    b = spec.base
    return Pose(b.x, b.z + spec.amp_z * s, b.theta, b.psi + spec.amp_psi * s)


def _approach(spec: TrajectorySpec, t: float):
    """Pose on the approach path, or ``(None, end pose, end time)`` past it."""
    start, t0 = spec.base, 0.0
    for target, seg in spec.approach:
        if t <= t0 + seg:
            w = (t - t0) / seg
            a, b = start.as_array(), target.as_array()
            return Pose.from_array(a + w * (b - a)), start, t0
        start, t0 = target, t0 + seg
    return None, start, t0


def trajectory_elliptic(spec: TrajectorySpec, t: float) -> Pose:
    """Approach segments, then an ellipse in the X-Z plane.

    The ellipse is centred at ``end - (ax, 0)`` so that it starts exactly on
    the last approach point.
    """
    pose, end, t_end = _approach(spec, t)
    if pose is not None:
        return pose
    w = 2 * math.pi * spec.frequency * (t - t_end)
    xc = end.x - spec.ellipse_ax
    return Pose(xc + spec.ellipse_ax * math.cos(w), end.z + spec.ellipse_az * math.sin(w), end.theta, end.psi)


def reference_pose(spec: TrajectorySpec, t: float) -> Pose:
    if spec.kind == "sinusoidal":
        return trajectory_sinusoidal(spec, t)
    if spec.kind == "elliptic":
        return trajectory_elliptic(spec, t)
    return spec.base


@dataclass(frozen=True)
class PlantParams:
    m_eff: np.ndarray = field(default_factory=lambda: np.full(4, 2.0))
    c: np.ndarray = field(default_factory=lambda: np.full(4, 50.0))
    k_u: np.ndarray = field(default_factory=lambda: np.full(4, 1.0))

    def __post_init__(self):
        for name in ("m_eff", "c", "k_u"):
            object.__setattr__(self, name, np.broadcast_to(np.asarray(getattr(self, name), float), (4,)).copy())
        if not np.all(self.m_eff > 0):
            raise ValueError("m_eff must be positive")
        if not np.all(self.c >= 0):
            raise ValueError("damping c must be non-negative")


def plant_step(params: PlantParams, q, qdot, u, dt: float):
    """Semi-implicit Euler step; returns ``(q, qdot)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    qdot = qdot + dt * (params.k_u * u - params.c * qdot) / params.m_eff
    return q + dt * qdot, qdot


CSV_COLUMNS = (
    ("t",)
    + ("x_ref", "z_ref", "theta_ref", "psi_ref")
    + tuple(f"{n}_ref" for n in JOINT_NAMES)
    + JOINT_NAMES
    + tuple("u" + n[1:] for n in JOINT_NAMES)
    + tuple("e" + n[1:] for n in JOINT_NAMES)
)


@dataclass
class SimLog:
    t: np.ndarray
    pose_ref: np.ndarray
    q_ref: np.ndarray
    q: np.ndarray
    u: np.ndarray
    e: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def table(self) -> np.ndarray:
        # "+ 0.0" folds negative zeros so the CSV never prints "-0"
        return np.column_stack([self.t, self.pose_ref, self.q_ref, self.q, self.u, self.e]) + 0.0

    def to_csv(self, path_or_buffer=None) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        np.savetxt(buf, self.table(), fmt="%.9g", delimiter=",")
        text = buf.getvalue()
        if path_or_buffer is not None:
            if hasattr(path_or_buffer, "write"):
                path_or_buffer.write(text)
            else:
                with open(path_or_buffer, "w", newline="") as fh:
                    fh.write(text)
        return text


def quantize(q: np.ndarray, resolution: float | None) -> np.ndarray:
    if not resolution:
        return q
    return np.round(q / resolution) * resolution


def run_closed_loop(
    traj: TrajectorySpec,
    gains: Gains | None = None,
    filter: FilterParams | None = None,
    plant: PlantParams | None = None,
    dt: float = 1e-3,
    duration: float | None = None,
    *,
    params: GeometricParams | None = None,
    integral_limit: float | None = 10.0,
    tau_max: float | None = 400.0,
    encoder_resolution: float | None = None,
    initial_q=None,
) -> SimLog:
    """Simulate ``duration`` seconds (default ``traj.duration``) at period ``dt``.

    The plant starts at rest on the joint solution of the first reference
    unless ``initial_q`` is given.
    """
    params = params or GeometricParams()
    gains = gains or Gains()
    filter = filter or FilterParams()
    plant = plant or PlantParams()
    duration = traj.duration if duration is None else duration
    n = int(round(duration / dt))
    if n < 1:
        raise ValueError("duration shorter than one control period")

    def joint_reference(k: int, t: float):
        pose = reference_pose(traj, t)
        try:
            return pose, ik_active(pose, params)
        except KinematicsError as exc:
            raise UnreachableReference(f"reference unreachable at tick {k} (t={t:.6g} s): {exc}", k, t) from exc

    q = np.array(initial_q, dtype=float) if initial_q is not None else joint_reference(0, 0.0)[1]
    qdot = np.zeros(4)
    state = ControllerState(gains, filter, dt, quantize(q, encoder_resolution),
                            integral_limit=integral_limit, tau_max=tau_max)

    t_log = np.arange(n) * dt
    pose_log = np.empty((n, 4))
    qref_log = np.empty((n, 4))
    q_log = np.empty((n, 4))
    u_log = np.empty((n, 4))
    for k in range(n):
        pose, q_ref = joint_reference(k, t_log[k])
        measured = quantize(q, encoder_resolution)
        tau, state = controller_step(state, measured, q_ref)
        pose_log[k] = pose.as_array()
        qref_log[k] = q_ref
        q_log[k] = measured
        u_log[k] = tau
        q, qdot = plant_step(plant, q, qdot, tau, dt)

    meta = {
        "dt": dt,
        "duration": duration,
        "trajectory": traj.describe(),
        "geometry": asdict(params),
        "gains": {k: v.tolist() for k, v in (("Kp", gains.Kp), ("Kd", gains.Kd), ("Ki", gains.Ki))},
        "filter": {"a": filter.a.tolist(), "b": filter.b.tolist()},
        "plant": {"m_eff": plant.m_eff.tolist(), "c": plant.c.tolist(), "k_u": plant.k_u.tolist()},
        "integral_limit": integral_limit,
        "tau_max": tau_max,
        "encoder_resolution": encoder_resolution,
    }
    return SimLog(t_log, pose_log, qref_log, q_log, u_log, q_log - qref_log, meta)


def _joint_index(joint) -> int:
    if isinstance(joint, str):
        return JOINT_NAMES.index(joint)
    return int(joint)


def mean_error(log: SimLog, joint) -> float:
    """Signed mean of ``q - q_ref`` for one joint (index 0..3 or name like 'q13')."""
    if len(log) == 0:
        raise EmptyLog("simulation log is empty")
    return float(np.mean(log.e[:, _joint_index(joint)]))


def mean_errors(log: SimLog) -> np.ndarray:
    if len(log) == 0:
        raise EmptyLog("simulation log is empty")
    return log.e.mean(axis=0)


def _overlap_sums(x: np.ndarray, lags: np.ndarray, leading: bool):
    """Sum of ``x`` and ``x**2`` over the samples that overlap at each lag."""
    n = x.size
    c1 = np.concatenate([[0.0], np.cumsum(x)])
    c2 = np.concatenate([[0.0], np.cumsum(x * x)])
    # actual[i] pairs with reference[i - k]
    if leading:  # actual: indices max(0, k) .. min(n, n + k)
        lo, hi = np.maximum(lags, 0), np.minimum(n, n + lags)
    else:  # reference: indices max(0, -k) .. min(n, n - k)
        lo, hi = np.maximum(-lags, 0), np.minimum(n, n - lags)
    return c1[hi] - c1[lo], c2[hi] - c2[lo]


def dominant_period(x, dt: float) -> float | None:
    """Period (s) of the strongest non-DC spectral line of ``x``."""
    x = np.asarray(x, dtype=float)
    spectrum = np.abs(np.fft.rfft(x - x.mean()))
    if spectrum.size < 2 or not np.any(spectrum[1:]):
        return None
    k = 1 + int(np.argmax(spectrum[1:]))
    return x.size * dt / k


def phase_offset(reference, actual, dt: float, max_lag: float | None = None) -> float:
    """Lag of ``actual`` behind ``reference`` in seconds (positive = actual late).

    The lag maximizes the Pearson correlation between the overlapping parts
    of the two series (lags with at least half the record overlapping), and
    is refined with a parabola through the peak and its neighbours.
    Normalizing per lag keeps records holding a fractional number of periods
    from dragging the peak toward zero.

    The search is limited to ``|lag| <= max_lag`` seconds, by default half the
    dominant period of ``reference`` (a periodic pair correlates equally well
    one period further on).
    """
    ref = np.asarray(reference, dtype=float)
    act = np.asarray(actual, dtype=float)
    if ref.shape != act.shape or ref.ndim != 1 or ref.size < 3:
        raise ValueError("series must be 1-D, equally long and have at least 3 samples")
    if np.ptp(ref) == 0 or np.ptp(act) == 0:
        raise DegenerateSignal("cannot estimate the phase of a constant series")
    ref = ref - ref.mean()
    act = act - act.mean()
    n = ref.size
    cross = signal.correlate(act, ref, mode="full", method="fft")
    lags = signal.correlation_lags(n, n, mode="full")
    if max_lag is None:
        period = dominant_period(ref, dt)
        max_lag = 0.5 * period if period is not None else n * dt
    limit = min(n // 2, int(math.floor(max_lag / dt)))
    keep = np.abs(lags) <= limit
    cross, lags = cross[keep], lags[keep]
    m = (n - np.abs(lags)).astype(float)
    sa, saa = _overlap_sums(act, lags, leading=True)
    sr, srr = _overlap_sums(ref, lags, leading=False)
    cov = cross - sa * sr / m
    var = (saa - sa * sa / m) * (srr - sr * sr / m)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(var > 0, cov / np.sqrt(np.where(var > 0, var, 1.0)), -np.inf)
    k = int(np.argmax(corr))
    shift = 0.0
    if 0 < k < corr.size - 1:
        y0, y1, y2 = corr[k - 1], corr[k], corr[k + 1]
        denom = y0 - 2 * y1 + y2
        if np.isfinite(denom) and denom < 0:
            shift = 0.5 * (y0 - y2) / denom
    return float((lags[k] + shift) * dt)


def phase_offsets(log: SimLog) -> np.ndarray:
    dt = float(log.meta.get("dt", log.t[1] - log.t[0]))
    return np.array([phase_offset(log.q_ref[:, j], log.q[:, j], dt) for j in range(4)])
