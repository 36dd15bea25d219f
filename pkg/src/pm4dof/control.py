"""Joint-space passivity-based PID with filtered velocity estimation.

Control action per actuator::

    tau = -Kp e - Kd v - Ki * integral(e + v) dt,    e = q - q_d

where ``v`` is ``q`` passed through ``b s / (s + a)``. Both the filter and the
integral are discretized with backward Euler.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as4(value, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (4,)).copy()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    return arr


@dataclass(frozen=True)
class Gains:
    Kp: np.ndarray = field(default_factory=lambda: np.full(4, 8000.0))
    Kd: np.ndarray = field(default_factory=lambda: np.full(4, 60.0))
    Ki: np.ndarray = field(default_factory=lambda: np.full(4, 20.0))
    allow_zero: bool = False

    def __post_init__(self):
        for name in ("Kp", "Kd", "Ki"):
            arr = _as4(getattr(self, name), name)
            ok = np.all(arr >= 0) if self.allow_zero else np.all(arr > 0)
            if not ok:
                raise ValueError(f"{name} entries must be positive, got {arr}")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class FilterParams:
    a: np.ndarray = field(default_factory=lambda: np.full(4, 100.0))
    b: np.ndarray = field(default_factory=lambda: np.full(4, 100.0))

    def __post_init__(self):
        for name in ("a", "b"):
            arr = _as4(getattr(self, name), name)
            if not np.all(arr > 0):
                raise ValueError(f"filter {name} entries must be positive, got {arr}")
            object.__setattr__(self, name, arr)

    def frequency_response(self, omega: float) -> np.ndarray:
        """|b jw / (jw + a)| per joint."""
        return self.b * omega / np.sqrt(omega ** 2 + self.a ** 2)


@dataclass
class ControllerState:
    gains: Gains
    filter: FilterParams
    dt: float
    q_prev: np.ndarray
    v: np.ndarray = field(default_factory=lambda: np.zeros(4))
    integral: np.ndarray = field(default_factory=lambda: np.zeros(4))
    integral_limit: float | None = 10.0
    tau_max: float | None = 400.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        self.q_prev = np.array(self.q_prev, dtype=float)
        self.v = np.array(self.v, dtype=float)
        self.integral = np.array(self.integral, dtype=float)

    @classmethod
    def initial(cls, q0, gains: Gains | None = None, filter: FilterParams | None = None,
                dt: float = 1e-3, **kwargs) -> "ControllerState":
        return cls(gains or Gains(), filter or FilterParams(), dt, np.array(q0, dtype=float), **kwargs)


def velocity_estimate(state: ControllerState, q) -> np.ndarray:
    """Advance the velocity filter by one sample and return the new estimate."""
    q = np.asarray(q, dtype=float)
    f = state.filter
    state.v = (state.v + f.b * (q - state.q_prev)) / (1.0 + f.a * state.dt)
    state.q_prev = q.copy()
    return state.v


def control_law(e, v, integral, gains: Gains) -> np.ndarray:
    return -gains.Kp * np.asarray(e) - gains.Kd * np.asarray(v) - gains.Ki * np.asarray(integral)


def controller_step(state: ControllerState, q, q_d):
    """One control period. Returns ``(tau, state)``; ``state`` is updated in place."""
    q = np.asarray(q, dtype=float)
    e = q - np.asarray(q_d, dtype=float)
    v = velocity_estimate(state, q)
    integral = state.integral + (e + v) * state.dt
    if state.integral_limit is not None:
        integral = np.clip(integral, -state.integral_limit, state.integral_limit)
    state.integral = integral
    tau = control_law(e, v, integral, state.gains)
    if state.tau_max is not None:
        tau = np.clip(tau, -state.tau_max, state.tau_max)
    return tau, state
