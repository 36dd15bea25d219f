import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import signal

from pm4dof.control import ControllerState, FilterParams, Gains, control_law, controller_step, velocity_estimate

vec4 = st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=4).map(np.array)


def _state(q0=np.zeros(4), dt=1e-3, gains=None, a=100.0, b=100.0, **kw):
    return ControllerState.initial(q0, gains or Gains(), FilterParams(a, b), dt, **kw)


def test_constant_input_decays_geometrically():
    state = _state()
    state.v = np.array([1.0, -2.0, 0.5, 3.0])
    ratio = 1 / (1 + 100 * 1e-3)
    prev = state.v.copy()
    for _ in range(50):
        v = velocity_estimate(state, np.zeros(4)).copy()
        np.testing.assert_allclose(v, prev * ratio, rtol=1e-14)
        prev = v


@pytest.mark.parametrize("a,b,slope", [(100.0, 100.0, 0.02), (50.0, 80.0, -0.3), (10.0, 1.0, 1.5)])
def test_ramp_fixed_point(a, b, slope):
    dt = 1e-3
    state = _state(dt=dt, a=a, b=b)
    for k in range(1, 20000):
        v = velocity_estimate(state, np.full(4, slope * k * dt))
    np.testing.assert_allclose(v, b * slope / a, atol=1e-9)


def test_frequency_response_at_one_hertz():
    dt, amp, omega = 1e-3, 0.01, 2 * math.pi
    filt = FilterParams(100.0, 100.0)
    state = ControllerState.initial(np.zeros(4), Gains(), filt, dt)
    t = np.arange(1, 5001) * dt
    out = np.array([velocity_estimate(state, np.full(4, amp * math.sin(omega * tk)))[0] for tk in t])
    steady = out[t > 3.0]
    expected = filt.frequency_response(omega)[0] * amp
    assert expected == pytest.approx(100 * omega / math.hypot(omega, 100) * amp)
    assert abs(0.5 * np.ptp(steady) / expected - 1) < 0.02


def test_impulse_response_matches_transfer_function():
    dt, a, b = 1e-3, 100.0, 100.0
    state = _state(dt=dt, a=a, b=b)
    q = np.zeros(1000)
    q[0] = 1.0
    out = np.array([velocity_estimate(state, np.full(4, qk))[0] for qk in q])
    # v[n] (1 + a dt) - v[n-1] = b (q[n] - q[n-1])
    ref = signal.lfilter([b, -b], [1 + a * dt, -1.0], q)
    assert np.max(np.abs(out - ref)) < 1e-12


def test_control_law_examples():
    gains = Gains(Kp=[100, 100, 100, 100], Kd=0, Ki=0, allow_zero=True)
    np.testing.assert_array_equal(control_law(np.zeros(4), np.zeros(4), np.zeros(4), Gains()), 0.0)
    tau = control_law(np.array([0.01, 0, 0, 0]), np.zeros(4), np.zeros(4), gains)
    np.testing.assert_allclose(tau, [-1.0, 0, 0, 0])


@given(vec4, vec4, vec4, st.floats(-10, 10))
def test_control_law_linear(e, v, integral, alpha):
    g = Gains()
    zero = np.zeros(4)
    for args in ((e, zero, zero), (zero, v, zero), (zero, zero, integral)):
        scaled = [alpha * x for x in args]
        np.testing.assert_allclose(control_law(*scaled, g), alpha * control_law(*args, g), rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(
        control_law(e, v, integral, g),
        control_law(e, zero, zero, g) + control_law(zero, v, zero, g) + control_law(zero, zero, integral, g),
        rtol=1e-12, atol=1e-9,
    )


@given(st.floats(1e-6, 1.0), st.integers(0, 3))
def test_positive_error_gives_restoring_action(err, joint):
    e = np.zeros(4)
    e[joint] = err
    tau = control_law(e, np.zeros(4), np.zeros(4), Gains())
    assert tau[joint] < 0
    assert np.count_nonzero(tau) == 1


def test_matched_hold_is_silent():
    q = np.array([0.66, 0.67, 0.67, 0.635])
    state = _state(q)
    for _ in range(1000):
        tau, state = controller_step(state, q, q)
        assert np.all(tau == 0.0)
    assert np.all(state.integral == 0.0)


def test_step_without_integral():
    gains = Gains(Kp=4000.0, Kd=40.0, Ki=0.0, allow_zero=True)
    q = np.full(4, 0.65)
    state = _state(q, gains=gains)
    tau0, state = controller_step(state, q, q)
    delta = 0.02
    tau1, state = controller_step(state, q, q + delta)
    np.testing.assert_allclose(tau1 - tau0, -4000.0 * -delta)


def test_integral_winds_up_to_clamp():
    dt, e0 = 1e-2, 0.5
    gains = Gains(Kp=1.0, Kd=1.0, Ki=5.0)
    state = _state(np.zeros(4), dt=dt, gains=gains, tau_max=None, integral_limit=10.0)
    q_d = np.full(4, -e0)
    taus, integrals = [], []
    for _ in range(3000):
        tau, state = controller_step(state, np.zeros(4), q_d)
        taus.append(abs(tau[0]))
        integrals.append(state.integral[0])
    integrals = np.array(integrals)
    k_clamp = int(np.argmax(integrals >= 10.0))
    assert k_clamp == pytest.approx(10.0 / (e0 * dt), abs=1)
    np.testing.assert_allclose(np.diff(integrals[:k_clamp]), e0 * dt, rtol=1e-9)
    assert np.all(np.diff(taus[:k_clamp]) > 0)
    assert np.all(integrals[k_clamp:] == 10.0)
    assert taus[-1] == pytest.approx(1.0 * e0 + 5.0 * 10.0)


def test_output_saturation():
    state = _state(np.zeros(4), tau_max=400.0)
    tau, _ = controller_step(state, np.zeros(4), np.full(4, 1.0))
    np.testing.assert_array_equal(tau, 400.0)


@given(st.lists(vec4, min_size=1, max_size=30))
def test_zero_gains_give_zero_output(qs):
    gains = Gains(Kp=0, Kd=0, Ki=0, allow_zero=True)
    state = _state(gains=gains)
    for q in qs:
        tau, state = controller_step(state, q, -q)
        assert np.all(tau == 0.0)


@given(st.lists(vec4, min_size=2, max_size=30), st.integers(1, 20))
def test_time_invariant(qs, shift):
    q0 = np.array(qs[0])
    a = _state(q0)
    out_a = [controller_step(a, q, q0)[0] for q in qs]
    b = _state(q0)
    for _ in range(shift):
        controller_step(b, q0, q0)
    out_b = [controller_step(b, q, q0)[0] for q in qs]
    np.testing.assert_array_equal(out_a, out_b)


def test_gain_validation():
    with pytest.raises(ValueError):
        Gains(Kp=0)
    with pytest.raises(ValueError):
        Gains(Kp=-1, allow_zero=True)
    with pytest.raises(ValueError):
        FilterParams(a=0)
    with pytest.raises(ValueError):
        _state(dt=0.0)
    assert Gains(Kp=[1, 2, 3, 4]).Kp.tolist() == [1, 2, 3, 4]
