import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from spinpipe.core import CONST, X, Z, process_fidelity
from spinpipe.errors import ConstraintError, CoverageError
from spinpipe.singlequbit import (
    RabiParams,
    b1_for_gate_time,
    bin_x90,
    binning_plan,
    delta_g_pi,
    gate_voltage_for_shift,
    init_fidelity,
    lab_frame_as_z_then_x90,
    lab_hamiltonian,
    omega1_from_b1,
    power_scaling_check,
    rabi_unitary,
    rotating_hamiltonian,
    stark_shift_for_phase,
    z_phase,
)

MHZ = 2 * np.pi * 1e6


def _integrate_lab(p, t):
    def rhs(s, y):
        return (-1j * lab_hamiltonian(p, s) @ y.reshape(2, 2)).ravel()

    y0 = np.eye(2, dtype=complex).ravel()
    sol = solve_ivp(rhs, (0, t), y0, method="DOP853", rtol=1e-11, atol=1e-12)
    return sol.y[:, -1].reshape(2, 2)


def test_closed_form_matches_ode_in_lab_frame():
    p = RabiParams(omega0=5.0 * MHZ, omega1=1.3 * MHZ, nu=4.6 * MHZ, varphi=0.4, frame=0.5 * MHZ)
    t = 0.9e-6
    assert np.allclose(rabi_unitary(p, t), _integrate_lab(p, t), atol=1e-8)


@settings(max_examples=50)
@given(st.floats(-5, 5), st.floats(0, 5), st.floats(-np.pi, np.pi), st.floats(0, 2))
def test_closed_form_matches_rotating_expm(det, w1, phase, t_us):
    nu = 3 * MHZ
    p = RabiParams(nu + det * MHZ, w1 * MHZ, nu, phase, frame=nu)
    t = t_us * 1e-6
    ref = scipy.linalg.expm(-1j * rotating_hamiltonian(p) * t)
    assert np.allclose(rabi_unitary(p, t), ref, atol=1e-10)


def test_rabi_broadcasts_over_amplitude_and_time():
    p = RabiParams(0.0, np.array([1.0, 2.0, 3.0]) * MHZ, 0.0)
    U = rabi_unitary(p, np.array([[0.1e-6], [0.2e-6]]))
    assert U.shape == (2, 3, 2, 2)
    with pytest.raises(ValueError):
        rabi_unitary(p, -1.0)


def test_resonant_pulse_is_z_then_x():
    p = RabiParams(7 * MHZ, 2 * MHZ, 7 * MHZ, frame=1 * MHZ)
    t = 0.25 / 1e6 * np.pi / np.pi  # arbitrary
    phi = lab_frame_as_z_then_x90(p, t)
    assert np.allclose(rabi_unitary(p, t), Z(phi) @ X(2 * MHZ * t), atol=1e-12)
    with pytest.raises(ConstraintError):
        lab_frame_as_z_then_x90(RabiParams(7 * MHZ, 2 * MHZ, 6 * MHZ), t)


def test_stark_pi_shift_example():
    s = stark_shift_for_phase(np.pi, 0.0)
    assert s.delta_g == pytest.approx(3.5724e-5, rel=1e-4)
    assert s.dV_q == pytest.approx(21.97e-3, rel=1e-3)
    assert s.dV_mu == pytest.approx(-s.dV_q)
    assert s.delta_g == pytest.approx(delta_g_pi())


@settings(max_examples=200)
@given(st.floats(-np.pi, np.pi), st.floats(-1e-2, 1e-2))
def test_stark_reaches_target_phase(phi, G):
    s = stark_shift_for_phase(phi, G)
    total = z_phase(G + s.delta_g, 1.0, 1e-6)
    assert np.exp(1j * (total - phi)) == pytest.approx(1.0, abs=1e-8)
    assert abs(s.delta_g) <= delta_g_pi() * (1 + 1e-9)
    assert 0.0 <= s.r_q < 1.0


def test_gate_voltage_errors():
    assert gate_voltage_for_shift(1e-5, 100.0, 2.0) == pytest.approx((1e-3, -2e-3))
    with pytest.raises(ValueError):
        gate_voltage_for_shift(1e-5, 0.0)
    with pytest.raises(ConstraintError):
        gate_voltage_for_shift(1e-5, 615.0, 0.0)


def test_binning_plan_grid():
    plan = binning_plan([0.0, 3e-3, -9.9e-3])
    assert plan.g_bin == pytest.approx(7.1448e-5, rel=1e-4)
    assert plan.bin_spacing == pytest.approx(1e6, rel=1e-12)
    assert plan.g_range == pytest.approx(1.00384e-2, rel=1e-4)
    assert len(plan.bins) == 281
    with pytest.raises(CoverageError, match="qubit 1"):
        binning_plan([0.0, 1.02e-2])


@given(st.lists(st.floats(-1e-2, 1e-2), min_size=1, max_size=20))
def test_binning_residual_within_half_bin(G):
    plan = binning_plan(G)
    for g, a in zip(G, plan.assignments):
        assert abs(a.delta_g) <= plan.g_bin / 2 * (1 + 1e-9)
        assert a.bin_index * plan.g_bin == pytest.approx(g + a.delta_g, abs=1e-15)


def test_drive_amplitude_and_conventions():
    B1 = b1_for_gate_time(1e-6)
    assert B1 == pytest.approx(35.72e-6, rel=1e-3)
    assert omega1_from_b1(B1) * 1e-6 == pytest.approx(np.pi)
    assert b1_for_gate_time(1e-6, "full") == pytest.approx(B1 / 2)


def test_initialization_and_power():
    assert init_fidelity(0.073) == pytest.approx(0.999899, abs=2e-6)
    assert init_fidelity(0.073, convention="full_zeeman") > init_fidelity(0.073)
    assert power_scaling_check(1.0, 0.1, 3) == pytest.approx(0.03)
    with pytest.raises(ValueError):
        init_fidelity(0.0)


@pytest.mark.parametrize("i", [-140, -7, 0, 1, 55, 140])
def test_bin_x90_is_z_times_x90(i):
    p, t0, phi = bin_x90(i)
    assert t0 == pytest.approx(0.5e-6)
    assert process_fidelity(Z(phi) @ X(np.pi / 2), rabi_unitary(p, t0)) == pytest.approx(1.0)
    # the residual frame phase over a whole slot is a multiple of 2 pi
    assert np.exp(1j * (p.nu - p.frame) * 1e-6) == pytest.approx(1.0, abs=1e-9)
