import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from spinpipe.core import (
    CONST,
    I2,
    PAULIS,
    SX,
    AxisAngle,
    PhysConstants,
    X,
    Z,
    axis_angle_decompose,
    expm_hermitian,
    is_unitary,
    kron,
    process_fidelity,
    random_su2,
    random_unitary,
)
from spinpipe.errors import DimensionError

angles = st.floats(-20, 20, allow_nan=False)


def test_constants_and_overrides():
    assert CONST.g_Si == 2.0
    assert CONST.mu_B == pytest.approx(9.2740100783e-24, rel=1e-9)
    c = CONST.with_overrides({"g_si": 1.998, "B0_tesla": 0.5})
    assert (c.g_Si, c.B0) == (1.998, 0.5)
    assert CONST.with_overrides(None) is CONST
    assert PhysConstants.from_json('{"g_si": 2.1}').g_Si == 2.1
    with pytest.raises(ValueError):
        PhysConstants(g_Si=-1)


def test_zeeman_rate_one_tesla():
    # 2 * mu_B * 1 T / h is close to 27.99 GHz
    assert CONST.zeeman_rate(2.0) / (2 * np.pi) == pytest.approx(27.9925e9, rel=1e-4)


def test_z_and_x_conventions():
    assert np.allclose(Z(np.pi), np.diag([-1j, 1j]))
    assert np.allclose(X(np.pi), -1j * SX)
    assert np.allclose(X(2 * np.pi), -I2)


@given(angles)
def test_expm_matches_scipy(t):
    rng = np.random.default_rng(abs(int(t * 1000)))
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = A + A.conj().T
    assert np.allclose(expm_hermitian(H, t), scipy.linalg.expm(-1j * H * t), atol=1e-10)


def test_process_fidelity_basics():
    U = random_unitary(4, np.random.default_rng(1))
    assert process_fidelity(U, np.exp(0.7j) * U) == pytest.approx(1.0)
    assert process_fidelity(I2, SX) == pytest.approx(0.0)
    # average fidelity (d F + 1)/(d + 1)
    assert process_fidelity(I2, SX, average=True) == pytest.approx(1 / 3)
    stack = np.stack([I2, SX, Z(np.pi / 2)])
    f = process_fidelity(np.broadcast_to(I2, stack.shape), stack)
    assert f.shape == (3,)
    assert f[2] == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        process_fidelity(I2, np.eye(4))


@given(st.integers(0, 2**32 - 1))
def test_process_fidelity_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    f = process_fidelity(random_unitary(2, rng), random_unitary(2, rng))
    assert 0.0 <= f <= 1.0


def test_axis_angle_examples():
    a = axis_angle_decompose(X(np.pi / 2))
    assert a.theta == pytest.approx(np.pi / 2)
    assert np.allclose(a.n, [-1, 0, 0])
    b = axis_angle_decompose(Z(np.pi))
    assert b.theta == pytest.approx(np.pi)
    assert np.allclose(b.n, [0, 0, -1])
    c = axis_angle_decompose(np.exp(0.3j) * I2)
    assert c.theta == 0.0 and np.allclose(c.n, [0, 0, 1])
    with pytest.raises(DimensionError):
        axis_angle_decompose(np.eye(3))


@settings(max_examples=300)
@given(st.integers(0, 2**32 - 1))
def test_axis_angle_roundtrip(seed):
    U = random_unitary(2, np.random.default_rng(seed))
    a = axis_angle_decompose(U)
    assert 0.0 <= a.theta <= np.pi + 1e-12
    assert np.linalg.norm(a.n) == pytest.approx(1.0)
    assert np.allclose(a.unitary(), U, atol=1e-10)


def test_axis_angle_unitary_is_unitary():
    u = AxisAngle(np.array([0.0, 0.6, 0.8]), 1.2, 0.4).unitary()
    assert is_unitary(u)
    # n.sigma squares to the identity for a unit axis
    ns = sum(c * p for c, p in zip([0.0, 0.6, 0.8], PAULIS))
    assert np.allclose(ns @ ns, I2)


def test_random_generators_unitary():
    rng = np.random.default_rng(5)
    assert is_unitary(random_su2(rng))
    assert np.linalg.det(random_su2(rng)) == pytest.approx(1.0)
    assert is_unitary(random_unitary(6, rng))
    assert kron(I2, SX).shape == (4, 4)
