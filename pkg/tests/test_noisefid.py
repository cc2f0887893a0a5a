import numpy as np
import pytest

from spinpipe.noisefid import (
    NoiseModel,
    two_qubit_fidelity_map,
    x90_fidelity_map,
    x90_samples,
    z_gate_fidelity_map,
    z_gate_samples,
)
from spinpipe.errors import ConstraintError
from spinpipe.singlequbit import DEFAULT_VOLTS_PER_G
from spinpipe.core import CONST


def test_noiseless_gates_are_perfect():
    nm = NoiseModel(n_samples=50)
    assert np.allclose(z_gate_samples(0.0, 0.0, nm), 1.0, atol=1e-12)
    assert np.allclose(x90_samples(0.0, 0.0, 10, nm), 1.0, atol=1e-10)


def test_voltage_only_matches_gaussian_dephasing():
    # phase error theta ~ N(0, s^2) gives F = (1 + exp(-s^2/2)) / 2
    sv = 2e-3
    nm = NoiseModel(n_samples=20000, seed=3)
    f = z_gate_samples(0.0, sv, nm)
    s = sv / DEFAULT_VOLTS_PER_G * CONST.mu_B * 1.0 * 1e-6 / CONST.hbar
    expect = 0.5 * (1 + np.exp(-s**2 / 2))
    assert f.mean() == pytest.approx(expect, abs=4 * f.std() / np.sqrt(f.size))


def test_z_map_working_point_and_independence():
    m = z_gate_fidelity_map([0.0, 0.08e-9], [0.0, 100e-6], NoiseModel(n_samples=1000))
    assert m.values[1, 1] == pytest.approx(0.9999, abs=1e-4)
    prod = m.values[1, 0] * m.values[0, 1]
    assert abs(m.values[1, 1] - prod) <= 3 * m.stderr[1, 1]
    assert m.values[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_maps_are_deterministic_and_seeded():
    a = z_gate_fidelity_map([1e-10], [1e-4], NoiseModel(n_samples=200, seed=5))
    b = z_gate_fidelity_map([1e-10], [1e-4], NoiseModel(n_samples=200, seed=5))
    c = z_gate_fidelity_map([1e-10], [1e-4], NoiseModel(n_samples=200, seed=6))
    assert a.to_csv() == b.to_csv()
    assert a.to_csv() != c.to_csv()


def test_x90_working_point():
    m = x90_fidelity_map([0.1e-6], [0.2e-9], bin_index=10, nm=NoiseModel(n_samples=1000))
    assert m.values[0, 0] == pytest.approx(0.9999, abs=2e-4)
    assert m.values[0, 0] < 1.0
    with pytest.raises(ConstraintError):
        x90_fidelity_map([0.0], [0.0], bin_index=141)


def test_fidelity_degrades_with_noise():
    m = x90_fidelity_map([0.0, 0.1e-6, 0.3e-6], [0.0], nm=NoiseModel(n_samples=300))
    assert np.all(np.diff(m.values[:, 0]) < 0)


@pytest.mark.parametrize("kind", ["ISING", "GIVENS_SWAP", "SWAP_ROTATION"])
def test_two_qubit_trends(kind):
    angles = [0.4, 1.0] if kind != "GIVENS_SWAP" else [0.3, 0.7]
    m = two_qubit_fidelity_map(kind, angles, [0.0, 1e-5, 1e-4, 1e-3], NoiseModel(n_samples=40))
    assert np.all(m.values[:, 0] >= 1 - 1e-6)
    assert np.all(np.diff(m.values, axis=1) < 0)
    assert sum(m.meta["solver_errors"]) == 0


def test_larger_tunnel_coupling_is_more_sensitive():
    m = two_qubit_fidelity_map("GIVENS_SWAP", [0.2, 0.6, 1.0, 1.4], [1e-4],
                               NoiseModel(n_samples=60))
    t = np.asarray(m.meta["mean_t_ij_hz"])
    order = np.argsort(t)
    assert np.all(np.diff(m.values[order, 0]) < 0)


def test_two_qubit_rejects_unknown_kind():
    with pytest.raises(ValueError):
        two_qubit_fidelity_map("CNOT", [0.1], [0.0])
    with pytest.raises(ValueError):
        NoiseModel(sigma_V=-1.0)
