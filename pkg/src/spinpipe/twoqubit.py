"""Exchange Hamiltonian, native two-spin unitary and composite gates.

Energies are in joules; basis is {uu, ud, du, dd} with qubit i first.
The native rotation angle is ``phi = Omega t`` with
``hbar Omega = sqrt(Delta^2 + J^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import CONST, I4, PhysConstants, Z, kron, process_fidelity
from .errors import ConstraintError, SingularityError

LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class ExchangeParams:
    t_ij: float
    dK: float
    eps: float = 0.0
    E_Z: float = 0.0
    dE_Z: float = 0.0

    def __post_init__(self):
        if self.dK <= 0:
            raise ValueError("dK must be positive")
        if self.t_ij < 0:
            raise ValueError("t_ij must be non-negative")
        if abs(self.eps) >= self.dK:
            raise SingularityError("detuning at or beyond the charge transition")

    @classmethod
    def from_hz(cls, t_hz, dK_ev, eps_ev=0.0, E_Z_hz=0.0, dE_Z_hz=0.0, const=CONST):
        e, h = const.e_charge, const.h
        return cls(t_hz * h, dK_ev * e, eps_ev * e, E_Z_hz * h, dE_Z_hz * h)

    def t_hz(self, const: PhysConstants = CONST) -> float:
        return self.t_ij / const.h


def J_s(p: ExchangeParams, s1: int, s2: int, s3: int) -> float:
    den = s1 * p.dE_Z + s2 * p.dK + s3 * p.eps
    if abs(den) < 1e-6 * p.dK:
        raise SingularityError(f"vanishing denominator for signs ({s1},{s2},{s3})")
    return p.t_ij**2 / den


def exchange_strength(p: ExchangeParams) -> float:
    return 0.5 * (J_s(p, 1, 1, 1) + J_s(p, 1, 1, -1) + J_s(p, -1, 1, 1) + J_s(p, -1, 1, -1))


def J_i(p: ExchangeParams) -> float:
    return -J_s(p, -1, -1, -1) - J_s(p, -1, -1, 1)


def J_j(p: ExchangeParams) -> float:
    return -J_s(p, 1, -1, -1) - J_s(p, 1, -1, 1)


def exchange_hamiltonian(p: ExchangeParams) -> np.ndarray:
    J, ji, jj = exchange_strength(p), J_i(p), J_j(p)
    H = np.diag(
        [p.dE_Z + p.E_Z, -p.dE_Z - ji, p.dE_Z - jj, -p.dE_Z - p.E_Z]
    ).astype(complex)
    H[1, 2] = H[2, 1] = J
    return H


@dataclass(frozen=True)
class NativeAngles:
    phi: float
    chi: float
    phi_Z: float = 0.0
    x: float = float("nan")
    Delta_ij: float = float("nan")
    J_ij: float = float("nan")
    Omega_ij: float = float("nan")

    @property
    def alpha(self) -> float:
        return self.phi * np.cos(self.chi)

    @property
    def phi11(self) -> float:
        return -self.phi_Z - self.alpha


def delta_ij(p: ExchangeParams) -> float:
    return p.dE_Z + 0.5 * (J_i(p) - J_j(p))


def omega_ij(p: ExchangeParams, const: PhysConstants = CONST) -> float:
    return float(np.hypot(delta_ij(p), exchange_strength(p)) / const.hbar)


def native_angles(p: ExchangeParams, t: float, const: PhysConstants = CONST) -> NativeAngles:
    J = exchange_strength(p)
    d = delta_ij(p)
    om = np.hypot(d, J) / const.hbar
    if J > 0:
        x = d / J
        chi = float(np.arctan(x))
    else:
        x = np.copysign(np.inf, d) if d != 0 else 0.0
        chi = float(np.copysign(np.pi / 2, d)) if d != 0 else 0.0
    phi_z = (p.E_Z + p.dE_Z) * t / const.hbar
    return NativeAngles(float(om * t), chi, float(phi_z), float(x), float(d), float(J), float(om))


def native_from_angles(a: NativeAngles) -> np.ndarray:
    phi, chi, pz = a.phi, a.chi, a.phi_Z
    al = phi * np.cos(chi)
    c, s = np.cos(phi), np.sin(phi)
    U = np.zeros((4, 4), dtype=complex)
    U[0, 0] = np.exp(-1j * pz - 1j * al)
    U[3, 3] = np.exp(1j * pz - 1j * al)
    U[1, 1] = c + 1j * np.sin(chi) * s
    U[2, 2] = c - 1j * np.sin(chi) * s
    U[1, 2] = U[2, 1] = -1j * np.cos(chi) * s
    return np.exp(1j * al) * U


def native_unitary(p: ExchangeParams, t: float, const: PhysConstants = CONST) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be non-negative")
    return native_from_angles(native_angles(p, t, const))


class GateKind(str, Enum):
    SWAP = "SWAP"
    SQRT_SWAP = "SQRT_SWAP"
    SWAP_THETA = "SWAP_THETA"
    GIVENS = "GIVENS"
    CPHASE = "CPHASE"
    ISING = "ISING"


SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def reference_gate(kind: GateKind | str, angle: float = 0.0) -> np.ndarray:
    kind = GateKind(kind)
    if kind is GateKind.SWAP:
        return SWAP.copy()
    if kind is GateKind.SQRT_SWAP:
        a, b = (1 + 1j) / 2, (1 - 1j) / 2
        return np.array([[1, 0, 0, 0], [0, a, b, 0], [0, b, a, 0], [0, 0, 0, 1]])
    c, s = np.cos(angle), np.sin(angle)
    if kind is GateKind.SWAP_THETA:
        e = np.exp(1j * angle)
        return np.array(
            [[e, 0, 0, 0], [0, c, 1j * s, 0], [0, 1j * s, c, 0], [0, 0, 0, e]]
        )
    if kind is GateKind.GIVENS:
        return np.array(
            [[1, 0, 0, 0], [0, s, -c, 0], [0, c, s, 0], [0, 0, 0, 1]], dtype=complex
        )
    if kind is GateKind.CPHASE:
        return np.diag([1, 1, 1, np.exp(1j * angle)]).astype(complex)
    return np.diag([1, np.exp(1j * angle), np.exp(1j * angle), 1]).astype(complex)


def zz(a: float, b: float | None = None) -> np.ndarray:
    """Z(a) on qubit i and Z(b) on qubit j (b defaults to a)."""
    return kron(Z(a), Z(a if b is None else b))


@dataclass(frozen=True)
class Composite:
    unitary: np.ndarray
    target: np.ndarray
    wrappers: dict
    angles: NativeAngles

    @property
    def fidelity(self) -> float:
        return process_fidelity(self.target, self.unitary)


def _resolve(p, lattice_offset: float, n: int | None, t: float | None,
             const: PhysConstants) -> tuple[NativeAngles, np.ndarray]:
    if isinstance(p, NativeAngles):
        a = p
        U = native_from_angles(a)
    else:
        if t is None:
            if n is None:
                raise ValueError("need n or t")
            t = (lattice_offset + 2 * np.pi * n) / omega_ij(p, const)
        a = native_angles(p, t, const)
        U = native_from_angles(a)
    r = (a.phi - lattice_offset) / (2 * np.pi)
    if abs(r - np.rint(r)) * 2 * np.pi > LATTICE_TOL * max(1.0, abs(a.phi)) or np.rint(r) < 0:
        raise ConstraintError(
            f"native angle {a.phi:.12g} is not {lattice_offset:.6g} + 2 pi n"
        )
    return a, U


def compose_cphase(p, n: int | None = 0, t: float | None = None,
                   const: PhysConstants = CONST) -> Composite:
    """Z wrappers around one native at phi = pi + 2 pi n; target CPhase(-2 alpha)."""
    a, U = _resolve(p, np.pi, n, t, const)
    w = a.phi11 + np.pi
    return Composite(zz(w) @ U, reference_gate(GateKind.CPHASE, -2 * a.alpha),
                     {"post": (w, w)}, a)


def compose_ising(p, n: int | None = 0, t: float | None = None,
                  const: PhysConstants = CONST) -> Composite:
    """Z wrappers around one native at phi = pi + 2 pi n; target Ising(alpha + pi)."""
    a, U = _resolve(p, np.pi, n, t, const)
    w = -a.phi_Z
    return Composite(zz(w) @ U, reference_gate(GateKind.ISING, a.alpha + np.pi),
                     {"post": (w, w)}, a)


def givens_swap_target(alpha: float, chi: float) -> np.ndarray:
    return (reference_gate(GateKind.CPHASE, -2 * alpha + np.pi)
            @ reference_gate(GateKind.GIVENS, np.pi / 2 - chi) @ SWAP)


def compose_givens_swap(p, n: int | None = 0, t: float | None = None,
                        const: PhysConstants = CONST) -> Composite:
    """Native at phi = pi/2 + 2 pi n with Z wrappers.

    Target is CPhase(-2 alpha + pi) Givens(pi/2 - chi) SWAP in the printed
    Givens parameterization (the standard Givens rotation by chi).
    """
    a, U = _resolve(p, np.pi / 2, n, t, const)
    w = a.phi11 + np.pi / 2
    return Composite(zz(w) @ U, givens_swap_target(a.alpha, a.chi), {"post": (w, w)}, a)


def swap_rotation_circuit(theta: float, a: NativeAngles, U: np.ndarray,
                          ising: np.ndarray | None = None) -> np.ndarray:
    s = 1.0 if a.chi >= 0 else -1.0
    if ising is None:
        ising = reference_gate(GateKind.ISING, -theta - 2 * a.alpha - 2 * a.phi)
    return zz(-2 * a.phi_Z) @ ising @ U @ zz(s * theta, -s * theta) @ U


def compose_swap_rotation(p, theta: float, n: int | None = 0, t: float | None = None,
                          const: PhysConstants = CONST) -> Composite:
    """SWAP(theta) from two natives with chi = +/- pi/4 and one Ising gate."""
    a, U = _resolve(p, np.pi / 2, n, t, const)
    if abs(abs(a.chi) - np.pi / 4) > 1e-9:
        raise ConstraintError(f"SWAP rotation needs |chi| = pi/4, got {a.chi:.12g}")
    s = 1.0 if a.chi >= 0 else -1.0
    ising = -theta - 2 * a.alpha - 2 * a.phi
    L = swap_rotation_circuit(theta, a, U)
    return Composite(L, reference_gate(GateKind.SWAP_THETA, theta),
                     {"mid": (s * theta, -s * theta), "ising": ising,
                      "post": (-2 * a.phi_Z, -2 * a.phi_Z)}, a)


__all__ = [
    "ExchangeParams", "NativeAngles", "GateKind", "Composite", "SWAP", "I4",
    "J_s", "J_i", "J_j", "exchange_strength", "exchange_hamiltonian", "delta_ij",
    "omega_ij", "native_angles", "native_from_angles", "native_unitary",
    "reference_gate", "compose_cphase", "compose_ising", "compose_givens_swap",
    "compose_swap_rotation", "givens_swap_target", "swap_rotation_circuit", "zz",
]
