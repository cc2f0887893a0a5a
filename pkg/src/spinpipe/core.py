"""Constants, small matrix helpers, fidelities and axis-angle decomposition.

Basis ordering for a single spin is (up, down); ``Z(theta)`` is
``diag(exp(-i theta/2), exp(+i theta/2))``.  Two-spin operators use the
Kronecker ordering {uu, ud, du, dd}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
import scipy.constants as sc

from .errors import DimensionError


@dataclass(frozen=True)
class PhysConstants:
    hbar: float = sc.hbar
    h: float = sc.h
    mu_B: float = sc.physical_constants["Bohr magneton"][0]
    k_B: float = sc.k
    e_charge: float = sc.e
    g_Si: float = 2.0
    eps0: float = sc.epsilon_0
    B0: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "h", "mu_B", "k_B", "e_charge", "g_Si", "eps0", "B0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def with_overrides(self, cfg: dict[str, Any] | None) -> "PhysConstants":
        """Apply a ``{"g_si": ..., "B0_tesla": ...}`` override block."""
        if not cfg:
            return self
        kw = {}
        if "g_si" in cfg:
            kw["g_Si"] = float(cfg["g_si"])
        if "B0_tesla" in cfg:
            kw["B0"] = float(cfg["B0_tesla"])
        return replace(self, **kw)

    @classmethod
    def from_json(cls, text: str) -> "PhysConstants":
        return cls().with_overrides(json.loads(text))

    def zeeman_rate(self, g: float, B: float | None = None) -> float:
        """Angular frequency g mu_B B / hbar."""
        B = self.B0 if B is None else B
        return g * self.mu_B * B / self.hbar


CONST = PhysConstants()

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


def Z(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def X(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def Y(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def dagger(u: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(u, -1, -2))


def is_unitary(u: np.ndarray, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(dagger(u) @ u, np.eye(u.shape[0]), rtol=0, atol=atol))


def expm_hermitian(H: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i H t) for Hermitian ``H`` via eigendecomposition."""
    H = np.asarray(H, dtype=complex)
    H = 0.5 * (H + dagger(H))
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def process_fidelity(u_ideal: np.ndarray, u_real: np.ndarray, average: bool = False):
    """|Tr(U^dag V)|^2 / d^2, or the average gate fidelity when ``average``.

    Accepts stacks of matrices with shape ``(..., d, d)``.
    """
    a = np.asarray(u_ideal)
    b = np.asarray(u_real)
    if a.shape[-2:] != b.shape[-2:] or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    d = a.shape[-1]
    tr = np.einsum("...ij,...ij->...", np.conj(a), b)
    f = np.abs(tr) ** 2
    if average:
        out = (f + d) / (d * d + d)
    else:
        out = f / (d * d)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class AxisAngle:
    n: np.ndarray
    theta: float
    global_phase: float

    def unitary(self) -> np.ndarray:
        ns = sum(c * p for c, p in zip(self.n, PAULIS))
        core = np.cos(self.theta / 2) * I2 + 1j * np.sin(self.theta / 2) * ns
        return np.exp(1j * self.global_phase) * core


def axis_angle_decompose(u: np.ndarray) -> AxisAngle:
    """Write ``u = e^{i g} [cos(theta/2) I + i sin(theta/2) n.sigma]``.

    With this sign the ideal ``X(pi/2)`` reports ``theta = pi/2`` and
    ``n = (-1, 0, 0)``; ``n`` is the negative of the usual rotation axis.
    ``theta`` lies in ``[0, pi]``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DimensionError("axis_angle_decompose needs a 2x2 matrix")
    det = np.linalg.det(u)
    g = 0.5 * np.angle(det)
    v = u * np.exp(-1j * g)
    # v in SU(2): v = c I + i s (m.sigma) with m the reported axis
    c = 0.5 * np.real(np.trace(v))
    if c < -1e-12:
        v = -v
        g += np.pi
        c = -c
    m = np.array([0.5 * np.imag(np.trace(v @ p)) for p in PAULIS])
    s = np.linalg.norm(m)
    g = float(np.angle(np.exp(1j * g)))
    if s < 1e-14:
        return AxisAngle(np.array([0.0, 0.0, 1.0]), 0.0, g)
    theta = 2.0 * np.arctan2(s, c)
    return AxisAngle(m / s, float(theta), g)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b, c, d = q
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))
